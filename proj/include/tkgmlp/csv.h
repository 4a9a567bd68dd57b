#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tkgmlp/dataset.h"

namespace tkgmlp {

// Column roles for a CSV table. Every column not named here is a numeric
// feature.
struct CsvSchema {
  std::string label = "label";
  std::optional<std::string> time;
  std::vector<std::string> categorical;
  std::vector<std::string> ignore;

  nlohmann::json to_json() const;
  static CsvSchema from_json(const nlohmann::json& j);
};

// Header row required. Empty, "NA", "NaN" and "nan" numeric cells are
// recorded in the missing mask. Errors carry 1-based line and column
// coordinates: unparseable cell, missing/non-binary label, ragged row, empty
// file (all IoError).
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);
Dataset parse_csv(std::istream& in, const CsvSchema& schema,
                  std::string_view source = "<stream>");

// Columns: time (if present), numeric features, categorical, label. Numbers
// use the shortest round-trip representation; missing cells are left empty.
void write_csv(const std::filesystem::path& path, const Dataset& ds,
               const CsvSchema& schema);

// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

// Splits one CSV record (double-quoted fields with "" escapes supported).
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace tkgmlp
