#include "tkgmlp/csv.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>

#include <fmt/format.h>

#include "tkgmlp/error.h"

namespace tkgmlp {

nlohmann::json CsvSchema::to_json() const {
  nlohmann::json j = {{"label", label}, {"categorical", categorical}, {"ignore", ignore}};
  j["time"] = time ? nlohmann::json(*time) : nlohmann::json(nullptr);
  return j;
}

CsvSchema CsvSchema::from_json(const nlohmann::json& j) {
  CsvSchema s;
  try {
    s.label = j.at("label").get<std::string>();
    if (j.contains("time") && !j.at("time").is_null()) s.time = j.at("time").get<std::string>();
    s.categorical = j.value("categorical", std::vector<std::string>{});
    s.ignore = j.value("ignore", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("csv schema: {}", e.what()));
  }
  return s;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

namespace {

enum class Role { kFeature, kCategorical, kLabel, kTime, kIgnore };

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool is_missing_token(std::string_view s) {
  return s.empty() || s == "NA" || s == "NaN" || s == "nan";
}

bool parse_number(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

Dataset parse_csv(std::istream& in, const CsvSchema& schema, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw IoError(fmt::format("{}: empty file, no header row", source));

  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = std::string(trim(h));
  std::vector<Role> roles(header.size(), Role::kFeature);
  std::optional<std::size_t> label_col;
  std::optional<std::size_t> time_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (std::count(header.begin(), header.end(), header[c]) > 1) {
      throw IoError(fmt::format("{}: duplicate column '{}'", source, header[c]));
    }
    if (header[c] == schema.label) {
      roles[c] = Role::kLabel;
      label_col = c;
    } else if (schema.time && header[c] == *schema.time) {
      roles[c] = Role::kTime;
      time_col = c;
    } else if (contains(schema.categorical, header[c])) {
      roles[c] = Role::kCategorical;
    } else if (contains(schema.ignore, header[c])) {
      roles[c] = Role::kIgnore;
    }
  }
  if (!label_col) {
    throw IoError(fmt::format("{}: label column '{}' not found", source, schema.label));
  }
  if (schema.time && !time_col) {
    throw IoError(fmt::format("{}: time column '{}' not found", source, *schema.time));
  }

  Dataset ds;
  std::vector<std::size_t> feature_cols;
  std::vector<std::size_t> cat_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (roles[c] == Role::kFeature) {
      feature_cols.push_back(c);
      ds.feature_names.push_back(header[c]);
    } else if (roles[c] == Role::kCategorical) {
      cat_cols.push_back(c);
      ds.categorical_names.push_back(header[c]);
    }
  }
  ds.categorical.resize(cat_cols.size());

  std::vector<double> values;
  std::vector<std::uint8_t> missing;
  bool any_missing = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw IoError(fmt::format("{}:{}: expected {} fields, found {}", source, line_no,
                                header.size(), fields.size()));
    }
    const std::string_view label_text = trim(fields[*label_col]);
    double label = 0.0;
    if (is_missing_token(label_text)) {
      throw IoError(fmt::format("{}:{}:{}: missing label", source, line_no, *label_col + 1));
    }
    if (!parse_number(label_text, label) || (label != 0.0 && label != 1.0)) {
      throw IoError(fmt::format("{}:{}:{}: label '{}' is not 0 or 1", source, line_no,
                                *label_col + 1, label_text));
    }
    ds.labels.push_back(label);
    if (time_col) {
      double t = 0.0;
      if (!parse_number(trim(fields[*time_col]), t)) {
        throw IoError(fmt::format("{}:{}:{}: unparseable time '{}'", source, line_no,
                                  *time_col + 1, fields[*time_col]));
      }
      ds.time.push_back(t);
    }
    for (std::size_t c : feature_cols) {
      const std::string_view cell = trim(fields[c]);
      double v = 0.0;
      if (is_missing_token(cell)) {
        values.push_back(0.0);
        missing.push_back(1);
        any_missing = true;
      } else if (parse_number(cell, v)) {
        values.push_back(v);
        missing.push_back(0);
      } else {
        throw IoError(fmt::format("{}:{}:{}: cannot parse '{}' in column '{}'", source,
                                  line_no, c + 1, cell, header[c]));
      }
    }
    for (std::size_t j = 0; j < cat_cols.size(); ++j) {
      ds.categorical[j].emplace_back(trim(fields[cat_cols[j]]));
    }
  }
  ds.features = Matrix(ds.labels.size(), feature_cols.size(), std::move(values));
  if (any_missing) ds.missing = std::move(missing);
  ds.validate();
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return parse_csv(in, schema, path.string());
}

void write_csv(const std::filesystem::path& path, const Dataset& ds,
               const CsvSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  std::vector<std::string> header;
  if (ds.has_time()) header.push_back(schema.time.value_or("time"));
  header.insert(header.end(), ds.feature_names.begin(), ds.feature_names.end());
  header.insert(header.end(), ds.categorical_names.begin(), ds.categorical_names.end());
  header.push_back(schema.label);
  out << fmt::format("{}\n", fmt::join(header, ","));
  std::string row;
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    row.clear();
    if (ds.has_time()) row += format_double(ds.time[r]) + ",";
    for (std::size_t c = 0; c < ds.features.cols(); ++c) {
      if (!ds.is_missing(r, c)) row += format_double(ds.features(r, c));
      row += ',';
    }
    for (const auto& col : ds.categorical) row += col[r] + ",";
    row += ds.labels[r] == 1.0 ? "1" : "0";
    row += '\n';
    out << row;
  }
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

}  // namespace tkgmlp
