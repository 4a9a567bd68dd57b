#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tkgmlp/matrix.h"

namespace tkgmlp {

// A labelled table. Numeric features live in `features`; a missing cell holds
// 0.0 there and is flagged in `missing` (row-major, same shape). Categorical
// columns are kept as strings for one-hot encoding.
struct Dataset {
  Matrix features;
  std::vector<std::uint8_t> missing;  // empty when nothing is missing
  std::vector<std::string> feature_names;
  std::vector<std::vector<std::string>> categorical;  // [column][row]
  std::vector<std::string> categorical_names;
  std::vector<double> labels;  // 0/1
  std::vector<double> time;    // empty when there is no time column

  std::size_t rows() const { return labels.size(); }
  bool has_time() const { return !time.empty(); }
  bool is_missing(std::size_t r, std::size_t c) const {
    return !missing.empty() && missing[r * features.cols() + c] != 0;
  }
  std::size_t positives() const;

  // Rows picked by index, in the given order.
  Dataset subset(std::span<const std::size_t> rows) const;
  // Throws ValidationError if the fields disagree on row count or labels are
  // not binary.
  void validate() const;
};

struct Split {
  Dataset train;
  Dataset valid;
  Dataset test;
};

// Stable-sorts rows by time (row order when there is no time column) and
// cuts contiguous train | valid | test slices. Fractions must be positive
// and sum to at most 1; when they sum to 1 the test slice takes the
// remainder. Throws ValidationError if any slice comes out empty.
Split chronological_split(const Dataset& ds, std::array<double, 3> fractions);

}  // namespace tkgmlp
