#include "tkgmlp/dataset.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "tkgmlp/error.h"

namespace tkgmlp {

std::size_t Dataset::positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1.0));
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.features = features.gather_rows(rows);
  if (!missing.empty()) {
    const std::size_t c = features.cols();
    out.missing.resize(rows.size() * c);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::copy_n(missing.begin() + static_cast<std::ptrdiff_t>(rows[i] * c), c,
                  out.missing.begin() + static_cast<std::ptrdiff_t>(i * c));
    }
  }
  out.feature_names = feature_names;
  out.categorical_names = categorical_names;
  out.categorical.resize(categorical.size());
  for (std::size_t j = 0; j < categorical.size(); ++j) {
    out.categorical[j].reserve(rows.size());
    for (std::size_t r : rows) out.categorical[j].push_back(categorical[j][r]);
  }
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(labels[r]);
  if (!time.empty()) {
    out.time.reserve(rows.size());
    for (std::size_t r : rows) out.time.push_back(time[r]);
  }
  return out;
}

void Dataset::validate() const {
  const std::size_t n = labels.size();
  if (features.rows() != n) {
    throw ValidationError(fmt::format("dataset: {} feature rows vs {} labels",
                                      features.rows(), n));
  }
  if (feature_names.size() != features.cols()) {
    throw ValidationError("dataset: feature name count mismatch");
  }
  if (!missing.empty() && missing.size() != features.size()) {
    throw ValidationError("dataset: missing mask shape mismatch");
  }
  if (!time.empty() && time.size() != n) {
    throw ValidationError("dataset: time column length mismatch");
  }
  if (categorical.size() != categorical_names.size()) {
    throw ValidationError("dataset: categorical name count mismatch");
  }
  for (const auto& col : categorical) {
    if (col.size() != n) throw ValidationError("dataset: categorical column length mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) {
      throw ValidationError(fmt::format("dataset: label {} at row {} not in {{0,1}}",
                                        labels[i], i));
    }
  }
}

namespace {

std::size_t slice_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

}  // namespace

Split chronological_split(const Dataset& ds, std::array<double, 3> fractions) {
  double total = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw ValidationError("chronological_split: fractions must be > 0");
    total += f;
  }
  if (total > 1.0 + 1e-9) {
    throw ValidationError(fmt::format("chronological_split: fractions sum to {}", total));
  }
  const std::size_t n = ds.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (ds.has_time()) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return ds.time[a] < ds.time[b];
    });
  }
  const std::size_t n_train = slice_count(fractions[0], n);
  const std::size_t n_valid = slice_count(fractions[1], n);
  std::size_t n_test = slice_count(fractions[2], n);
  if (std::abs(total - 1.0) <= 1e-9) n_test = n - std::min(n, n_train + n_valid);
  if (n_train == 0 || n_valid == 0 || n_test == 0 || n_train + n_valid + n_test > n) {
    throw ValidationError(fmt::format(
        "chronological_split: {} rows give an empty slice ({}/{}/{})", n, n_train,
        n_valid, n_test));
  }
  const std::span<const std::size_t> idx(order);
  return Split{ds.subset(idx.subspan(0, n_train)),
               ds.subset(idx.subspan(n_train, n_valid)),
               ds.subset(idx.subspan(n_train + n_valid, n_test))};
}

}  // namespace tkgmlp
