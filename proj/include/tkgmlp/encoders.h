#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tkgmlp/dataset.h"
#include "tkgmlp/matrix.h"

namespace tkgmlp {

// Equal-frequency bin edges b_0 < b_1 < ... < b_n for one feature. Bin i is
// (b_i, b_{i+1}]; b_0 itself belongs to bin 0.
struct BinSpec {
  std::vector<double> boundaries;

  std::size_t n_bins() const { return boundaries.size() - 1; }
  // Index of the bin holding x, clamped to [0, n-1].
  std::size_t bin_of(double x) const;

  friend bool operator==(const BinSpec&, const BinSpec&) = default;
};

// Boundaries at the k/n_bins empirical quantiles (linear interpolation between
// order statistics), b_0 = min and b_n = max. Repeated boundaries are merged,
// so the effective bin count can be smaller than requested. Throws
// DegenerateError when fewer than two distinct values are present.
BinSpec fit_bins(std::span<const double> train_values, std::size_t n_bins);

// i/n + (1/n)(x - b_i)/(b_{i+1} - b_i); 0 below b_0, 1 above b_n.
double qle_encode(double x, const BinSpec& spec);

// e_i = 0 if x < b_i, 1 if x >= b_{i+1}, else the linear fraction.
std::vector<double> ple_encode(double x, const BinSpec& spec);
void ple_encode_into(double x, const BinSpec& spec, std::span<double> out);

// i/n for the bin holding x (0 below range, (n-1)/n above).
double quantile_encode(double x, const BinSpec& spec);

// ln(x_j / g(x)) with g the geometric mean. Throws DomainError on a
// non-positive component.
std::vector<double> clr_encode(std::span<const double> row);

enum class EncoderKind { kQle, kPle, kQuantile, kClr, kStandardize };

std::string_view encoder_kind_name(EncoderKind kind);
EncoderKind parse_encoder_kind(std::string_view name);

// Train-fitted statistics for one numeric feature.
struct FeatureStats {
  double median = 0.0;  // imputation value for missing cells
  bool degenerate = false;
  BinSpec bins;         // binning kinds, when not degenerate
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
  double clr_shift = 0.0;  // added after clamping to [min, max]

  friend bool operator==(const FeatureStats&, const FeatureStats&) = default;
};

// Fitted feature encoding for a whole table: one numeric operator applied to
// every numeric column, plus one-hot for categorical columns (train-observed
// categories in sorted order, then an unknown slot).
//
// Degenerate numeric columns (fewer than two distinct train values) are
// dropped by the binning kinds and emitted as zeros by kStandardize. kClr
// clamps each value into its train range, applies the fitted shift so every
// component is >= 1, and takes the centered log ratio across the row.
class EncoderSpec {
 public:
  static EncoderSpec fit(const Dataset& train, EncoderKind kind, std::size_t n_bins);

  Matrix transform(const Dataset& ds) const;
  std::size_t output_dim() const;
  std::vector<std::string> output_names() const;

  EncoderKind kind() const { return kind_; }
  std::size_t requested_bins() const { return n_bins_; }
  const std::vector<FeatureStats>& numeric() const { return numeric_; }
  const std::vector<std::vector<std::string>>& categories() const { return categories_; }

  nlohmann::json to_json() const;
  static EncoderSpec from_json(const nlohmann::json& j);

  friend bool operator==(const EncoderSpec&, const EncoderSpec&) = default;

 private:
  EncoderKind kind_ = EncoderKind::kQle;
  std::size_t n_bins_ = 64;
  std::vector<std::string> feature_names_;
  std::vector<FeatureStats> numeric_;
  std::vector<std::string> categorical_names_;
  std::vector<std::vector<std::string>> categories_;
};

// Baselines, exposed for direct use and tests.
struct StandardizeStats {
  double mean = 0.0;
  double stddev = 0.0;
};
StandardizeStats fit_standardize(std::span<const double> values);
double standardize(double x, const StandardizeStats& s);  // 0 when stddev == 0

// Length categories.size() + 1; the last slot flags an unseen category.
std::vector<double> one_hot(std::string_view value,
                            const std::vector<std::string>& categories);

}  // namespace tkgmlp
