#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tkgmlp/dataset.h"
#include "tkgmlp/metrics.h"

namespace tkgmlp {

enum class Family { kGaussian, kExponential, kBeta, kZip };

// One synthetic column. Parameter meaning by family:
//   Gaussian    (p1 = mu, p2 = sigma)
//   Exponential (p1 = beta, the scale; p2 unused)
//   Beta        (p1 = alpha, p2 = beta)
//   ZIP         (p1 = pi, the excess-zero probability; p2 = lambda)
struct SyntheticColumnSpec {
  Family family = Family::kGaussian;
  double p1 = 0.0;
  double p2 = 1.0;

  static SyntheticColumnSpec gaussian(double mu, double sigma);
  static SyntheticColumnSpec exponential(double beta);
  static SyntheticColumnSpec beta(double alpha, double beta);
  static SyntheticColumnSpec zip(double pi, double lambda);

  void validate() const;
  double mean() const;
  double stddev() const;
  std::string name() const;
};

// Draws `n` values from one column spec.
std::vector<double> sample_column(const SyntheticColumnSpec& spec, std::size_t n,
                                  std::uint64_t seed);

enum class Transform { kTanh, kSquare, kSoftStep };

struct LabelTerm {
  std::size_t column = 0;
  Transform transform = Transform::kTanh;
  double weight = 0.0;
};

// y ~ Bernoulli(sigmoid(intercept + sum_k weight_k * f_k(z_column_k))) where z
// is the column standardized by its analytic mean and standard deviation and
// f is tanh(z), tanh(z)^2 or sigmoid(4(z - 0.5)).
struct SyntheticLabelModel {
  std::vector<LabelTerm> terms;
  double intercept = 0.0;

  double logit(std::span<const double> row,
               const std::vector<SyntheticColumnSpec>& columns) const;
};

struct SyntheticTaskSpec {
  std::vector<SyntheticColumnSpec> columns;
  double prevalence = 0.0047;
  std::size_t active_columns = 8;
  double weight_scale = 1.5;
  std::uint64_t seed = 42;

  // 32 columns, 8 per family: Gaussian(0,1), Exponential(1), Beta(0.5,0.5),
  // ZIP(pi=0.3, lambda=50); prevalence 0.0047.
  static SyntheticTaskSpec desk_tiny(std::uint64_t seed);
  // 12 ZIP columns (pi from 0.2 to 0.75, lambda=50) and 4 Gaussian columns.
  static SyntheticTaskSpec zip_heavy(std::uint64_t seed);

  void validate() const;
  nlohmann::json to_json() const;
  static SyntheticTaskSpec from_json(const nlohmann::json& j);
};

struct SyntheticData {
  Dataset dataset;                  // time column = row index
  std::vector<double> oracle_probs; // true p(y=1 | x) per row
  SyntheticLabelModel label_model;
};

// Columns are sampled independently with per-column derived seeds. The
// intercept is found by bisection so that the mean true probability over the
// generated rows equals the target prevalence.
SyntheticData synth_generate(const SyntheticTaskSpec& spec, std::size_t n_rows);

// KS/AUC of the true conditional probability used as the score.
MetricReport bayes_metrics(std::span<const double> oracle_probs,
                           std::span<const double> labels);

}  // namespace tkgmlp
