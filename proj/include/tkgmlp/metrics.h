#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace tkgmlp {

struct RocPoint {
  double threshold = 0.0;  // scores >= threshold are called positive
  double tpr = 0.0;
  double fpr = 0.0;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct MetricReport {
  double ks = 0.0;
  double auc = 0.0;
  // Origin (threshold +inf, 0, 0) followed by the roc_sweep points.
  std::vector<RocPoint> roc;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

// Sorts by score descending (stable on original index) and emits one point
// per block of tied scores, after the block is absorbed. The last point is
// always (min score, 1, 1). Labels must be 0/1 and both classes present,
// otherwise DegenerateError / ValidationError.
std::vector<RocPoint> roc_sweep(std::span<const double> scores,
                                std::span<const double> labels);

// max(TPR - FPR) over the sweep (the origin contributes 0).
double ks_statistic(std::span<const double> scores, std::span<const double> labels);

// Mann-Whitney statistic with ties counted as 1/2. Computed from tie-block
// counts as an exact integer numerator over 2*P*N.
double auc_score(std::span<const double> scores, std::span<const double> labels);

MetricReport evaluate_scores(std::span<const double> scores,
                             std::span<const double> labels);

}  // namespace tkgmlp
