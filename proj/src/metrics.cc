#include "tkgmlp/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "tkgmlp/error.h"

namespace tkgmlp {
namespace {

__extension__ typedef unsigned __int128 uint128;

struct Block {
  double score;
  std::uint64_t pos;
  std::uint64_t neg;
};

// Tie blocks in descending score order.
std::vector<Block> tie_blocks(std::span<const double> scores,
                              std::span<const double> labels, std::uint64_t& total_pos,
                              std::uint64_t& total_neg) {
  if (scores.size() != labels.size()) {
    throw ValidationError(fmt::format("metrics: {} scores vs {} labels",
                                      scores.size(), labels.size()));
  }
  total_pos = total_neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1.0) {
      ++total_pos;
    } else if (labels[i] == 0.0) {
      ++total_neg;
    } else {
      throw ValidationError(fmt::format("metrics: label {} at {} not in {{0,1}}",
                                        labels[i], i));
    }
    if (std::isnan(scores[i])) throw ValidationError("metrics: NaN score");
  }
  if (total_pos == 0 || total_neg == 0) {
    throw DegenerateError("metrics: KS/AUC undefined without both classes");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<Block> blocks;
  for (std::size_t idx : order) {
    const bool positive = labels[idx] == 1.0;
    if (blocks.empty() || blocks.back().score != scores[idx]) {
      blocks.push_back({scores[idx], 0, 0});
    }
    (positive ? blocks.back().pos : blocks.back().neg) += 1;
  }
  return blocks;
}

}  // namespace

std::vector<RocPoint> roc_sweep(std::span<const double> scores,
                                std::span<const double> labels) {
  std::uint64_t n_pos = 0;
  std::uint64_t n_neg = 0;
  const auto blocks = tie_blocks(scores, labels, n_pos, n_neg);
  std::vector<RocPoint> roc;
  roc.reserve(blocks.size());
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (const Block& b : blocks) {
    tp += b.pos;
    fp += b.neg;
    roc.push_back({b.score, static_cast<double>(tp) / static_cast<double>(n_pos),
                   static_cast<double>(fp) / static_cast<double>(n_neg)});
  }
  return roc;
}

double ks_statistic(std::span<const double> scores, std::span<const double> labels) {
  double best = 0.0;
  for (const RocPoint& p : roc_sweep(scores, labels)) best = std::max(best, p.tpr - p.fpr);
  return best;
}

double auc_score(std::span<const double> scores, std::span<const double> labels) {
  std::uint64_t n_pos = 0;
  std::uint64_t n_neg = 0;
  const auto blocks = tie_blocks(scores, labels, n_pos, n_neg);
  // Each negative scores 2 per positive strictly above it and 1 per tied one.
  uint128 twice_wins = 0;
  std::uint64_t pos_above = 0;
  for (const Block& b : blocks) {
    twice_wins += static_cast<uint128>(b.neg) * (2 * pos_above + b.pos);
    pos_above += b.pos;
  }
  const auto denom = static_cast<uint128>(2) * n_pos * n_neg;
  return static_cast<double>(twice_wins) / static_cast<double>(denom);
}

MetricReport evaluate_scores(std::span<const double> scores,
                             std::span<const double> labels) {
  MetricReport report;
  report.roc.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  const auto sweep = roc_sweep(scores, labels);
  report.roc.insert(report.roc.end(), sweep.begin(), sweep.end());
  for (const RocPoint& p : report.roc) report.ks = std::max(report.ks, p.tpr - p.fpr);
  report.auc = auc_score(scores, labels);
  for (double y : labels) (y == 1.0 ? report.positives : report.negatives) += 1;
  return report;
}

}  // namespace tkgmlp
