#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tkgmlp/common.h"

namespace tkgmlp {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment buffers, one pair per parameter tensor, in the order
// the parameters are presented to adam_step.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t t = 0;
};

// One Adam update with bias correction; t is incremented before it is used.
// Frozen parameters are skipped. Throws NumericError (naming the tensor and
// index) on a non-finite gradient, before anything is modified.
void adam_step(std::span<const ParamView> params, AdamState& state, double lr,
               const AdamConfig& cfg = {});

}  // namespace tkgmlp
