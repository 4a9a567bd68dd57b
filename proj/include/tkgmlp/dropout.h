#pragma once

#include <cstdint>

#include "tkgmlp/common.h"
#include "tkgmlp/matrix.h"

namespace tkgmlp {

struct DropoutSpec {
  double rate = 0.0;  // in [0, 1)
  std::uint64_t rng_seed = 0;
  Mode mode = Mode::kTrain;
};

struct DropoutResult {
  Matrix output;
  // Per-entry multiplier: 0 for dropped entries, 1/(1-rate) for survivors,
  // all ones when the layer is an identity.
  Matrix mask;
};

// Inverted dropout. Mask entries are drawn from an engine seeded with
// d.rng_seed, so the same spec yields the same mask.
DropoutResult dropout_apply(const Matrix& x, const DropoutSpec& d);

Matrix dropout_backward(const Matrix& upstream, const Matrix& mask);

void validate_dropout_rate(double rate);

}  // namespace tkgmlp
