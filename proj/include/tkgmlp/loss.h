#pragma once

#include "tkgmlp/matrix.h"

namespace tkgmlp {

inline constexpr double kProbClamp = 1e-7;

struct LossResult {
  double loss = 0.0;
  Matrix grad;  // dL/dprobs, same shape as probs
};

// Mean binary cross-entropy. Probabilities are clamped to
// [kProbClamp, 1 - kProbClamp]; labels must be exactly 0 or 1.
LossResult bce_loss(const Matrix& probs, const Matrix& labels);

// Gradient of the same loss with respect to the pre-sigmoid logits,
// (sigmoid(z) - y) / n. Avoids the vanishing product of a clamped dL/dp and
// a saturated sigmoid.
Matrix bce_logit_grad(const Matrix& probs, const Matrix& labels);

}  // namespace tkgmlp
