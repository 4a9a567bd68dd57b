#include "tkgmlp/activations.h"

#include <cmath>

namespace tkgmlp {

double sigmoid(double x) {
  // Branch keeps exp() from overflowing for large |x|.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double silu(double x) { return x * sigmoid(x); }

double silu_derivative(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

}  // namespace tkgmlp
