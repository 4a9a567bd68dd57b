#include "tkgmlp/init.h"

#include <cmath>

#include "tkgmlp/error.h"
#include "tkgmlp/random.h"

namespace tkgmlp {

double xavier_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Matrix init_params(std::size_t rows, std::size_t cols, InitScheme scheme,
                   std::uint64_t seed, double scale) {
  if (rows == 0 || cols == 0) throw ShapeError("init_params: zero dimension");
  Matrix m(rows, cols);
  switch (scheme) {
    case InitScheme::kZeros:
      return m;
    case InitScheme::kOnes:
      m.fill(1.0);
      return m;
    case InitScheme::kXavierUniform:
      scale = xavier_bound(rows, cols);
      break;
    case InitScheme::kUniform:
      break;
  }
  Rng rng(seed);
  for (double& v : m.values()) v = (2.0 * uniform01(rng) - 1.0) * scale;
  return m;
}

}  // namespace tkgmlp
