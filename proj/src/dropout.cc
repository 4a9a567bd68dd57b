#include "tkgmlp/dropout.h"

#include <cmath>

#include <fmt/format.h>

#include "tkgmlp/error.h"
#include "tkgmlp/random.h"

namespace tkgmlp {

void validate_dropout_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ValidationError(fmt::format("dropout rate {} outside [0, 1)", rate));
  }
}

DropoutResult dropout_apply(const Matrix& x, const DropoutSpec& d) {
  validate_dropout_rate(d.rate);
  if (d.mode == Mode::kInference || d.rate == 0.0) {
    return {x, Matrix(x.rows(), x.cols(), 1.0)};
  }
  Rng rng(d.rng_seed);
  const double keep_scale = 1.0 / (1.0 - d.rate);
  DropoutResult res{Matrix(x.rows(), x.cols()), Matrix(x.rows(), x.cols())};
  const auto in = x.values();
  auto out = res.output.values();
  auto mask = res.mask.values();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double m = uniform01(rng) < d.rate ? 0.0 : keep_scale;
    mask[i] = m;
    out[i] = in[i] * m;
  }
  return res;
}

Matrix dropout_backward(const Matrix& upstream, const Matrix& mask) {
  if (upstream.rows() != mask.rows() || upstream.cols() != mask.cols()) {
    throw ShapeError("dropout_backward: mask shape mismatch");
  }
  Matrix dx(upstream.rows(), upstream.cols());
  const auto g = upstream.values();
  const auto m = mask.values();
  auto out = dx.values();
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] * m[i];
  return dx;
}

}  // namespace tkgmlp
