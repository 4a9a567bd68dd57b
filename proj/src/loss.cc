#include "tkgmlp/loss.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "tkgmlp/error.h"

namespace tkgmlp {
namespace {

void check_inputs(const Matrix& probs, const Matrix& labels) {
  if (probs.rows() != labels.rows() || probs.cols() != labels.cols()) {
    throw ShapeError("bce: probs and labels differ in shape");
  }
  if (probs.empty()) throw ShapeError("bce: empty batch");
  const auto y = labels.values();
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) {
      throw ValidationError(fmt::format("bce: label {} at index {} not in {{0,1}}",
                                        y[i], i));
    }
  }
}

}  // namespace

LossResult bce_loss(const Matrix& probs, const Matrix& labels) {
  check_inputs(probs, labels);
  const auto p = probs.values();
  const auto y = labels.values();
  const double n = static_cast<double>(p.size());
  LossResult res{0.0, Matrix(probs.rows(), probs.cols())};
  auto g = res.grad.values();
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pc = std::clamp(p[i], kProbClamp, 1.0 - kProbClamp);
    total -= y[i] * std::log(pc) + (1.0 - y[i]) * std::log1p(-pc);
    g[i] = (-y[i] / pc + (1.0 - y[i]) / (1.0 - pc)) / n;
  }
  res.loss = total / n;
  return res;
}

Matrix bce_logit_grad(const Matrix& probs, const Matrix& labels) {
  check_inputs(probs, labels);
  Matrix g(probs.rows(), probs.cols());
  const auto p = probs.values();
  const auto y = labels.values();
  const double n = static_cast<double>(p.size());
  auto out = g.values();
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = (p[i] - y[i]) / n;
  return g;
}

}  // namespace tkgmlp
