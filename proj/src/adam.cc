#include "tkgmlp/adam.h"

#include <cmath>

#include <fmt/format.h>

#include "tkgmlp/error.h"

namespace tkgmlp {

void adam_step(std::span<const ParamView> params, AdamState& state, double lr,
               const AdamConfig& cfg) {
  if (state.m.empty()) {
    for (const ParamView& p : params) {
      state.m.emplace_back(p.value.size(), 0.0);
      state.v.emplace_back(p.value.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) {
    throw ShapeError("adam_step: state was built for a different parameter list");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const ParamView& p = params[k];
    if (p.grad.size() != p.value.size() || state.m[k].size() != p.value.size()) {
      throw ShapeError(fmt::format("adam_step: shape mismatch for {}", p.name));
    }
    for (std::size_t i = 0; i < p.grad.size(); ++i) {
      if (!std::isfinite(p.grad[i])) {
        throw NumericError(fmt::format("adam_step: non-finite gradient {} in {}[{}] at step {}",
                                       p.grad[i], p.name, i, state.t + 1));
      }
    }
  }

  ++state.t;
  const double t = static_cast<double>(state.t);
  const double correct1 = 1.0 - std::pow(cfg.beta1, t);
  const double correct2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const ParamView& p = params[k];
    if (p.frozen) continue;
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[i] / correct1;
      const double v_hat = v[i] / correct2;
      p.value[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

}  // namespace tkgmlp
