#include "tkgmlp/gmlp_block.h"

#include <fmt/format.h>

#include "tkgmlp/activations.h"
#include "tkgmlp/error.h"
#include "tkgmlp/random.h"

namespace tkgmlp {

std::size_t GmlpBlockParams::parameter_count() const {
  return 2 * bn.dim() + gate.weight.size() + gate.bias.size() +
         value.weight.size() + value.bias.size();
}

void GmlpBlockParams::set_frozen(bool f) {
  frozen = f;
  bn.frozen = f;
  gate.frozen = f;
  value.frozen = f;
}

void GmlpBlockParams::zero_grad() {
  bn.zero_grad();
  gate.zero_grad();
  value.zero_grad();
}

void GmlpBlockParams::append_params(const std::string& prefix,
                                    std::vector<ParamView>& out) {
  bn.append_params(prefix + ".bn", out);
  gate.append_params(prefix + ".gate", out);
  value.append_params(prefix + ".value", out);
}

GmlpBlockParams gmlp_block_init(std::size_t in_dim, std::size_t hidden_dim,
                                double dropout_rate, std::uint64_t seed) {
  validate_dropout_rate(dropout_rate);
  GmlpBlockParams p;
  p.bn = batchnorm_init(in_dim);
  p.gate = linear_init(in_dim, hidden_dim, derive_seed(seed, 0));
  p.value = linear_init(in_dim, hidden_dim, derive_seed(seed, 1));
  p.dropout_rate = dropout_rate;
  return p;
}

Matrix swiglu_gate(const Matrix& x, const GmlpBlockParams& p) {
  Matrix g = linear_forward(x, p.gate);
  for (double& v : g.values()) v = silu(v);
  return g;
}

Matrix swiglu_value(const Matrix& x, const GmlpBlockParams& p) {
  return linear_forward(x, p.value);
}

Matrix swiglu(const Matrix& x, const GmlpBlockParams& p, SwigluCache* cache) {
  if (p.gate.out_dim() != p.value.out_dim() || p.gate.in_dim() != p.value.in_dim()) {
    throw ShapeError("swiglu: gate and value branches differ in shape");
  }
  Matrix pre = linear_forward(x, p.gate);
  Matrix val = linear_forward(x, p.value);
  Matrix out(pre.rows(), pre.cols());
  const auto a = pre.values();
  const auto b = val.values();
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = silu(a[i]) * b[i];
  if (cache) {
    cache->input.input = x;
    cache->gate_pre = std::move(pre);
    cache->value_out = std::move(val);
  }
  return out;
}

Matrix swiglu_backward(const Matrix& upstream, const SwigluCache& cache,
                       GmlpBlockParams& p) {
  if (upstream.rows() != cache.gate_pre.rows() ||
      upstream.cols() != cache.gate_pre.cols()) {
    throw ShapeError("swiglu_backward: stale cache");
  }
  Matrix d_pre(upstream.rows(), upstream.cols());
  Matrix d_val(upstream.rows(), upstream.cols());
  const auto g = upstream.values();
  const auto a = cache.gate_pre.values();
  const auto b = cache.value_out.values();
  auto dp = d_pre.values();
  auto dv = d_val.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    dp[i] = g[i] * b[i] * silu_derivative(a[i]);
    dv[i] = g[i] * silu(a[i]);
  }
  Matrix dx = linear_backward(d_pre, cache.input, p.gate);
  const Matrix dx_val = linear_backward(d_val, cache.input, p.value);
  auto o = dx.values();
  const auto ov = dx_val.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += ov[i];
  return dx;
}

Matrix gmlp_block_forward(const Matrix& x, GmlpBlockParams& p, Mode mode,
                          std::uint64_t dropout_seed, GmlpBlockCache* cache) {
  if (x.cols() != p.in_dim()) {
    throw ShapeError(fmt::format("gmlp_block: input has {} cols, block expects {}",
                                 x.cols(), p.in_dim()));
  }
  p.bn.mode = mode;
  Matrix normed = batchnorm_apply(x, p.bn, cache ? &cache->bn : nullptr);
  Matrix gated = swiglu(normed, p, cache ? &cache->swiglu : nullptr);
  DropoutResult dropped =
      dropout_apply(gated, DropoutSpec{p.dropout_rate, dropout_seed, mode});
  if (cache) {
    cache->mode = mode;
    cache->dropout_mask = std::move(dropped.mask);
  }
  return std::move(dropped.output);
}

Matrix gmlp_block_backward(const Matrix& upstream, const GmlpBlockCache& cache,
                           GmlpBlockParams& p) {
  const Matrix d_gated = dropout_backward(upstream, cache.dropout_mask);
  const Matrix d_normed = swiglu_backward(d_gated, cache.swiglu, p);
  return batchnorm_backward(d_normed, cache.bn, p.bn);
}

}  // namespace tkgmlp
