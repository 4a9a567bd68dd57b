#include "tkgmlp/linear.h"

#include <algorithm>

#include <fmt/format.h>

#include "tkgmlp/error.h"
#include "tkgmlp/init.h"

namespace tkgmlp {

void LinearParams::zero_grad() {
  weight_grad.fill(0.0);
  std::fill(bias_grad.begin(), bias_grad.end(), 0.0);
}

void LinearParams::append_params(const std::string& prefix,
                                 std::vector<ParamView>& out) {
  out.push_back({prefix + ".weight", weight.values(), weight_grad.values(), frozen,
                 {weight.rows(), weight.cols()}});
  out.push_back({prefix + ".bias", bias, bias_grad, frozen, {bias.size()}});
}

LinearParams linear_init(std::size_t in_dim, std::size_t out_dim,
                         std::uint64_t seed) {
  return linear_from(init_params(in_dim, out_dim, InitScheme::kXavierUniform, seed),
                     std::vector<double>(out_dim, 0.0));
}

LinearParams linear_from(Matrix weight, std::vector<double> bias) {
  if (bias.size() != weight.cols()) {
    throw ShapeError(fmt::format("linear: bias length {} != out_dim {}",
                                 bias.size(), weight.cols()));
  }
  LinearParams p;
  p.weight_grad = Matrix(weight.rows(), weight.cols());
  p.bias_grad.assign(bias.size(), 0.0);
  p.weight = std::move(weight);
  p.bias = std::move(bias);
  return p;
}

Matrix linear_forward(const Matrix& x, const LinearParams& p, LinearCache* cache) {
  if (x.cols() != p.in_dim()) {
    throw ShapeError(fmt::format("linear_forward: input has {} cols, layer expects {}",
                                 x.cols(), p.in_dim()));
  }
  Matrix y(x.rows(), p.out_dim());
  for (std::size_t r = 0; r < y.rows(); ++r) {
    std::copy(p.bias.begin(), p.bias.end(), y.row(r).begin());
  }
  matmul_accumulate(x, p.weight, y);
  if (cache) cache->input = x;
  return y;
}

Matrix linear_backward(const Matrix& upstream, const LinearCache& cache,
                       LinearParams& p) {
  if (upstream.cols() != p.out_dim() || upstream.rows() != cache.input.rows() ||
      cache.input.cols() != p.in_dim()) {
    throw ShapeError("linear_backward: cache does not match upstream/params");
  }
  if (!p.frozen) {
    matmul_tn_accumulate(cache.input, upstream, p.weight_grad);
    column_sums_accumulate(upstream, p.bias_grad);
  }
  return matmul_nt(upstream, p.weight);
}

}  // namespace tkgmlp
