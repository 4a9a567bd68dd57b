#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tkgmlp/common.h"
#include "tkgmlp/matrix.h"

namespace tkgmlp {

// Affine map y = xW + b with W stored (in_dim x out_dim).
struct LinearParams {
  Matrix weight;
  std::vector<double> bias;
  Matrix weight_grad;
  std::vector<double> bias_grad;
  bool frozen = false;

  std::size_t in_dim() const { return weight.rows(); }
  std::size_t out_dim() const { return weight.cols(); }

  void zero_grad();
  void append_params(const std::string& prefix, std::vector<ParamView>& out);
};

// Xavier-uniform weight, zero bias.
LinearParams linear_init(std::size_t in_dim, std::size_t out_dim,
                         std::uint64_t seed);
// Wraps explicit weight/bias; gradient buffers are sized to match.
LinearParams linear_from(Matrix weight, std::vector<double> bias);

struct LinearCache {
  Matrix input;
};

Matrix linear_forward(const Matrix& x, const LinearParams& p,
                      LinearCache* cache = nullptr);

// Returns dL/dx and accumulates dL/dW = x^T * upstream, dL/db = column sums
// (skipped when the layer is frozen).
Matrix linear_backward(const Matrix& upstream, const LinearCache& cache,
                       LinearParams& p);

}  // namespace tkgmlp
