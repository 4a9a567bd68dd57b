#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tkgmlp/common.h"
#include "tkgmlp/matrix.h"
#include "tkgmlp/spline.h"

namespace tkgmlp {

// Kolmogorov-Arnold layer. Every (output q, input p) edge carries
//   phi_qp(x) = base_weight[q][p] * silu(x)
//             + spline_weight[q][p] * sum_i coeff[q][p][i] * B_i(x)
// and output q sums its incoming edges. All edges share one knot vector.
struct KanLayerParams {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  KnotVector knots;
  std::vector<double> spline_coeffs;  // (out, in, n_basis) row-major
  Matrix base_weight;                 // (out x in)
  Matrix spline_weight;               // (out x in)
  std::vector<double> spline_coeffs_grad;
  Matrix base_weight_grad;
  Matrix spline_weight_grad;
  bool frozen = false;

  std::size_t n_basis() const { return knots.n_basis(); }
  double& coeff(std::size_t q, std::size_t p, std::size_t i) {
    return spline_coeffs[(q * in_dim + p) * n_basis() + i];
  }
  double coeff(std::size_t q, std::size_t p, std::size_t i) const {
    return spline_coeffs[(q * in_dim + p) * n_basis() + i];
  }
  std::size_t parameter_count() const;

  void zero_grad();
  void append_params(const std::string& prefix, std::vector<ParamView>& out);
};

// base_weight ~ Xavier-uniform over (in, out); spline_weight = 1;
// coefficients ~ U(-0.05, 0.05) / grid_size.
KanLayerParams kan_init(std::size_t in_dim, std::size_t out_dim,
                        std::size_t grid_size, std::size_t degree, double lo,
                        double hi, std::uint64_t seed);

struct KanCache {
  Matrix input;
  // Per row, per input p, a block of (1 + n_basis) features:
  // [silu(x), B_0(x), ..., B_{nb-1}(x)].
  Matrix features;
  // Same layout with the derivatives [silu'(x), B_0'(x), ...].
  Matrix feature_derivs;
};

// The basis expansion is computed once per batch and contracted with a
// combined ((in * (1 + n_basis)) x out) weight matrix.
Matrix kan_forward(const Matrix& x, const KanLayerParams& p,
                   KanCache* cache = nullptr);

// Returns dL/dx and accumulates gradients for base_weight, spline_weight and
// spline_coeffs (unless frozen).
Matrix kan_backward(const Matrix& upstream, const KanCache& cache,
                    KanLayerParams& p);

}  // namespace tkgmlp
