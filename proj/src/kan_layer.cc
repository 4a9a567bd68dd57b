#include "tkgmlp/kan_layer.h"

#include <algorithm>

#include <fmt/format.h>

#include "tkgmlp/activations.h"
#include "tkgmlp/error.h"
#include "tkgmlp/init.h"
#include "tkgmlp/random.h"

namespace tkgmlp {
namespace {

// Combined weight: row p*(1+nb) holds base_weight[.][p], the following nb
// rows hold spline_weight[q][p] * coeff[q][p][i].
Matrix combined_weight(const KanLayerParams& p) {
  const std::size_t nb = p.n_basis();
  const std::size_t block = nb + 1;
  Matrix w(p.in_dim * block, p.out_dim);
  for (std::size_t q = 0; q < p.out_dim; ++q) {
    for (std::size_t in = 0; in < p.in_dim; ++in) {
      w(in * block, q) = p.base_weight(q, in);
      const double ws = p.spline_weight(q, in);
      for (std::size_t i = 0; i < nb; ++i) w(in * block + 1 + i, q) = ws * p.coeff(q, in, i);
    }
  }
  return w;
}

}  // namespace

std::size_t KanLayerParams::parameter_count() const {
  return spline_coeffs.size() + base_weight.size() + spline_weight.size();
}

void KanLayerParams::zero_grad() {
  std::fill(spline_coeffs_grad.begin(), spline_coeffs_grad.end(), 0.0);
  base_weight_grad.fill(0.0);
  spline_weight_grad.fill(0.0);
}

void KanLayerParams::append_params(const std::string& prefix,
                                   std::vector<ParamView>& out) {
  out.push_back({prefix + ".base_weight", base_weight.values(),
                 base_weight_grad.values(), frozen,
                 {base_weight.rows(), base_weight.cols()}});
  out.push_back({prefix + ".spline_weight", spline_weight.values(),
                 spline_weight_grad.values(), frozen,
                 {spline_weight.rows(), spline_weight.cols()}});
  out.push_back({prefix + ".spline_coeffs", spline_coeffs, spline_coeffs_grad, frozen,
                 {out_dim, in_dim, knots.n_basis()}});
}

KanLayerParams kan_init(std::size_t in_dim, std::size_t out_dim,
                        std::size_t grid_size, std::size_t degree, double lo,
                        double hi, std::uint64_t seed) {
  if (in_dim == 0 || out_dim == 0) throw ShapeError("kan_init: zero dimension");
  KanLayerParams p{.in_dim = in_dim,
                   .out_dim = out_dim,
                   .knots = build_knots(grid_size, degree, lo, hi),
                   .spline_coeffs = {},
                   .base_weight = Matrix(out_dim, in_dim),
                   .spline_weight = Matrix(out_dim, in_dim),
                   .spline_coeffs_grad = {},
                   .base_weight_grad = Matrix(out_dim, in_dim),
                   .spline_weight_grad = Matrix(out_dim, in_dim)};
  // Xavier over the (in, out) fans, stored transposed as (out x in).
  p.base_weight = init_params(in_dim, out_dim, InitScheme::kXavierUniform,
                              derive_seed(seed, 0))
                      .transposed();
  p.spline_weight = Matrix(out_dim, in_dim, 1.0);
  const std::size_t nb = p.n_basis();
  p.spline_coeffs.resize(out_dim * in_dim * nb);
  Rng rng(derive_seed(seed, 1));
  const double scale = 0.1 / static_cast<double>(grid_size);
  for (double& c : p.spline_coeffs) c = (uniform01(rng) - 0.5) * scale;

  p.spline_coeffs_grad.assign(p.spline_coeffs.size(), 0.0);
  return p;
}

Matrix kan_forward(const Matrix& x, const KanLayerParams& p, KanCache* cache) {
  if (x.cols() != p.in_dim) {
    throw ShapeError(fmt::format("kan_forward: input has {} cols, layer expects {}",
                                 x.cols(), p.in_dim));
  }
  const std::size_t nb = p.n_basis();
  const std::size_t block = nb + 1;
  Matrix features(x.rows(), p.in_dim * block);
  Matrix derivs;
  if (cache) derivs = Matrix(x.rows(), p.in_dim * block);
  std::vector<double> scratch(p.knots.knots().size());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto f_row = features.row(r);
    for (std::size_t in = 0; in < p.in_dim; ++in) {
      const double u = x(r, in);
      auto f = f_row.subspan(in * block, block);
      f[0] = silu(u);
      if (cache) {
        auto d = derivs.row(r).subspan(in * block, block);
        d[0] = silu_derivative(u);
        bspline_eval(u, p.knots, f.subspan(1), d.subspan(1), scratch);
      } else {
        bspline_eval(u, p.knots, f.subspan(1), {}, scratch);
      }
    }
  }
  Matrix y = matmul(features, combined_weight(p));
  if (cache) {
    cache->input = x;
    cache->features = std::move(features);
    cache->feature_derivs = std::move(derivs);
  }
  return y;
}

Matrix kan_backward(const Matrix& upstream, const KanCache& cache,
                    KanLayerParams& p) {
  const std::size_t nb = p.n_basis();
  const std::size_t block = nb + 1;
  if (upstream.cols() != p.out_dim || upstream.rows() != cache.input.rows() ||
      cache.input.cols() != p.in_dim || cache.features.cols() != p.in_dim * block ||
      cache.feature_derivs.rows() != cache.input.rows()) {
    throw ShapeError("kan_backward: stale cache");
  }
  const Matrix w = combined_weight(p);

  if (!p.frozen) {
    Matrix dw(w.rows(), w.cols());
    matmul_tn_accumulate(cache.features, upstream, dw);
    for (std::size_t q = 0; q < p.out_dim; ++q) {
      for (std::size_t in = 0; in < p.in_dim; ++in) {
        p.base_weight_grad(q, in) += dw(in * block, q);
        const double ws = p.spline_weight(q, in);
        double dws = 0.0;
        double* dc = &p.spline_coeffs_grad[(q * p.in_dim + in) * nb];
        for (std::size_t i = 0; i < nb; ++i) {
          const double g = dw(in * block + 1 + i, q);
          dws += p.coeff(q, in, i) * g;
          dc[i] += ws * g;
        }
        p.spline_weight_grad(q, in) += dws;
      }
    }
  }

  const Matrix dfeatures = matmul_nt(upstream, w);
  Matrix dx(cache.input.rows(), p.in_dim);
  for (std::size_t r = 0; r < dx.rows(); ++r) {
    const auto g = dfeatures.row(r);
    const auto d = cache.feature_derivs.row(r);
    for (std::size_t in = 0; in < p.in_dim; ++in) {
      double acc = 0.0;
      for (std::size_t j = in * block; j < (in + 1) * block; ++j) acc += g[j] * d[j];
      dx(r, in) = acc;
    }
  }
  return dx;
}

}  // namespace tkgmlp
