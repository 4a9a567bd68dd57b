#include "tkgmlp/batch_norm.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "tkgmlp/error.h"

namespace tkgmlp {

void BatchNormState::zero_grad() {
  std::fill(gamma_grad.begin(), gamma_grad.end(), 0.0);
  std::fill(beta_grad.begin(), beta_grad.end(), 0.0);
}

void BatchNormState::append_params(const std::string& prefix,
                                   std::vector<ParamView>& out) {
  out.push_back({prefix + ".gamma", gamma, gamma_grad, frozen, {gamma.size()}});
  out.push_back({prefix + ".beta", beta, beta_grad, frozen, {beta.size()}});
}

BatchNormState batchnorm_init(std::size_t dim, double momentum, double epsilon) {
  if (!(momentum > 0.0 && momentum < 1.0)) {
    throw ValidationError("batchnorm: momentum must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw ValidationError("batchnorm: epsilon must be > 0");
  BatchNormState s;
  s.gamma.assign(dim, 1.0);
  s.beta.assign(dim, 0.0);
  s.running_mean.assign(dim, 0.0);
  s.running_var.assign(dim, 1.0);
  s.gamma_grad.assign(dim, 0.0);
  s.beta_grad.assign(dim, 0.0);
  s.momentum = momentum;
  s.epsilon = epsilon;
  return s;
}

Matrix batchnorm_apply(const Matrix& x, BatchNormState& s, BatchNormCache* cache) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (d != s.dim()) {
    throw ShapeError(fmt::format("batchnorm: input has {} cols, state has {}", d,
                                 s.dim()));
  }
  std::vector<double> mean(d, 0.0);
  std::vector<double> var(d, 0.0);
  if (s.mode == Mode::kTrain) {
    if (n < 2) throw DegenerateError("batchnorm: training batch needs >= 2 rows");
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = x.row(r);
      for (std::size_t c = 0; c < d; ++c) mean[c] += row[c];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = x.row(r);
      for (std::size_t c = 0; c < d; ++c) {
        const double dev = row[c] - mean[c];
        var[c] += dev * dev;
      }
    }
    const double unbias = static_cast<double>(n) / static_cast<double>(n - 1);
    for (std::size_t c = 0; c < d; ++c) {
      var[c] /= static_cast<double>(n);
      s.running_mean[c] = (1.0 - s.momentum) * s.running_mean[c] + s.momentum * mean[c];
      s.running_var[c] =
          (1.0 - s.momentum) * s.running_var[c] + s.momentum * var[c] * unbias;
    }
  } else {
    mean = s.running_mean;
    var = s.running_var;
  }

  std::vector<double> inv_std(d);
  for (std::size_t c = 0; c < d; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + s.epsilon);

  Matrix y(n, d);
  Matrix normalized;
  if (cache) normalized = Matrix(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    const auto in = x.row(r);
    auto out = y.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      const double xh = (in[c] - mean[c]) * inv_std[c];
      out[c] = s.gamma[c] * xh + s.beta[c];
      if (cache) normalized(r, c) = xh;
    }
  }
  if (cache) {
    cache->mode = s.mode;
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Matrix batchnorm_backward(const Matrix& upstream, const BatchNormCache& cache,
                          BatchNormState& s) {
  const std::size_t n = upstream.rows();
  const std::size_t d = upstream.cols();
  if (d != s.dim() || cache.normalized.rows() != n || cache.normalized.cols() != d) {
    throw ShapeError("batchnorm_backward: stale cache");
  }
  std::vector<double> sum_dy(d, 0.0);
  std::vector<double> sum_dy_xh(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto g = upstream.row(r);
    const auto xh = cache.normalized.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      sum_dy[c] += g[c];
      sum_dy_xh[c] += g[c] * xh[c];
    }
  }
  if (!s.frozen) {
    for (std::size_t c = 0; c < d; ++c) {
      s.gamma_grad[c] += sum_dy_xh[c];
      s.beta_grad[c] += sum_dy[c];
    }
  }

  Matrix dx(n, d);
  if (cache.mode == Mode::kInference) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        dx(r, c) = upstream(r, c) * s.gamma[c] * cache.inv_std[c];
      }
    }
    return dx;
  }
  // dx = gamma * inv_std / N * (N*dy - sum(dy) - x_hat * sum(dy * x_hat))
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto g = upstream.row(r);
    const auto xh = cache.normalized.row(r);
    auto out = dx.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      out[c] = s.gamma[c] * cache.inv_std[c] * inv_n *
               (static_cast<double>(n) * g[c] - sum_dy[c] - xh[c] * sum_dy_xh[c]);
    }
  }
  return dx;
}

}  // namespace tkgmlp
