#include "tkgmlp/spline.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "tkgmlp/error.h"

namespace tkgmlp {

KnotVector::KnotVector(std::vector<double> knots, std::size_t degree)
    : knots_(std::move(knots)), degree_(degree) {
  if (knots_.size() < degree_ + 2) {
    throw DomainError(fmt::format("knot vector of {} knots cannot carry degree {}",
                                  knots_.size(), degree_));
  }
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i])) throw DomainError("non-finite knot");
    if (i > 0 && knots_[i] < knots_[i - 1]) {
      throw DomainError("knot vector must be non-decreasing");
    }
  }
  const std::size_t m = knots_.size();
  inv_spans_.assign(std::max<std::size_t>(degree_, 1) * m, 0.0);
  for (std::size_t k = 1; k <= degree_; ++k) {
    for (std::size_t i = 0; i + k < m; ++i) {
      const double span = knots_[i + k] - knots_[i];
      inv_spans_[(k - 1) * m + i] = span > 0.0 ? 1.0 / span : 0.0;
    }
  }
}

KnotVector build_knots(std::size_t grid_size, std::size_t degree, double lo,
                       double hi) {
  if (grid_size < 1) throw DomainError("build_knots: grid_size must be >= 1");
  if (!(lo < hi)) {
    throw DomainError(fmt::format("build_knots: empty range [{}, {}]", lo, hi));
  }
  const double h = (hi - lo) / static_cast<double>(grid_size);
  const std::size_t count = grid_size + 2 * degree + 1;
  std::vector<double> knots(count);
  const auto offset = static_cast<double>(degree);
  for (std::size_t i = 0; i < count; ++i) {
    knots[i] = lo + (static_cast<double>(i) - offset) * h;
  }
  // Pin the domain ends exactly.
  knots[degree] = lo;
  knots[degree + grid_size] = hi;
  return KnotVector(std::move(knots), degree);
}

void bspline_eval(double u, const KnotVector& kv, std::span<double> basis,
                  std::span<double> derivative, std::span<double> scratch) {
  const auto& t = kv.knots();
  const std::size_t p = kv.degree();
  const std::size_t intervals = t.size() - 1;
  const std::size_t nb = kv.n_basis();
  std::fill(basis.begin(), basis.begin() + static_cast<std::ptrdiff_t>(nb), 0.0);
  if (!derivative.empty()) {
    std::fill(derivative.begin(), derivative.begin() + static_cast<std::ptrdiff_t>(nb),
              0.0);
  }
  if (!(u >= t.front() && u <= t.back())) return;

  // Degree 0.
  std::size_t last_nonempty = intervals - 1;
  while (last_nonempty > 0 && t[last_nonempty] == t[last_nonempty + 1]) --last_nonempty;
  double* n = scratch.data();
  for (std::size_t i = 0; i < intervals; ++i) {
    const bool inside = (t[i] <= u && u < t[i + 1]) ||
                        (i == last_nonempty && u == t[i + 1]);
    n[i] = inside ? 1.0 : 0.0;
  }

  // Raise the degree in place: after step k, n[0 .. intervals-k) hold N_{i,k}.
  for (std::size_t k = 1; k <= p; ++k) {
    if (k == p && !derivative.empty()) {
      for (std::size_t i = 0; i < nb; ++i) {
        const double left = kv.inv_span(p, i) * n[i];
        const double right = kv.inv_span(p, i + 1) * n[i + 1];
        derivative[i] = static_cast<double>(p) * (left - right);
      }
    }
    for (std::size_t i = 0; i < intervals - k; ++i) {
      const double left = (u - t[i]) * kv.inv_span(k, i) * n[i];
      const double right = (t[i + k + 1] - u) * kv.inv_span(k, i + 1) * n[i + 1];
      n[i] = left + right;
    }
  }
  std::copy_n(n, nb, basis.begin());
}

std::vector<double> bspline_basis(double u, const KnotVector& kv) {
  std::vector<double> out(kv.n_basis());
  std::vector<double> scratch(kv.knots().size());
  bspline_eval(u, kv, out, {}, scratch);
  return out;
}

std::vector<double> bspline_basis_derivative(double u, const KnotVector& kv) {
  std::vector<double> basis(kv.n_basis());
  std::vector<double> deriv(kv.n_basis());
  std::vector<double> scratch(kv.knots().size());
  bspline_eval(u, kv, basis, deriv, scratch);
  return deriv;
}

}  // namespace tkgmlp
