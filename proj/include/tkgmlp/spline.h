#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tkgmlp {

// Non-decreasing knot sequence u_0..u_m with a polynomial degree p. The
// basis has m - p functions; partition of unity holds on the interior
// domain [u_p, u_{m-p}].
class KnotVector {
 public:
  KnotVector(std::vector<double> knots, std::size_t degree);

  const std::vector<double>& knots() const { return knots_; }
  std::size_t degree() const { return degree_; }
  std::size_t n_basis() const { return knots_.size() - degree_ - 1; }
  double domain_lo() const { return knots_[degree_]; }
  double domain_hi() const { return knots_[knots_.size() - 1 - degree_]; }

  // 1/(u_{i+k} - u_i), or 0 for a zero-length span; k in [1, degree].
  double inv_span(std::size_t k, std::size_t i) const {
    return inv_spans_[(k - 1) * knots_.size() + i];
  }

  friend bool operator==(const KnotVector& a, const KnotVector& b) {
    return a.degree_ == b.degree_ && a.knots_ == b.knots_;
  }

 private:
  std::vector<double> knots_;
  std::size_t degree_;
  std::vector<double> inv_spans_;
};

// Uniform grid of `grid_size` intervals over [lo, hi], extended by `degree`
// knots of the same spacing on each side. Throws DomainError if lo >= hi.
KnotVector build_knots(std::size_t grid_size, std::size_t degree, double lo,
                       double hi);

// All N_{i,p}(u) via the Cox-de Boor recursion. Degree-0 indicators are
// half-open [u_i, u_{i+1}) except the last non-empty interval, which also
// contains its right end. Terms with a zero denominator contribute 0.
std::vector<double> bspline_basis(double u, const KnotVector& kv);

// dN_{i,p}/du (right-limit at knots).
std::vector<double> bspline_basis_derivative(double u, const KnotVector& kv);

// Allocation-free form: writes n_basis values into `basis` and, when
// `derivative` is non-empty, n_basis derivatives into it. `scratch` must
// hold at least knots().size() doubles.
void bspline_eval(double u, const KnotVector& kv, std::span<double> basis,
                  std::span<double> derivative, std::span<double> scratch);

}  // namespace tkgmlp
