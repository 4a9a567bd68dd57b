#include "tkgmlp/matrix.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "tkgmlp/error.h"

namespace tkgmlp {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError(fmt::format("matrix data length {} != {}x{}", data_.size(),
                                 rows, cols));
  }
}

Matrix Matrix::FromData(std::size_t rows, std::size_t cols,
                        std::vector<double> data) {
  Matrix m(rows, cols, std::move(data));
  for (std::size_t i = 0; i < m.data_.size(); ++i) {
    if (!std::isfinite(m.data_[i])) {
      throw ValidationError(fmt::format("non-finite entry at ({}, {})",
                                        i / std::max<std::size_t>(cols, 1),
                                        cols ? i % cols : 0));
    }
  }
  return m;
}

Matrix Matrix::FromRows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.front().size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return FromData(r, c, std::move(data));
}

Matrix Matrix::Identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

Matrix Matrix::slice_rows(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows_) throw ShapeError("row slice out of range");
  std::vector<double> d(data_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
                        data_.begin() + static_cast<std::ptrdiff_t>(end * cols_));
  return Matrix(end - begin, cols_, std::move(d));
}

Matrix Matrix::gather_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw ShapeError("row index out of range");
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(indices[i] * cols_),
                cols_, out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
  }
  return out;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

namespace {

void check_product(const Matrix& a, const Matrix& b, const char* what) {
  if (a.cols() != b.rows()) {
    throw ShapeError(fmt::format("{}: ({}x{}) * ({}x{})", what, a.rows(),
                                 a.cols(), b.rows(), b.cols()));
  }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_product(a, b, "matmul");
  Matrix out(a.rows(), b.cols());
  matmul_accumulate(a, b, out);
  return out;
}

void matmul_accumulate(const Matrix& a, const Matrix& b, Matrix& out) {
  check_product(a, b, "matmul");
  if (out.rows() != a.rows() || out.cols() != b.cols()) {
    throw ShapeError("matmul: output shape mismatch");
  }
  const std::size_t k_dim = a.cols();
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* a_row = a.data() + i * k_dim;
    double* o = out.data() + i * n;
    for (std::size_t k = 0; k < k_dim; ++k) {
      const double s = a_row[k];
      if (s == 0.0) continue;  // spline and dropout outputs are sparse
      const double* b_row = b.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += s * b_row[j];
    }
  }
}

void matmul_tn_accumulate(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.rows() != b.rows()) {
    throw ShapeError(fmt::format("matmul_tn: ({}x{})^T * ({}x{})", a.rows(),
                                 a.cols(), b.rows(), b.cols()));
  }
  if (out.rows() != a.cols() || out.cols() != b.cols()) {
    throw ShapeError("matmul_tn: output shape mismatch");
  }
  const std::size_t k_dim = a.cols();
  const std::size_t n = b.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* a_row = a.data() + r * k_dim;
    const double* b_row = b.data() + r * n;
    for (std::size_t k = 0; k < k_dim; ++k) {
      const double s = a_row[k];
      if (s == 0.0) continue;
      double* o = out.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += s * b_row[j];
    }
  }
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError(fmt::format("matmul_nt: ({}x{}) * ({}x{})^T", a.rows(),
                                 a.cols(), b.rows(), b.cols()));
  }
  return matmul(a, b.transposed());
}

void column_sums_accumulate(const Matrix& m, std::span<double> out) {
  if (out.size() != m.cols()) throw ShapeError("column sums: length mismatch");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] += row[c];
  }
}

}  // namespace tkgmlp
