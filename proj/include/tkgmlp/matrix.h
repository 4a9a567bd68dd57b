#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tkgmlp {

// Dense row-major matrix of doubles. Rows are samples, columns are features
// or activations.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  // Adopts `data` (length rows*cols). Throws ShapeError on length mismatch.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  // Construction from external input: also rejects NaN/Inf entries with a
  // ValidationError.
  static Matrix FromData(std::size_t rows, std::size_t cols,
                         std::vector<double> data);
  static Matrix FromRows(const std::vector<std::vector<double>>& rows);
  static Matrix Identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void fill(double v);
  Matrix transposed() const;
  // Rows [begin, end) as a new matrix.
  Matrix slice_rows(std::size_t begin, std::size_t end) const;
  // Rows picked by index, in the given order.
  Matrix gather_rows(std::span<const std::size_t> indices) const;
  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using Batch = Matrix;

// a (r x k) times b (k x n). Throws ShapeError when a.cols != b.rows.
Matrix matmul(const Matrix& a, const Matrix& b);
// out += a * b
void matmul_accumulate(const Matrix& a, const Matrix& b, Matrix& out);
// out += a^T * b, a is (r x k), b is (r x n), out is (k x n).
void matmul_tn_accumulate(const Matrix& a, const Matrix& b, Matrix& out);
// a * b^T, a is (r x k), b is (n x k).
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// Per-column sums accumulated into `out` (length cols).
void column_sums_accumulate(const Matrix& m, std::span<double> out);

}  // namespace tkgmlp
