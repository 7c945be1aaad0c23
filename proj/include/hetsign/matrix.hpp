#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hetsign {

// Dense row-major matrix of doubles. Deliberately minimal: just what the
// propagation and training code needs.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative dimension");
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

  double* row(int i) { return data_.data() + static_cast<size_t>(i) * cols_; }
  const double* row(int i) const { return data_.data() + static_cast<size_t>(i) * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool operator==(const Matrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

inline void check_multiplicable(const Matrix& a, const Matrix& b, const char* where) {
  if (a.cols() != b.rows())
    throw std::invalid_argument(std::string(where) + ": inner dimensions " +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()));
}

// a * b, ikj loop order so the inner loop walks both operands contiguously.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  check_multiplicable(a, b, "matmul");
  Matrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (int k = 0; k < a.cols(); ++k) {
      double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      for (int j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

// transpose(a) * b without forming the transpose.
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw std::invalid_argument("matmul_tn: row counts " + std::to_string(a.rows()) + " vs " +
                                std::to_string(b.rows()));
  Matrix out(a.cols(), b.cols());
  for (int k = 0; k < a.rows(); ++k) {
    const double* arow = a.row(k);
    const double* brow = b.row(k);
    for (int i = 0; i < a.cols(); ++i) {
      double aki = arow[i];
      if (aki == 0.0) continue;
      double* orow = out.row(i);
      for (int j = 0; j < b.cols(); ++j) orow[j] += aki * brow[j];
    }
  }
  return out;
}

// a * transpose(b).
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("matmul_nt: column counts " + std::to_string(a.cols()) + " vs " +
                                std::to_string(b.cols()));
  Matrix out(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (int j = 0; j < b.rows(); ++j) {
      const double* brow = b.row(j);
      double s = 0.0;
      for (int k = 0; k < a.cols(); ++k) s += arow[k] * brow[k];
      orow[j] = s;
    }
  }
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

// Compressed sparse rows, column indices sorted within each row.  Used for the
// propagation operator and for sparse feature matrices.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col,
            std::vector<double> val)
      : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_(std::move(col)),
        val_(std::move(val)) {
    if (row_ptr_.size() != static_cast<size_t>(rows_) + 1 || col_.size() != val_.size() ||
        row_ptr_.back() != static_cast<int>(col_.size()))
      throw std::invalid_argument("CsrMatrix: inconsistent structure");
  }

  static CsrMatrix from_dense(const Matrix& m) {
    std::vector<int> row_ptr(m.rows() + 1, 0);
    std::vector<int> col;
    std::vector<double> val;
    for (int i = 0; i < m.rows(); ++i) {
      for (int j = 0; j < m.cols(); ++j) {
        if (m(i, j) != 0.0) {
          col.push_back(j);
          val.push_back(m(i, j));
        }
      }
      row_ptr[i + 1] = static_cast<int>(col.size());
    }
    return CsrMatrix(m.rows(), m.cols(), std::move(row_ptr), std::move(col), std::move(val));
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(col_.size()); }

  int row_begin(int i) const { return row_ptr_[i]; }
  int row_end(int i) const { return row_ptr_[i + 1]; }
  int col_at(int k) const { return col_[k]; }
  double val_at(int k) const { return val_[k]; }

  // Entry lookup; absent entries read as zero.
  double at(int i, int j) const {
    auto first = col_.begin() + row_ptr_[i];
    auto last = col_.begin() + row_ptr_[i + 1];
    auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return val_[it - col_.begin()];
  }

  // this * dense
  Matrix multiply(const Matrix& d) const {
    if (cols_ != d.rows())
      throw std::invalid_argument("CsrMatrix::multiply: inner dimensions " +
                                  std::to_string(cols_) + " vs " + std::to_string(d.rows()));
    Matrix out(rows_, d.cols());
    for (int i = 0; i < rows_; ++i) {
      double* orow = out.row(i);
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        double w = val_[k];
        const double* drow = d.row(col_[k]);
        for (int j = 0; j < d.cols(); ++j) orow[j] += w * drow[j];
      }
    }
    return out;
  }

  // transpose(this) * dense, scattering row by row so the result is
  // accumulated in a fixed deterministic order.
  Matrix multiply_transposed(const Matrix& d) const {
    if (rows_ != d.rows())
      throw std::invalid_argument("CsrMatrix::multiply_transposed: row counts " +
                                  std::to_string(rows_) + " vs " + std::to_string(d.rows()));
    Matrix out(cols_, d.cols());
    for (int i = 0; i < rows_; ++i) {
      const double* drow = d.row(i);
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        double w = val_[k];
        double* orow = out.row(col_[k]);
        for (int j = 0; j < d.cols(); ++j) orow[j] += w * drow[j];
      }
    }
    return out;
  }

  Matrix to_dense() const {
    Matrix out(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) out(i, col_[k]) = val_[k];
    return out;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_;
  std::vector<double> val_;
};

}  // namespace hetsign
