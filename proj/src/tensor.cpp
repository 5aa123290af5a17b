#include "socdfn/tensor.hpp"

#include <algorithm>

namespace socdfn {

namespace {

std::string dims(std::size_t r, std::size_t c) {
  return "(" + std::to_string(r) + "x" + std::to_string(c) + ")";
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols) : Matrix(rows, cols, std::vector<double>(rows * cols, 0.0)) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows_ == 0 || cols_ == 0) throw ShapeError("matrix dimensions must be positive, got " + dims(rows_, cols_));
  if (data_.size() != rows_ * cols_)
    throw ShapeError("matrix " + dims(rows_, cols_) + " needs " + std::to_string(rows_ * cols_) + " values, got " +
                     std::to_string(data_.size()));
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  if (rows_ == 0 || cols_ == 0) throw ShapeError("matrix literal must be non-empty");
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

std::string Matrix::shape_string() const { return dims(rows_, cols_); }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: " + a.shape_string() + " x " + b.shape_string() + " inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  const std::size_t inner = a.cols();
  const std::size_t m = b.cols();
  const double* bp = b.data().data();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i).data();
    const double* ai = a.row(i).data();
    // k-outer order keeps the accumulation sequence of the naive triple loop.
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = ai[k];
      const double* bk = bp + k * m;
      for (std::size_t j = 0; j < m; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw ShapeError("matmul_tn: transpose" + a.shape_string() + " x " + b.shape_string() + " inner dimensions differ");
  Matrix c(a.cols(), b.cols());
  const std::size_t q = b.cols();
  double* cp = c.data().data();
  for (std::size_t n = 0; n < a.rows(); ++n) {
    const double* an = a.row(n).data();
    const double* bn = b.row(n).data();
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double anp = an[p];
      if (anp == 0.0) continue;  // ReLU activations are frequently exactly zero
      double* cprow = cp + p * q;
      for (std::size_t j = 0; j < q; ++j) cprow[j] += anp * bn[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols())
    throw ShapeError("matmul_nt: " + a.shape_string() + " x transpose" + b.shape_string() + " inner dimensions differ");
  return matmul(a, transpose(b));
}

Matrix add_row_broadcast(const Matrix& m, const Vector& v) {
  if (v.size() != m.cols())
    throw ShapeError("add_row_broadcast: vector of length " + std::to_string(v.size()) + " against matrix " +
                     m.shape_string());
  Matrix out = m;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += v[j];
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

Vector column_sums(const Matrix& m) {
  Vector s(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) s[j] += r[j];
  }
  return s;
}

}  // namespace socdfn
