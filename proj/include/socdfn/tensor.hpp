#pragma once

// Dense 64-bit float kernel for the network math. Matrices are row-major with
// one sample per row and one feature per column; that convention fixes every
// shape contract downstream.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "socdfn/error.hpp"

namespace socdfn {

class Matrix {
 public:
  /// rows x cols of zeros; both dimensions must be at least 1.
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  std::string shape_string() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t len, double fill = 0.0) : data_(len, fill) {}
  explicit Vector(std::vector<double> data) : data_(std::move(data)) {}
  Vector(std::initializer_list<double> values) : data_(values) {}

  std::size_t size() const noexcept { return data_.size(); }
  double operator[](std::size_t i) const noexcept { return data_[i]; }
  double& operator[](std::size_t i) noexcept { return data_[i]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

/// a (n x k) times b (k x m).
Matrix matmul(const Matrix& a, const Matrix& b);

/// transpose(a) times b without materializing the transpose; a is (n x p), b is (n x q).
Matrix matmul_tn(const Matrix& a, const Matrix& b);

/// a times transpose(b); a is (n x q), b is (p x q).
Matrix matmul_nt(const Matrix& a, const Matrix& b);

/// Adds v to every row of m.
Matrix add_row_broadcast(const Matrix& m, const Vector& v);

Matrix transpose(const Matrix& m);

/// Per-column sums, i.e. the bias gradient of a batch of deltas.
Vector column_sums(const Matrix& m);

template <typename F>
Matrix elementwise(const Matrix& m, F&& f) {
  Matrix out = m;
  for (double& x : out.data()) x = f(x);
  return out;
}

}  // namespace socdfn
