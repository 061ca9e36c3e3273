#pragma once

#include <cstddef>
#include <string>
#include <optional>
#include <vector>

#include "cartan/expr.hpp"

namespace cartan {

/// Dense row-major matrix.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, const T& fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<T> row(std::size_t i) const {
    return std::vector<T>(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix operator*(const Matrix& o) const {
    Matrix r(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) {
        const T& a = (*this)(i, k);
        if (a == T(0)) continue;
        for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += a * o(k, j);
      }
    return r;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using ExprMatrix = Matrix<Expr>;
using QMatrix = Matrix<Rational>;

/// Inverse by fraction-free pivoting on nonzero entries. Throws SingularError.
ExprMatrix inverse(const ExprMatrix& m);
Expr determinant(const ExprMatrix& m);
ExprMatrix adjugate(const ExprMatrix& m);
/// Generic rank over the field of rational functions.
std::size_t rank(const ExprMatrix& m);
/// Smallest k with the upper-right k x (n-k) block zero, if any.
std::optional<std::size_t> block_split(const ExprMatrix& m);

ExprMatrix substitute(const ExprMatrix& m, const Bindings& b);
QMatrix eval_numeric(const ExprMatrix& m, const NumericPoint& p);
ExprMatrix differentiate(const ExprMatrix& m, Symbol s);
ExprMatrix to_expr(const QMatrix& m);
bool is_zero(const ExprMatrix& m);

/// Result of reducing [M] to reduced row echelon form while tracking the row
/// operations: transform * M == reduced.
template <class T>
struct Echelon {
  Matrix<T> reduced;
  Matrix<T> transform;
  std::vector<std::size_t> pivots;  // pivot column of row r, r < rank
  std::size_t rank() const { return pivots.size(); }
};

Echelon<Rational> rref(const QMatrix& m);
Echelon<Expr> rref(const ExprMatrix& m);
std::size_t rank(const QMatrix& m);

std::string to_string(const ExprMatrix& m);

}  // namespace cartan
