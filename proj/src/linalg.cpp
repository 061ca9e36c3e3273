#include "cartan/linalg.hpp"

#include <sstream>

namespace cartan {

namespace {

template <class T>
bool zero(const T& v) {
  return v == T(0);
}

// pivot preference: rationals keep the first nonzero, expressions the smallest
std::size_t weight(const Rational&) { return 0; }
std::size_t weight(const Expr& e) {
  std::size_t w = 0;
  for (const auto& t : e.num().terms()) w += 1 + t.mono.degree();
  for (const auto& t : e.den().terms()) w += 1 + t.mono.degree();
  return w;
}

template <class T>
Echelon<T> reduce(const Matrix<T>& m) {
  Echelon<T> out{m, Matrix<T>::identity(m.rows()), {}};
  Matrix<T>& a = out.reduced;
  Matrix<T>& t = out.transform;
  std::size_t r = 0;
  for (std::size_t c = 0; c < a.cols() && r < a.rows(); ++c) {
    std::size_t p = a.rows();
    for (std::size_t i = r; i < a.rows(); ++i) {
      if (zero(a(i, c))) continue;
      if (p == a.rows() || weight(a(i, c)) < weight(a(p, c))) p = i;
      if (weight(a(p, c)) == 0) break;
    }
    if (p == a.rows()) continue;
    if (p != r) {
      for (std::size_t j = 0; j < a.cols(); ++j) std::swap(a(p, j), a(r, j));
      for (std::size_t j = 0; j < t.cols(); ++j) std::swap(t(p, j), t(r, j));
    }
    T inv = T(1) / a(r, c);
    for (std::size_t j = 0; j < a.cols(); ++j) a(r, j) = a(r, j) * inv;
    for (std::size_t j = 0; j < t.cols(); ++j) t(r, j) = t(r, j) * inv;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (i == r || zero(a(i, c))) continue;
      T f = a(i, c);
      for (std::size_t j = 0; j < a.cols(); ++j) {
        if (!zero(a(r, j))) a(i, j) = a(i, j) - f * a(r, j);
      }
      for (std::size_t j = 0; j < t.cols(); ++j) {
        if (!zero(t(r, j))) t(i, j) = t(i, j) - f * t(r, j);
      }
    }
    out.pivots.push_back(c);
    ++r;
  }
  return out;
}

}  // namespace

Echelon<Rational> rref(const QMatrix& m) { return reduce(m); }
Echelon<Expr> rref(const ExprMatrix& m) { return reduce(m); }

std::size_t rank(const QMatrix& m) { return reduce(m).rank(); }
std::size_t rank(const ExprMatrix& m) { return reduce(m).rank(); }

ExprMatrix adjugate(const ExprMatrix& m) {
  if (m.rows() != m.cols()) throw SingularError("adjugate of a non-square matrix");
  std::size_t n = m.rows();
  ExprMatrix adj(n, n);
  if (n == 1) {
    adj(0, 0) = Expr(1);
    return adj;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      ExprMatrix minor(n - 1, n - 1);
      for (std::size_t r = 0, rr = 0; r < n; ++r) {
        if (r == j) continue;
        for (std::size_t c = 0, cc = 0; c < n; ++c) {
          if (c == i) continue;
          minor(rr, cc++) = m(r, c);
        }
        ++rr;
      }
      Expr cof = determinant(minor);
      adj(i, j) = (i + j) % 2 ? -cof : cof;
    }
  return adj;
}

std::optional<std::size_t> block_split(const ExprMatrix& m) {
  std::size_t n = m.rows();
  for (std::size_t k = 1; k < n; ++k) {
    bool zero = true;
    for (std::size_t i = 0; i < k && zero; ++i)
      for (std::size_t j = k; j < n && zero; ++j) zero = m(i, j).is_zero();
    if (zero) return k;
  }
  return std::nullopt;
}

namespace {

ExprMatrix block(const ExprMatrix& m, std::size_t r0, std::size_t c0, std::size_t rows,
                 std::size_t cols) {
  ExprMatrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = m(r0 + i, c0 + j);
  return out;
}

}  // namespace

ExprMatrix inverse(const ExprMatrix& m) {
  if (m.rows() != m.cols()) throw SingularError("inverse of a non-square matrix");
  std::size_t n = m.rows();
  if (auto k = block_split(m)) {
    // [[A, 0], [C, D]]^-1 = [[A^-1, 0], [-D^-1 C A^-1, D^-1]]
    std::size_t b = *k;
    ExprMatrix ai = inverse(block(m, 0, 0, b, b));
    ExprMatrix di = inverse(block(m, b, b, n - b, n - b));
    ExprMatrix low = di * block(m, b, 0, n - b, b) * ai;
    ExprMatrix out(n, n);
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < b; ++j) out(i, j) = ai(i, j);
    for (std::size_t i = 0; i < n - b; ++i) {
      for (std::size_t j = 0; j < b; ++j) out(b + i, j) = -low(i, j);
      for (std::size_t j = 0; j < n - b; ++j) out(b + i, b + j) = di(i, j);
    }
    return out;
  }
  if (n > 8) {
    auto e = reduce(m);
    if (e.rank() != n) throw SingularError("matrix is singular");
    return e.transform;
  }
  Expr det = determinant(m);
  if (det.is_zero()) throw SingularError("matrix is singular");
  ExprMatrix inv = adjugate(m);
  Expr d = Expr(1) / det;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv(i, j) *= d;
  return inv;
}

Expr determinant(const ExprMatrix& m) {
  if (m.rows() != m.cols()) throw SingularError("determinant of a non-square matrix");
  ExprMatrix a = m;
  std::size_t n = a.rows();
  Expr det(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && a(p, c).is_zero()) ++p;
    if (p == n) return Expr(0);
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(p, j), a(c, j));
      det = -det;
    }
    det *= a(c, c);
    Expr inv = Expr(1) / a(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      if (a(i, c).is_zero()) continue;
      Expr f = a(i, c) * inv;
      for (std::size_t j = c; j < n; ++j) a(i, j) -= f * a(c, j);
    }
  }
  return det;
}

ExprMatrix substitute(const ExprMatrix& m, const Bindings& b) {
  ExprMatrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = substitute(m(i, j), b);
  return r;
}

QMatrix eval_numeric(const ExprMatrix& m, const NumericPoint& p) {
  QMatrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = eval_numeric(m(i, j), p);
  return r;
}

ExprMatrix differentiate(const ExprMatrix& m, Symbol s) {
  ExprMatrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = differentiate(m(i, j), s);
  return r;
}

ExprMatrix to_expr(const QMatrix& m) {
  ExprMatrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = Expr(m(i, j));
  return r;
}

bool is_zero(const ExprMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (!m(i, j).is_zero()) return false;
  return true;
}

std::string to_string(const ExprMatrix& m) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << (i ? "; " : "");
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << m(i, j).str();
  }
  os << "]";
  return os.str();
}

}  // namespace cartan
