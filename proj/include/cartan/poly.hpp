#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace cartan {

using Rational = mpq_class;
using IndetId = std::uint32_t;

/// A power product of indeterminates, factors sorted by id, exponents > 0.
class Monomial {
 public:
  using Factor = std::pair<IndetId, std::uint32_t>;

  Monomial() = default;
  explicit Monomial(std::vector<Factor> factors);
  static Monomial variable(IndetId v, std::uint32_t exp = 1);

  const std::vector<Factor>& factors() const { return factors_; }
  std::uint32_t degree() const { return degree_; }
  std::uint32_t degree_in(IndetId v) const;
  bool is_one() const { return factors_.empty(); }

  Monomial operator*(const Monomial& other) const;
  /// Quotient when `other` divides this monomial.
  std::optional<Monomial> divide(const Monomial& other) const;
  Monomial without(IndetId v) const;
  Monomial gcd(const Monomial& other) const;

  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.factors_ == b.factors_;
  }

 private:
  std::vector<Factor> factors_;
  std::uint32_t degree_ = 0;
};

/// Graded-lex comparison; indeterminates created earlier rank higher.
/// Returns <0, 0, >0 like strcmp.
int grlex_compare(const Monomial& a, const Monomial& b);

struct Term {
  Rational coeff;
  Monomial mono;
};

/// Sparse multivariate polynomial over Q with terms kept in descending
/// graded-lex order. Zero coefficients are never stored.
class Poly {
 public:
  Poly() = default;
  Poly(long c);  // NOLINT(google-explicit-constructor)
  Poly(const Rational& c);  // NOLINT(google-explicit-constructor)
  static Poly variable(IndetId v);
  static Poly term(const Rational& c, Monomial m);
  /// Builds sum of coeffs[k] * v^k.
  static Poly from_univariate(IndetId v, const std::vector<Poly>& coeffs);
  /// Sorts and merges arbitrary terms.
  static Poly from_unsorted(std::vector<Term> terms);

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  bool is_monomial() const { return terms_.size() == 1; }
  /// Constant term value; only meaningful when is_constant().
  Rational constant_value() const;
  const Term& leading_term() const { return terms_.front(); }
  const Rational& leading_coeff() const { return terms_.front().coeff; }

  std::vector<IndetId> variables() const;
  bool contains(IndetId v) const;
  std::uint32_t degree_in(IndetId v) const;
  std::uint32_t total_degree() const;
  /// Coefficients as a polynomial in v: result[k] is the coefficient of v^k.
  std::vector<Poly> coefficients_in(IndetId v) const;

  Poly operator-() const;
  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly scaled(const Rational& c) const;
  Poly pow(std::uint32_t e) const;
  Poly& operator+=(const Poly& o) { return *this = *this + o; }
  Poly& operator-=(const Poly& o) { return *this = *this - o; }
  Poly& operator*=(const Poly& o) { return *this = *this * o; }

  /// Formal partial derivative with respect to an indeterminate.
  Poly partial(IndetId v) const;
  /// Makes the leading coefficient 1 (zero stays zero).
  Poly monic() const;

  friend bool operator==(const Poly& a, const Poly& b);
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

 private:
  std::vector<Term> terms_;
};

/// Exact quotient a / b, or nullopt when b does not divide a.
std::optional<Poly> divide_exact(const Poly& a, const Poly& b);

/// Monic greatest common divisor over Q (gcd(0, 0) = 0).
Poly gcd(const Poly& a, const Poly& b);

/// Pseudo-remainder of a by b regarded as polynomials in v.
Poly pseudo_remainder(const Poly& a, const Poly& b, IndetId v);

}  // namespace cartan
