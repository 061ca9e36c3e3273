#pragma once

// Random expression generators shared by the property suites.

#include <random>
#include <vector>

#include "cartan/expr.hpp"

namespace cartan::testing {

inline Rational random_rational(std::mt19937_64& rng, int lo = -9, int hi = 9) {
  std::uniform_int_distribution<int> num(lo, hi);
  std::uniform_int_distribution<int> den(1, 5);
  Rational q(num(rng), den(rng));
  q.canonicalize();
  return q;
}

inline Rational random_nonzero(std::mt19937_64& rng) {
  Rational q;
  do {
    q = random_rational(rng);
  } while (q == 0);
  return q;
}

/// Small random polynomial expression in the given generators.
inline Expr random_poly_expr(std::mt19937_64& rng, const std::vector<Expr>& gens, int terms = 3,
                             int max_deg = 2) {
  std::uniform_int_distribution<int> deg(0, max_deg);
  std::uniform_int_distribution<std::size_t> pick(0, gens.size() - 1);
  Expr e(0);
  for (int t = 0; t < terms; ++t) {
    Expr m(random_rational(rng));
    int factors = deg(rng);
    for (int f = 0; f < factors; ++f) m *= gens[pick(rng)];
    e += m;
  }
  return e;
}

/// Random rational expression num/den with a nonzero denominator.
inline Expr random_rational_expr(std::mt19937_64& rng, const std::vector<Expr>& gens) {
  Expr den;
  do {
    den = random_poly_expr(rng, gens, 2, 2);
  } while (den.is_zero());
  return random_poly_expr(rng, gens, 3, 2) / den;
}

/// Random point for every indeterminate reachable from the expressions.
inline NumericPoint random_point(std::mt19937_64& rng, const std::vector<Expr>& exprs) {
  NumericPoint pt;
  std::uniform_int_distribution<int> num(-1000, 1000);
  std::uniform_int_distribution<int> den(1, 97);
  for (const auto& e : exprs) {
    for (IndetId v : indeterminates(e)) {
      if (!pt.count(v)) {
        Rational q(num(rng), den(rng));
        q.canonicalize();
        pt[v] = q;
      }
    }
  }
  return pt;
}

}  // namespace cartan::testing
