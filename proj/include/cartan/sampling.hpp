#pragma once

#include <random>
#include <vector>

#include "cartan/expr.hpp"

namespace cartan {

/// Random rational in [-bound, bound] (or (0, bound] when positive), never zero.
Rational random_rational(std::mt19937_64& rng, bool positive = false, int bound = 97);

/// Random values for every indeterminate reachable from the expressions,
/// including arguments of opaque applications. Keeps existing entries of `fixed`.
NumericPoint random_point(const std::vector<Expr>& exprs, std::mt19937_64& rng,
                          bool positive = false, const NumericPoint& fixed = {});

}  // namespace cartan
