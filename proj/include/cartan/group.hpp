#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cartan/linalg.hpp"

namespace cartan {

class GroupError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Matrix slot symbols g11 .. gnn (g1_10 style once n > 9), row-major.
std::vector<Symbol> slot_symbols(std::size_t n);

/// n x n matrix group parametrized by r parameters.
struct ParamGroup {
  std::vector<Symbol> params;
  ExprMatrix entries;
  std::map<IndetId, Rational> identity;  // parameter id -> value giving I
  std::vector<Expr> membership;          // in slot_symbols(n); empty when not given

  std::size_t n() const { return entries.rows(); }
  std::size_t r() const { return params.size(); }
  /// Throws GroupError when an invariant fails.
  void validate() const;
  Bindings identity_bindings() const;
};

ExprMatrix group_inverse(const ParamGroup& g);

/// Right Maurer-Cartan data: (dg g^-1)_ij = sum_k F[k](i,j) alpha^k.
struct MCBasis {
  std::vector<std::pair<std::size_t, std::size_t>> chosen;  // entries used as alpha^k
  /// alpha[k][m] is the coefficient of d a_m in alpha^k.
  std::vector<std::vector<Expr>> alpha;
  std::vector<QMatrix> F;
  /// Matrices of dg g^-1 split by parameter: E[m](i,j) = coefficient of d a_m.
  std::vector<ExprMatrix> E;
};

MCBasis right_mc(const ParamGroup& g);

/// Membership equations from a triangular implicitization of the entries:
/// parameters are solved from entries affine in them, the remaining entries
/// become equations. nullopt when some parameter cannot be isolated.
std::optional<std::vector<Expr>> derive_membership(const ParamGroup& g);

struct ClosureReport {
  bool ok = true;
  std::size_t samples = 0;
  std::string diagnostic;
};

ClosureReport check_closure(const ParamGroup& g, std::size_t samples, std::uint64_t seed = 1);

}  // namespace cartan
