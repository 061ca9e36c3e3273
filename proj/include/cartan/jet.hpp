#pragma once

// Jet-space completion of first-order systems: total derivatives,
// prolongation, integrability projection, characters, involution.

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cartan/engine.hpp"

namespace cartan {

class JetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using MultiIndex = std::vector<int>;  // derivative counts per independent

struct JetVar {
  std::size_t dep = 0;
  MultiIndex mi;
  int order() const;
};

/// Independents, dependents and the jet symbols declared so far.
class JetSpace {
 public:
  JetSpace(std::vector<Symbol> independents, std::vector<Symbol> dependents);

  const std::vector<Symbol>& independents() const { return x_; }
  const std::vector<Symbol>& dependents() const { return u_; }
  std::size_t n() const { return x_.size(); }
  std::size_t m() const { return u_.size(); }

  /// Jet symbol u^dep_mi, declared on first use (u_xy style names).
  Symbol jet(std::size_t dep, const MultiIndex& mi);
  /// The jet of s differentiated once more by x^i.
  Symbol derive(Symbol s, std::size_t i);
  std::optional<JetVar> info(IndetId v) const;
  /// All jets of the given order, dependents outermost, multi-indices descending.
  std::vector<Symbol> jets_of_order(int q);
  /// Jet symbols occurring in e (also inside opaque arguments).
  std::vector<Symbol> jets_in(const Expr& e) const;
  /// Highest jet order in e, -1 when e has no jets.
  int order(const Expr& e) const;
  /// Elimination ranking: higher order first, then later dependents, then larger index.
  bool ranks_above(Symbol a, Symbol b) const;

 private:
  std::vector<Symbol> x_, u_;
  std::map<IndetId, JetVar> info_;
  std::map<std::pair<std::size_t, MultiIndex>, Symbol> by_index_;
};

using JetSpacePtr = std::shared_ptr<JetSpace>;

Expr total_derivative(JetSpace& space, const Expr& e, std::size_t i);

struct JetEquation {
  Symbol lhs;
  Expr rhs;
};

/// Solved-form system: no principal (left-hand) jet occurs on any right side.
class JetSystem {
 public:
  JetSystem() = default;
  JetSystem(JetSpacePtr space, std::vector<JetEquation> eqs, int order);

  const JetSpacePtr& space() const { return space_; }
  const std::vector<JetEquation>& equations() const { return eqs_; }
  int order() const { return q_; }
  bool is_principal(Symbol s) const { return index_.count(s.id()) > 0; }
  const Expr& rhs_of(Symbol s) const;
  /// Substitutes principal jets by their right sides.
  Expr reduce(const Expr& e) const;
  std::vector<Symbol> parametric(int q) const;
  /// Order of an equation: highest jet order on either side.
  int equation_order(const JetEquation& eq) const;
  std::string str() const;

 private:
  JetSpacePtr space_;
  std::vector<JetEquation> eqs_;
  int q_ = 0;
  std::map<IndetId, std::size_t> index_;
};

/// Solves e = 0 for its highest-ranked affine jet and adjoins it, keeping solved form.
/// Returns R unchanged when e reduces to zero; throws on conditions free of jets.
JetSystem adjoin(const JetSystem& R, const Expr& e);

struct ProlongedSystem {
  JetSystem base;
  std::vector<Expr> conditions;   // lower-order rows, reduced modulo base, nonzero
  std::size_t parametric_next = 0;  // r^{q+1}
  /// Solved equations of order q+1. Assembled on demand: they can be far more
  /// expensive than the conditions.
  std::vector<JetEquation> top() const;
  JetSystem as_system() const;      // base plus top, order q+1

  std::vector<Symbol> top_jets;
  Echelon<Expr> echelon;          // of the top-jet coefficient rows
  std::vector<Expr> remainders;   // rows with top jets set to zero
};

ProlongedSystem prolong_system(const JetSystem& R);

struct Projection {
  std::vector<Expr> conditions;  // independent conditions actually adjoined
  JetSystem reduced;
};

Projection project_integrability(const ProlongedSystem& P);

JetSystem complete_to_order(const JetSystem& R);

/// Numeric character tables at one point: table[rho](row, l) = d u^alpha_{J+l} / d p_rho
/// for rows (alpha, |J| = q-1) and parametric jets p_rho of order q.
std::vector<QMatrix> jet_character_tables(const JetSystem& R, const NumericPoint& pt);

/// Characters at three random points (must agree) and Cartan's test against r^{q+1}.
CharacterReport jet_characters(const JetSystem& R, std::uint64_t seed = 0);

struct JetLoopRecord {
  int order = 0;
  std::vector<std::string> conditions;
  std::optional<CharacterReport> characters;
  std::string verdict;
};

struct InvolutionResult {
  JetSystem final;
  std::vector<JetLoopRecord> log;
  std::size_t conditions = 0;
  int prolongations = 0;
};

InvolutionResult complete_to_involution(const JetSystem& R, int cap, std::uint64_t seed = 0);

/// First-order system for maps x -> X with A(X) grad X A(x)^-1 in G.
JetSystem encode_gstructure(const GStructureProblem& p);

/// Integrability conditions of a first-order system via exterior derivatives of
/// its contact forms and absorption (independent check of the jet route).
std::vector<Expr> exterior_conditions(const JetSystem& R);

struct PathSummary {
  std::size_t r2 = 0;
  std::vector<std::size_t> s;
  std::size_t conditions = 0;
  bool operator==(const PathSummary& o) const {
    return r2 == o.r2 && s == o.s && conditions == o.conditions;
  }
};

struct CrosscheckReport {
  PathSummary engine;
  PathSummary jet;
  bool equal = false;
  std::vector<std::string> engine_log;
  std::vector<std::string> jet_log;
};

CrosscheckReport crosscheck(const GStructureProblem& p, const Policy& policy);
bool crosscheck_characters(const GStructureProblem& p, const Policy& policy = {});

}  // namespace cartan
