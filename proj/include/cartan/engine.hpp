#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cartan/forms.hpp"
#include "cartan/group.hpp"

namespace cartan {

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// phi^* eta = g eta with eta = A(x) dx and g in G.
struct GStructureProblem {
  Chart chart;
  CoframePtr coframe;
  ParamGroup group;
  int stage = 0;
  std::vector<std::string> provenance;

  std::size_t n() const { return chart.dim(); }
  void validate() const;
};

/// C^i_jk for an arbitrary matrix g: expansion of g d eta in the g eta coframe.
StructureTable torsion_table(const StructureTable& B, const ExprMatrix& g);

struct StructureData {
  StructureTable B;
  StructureTable C;
  MCBasis mc;
};

StructureData compute_structure_data(const GStructureProblem& p);

enum class AbsorptionMode { normalized, exact };

struct AbsorptionSystem {
  std::size_t n = 0;
  std::size_t r = 0;
  AbsorptionMode mode = AbsorptionMode::normalized;
  std::vector<std::array<std::size_t, 3>> labels;  // (i, j, k), j < k
  QMatrix coeff;                                   // equations x unknowns
  std::vector<Expr> lhs;                           // 0 or B(X)
  std::vector<Expr> c;                             // C(x, g)
  /// Unknown z^kappa_j sits at column kappa * n + j.
  std::size_t unknown(std::size_t kappa, std::size_t j) const { return kappa * n + j; }
  std::string unknown_name(std::size_t u) const;
};

/// Target-space copies of chart coordinates (x -> X), kind jet_variable.
std::vector<Symbol> target_symbols(const Chart& chart);
Bindings to_target(const Chart& chart);

AbsorptionSystem build_absorption(const GStructureProblem& p, const StructureData& data,
                                  AbsorptionMode mode);

/// z = P z + Q (c - lhs); residual rows give H = J.
struct AbsorptionSolution {
  std::vector<std::size_t> principal;
  std::vector<std::size_t> parametric;
  QMatrix P;
  QMatrix Q;
  std::vector<Expr> c;
  std::vector<Expr> lhs;
  QMatrix torsion_rows;       // residual combinations of the equations
  std::vector<Expr> torsion;         // H_t = -sum_e T_te c_e
  std::vector<Expr> torsion_target;  // J_t = -sum_e T_te lhs_e
  std::size_t r2 = 0;
};

AbsorptionSolution solve_absorption(const AbsorptionSystem& sys);

enum class TorsionKind { trivial, group_dependent, genuine };
std::string to_string(TorsionKind k);

struct TorsionClassification {
  std::vector<TorsionKind> kinds;
  std::vector<std::size_t> normalizable;  // independent group-dependent residuals
  std::vector<std::size_t> deferred;      // group-dependent but dependent on the above
  std::size_t group_rank = 0;
  bool full_rank = true;
  bool constant_type = true;
};

TorsionClassification classify_torsion(const AbsorptionSolution& sol, const ParamGroup& g,
                                       std::uint64_t seed = 0);

/// Stable label of a residual: hash of its canonical print.
std::string residual_label(const Expr& e);

struct Policy {
  int max_loops = 8;
  std::uint64_t seed = 0;
  std::map<std::string, Rational> targets;  // residual label -> normalization constant
};

struct ReductionRecord {
  std::vector<Expr> residuals;
  std::vector<std::string> labels;
  std::vector<Rational> targets;
  std::vector<std::string> branch_notes;
  std::vector<std::pair<Symbol, Expr>> normalization;  // solved parameters (section)
  ExprMatrix section;                                  // g0(x)
  std::vector<std::pair<Symbol, Expr>> isotropy;       // parameter relations of G_b
  bool transitive = true;
  std::vector<Expr> genuine;  // deferred residuals that turned out x-dependent
};

class ReductionError : public EngineError {
 public:
  ReductionError(const std::string& msg, std::vector<Expr> unsolved)
      : EngineError(msg), unsolved_(std::move(unsolved)) {}
  const std::vector<Expr>& unsolved() const { return unsolved_; }

 private:
  std::vector<Expr> unsolved_;
};

struct ReductionResult {
  GStructureProblem problem;
  ReductionRecord record;
};

ReductionResult reduce_group(const GStructureProblem& p, const StructureData& data,
                             const AbsorptionSolution& sol, const TorsionClassification& cls,
                             const Policy& policy);

struct CharacterReport {
  std::vector<std::size_t> s;
  std::size_t r2 = 0;
  bool involutive = false;
  std::vector<std::vector<Rational>> witnesses;
  bool certified = true;  // witnesses reach the generic ranks
};

/// Characters of the system sum_l v_l F^{il}; F[k] is the rows x n table of the k-th
/// form, n the number of directions. F must be non-empty.
CharacterReport characters_from_tables(const std::vector<QMatrix>& F, std::size_t r2,
                                       std::uint64_t seed = 0);
CharacterReport cartan_characters(const StructureData& data, const AbsorptionSolution& sol,
                                  std::uint64_t seed = 0);

GStructureProblem prolong(const GStructureProblem& p, const StructureData& data,
                          const AbsorptionSolution& sol);

struct TorsionEntry {
  std::string expr;
  std::string label;
  TorsionKind kind;
};

struct StageReport {
  int stage = 0;
  std::size_t n = 0;
  std::size_t r = 0;
  std::vector<std::string> coframe;
  std::vector<std::vector<std::string>> group;
  std::vector<std::string> params;
  std::vector<std::array<std::size_t, 2>> mc_basis;
  std::size_t equations = 0;
  std::size_t unknowns = 0;
  std::size_t r2 = 0;
  std::vector<TorsionEntry> torsion;
  std::optional<ReductionRecord> reduction;
  std::optional<CharacterReport> characters;
  std::optional<bool> cartan_test;
  std::string verdict;
  double millis = 0;
};

enum class Outcome { involutive, e_structure, constant_type_violation, cap_exceeded, failed };
std::string to_string(Outcome o);

struct EquivalenceReport {
  std::string title;
  Outcome outcome = Outcome::failed;
  std::vector<StageReport> stages;
  std::vector<std::string> invariants;  // genuine invariants, if any
  std::string diagnostic;
  std::uint64_t seed = 0;
  int exit_code() const;
};

EquivalenceReport run_loop(const GStructureProblem& p, const Policy& policy);

}  // namespace cartan
