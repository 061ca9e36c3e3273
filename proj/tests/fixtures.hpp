#pragma once

// Hand-built problems shared by the engine and jet suites.

#include <memory>
#include <string>
#include <vector>

#include "cartan/engine.hpp"
#include "cartan/parser.hpp"

namespace cartan::testing {

inline ParamGroup make_group(const std::vector<std::string>& names,
                             const std::vector<std::vector<std::string>>& rows,
                             const std::vector<long>& identity) {
  ParamGroup g;
  for (auto& n : names) g.params.push_back(declare_symbol(n, SymbolKind::group_parameter));
  std::size_t n = rows.size();
  g.entries = ExprMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g.entries(i, j) = parse_expr(rows[i][j]);
  for (std::size_t k = 0; k < names.size(); ++k) g.identity[g.params[k].id()] = identity[k];
  return g;
}

inline GStructureProblem make_problem(const std::vector<std::string>& coords, const ExprMatrix& A,
                                      ParamGroup g) {
  std::vector<Symbol> cs;
  for (auto& c : coords) cs.push_back(declare_symbol(c, SymbolKind::coordinate));
  GStructureProblem p;
  p.chart = Chart(cs);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < cs.size(); ++i) names.push_back("eta" + std::to_string(i + 1));
  p.coframe = std::make_shared<const Coframe>(p.chart, names, A);
  p.group = std::move(g);
  return p;
}

inline GStructureProblem make_problem(const std::vector<std::string>& coords,
                                      const std::vector<std::vector<std::string>>& rows,
                                      ParamGroup g) {
  for (auto& c : coords) declare_symbol(c, SymbolKind::coordinate);
  ExprMatrix A(rows.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j) A(i, j) = parse_expr(rows[i][j]);
  return make_problem(coords, A, std::move(g));
}

inline ParamGroup identity_group(std::size_t n) {
  ParamGroup g;
  g.entries = ExprMatrix::identity(n);
  return g;
}

/// First-order variational problem for L(x, u, p), p = u'.
inline GStructureProblem lagrangian_problem() {
  for (auto c : {"x", "u", "p"}) declare_symbol(c, SymbolKind::coordinate);
  declare_function("L", {"x", "u", "p"});
  return make_problem(
      {"x", "u", "p"},
      {{"1", "0", "0"},
       {"-p", "1", "0"},
       {"-(L_u(x,u,p) - L_px(x,u,p) - p*L_pu(x,u,p))", "0", "L_pp(x,u,p)"}},
      make_group({"a1", "a2", "a3", "a4", "a5"},
                 {{"a1", "a2", "a3"}, {"0", "a4", "0"}, {"0", "a5", "1/a4"}}, {1, 0, 0, 1, 0}));
}

inline GStructureProblem toy_problem() {
  return make_problem({"x", "y"}, {{"1", "0"}, {"0", "x"}},
                      make_group({"a"}, {{"a", "0"}, {"0", "1"}}, {1}));
}

}  // namespace cartan::testing
