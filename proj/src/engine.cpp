#include "cartan/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cctype>
#include <cstdio>
#include <random>
#include <set>

#include "cartan/kernels.hpp"
#include "cartan/sampling.hpp"

namespace cartan {

void GStructureProblem::validate() const {
  if (!coframe) throw EngineError("problem has no coframe");
  if (!(coframe->chart() == chart)) throw EngineError("coframe chart differs from problem chart");
  if (group.n() != chart.dim()) {
    throw EngineError("group matrices are " + std::to_string(group.n()) + "x" +
                      std::to_string(group.n()) + " but the chart has dimension " +
                      std::to_string(chart.dim()));
  }
  try {
    group.validate();
  } catch (const GroupError& e) {
    throw EngineError(std::string("invalid structure group: ") + e.what());
  }
}

StructureTable torsion_table(const StructureTable& B, const ExprMatrix& g) {
  std::size_t n = g.rows();
  // eta = g^-1 theta; minors of the adjugate, the det^2 goes in once at the end
  Expr det = determinant(g);
  if (det.is_zero()) throw SingularError("structure group element is singular");
  ExprMatrix adj = adjugate(g);
  std::size_t np = pair_count(n);
  std::vector<std::vector<Expr>> minor(np, std::vector<Expr>(np));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t d = c + 1; d < n; ++d)
          minor[pair_index(n, a, b)][pair_index(n, c, d)] =
              adj(a, c) * adj(b, d) - adj(a, d) * adj(b, c);
  // D^l = B^l rewritten in the theta basis, up to 1/det^2
  StructureTable D(n, std::vector<Expr>(np));
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t ab = 0; ab < np; ++ab) {
      const Expr& b = B[l][ab];
      if (b.is_zero()) continue;
      for (std::size_t cd = 0; cd < np; ++cd)
        if (!minor[ab][cd].is_zero()) D[l][cd] += b * minor[ab][cd];
    }
  Expr scale = Expr(1) / (det * det);
  StructureTable C(n, std::vector<Expr>(np));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t cd = 0; cd < np; ++cd) {
      Expr s;
      for (std::size_t l = 0; l < n; ++l)
        if (!g(i, l).is_zero() && !D[l][cd].is_zero()) s += g(i, l) * D[l][cd];
      C[i][cd] = s * scale;
    }
  return C;
}

StructureData compute_structure_data(const GStructureProblem& p) {
  StructureData d;
  d.B = structure_functions(*p.coframe);
  d.C = torsion_table(d.B, p.group.entries);
  try {
    d.mc = right_mc(p.group);
  } catch (const GroupError& e) {
    throw EngineError(std::string("Maurer-Cartan basis: ") + e.what());
  }
  return d;
}

std::string AbsorptionSystem::unknown_name(std::size_t u) const {
  return "z" + std::to_string(u / n + 1) + "_" + std::to_string(u % n + 1);
}

std::vector<Symbol> target_symbols(const Chart& chart) {
  std::vector<Symbol> out;
  for (Symbol s : chart.coords()) {
    std::string name = s.name();
    std::string up = name;
    for (auto& ch : up) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (up == name) up = "T_" + name;
    auto existing = find_symbol(up);
    if (existing && existing->kind() != SymbolKind::jet_variable) up = "T_" + name;
    out.push_back(declare_symbol(up, SymbolKind::jet_variable));
  }
  return out;
}

Bindings to_target(const Chart& chart) {
  Bindings b;
  auto t = target_symbols(chart);
  for (std::size_t i = 0; i < t.size(); ++i) b[chart.coords()[i].id()] = Expr(t[i]);
  return b;
}

AbsorptionSystem build_absorption(const GStructureProblem& p, const StructureData& data,
                                  AbsorptionMode mode) {
  AbsorptionSystem sys;
  std::size_t n = p.n(), r = p.group.r();
  sys.n = n;
  sys.r = r;
  sys.mode = mode;
  std::size_t m = n * pair_count(n);
  sys.coeff = QMatrix(m, r * n);
  Bindings tgt;
  if (mode == AbsorptionMode::exact) tgt = to_target(p.chart);
  std::size_t e = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k, ++e) {
        sys.labels.push_back({i, j, k});
        for (std::size_t kap = 0; kap < r; ++kap) {
          const QMatrix& F = data.mc.F[kap];
          sys.coeff(e, sys.unknown(kap, j)) += F(i, k);
          sys.coeff(e, sys.unknown(kap, k)) -= F(i, j);
        }
        std::size_t pr = pair_index(n, j, k);
        sys.c.push_back(data.C[i][pr]);
        sys.lhs.push_back(mode == AbsorptionMode::exact ? substitute(data.B[i][pr], tgt) : Expr(0));
      }
  return sys;
}

AbsorptionSolution solve_absorption(const AbsorptionSystem& sys) {
  AbsorptionSolution sol;
  std::size_t m = sys.coeff.rows(), U = sys.coeff.cols();
  auto ech = rref(sys.coeff);
  std::size_t rk = ech.rank();
  std::vector<bool> is_pivot(U, false);
  for (std::size_t c : ech.pivots) is_pivot[c] = true;
  for (std::size_t u = 0; u < U; ++u) (is_pivot[u] ? sol.principal : sol.parametric).push_back(u);
  sol.P = QMatrix(U, U);
  sol.Q = QMatrix(U, m);
  for (std::size_t f : sol.parametric) sol.P(f, f) = 1;
  for (std::size_t q = 0; q < rk; ++q) {
    std::size_t piv = ech.pivots[q];
    for (std::size_t f : sol.parametric) sol.P(piv, f) = -ech.reduced(q, f);
    for (std::size_t e = 0; e < m; ++e) sol.Q(piv, e) = -ech.transform(q, e);
  }
  sol.c = sys.c;
  sol.lhs = sys.lhs;
  sol.r2 = U - rk;

  QMatrix rest(m - rk, m);
  for (std::size_t q = rk; q < m; ++q)
    for (std::size_t e = 0; e < m; ++e) rest(q - rk, e) = ech.transform(q, e);
  auto rr = rref(rest);
  sol.torsion_rows = QMatrix(rr.rank(), m);
  for (std::size_t t = 0; t < rr.rank(); ++t) {
    Expr h, j;
    for (std::size_t e = 0; e < m; ++e) {
      const Rational& w = rr.reduced(t, e);
      sol.torsion_rows(t, e) = w;
      if (w == 0) continue;
      // horizontal remainder lhs - c after absorption; H(x,g) = J(X)
      h -= Expr(w) * sys.c[e];
      j -= Expr(w) * sys.lhs[e];
    }
    sol.torsion.push_back(h);
    sol.torsion_target.push_back(j);
  }
  return sol;
}

std::string to_string(TorsionKind k) {
  switch (k) {
    case TorsionKind::trivial:
      return "trivial";
    case TorsionKind::group_dependent:
      return "group-dependent";
    case TorsionKind::genuine:
      return "genuine";
  }
  return "?";
}

std::string residual_label(const Expr& e) {
  // FNV-1a over the canonical print
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : e.str()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "h%012llx", static_cast<unsigned long long>(h & 0xffffffffffffull));
  return buf;
}

namespace {

std::vector<std::array<std::size_t, 3>> build_labels(std::size_t n) {
  std::vector<std::array<std::size_t, 3>> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) out.push_back({i, j, k});
  return out;
}

// Parameters are tested by identity, not kind: after prolongation the old
// parameters are chart coordinates.
bool depends_on_params(const Expr& e, const std::vector<Symbol>& params) {
  for (Symbol s : symbols_in(e))
    if (std::find(params.begin(), params.end(), s) != params.end()) return true;
  return false;
}

// Numeric Jacobian rows d f / d params at a random regular point.
std::optional<QMatrix> numeric_jacobian(const std::vector<Expr>& fs,
                                        const std::vector<Symbol>& params, std::mt19937_64& rng) {
  std::vector<std::vector<Expr>> J(fs.size(), std::vector<Expr>(params.size()));
  std::vector<Expr> all;
  for (std::size_t t = 0; t < fs.size(); ++t)
    for (std::size_t a = 0; a < params.size(); ++a) {
      J[t][a] = differentiate(fs[t], params[a]);
      all.push_back(J[t][a]);
    }
  for (const auto& f : fs) all.push_back(f);
  for (int attempt = 0; attempt < 20; ++attempt) {
    NumericPoint pt = random_point(all, rng);
    try {
      QMatrix M(fs.size(), params.size());
      for (std::size_t t = 0; t < fs.size(); ++t)
        for (std::size_t a = 0; a < params.size(); ++a) M(t, a) = eval_numeric(J[t][a], pt);
      return M;
    } catch (const EvalError&) {
    }
  }
  return std::nullopt;
}

}  // namespace

TorsionClassification classify_torsion(const AbsorptionSolution& sol, const ParamGroup& g,
                                       std::uint64_t seed) {
  TorsionClassification cls;
  std::vector<std::size_t> dependent;
  for (std::size_t t = 0; t < sol.torsion.size(); ++t) {
    const Expr& h = sol.torsion[t];
    TorsionKind k = TorsionKind::trivial;
    if (!h.is_constant()) k = depends_on_params(h, g.params) ? TorsionKind::group_dependent : TorsionKind::genuine;
    cls.kinds.push_back(k);
    if (k == TorsionKind::genuine) cls.constant_type = false;
    if (k == TorsionKind::group_dependent) dependent.push_back(t);
  }
  if (dependent.empty()) return cls;
  std::mt19937_64 rng(seed ^ 0x7a11);
  std::vector<Expr> fs;
  for (std::size_t t : dependent) fs.push_back(sol.torsion[t]);
  auto J = numeric_jacobian(fs, g.params, rng);
  if (!J) throw EngineError("cannot find a regular point for the torsion Jacobian");
  // greedy: keep a residual iff its Jacobian row raises the rank
  std::vector<std::vector<Rational>> kept;
  for (std::size_t t = 0; t < dependent.size(); ++t) {
    QMatrix trial(kept.size() + 1, g.r());
    for (std::size_t k = 0; k < kept.size(); ++k)
      for (std::size_t a = 0; a < g.r(); ++a) trial(k, a) = kept[k][a];
    for (std::size_t a = 0; a < g.r(); ++a) trial(kept.size(), a) = (*J)(t, a);
    if (rank(trial) > kept.size()) {
      kept.push_back(J->row(t));
      cls.normalizable.push_back(dependent[t]);
    } else {
      cls.deferred.push_back(dependent[t]);
    }
  }
  cls.group_rank = kept.size();
  cls.full_rank = cls.deferred.empty();
  return cls;
}

}  // namespace cartan

namespace cartan {

namespace {

bool has_non_params(const Expr& e, const std::vector<Symbol>& params) {
  for (IndetId v : indeterminates(e)) {
    bool hit = false;
    for (Symbol a : params) hit = hit || a.id() == v;
    if (!hit) return true;
  }
  return false;
}

// Solves eq = 0 for the first listed parameter in which its numerator is affine.
std::optional<std::pair<Symbol, Expr>> solve_affine(const Expr& eq,
                                                    const std::vector<Symbol>& candidates) {
  const Poly& num = eq.num();
  for (Symbol a : candidates) {
    if (num.degree_in(a.id()) != 1) continue;
    auto c = num.coefficients_in(a.id());
    Expr value = -Expr::fraction(c[0], 1) / Expr::fraction(c[1], 1);
    try {
      if (!substitute(eq, {{a.id(), value}}).is_zero()) continue;
    } catch (const SingularError&) {
      continue;
    }
    return std::make_pair(a, value);
  }
  return std::nullopt;
}

int generic_sign(const Expr& h, const ParamGroup& g, std::mt19937_64& rng) {
  std::vector<Expr> probes;
  try {
    probes.push_back(substitute(h, g.identity_bindings()));
  } catch (const SingularError&) {
  }
  probes.push_back(h);
  for (const auto& e : probes) {
    for (int attempt = 0; attempt < 10; ++attempt) {
      try {
        Rational v = eval_numeric(e, random_point({e}, rng, true));
        if (v != 0) return v > 0 ? 1 : -1;
      } catch (const EvalError&) {
      }
    }
  }
  return 1;
}

std::vector<Expr> residuals_for(const QMatrix& rows, const std::vector<std::size_t>& which,
                                const std::vector<Expr>& c) {
  std::vector<Expr> out;
  for (std::size_t t : which) {
    Expr h;
    for (std::size_t e = 0; e < c.size(); ++e)
      if (rows(t, e) != 0) h -= Expr(rows(t, e)) * c[e];
    out.push_back(h);
  }
  return out;
}

}  // namespace

ReductionResult reduce_group(const GStructureProblem& p, const StructureData& data,
                             const AbsorptionSolution& sol, const TorsionClassification& cls,
                             const Policy& policy) {
  ReductionResult res{p, {}};
  ReductionRecord& rec = res.record;
  if (cls.normalizable.empty()) return res;
  const ParamGroup& G = p.group;
  std::mt19937_64 rng(policy.seed ^ 0x5ec7);

  std::vector<Symbol> open = G.params;
  Bindings bound;
  std::vector<std::pair<Symbol, Expr>> solved;
  for (std::size_t t : cls.normalizable) {
    const Expr& h = sol.torsion[t];
    std::string label = residual_label(h);
    std::vector<Rational> tries;
    bool override = policy.targets.count(label) > 0;
    if (override) {
      tries.push_back(policy.targets.at(label));
    } else {
      tries.push_back(0);
    }
    Expr hb = substitute(h, bound);
    std::optional<std::pair<Symbol, Expr>> step;
    Rational target;
    for (std::size_t k = 0; k < tries.size() + 1 && !step; ++k) {
      if (k == tries.size()) {
        if (override) break;
        int sgn = generic_sign(h, G, rng);
        target = sgn;
        rec.branch_notes.push_back("target 0 not solvable for " + label + "; using generic sign " +
                                   std::to_string(sgn) +
                                   " (identity parameters, positive sample point)");
      } else {
        target = tries[k];
      }
      step = solve_affine(hb - Expr(target), open);
    }
    if (!step) {
      throw ReductionError("residual " + h.str() + " cannot be normalized by triangular elimination",
                           {h});
    }
    rec.residuals.push_back(h);
    rec.labels.push_back(label);
    rec.targets.push_back(target);
    open.erase(std::find(open.begin(), open.end(), step->first));
    for (auto& [a, e] : solved) e = substitute(e, {{step->first.id(), step->second}});
    solved.push_back(*step);
    bound[step->first.id()] = step->second;
  }

  // section: remaining parameters at the identity
  Bindings section;
  for (Symbol a : open) section[a.id()] = Expr(G.identity.at(a.id()));
  for (auto it = solved.rbegin(); it != solved.rend(); ++it) {
    Expr v = substitute(it->second, section);
    section[it->first.id()] = v;
  }
  for (auto& [a, e] : solved) rec.normalization.emplace_back(a, section.at(a.id()));
  rec.section = substitute(G.entries, section);
  if (determinant(rec.section).is_zero()) {
    throw ReductionError("normalization section is singular", rec.residuals);
  }

  for (std::size_t d : cls.deferred) {
    Expr v = substitute(sol.torsion[d], section);
    if (!v.is_constant()) rec.genuine.push_back(v);
  }

  // isotropy of the targets: H(x, h g0(x)) = b solved for the parameters of h
  ExprMatrix hg = G.entries * rec.section;
  StructureTable C2 = torsion_table(data.B, hg);
  std::vector<Expr> c2;
  for (const auto& lbl : build_labels(p.n())) c2.push_back(C2[lbl[0]][pair_index(p.n(), lbl[1], lbl[2])]);
  std::vector<Expr> h2 = residuals_for(sol.torsion_rows, cls.normalizable, c2);
  for (std::size_t t = 0; t < h2.size(); ++t) h2[t] -= Expr(rec.targets[t]);

  auto J = numeric_jacobian(h2, G.params, rng);
  rec.transitive = J && rank(*J) == h2.size();
  if (!rec.transitive) {
    throw ReductionError("group action on the residual range is not generically transitive",
                         rec.residuals);
  }

  std::vector<Symbol> free = G.params;
  Bindings iso;
  for (std::size_t t = 0; t < h2.size(); ++t) {
    Expr eq = substitute(h2[t], iso);
    auto step = solve_affine(eq, free);
    if (!step || has_non_params(step->second, G.params)) {
      throw ReductionError("isotropy condition " + eq.str() + " = 0 is not solvable by triangular "
                           "elimination in the group parameters",
                           rec.residuals);
    }
    for (auto& [a, e] : rec.isotropy) e = substitute(e, {{step->first.id(), step->second}});
    for (auto& [k, e] : iso) e = substitute(e, {{step->first.id(), step->second}});
    rec.isotropy.push_back(*step);
    iso[step->first.id()] = step->second;
    free.erase(std::find(free.begin(), free.end(), step->first));
  }

  GStructureProblem& q = res.problem;
  q.stage = p.stage + 1;
  ParamGroup ng;
  ng.params = free;
  ng.entries = substitute(G.entries, iso);
  for (Symbol a : free) ng.identity[a.id()] = G.identity.at(a.id());
  q.group = ng;
  q.coframe = std::make_shared<const Coframe>(p.chart, p.coframe->names(),
                                              rec.section * p.coframe->transition());
  std::string note = "reduction:";
  for (auto& [a, e] : rec.normalization) note += " " + a.name() + " = " + e.str() + ";";
  for (auto& [a, e] : rec.isotropy) note += " isotropy " + a.name() + " = " + e.str() + ";";
  q.provenance.push_back(note);
  return res;
}

}  // namespace cartan

namespace cartan {

namespace {

Symbol direction_symbol(std::size_t k, std::size_t l) {
  return declare_symbol("dir_v" + std::to_string(k + 1) + "_" + std::to_string(l + 1),
                        SymbolKind::auxiliary);
}

// Rank with k generic directions over Q(v); fraction-free elimination keeps
// entries polynomial.
std::size_t generic_rank(const std::vector<QMatrix>& F, std::size_t k) {
  std::size_t r = F.size();
  std::size_t n = F[0].cols(), block = F[0].rows();
  std::size_t rows = k * block;
  std::vector<std::vector<Poly>> m(rows, std::vector<Poly>(r));
  for (std::size_t d = 0; d < k; ++d)
    for (std::size_t kap = 0; kap < r; ++kap)
      for (std::size_t i = 0; i < block; ++i) {
        Poly acc;
        for (std::size_t l = 0; l < n; ++l)
          if (F[kap](i, l) != 0) acc += Poly::variable(direction_symbol(d, l).id()) * Poly(F[kap](i, l));
        m[d * block + i][kap] = acc;
      }
  Poly prev(Rational(1));
  std::size_t rk = 0;
  for (std::size_t c = 0; c < r && rk < rows; ++c) {
    std::size_t piv = rk;
    while (piv < rows && m[piv][c].is_zero()) ++piv;
    if (piv == rows) continue;
    std::swap(m[piv], m[rk]);
    for (std::size_t i = rk + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < r; ++j) {
        Poly t = m[rk][c] * m[i][j] - m[i][c] * m[rk][j];
        auto q = divide_exact(t, prev);
        if (!q) throw EngineError("fraction-free elimination lost exactness");
        m[i][j] = *q;
      }
      m[i][c] = Poly();
    }
    prev = m[rk][c];
    ++rk;
  }
  return rk;
}

}  // namespace

CharacterReport characters_from_tables(const std::vector<QMatrix>& F, std::size_t r2,
                                       std::uint64_t seed) {
  CharacterReport rep;
  rep.r2 = r2;
  if (F.empty()) throw EngineError("character tables are empty; the caller knows the dimension");
  std::size_t n = F[0].cols();
  auto grid = kernels::direction_grid(n, 50, seed ^ 0xc4a7);
  QMatrix stacked(0, F.size());
  std::size_t prev_generic = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    std::size_t gk = generic_rank(F, k);
    auto pick = kernels::best_direction_omp(F, stacked, grid);
    stacked = kernels::stack(stacked, kernels::contract(F, grid[pick.index]));
    rep.witnesses.push_back(grid[pick.index]);
    if (pick.rank != gk) rep.certified = false;
    rep.s.push_back(gk - prev_generic);
    prev_generic = gk;
  }
  std::size_t weighted = 0;
  for (std::size_t i = 0; i < rep.s.size(); ++i) weighted += (i + 1) * rep.s[i];
  rep.involutive = (r2 == weighted);
  return rep;
}

CharacterReport cartan_characters(const StructureData& data, const AbsorptionSolution& sol,
                                  std::uint64_t seed) {
  return characters_from_tables(data.mc.F, sol.r2, seed);
}

}  // namespace cartan

namespace cartan {

GStructureProblem prolong(const GStructureProblem& p, const StructureData& data,
                          const AbsorptionSolution& sol) {
  const std::size_t n = p.n(), r = p.group.r();
  const ParamGroup& G = p.group;
  const std::size_t N = n + r;

  std::vector<Symbol> coords = p.chart.coords();
  coords.insert(coords.end(), G.params.begin(), G.params.end());
  Chart chart(coords);

  ExprMatrix gA = G.entries * p.coframe->transition();
  // particular absorption solution w^kappa_j = sum_e Q(kappa j, e) (c_e - lhs_e)
  std::vector<Expr> rhs(sol.c.size());
  for (std::size_t e = 0; e < rhs.size(); ++e) rhs[e] = sol.c[e] - sol.lhs[e];
  ExprMatrix W(r, n);
  for (std::size_t kap = 0; kap < r; ++kap)
    for (std::size_t j = 0; j < n; ++j) {
      Expr acc;
      for (std::size_t e = 0; e < rhs.size(); ++e) {
        const Rational& q = sol.Q(kap * n + j, e);
        if (q != 0) acc += Expr(q) * rhs[e];
      }
      W(kap, j) = acc;
    }

  ExprMatrix A(N, N);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) A(i, j) = gA(i, j);
  ExprMatrix WgA = W * gA;
  for (std::size_t kap = 0; kap < r; ++kap) {
    for (std::size_t j = 0; j < n; ++j) A(n + kap, j) = -WgA(kap, j);
    for (std::size_t m = 0; m < r; ++m) A(n + kap, n + m) = data.mc.alpha[kap][m];
  }
  std::vector<std::string> names = p.coframe->names();
  for (std::size_t kap = 0; kap < r; ++kap)
    names.push_back("pi" + std::to_string(p.stage + 1) + "_" + std::to_string(kap + 1));

  GStructureProblem q;
  q.chart = chart;
  q.coframe = std::make_shared<const Coframe>(chart, names, A);
  q.stage = p.stage + 1;
  q.provenance = p.provenance;
  q.provenance.push_back("prolongation: " + std::to_string(sol.parametric.size()) +
                         " new parameters");

  ParamGroup g2;
  for (std::size_t f = 0; f < sol.parametric.size(); ++f) {
    Symbol v = declare_symbol("v" + std::to_string(q.stage) + "_" + std::to_string(f + 1),
                              SymbolKind::group_parameter);
    g2.params.push_back(v);
    g2.identity[v.id()] = 0;
  }
  g2.entries = ExprMatrix::identity(N);
  for (std::size_t kap = 0; kap < r; ++kap)
    for (std::size_t j = 0; j < n; ++j) {
      Expr acc;
      for (std::size_t f = 0; f < sol.parametric.size(); ++f) {
        const Rational& w = sol.P(kap * n + j, sol.parametric[f]);
        if (w != 0) acc += Expr(w) * Expr(g2.params[f]);
      }
      g2.entries(n + kap, j) = acc;
    }
  q.group = g2;
  return q;
}

}  // namespace cartan

namespace cartan {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::involutive: return "involutive";
    case Outcome::e_structure: return "e-structure";
    case Outcome::constant_type_violation: return "constant-type-violation";
    case Outcome::cap_exceeded: return "cap-exceeded";
    case Outcome::failed: return "failed";
  }
  return "failed";
}

int EquivalenceReport::exit_code() const {
  switch (outcome) {
    case Outcome::involutive:
    case Outcome::e_structure: return 0;
    case Outcome::constant_type_violation: return 2;
    case Outcome::cap_exceeded: return 3;
    case Outcome::failed: return 1;
  }
  return 1;
}

namespace {

std::vector<std::string> coframe_rows(const Coframe& f) {
  std::vector<std::string> rows;
  const auto& A = f.transition();
  const auto& coords = f.chart().coords();
  for (std::size_t i = 0; i < A.rows(); ++i) {
    std::string row;
    for (std::size_t j = 0; j < A.cols(); ++j) {
      if (A(i, j).is_zero()) continue;
      if (!row.empty()) row += " + ";
      row += "(" + A(i, j).str() + ")*d" + coords[j].name();
    }
    rows.push_back(row.empty() ? "0" : row);
  }
  return rows;
}

void describe(StageReport& st, const GStructureProblem& p) {
  st.stage = p.stage;
  st.n = p.n();
  st.r = p.group.r();
  st.coframe = coframe_rows(*p.coframe);
  for (std::size_t i = 0; i < p.group.entries.rows(); ++i) {
    std::vector<std::string> row;
    for (std::size_t j = 0; j < p.group.entries.cols(); ++j) row.push_back(p.group.entries(i, j).str());
    st.group.push_back(row);
  }
  for (Symbol a : p.group.params) st.params.push_back(a.name());
}

}  // namespace

EquivalenceReport run_loop(const GStructureProblem& start, const Policy& policy) {
  EquivalenceReport rep;
  rep.seed = policy.seed;
  GStructureProblem p = start;
  p.validate();
  for (int loop = 0; loop < policy.max_loops; ++loop) {
    auto t0 = std::chrono::steady_clock::now();
    StageReport st;
    describe(st, p);
    auto finish = [&](std::string verdict) {
      st.verdict = std::move(verdict);
      st.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      rep.stages.push_back(st);
    };
    StructureData data = compute_structure_data(p);
    for (auto [i, j] : data.mc.chosen) st.mc_basis.push_back({i, j});
    AbsorptionSystem sys = build_absorption(p, data, AbsorptionMode::normalized);
    AbsorptionSolution sol = solve_absorption(sys);
    st.equations = sys.coeff.rows();
    st.unknowns = sys.coeff.cols();
    st.r2 = sol.r2;
    TorsionClassification cls = classify_torsion(sol, p.group, policy.seed);
    for (std::size_t t = 0; t < sol.torsion.size(); ++t)
      st.torsion.push_back({sol.torsion[t].str(), residual_label(sol.torsion[t]), cls.kinds[t]});

    if (p.group.r() == 0) {
      // no group left: the torsion entries are the invariants of the coframe
      std::vector<std::string> invariants;
      for (std::size_t t = 0; t < sol.torsion.size(); ++t)
        if (cls.kinds[t] != TorsionKind::trivial) invariants.push_back(sol.torsion[t].str());
      CharacterReport none;
      none.s.assign(p.n(), 0);
      none.r2 = sol.r2;
      none.involutive = true;
      st.characters = none;
      st.cartan_test = true;
      if (p.stage == 0 && invariants.empty()) {
        rep.outcome = Outcome::involutive;
        finish("involutive");
      } else {
        rep.outcome = Outcome::e_structure;
        rep.invariants = invariants;
        finish("e-structure");
      }
      return rep;
    }

    if (!cls.constant_type) {
      for (std::size_t t = 0; t < sol.torsion.size(); ++t)
        if (cls.kinds[t] == TorsionKind::genuine) rep.invariants.push_back(sol.torsion[t].str());
      rep.outcome = Outcome::constant_type_violation;
      rep.diagnostic = "torsion depends on the base point only: " + rep.invariants.front();
      finish("constant-type-violation");
      return rep;
    }

    if (!cls.normalizable.empty()) {
      try {
        ReductionResult red = reduce_group(p, data, sol, cls, policy);
        st.reduction = red.record;
        if (!red.record.genuine.empty()) {
          for (const auto& g : red.record.genuine) rep.invariants.push_back(g.str());
          rep.outcome = Outcome::constant_type_violation;
          rep.diagnostic = "residual not normalized by the reduction depends on the base point: " +
                           rep.invariants.front();
          finish("constant-type-violation");
          return rep;
        }
        p = red.problem;
        finish("reduced");
        continue;
      } catch (const ReductionError& e) {
        rep.outcome = Outcome::failed;
        rep.diagnostic = e.what();
        finish("reduction-failed");
        return rep;
      }
    }

    st.characters = cartan_characters(data, sol, policy.seed);
    st.cartan_test = st.characters->involutive;
    if (st.characters->involutive) {
      rep.outcome = Outcome::involutive;
      finish("involutive");
      return rep;
    }
    GStructureProblem next = prolong(p, data, sol);
    finish("prolonged");
    p = std::move(next);
  }
  rep.outcome = Outcome::cap_exceeded;
  rep.diagnostic = "iteration cap of " + std::to_string(policy.max_loops) + " loops reached";
  return rep;
}

}  // namespace cartan
