#include "cartan/jet.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "cartan/forms.hpp"
#include "cartan/group.hpp"
#include "cartan/sampling.hpp"

namespace cartan {

int JetVar::order() const { return std::accumulate(mi.begin(), mi.end(), 0); }

JetSpace::JetSpace(std::vector<Symbol> independents, std::vector<Symbol> dependents)
    : x_(std::move(independents)), u_(std::move(dependents)) {
  for (std::size_t a = 0; a < u_.size(); ++a) {
    MultiIndex zero(x_.size(), 0);
    info_[u_[a].id()] = {a, zero};
    by_index_[{a, zero}] = u_[a];
  }
}

Symbol JetSpace::jet(std::size_t dep, const MultiIndex& mi) {
  auto it = by_index_.find({dep, mi});
  if (it != by_index_.end()) return it->second;
  bool short_names = std::all_of(x_.begin(), x_.end(), [](Symbol s) { return s.name().size() == 1; });
  std::string name = u_.at(dep).name() + "_";
  bool first = true;
  for (std::size_t i = 0; i < x_.size(); ++i)
    for (int c = 0; c < mi[i]; ++c) {
      if (!short_names && !first) name += "_";
      name += x_[i].name();
      first = false;
    }
  Symbol s = declare_symbol(name, SymbolKind::jet_variable);
  info_[s.id()] = {dep, mi};
  by_index_[{dep, mi}] = s;
  return s;
}

Symbol JetSpace::derive(Symbol s, std::size_t i) {
  auto v = info(s.id());
  if (!v) throw JetError(s.name() + " is not a jet variable");
  MultiIndex mi = v->mi;
  ++mi[i];
  return jet(v->dep, mi);
}

std::optional<JetVar> JetSpace::info(IndetId v) const {
  auto it = info_.find(v);
  if (it == info_.end()) return std::nullopt;
  return it->second;
}

namespace {

void multi_indices(std::size_t n, int q, std::size_t pos, MultiIndex& cur,
                   std::vector<MultiIndex>& out) {
  if (pos + 1 == n) {
    cur[pos] = q;
    out.push_back(cur);
    return;
  }
  for (int c = q; c >= 0; --c) {
    cur[pos] = c;
    multi_indices(n, q - c, pos + 1, cur, out);
  }
  cur[pos] = 0;
}

}  // namespace

std::vector<Symbol> JetSpace::jets_of_order(int q) {
  std::vector<Symbol> out;
  if (x_.empty()) return q == 0 ? u_ : out;
  std::vector<MultiIndex> mis;
  MultiIndex cur(x_.size(), 0);
  multi_indices(x_.size(), q, 0, cur, mis);
  for (std::size_t a = 0; a < u_.size(); ++a)
    for (const auto& mi : mis) out.push_back(jet(a, mi));
  return out;
}

std::vector<Symbol> JetSpace::jets_in(const Expr& e) const {
  std::vector<Symbol> out;
  for (Symbol s : symbols_in(e))
    if (info_.count(s.id())) out.push_back(s);
  return out;
}

int JetSpace::order(const Expr& e) const {
  int q = -1;
  for (Symbol s : jets_in(e)) q = std::max(q, info_.at(s.id()).order());
  return q;
}

bool JetSpace::ranks_above(Symbol a, Symbol b) const {
  const JetVar& x = info_.at(a.id());
  const JetVar& y = info_.at(b.id());
  if (x.order() != y.order()) return x.order() > y.order();
  if (x.dep != y.dep) return x.dep > y.dep;
  return x.mi > y.mi;
}

Expr total_derivative(JetSpace& space, const Expr& e, std::size_t i) {
  Expr out = differentiate(e, space.independents().at(i));
  for (Symbol s : space.jets_in(e)) {
    Expr d = differentiate(e, s);
    if (!d.is_zero()) out += d * Expr(space.derive(s, i));
  }
  return out;
}

JetSystem::JetSystem(JetSpacePtr space, std::vector<JetEquation> eqs, int order)
    : space_(std::move(space)), eqs_(std::move(eqs)), q_(order) {
  for (std::size_t k = 0; k < eqs_.size(); ++k) {
    if (!space_->info(eqs_[k].lhs.id())) throw JetError(eqs_[k].lhs.name() + " is not a jet variable");
    if (!index_.emplace(eqs_[k].lhs.id(), k).second)
      throw JetError("principal derivative " + eqs_[k].lhs.name() + " has two equations");
  }
  for (const auto& eq : eqs_) {
    for (Symbol s : space_->jets_in(eq.rhs))
      if (index_.count(s.id()))
        throw JetError("principal derivative " + s.name() + " occurs on the right side of " +
                       eq.lhs.name());
    if (equation_order(eq) > q_)
      throw JetError("equation for " + eq.lhs.name() + " exceeds the system order");
  }
}

const Expr& JetSystem::rhs_of(Symbol s) const { return eqs_.at(index_.at(s.id())).rhs; }

Expr JetSystem::reduce(const Expr& e) const {
  Bindings b;
  for (Symbol s : space_->jets_in(e)) {
    auto it = index_.find(s.id());
    if (it != index_.end()) b[s.id()] = eqs_[it->second].rhs;
  }
  return b.empty() ? e : substitute(e, b);
}

std::vector<Symbol> JetSystem::parametric(int q) const {
  std::vector<Symbol> out;
  for (Symbol s : space_->jets_of_order(q))
    if (!is_principal(s)) out.push_back(s);
  return out;
}

int JetSystem::equation_order(const JetEquation& eq) const {
  return std::max(space_->info(eq.lhs.id())->order(), space_->order(eq.rhs));
}

std::string JetSystem::str() const {
  std::ostringstream os;
  for (const auto& eq : eqs_) os << eq.lhs.name() << " = " << eq.rhs << "\n";
  return os.str();
}

namespace {

std::optional<std::pair<Symbol, Expr>> solve_for_jet(const JetSpace& S, const Expr& e) {
  auto jets = S.jets_in(e);
  std::sort(jets.begin(), jets.end(), [&](Symbol a, Symbol b) { return S.ranks_above(a, b); });
  const Poly& num = e.num();
  for (Symbol j : jets) {
    if (num.degree_in(j.id()) != 1) continue;
    auto c = num.coefficients_in(j.id());
    Expr value = -Expr::fraction(c[0], 1) / Expr::fraction(c[1], 1);
    try {
      // rejects jets hidden inside opaque arguments
      if (!substitute(e, {{j.id(), value}}).is_zero()) continue;
    } catch (const SingularError&) {
      continue;
    }
    return std::make_pair(j, value);
  }
  return std::nullopt;
}

}  // namespace

JetSystem adjoin(const JetSystem& R, const Expr& e) {
  Expr c = R.reduce(e);
  if (c.is_zero()) return R;
  const JetSpace& S = *R.space();
  if (S.jets_in(c).empty()) {
    if (c.is_constant()) throw JetError("inconsistent condition " + c.str() + " = 0");
    throw JetError("non-genuine condition on the independents only: " + c.str() + " = 0");
  }
  auto sol = solve_for_jet(S, c);
  if (!sol) throw JetError("condition " + c.str() + " = 0 cannot be put in solved form");
  std::vector<JetEquation> eqs;
  Bindings b{{sol->first.id(), sol->second}};
  for (const auto& eq : R.equations()) eqs.push_back({eq.lhs, substitute(eq.rhs, b)});
  eqs.push_back({sol->first, sol->second});
  int order = std::max(R.order(), std::max(S.order(Expr(sol->first)), S.order(sol->second)));
  return JetSystem(R.space(), std::move(eqs), order);
}

std::vector<JetEquation> ProlongedSystem::top() const {
  const auto& ech = echelon;
  std::vector<bool> pivot(top_jets.size(), false);
  for (std::size_t c : ech.pivots) pivot[c] = true;
  std::vector<JetEquation> out;
  for (std::size_t qi = 0; qi < ech.rank(); ++qi) {
    Expr rhs;
    for (std::size_t f = 0; f < top_jets.size(); ++f)
      if (!pivot[f] && !ech.reduced(qi, f).is_zero()) rhs -= ech.reduced(qi, f) * Expr(top_jets[f]);
    for (std::size_t e = 0; e < remainders.size(); ++e)
      if (!ech.transform(qi, e).is_zero()) rhs -= ech.transform(qi, e) * remainders[e];
    out.push_back({top_jets[ech.pivots[qi]], rhs});
  }
  return out;
}

JetSystem ProlongedSystem::as_system() const {
  auto eqs = base.equations();
  auto t = top();
  eqs.insert(eqs.end(), t.begin(), t.end());
  return JetSystem(base.space(), std::move(eqs), base.order() + 1);
}

ProlongedSystem prolong_system(const JetSystem& R) {
  JetSpace& S = *R.space();
  const int q = R.order();
  ProlongedSystem P{R, {}, 0, S.jets_of_order(q + 1), {}, {}};
  const auto& top = P.top_jets;
  std::map<IndetId, std::size_t> col;
  for (std::size_t t = 0; t < top.size(); ++t) col[top[t].id()] = t;

  std::vector<Expr> rows;
  for (const auto& eq : R.equations())
    for (std::size_t i = 0; i < S.n(); ++i)
      rows.push_back(R.reduce(Expr(S.derive(eq.lhs, i)) - total_derivative(S, eq.rhs, i)));

  ExprMatrix C(rows.size(), top.size());
  auto& d = P.remainders;
  d.resize(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    Bindings zero;
    for (Symbol s : S.jets_in(rows[k])) {
      auto it = col.find(s.id());
      if (it == col.end()) continue;
      Expr c = differentiate(rows[k], s);
      if (S.order(c) > q) throw JetError("prolongation is not linear in the top-order jets");
      C(k, it->second) = c;
      zero[s.id()] = Expr(0);
    }
    d[k] = zero.empty() ? rows[k] : substitute(rows[k], zero);
  }

  P.echelon = rref(C);
  const auto& ech = P.echelon;
  std::size_t rk = ech.rank();
  for (std::size_t qi = rk; qi < rows.size(); ++qi) {
    Expr c;
    for (std::size_t e = 0; e < rows.size(); ++e)
      if (!ech.transform(qi, e).is_zero()) c += ech.transform(qi, e) * d[e];
    c = R.reduce(c);
    if (!c.is_zero()) P.conditions.push_back(c);
  }
  P.parametric_next = top.size() - rk;
  return P;
}

Projection project_integrability(const ProlongedSystem& P) {
  Projection out{{}, P.base};
  // smallest first: a large condition may be a multiple of a small one, and
  // solving the multiple would pick a spurious branch
  std::vector<Expr> pending = P.conditions;
  while (!pending.empty()) {
    std::vector<Expr> left;
    for (const auto& c : pending) {
      Expr e = out.reduced.reduce(c);
      if (!e.is_zero()) left.push_back(e);
    }
    if (left.empty()) break;
    auto it = std::min_element(left.begin(), left.end(), [](const Expr& a, const Expr& b) {
      return a.num().terms().size() + a.den().terms().size() <
             b.num().terms().size() + b.den().terms().size();
    });
    out.reduced = adjoin(out.reduced, *it);
    out.conditions.push_back(*it);
    left.erase(it);
    pending = std::move(left);
  }
  if (!out.conditions.empty()) out.reduced = complete_to_order(out.reduced);
  return out;
}

JetSystem complete_to_order(const JetSystem& start) {
  JetSystem R = start;
  JetSpace& S = *R.space();
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& eq : R.equations()) {
      if (R.equation_order(eq) >= R.order()) continue;
      for (std::size_t i = 0; i < S.n() && !changed; ++i) {
        Expr e = R.reduce(Expr(S.derive(eq.lhs, i)) - total_derivative(S, eq.rhs, i));
        if (e.is_zero()) continue;
        R = adjoin(R, e);
        changed = true;
      }
      if (changed) break;
    }
  }
  return R;
}

namespace {

// Symbolic tables d u^alpha_{J+l} / d p_rho.
std::vector<std::vector<std::vector<Expr>>> symbolic_tables(const JetSystem& R) {
  JetSpace& S = *R.space();
  const int q = R.order();
  if (q < 1) throw JetError("characters need a system of order at least one");
  auto params = R.parametric(q);
  auto rows = S.jets_of_order(q - 1);
  std::vector<std::vector<std::vector<Expr>>> T(
      params.size(), std::vector<std::vector<Expr>>(rows.size(), std::vector<Expr>(S.n())));
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t l = 0; l < S.n(); ++l) {
      Symbol w = S.derive(rows[a], l);
      Expr ew = R.is_principal(w) ? R.rhs_of(w) : Expr(w);
      for (std::size_t rho = 0; rho < params.size(); ++rho) T[rho][a][l] = differentiate(ew, params[rho]);
    }
  return T;
}

std::vector<QMatrix> evaluate_tables(const std::vector<std::vector<std::vector<Expr>>>& T,
                                     const NumericPoint& pt) {
  std::vector<QMatrix> out;
  for (const auto& tab : T) {
    QMatrix m(tab.size(), tab.empty() ? 0 : tab[0].size());
    for (std::size_t a = 0; a < tab.size(); ++a)
      for (std::size_t l = 0; l < tab[a].size(); ++l)
        m(a, l) = tab[a][l].is_constant() ? tab[a][l].constant_value() : eval_numeric(tab[a][l], pt);
    out.push_back(m);
  }
  return out;
}

CharacterReport characters_with(const JetSystem& R, std::size_t r_next, std::uint64_t seed) {
  auto T = symbolic_tables(R);
  const std::size_t n = R.space()->n();
  if (T.empty()) {
    CharacterReport rep;
    rep.s.assign(n, 0);
    rep.r2 = r_next;
    rep.involutive = (r_next == 0);
    return rep;
  }
  std::vector<Expr> all;
  for (const auto& tab : T)
    for (const auto& row : tab) all.insert(all.end(), row.begin(), row.end());
  std::mt19937_64 rng(seed ^ 0x1e7);
  std::optional<CharacterReport> first;
  // regularity is monitored: the characters must agree at three generic points
  for (int k = 0; k < 3; ++k) {
    std::vector<QMatrix> tables;
    for (int attempt = 0;; ++attempt) {
      try {
        tables = evaluate_tables(T, random_point(all, rng, true));
        break;
      } catch (const EvalError&) {
        if (attempt > 20) throw JetError("no regular point found for the character tables");
      }
    }
    CharacterReport rep = characters_from_tables(tables, r_next, seed);
    if (!first) {
      first = rep;
    } else if (rep.s != first->s) {
      throw JetError("reduced characters differ between generic points; the system is not "
                     "regular at order " + std::to_string(R.order()));
    }
  }
  return *first;
}

}  // namespace

std::vector<QMatrix> jet_character_tables(const JetSystem& R, const NumericPoint& pt) {
  return evaluate_tables(symbolic_tables(R), pt);
}

CharacterReport jet_characters(const JetSystem& R, std::uint64_t seed) {
  return characters_with(R, prolong_system(R).parametric_next, seed);
}

InvolutionResult complete_to_involution(const JetSystem& start, int cap, std::uint64_t seed) {
  if (cap < 1) throw JetError("iteration cap must be at least 1");
  InvolutionResult res;
  JetSystem R = complete_to_order(start);
  for (int rounds = 0;; ++rounds) {
    if (rounds > 64 * cap) throw JetError("integrability projection does not stabilize");
    ProlongedSystem P = prolong_system(R);
    Projection proj = project_integrability(P);
    JetLoopRecord rec;
    rec.order = R.order();
    if (!proj.conditions.empty()) {
      for (const auto& c : proj.conditions) rec.conditions.push_back(c.str() + " = 0");
      rec.verdict = "conditions";
      res.conditions += proj.conditions.size();
      res.log.push_back(rec);
      R = proj.reduced;
      continue;
    }
    rec.characters = characters_with(R, P.parametric_next, seed);
    if (rec.characters->involutive) {
      rec.verdict = "involutive";
      res.log.push_back(rec);
      res.final = R;
      return res;
    }
    if (res.prolongations >= cap)
      throw JetError("iteration cap of " + std::to_string(cap) + " prolongations reached");
    rec.verdict = "prolonged";
    res.log.push_back(rec);
    R = complete_to_order(P.as_system());
    ++res.prolongations;
  }
}

JetSystem encode_gstructure(const GStructureProblem& p) {
  const std::size_t n = p.n();
  auto space = std::make_shared<JetSpace>(p.chart.coords(), target_symbols(p.chart));
  ExprMatrix grad(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      MultiIndex mi(n, 0);
      mi[j] = 1;
      grad(i, j) = Expr(space->jet(i, mi));
    }
  ExprMatrix AX = substitute(p.coframe->transition(), to_target(p.chart));
  ExprMatrix g = AX * grad * p.coframe->inverse_transition();

  std::vector<Expr> membership = p.group.membership;
  if (membership.empty()) {
    auto derived = derive_membership(p.group);
    if (!derived) throw JetError("group membership equations are unavailable and cannot be derived");
    membership = *derived;
  }
  auto slots = slot_symbols(n);
  Bindings b;
  for (std::size_t e = 0; e < n * n; ++e) b[slots[e].id()] = g(e / n, e % n);
  JetSystem R(space, {}, 1);
  for (const auto& m : membership) R = adjoin(R, substitute(m, b));
  return R;
}

std::vector<Expr> exterior_conditions(const JetSystem& R) {
  JetSpace& S = *R.space();
  if (R.order() != 1) throw JetError("exterior conditions are implemented for first-order systems");
  for (const auto& eq : R.equations())
    if (S.info(eq.lhs.id())->order() != 1)
      throw JetError("exterior conditions need every principal derivative of order one");
  const std::size_t n = S.n(), m = S.m();
  auto params = R.parametric(1);
  const std::size_t np = params.size();

  std::vector<Symbol> coords = S.independents();
  coords.insert(coords.end(), S.dependents().begin(), S.dependents().end());
  coords.insert(coords.end(), params.begin(), params.end());
  const std::size_t N = coords.size();
  Chart chart(coords);
  auto frame = std::make_shared<const Coframe>(Coframe::coordinate(chart));

  // F[a][i]: u^a_i restricted to the system
  std::vector<std::vector<Expr>> F(m, std::vector<Expr>(n));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t i = 0; i < n; ++i) {
      MultiIndex mi(n, 0);
      mi[i] = 1;
      Symbol w = S.jet(a, mi);
      F[a][i] = R.is_principal(w) ? R.rhs_of(w) : Expr(w);
    }

  // coordinate differentials modulo contact, in the basis (dx, dp)
  const std::size_t B = n + np;
  std::vector<std::vector<Expr>> sub(N, std::vector<Expr>(B));
  for (std::size_t i = 0; i < n; ++i) sub[i][i] = 1;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t j = 0; j < n; ++j) sub[n + a][j] = F[a][j];
  for (std::size_t r = 0; r < np; ++r) sub[n + m + r][n + r] = 1;

  std::vector<std::array<std::size_t, 3>> labels;
  std::vector<Expr> torsion;
  ExprMatrix K(m * (n * (n - 1) / 2), np * n);
  std::size_t e = 0;
  for (std::size_t a = 0; a < m; ++a) {
    std::vector<Expr> c(N);
    c[n + a] = 1;
    for (std::size_t i = 0; i < n; ++i) c[i] = -F[a][i];
    DiffForm dU = exterior_derivative(DiffForm(frame, 1, c));
    // project the 2-form onto the reduced basis
    std::vector<std::vector<Expr>> W(B, std::vector<Expr>(B));
    for (std::size_t s = 0; s < N; ++s)
      for (std::size_t t = s + 1; t < N; ++t) {
        const Expr& w = dU.coeffs()[pair_index(N, s, t)];
        if (w.is_zero()) continue;
        for (std::size_t c1 = 0; c1 < B; ++c1) {
          if (sub[s][c1].is_zero()) continue;
          for (std::size_t c2 = 0; c2 < B; ++c2) {
            if (c1 == c2 || sub[t][c2].is_zero()) continue;
            Expr v = w * sub[s][c1] * sub[t][c2];
            if (c1 < c2)
              W[c1][c2] += v;
            else
              W[c2][c1] -= v;
          }
        }
      }
    // absorption dp^r -> dp^r + z_rj dx^j in the dx^j ^ dx^k coefficients
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k, ++e) {
        torsion.push_back(W[j][k]);
        for (std::size_t r = 0; r < np; ++r) {
          // W[j][n+r] dx^j ^ dp^r contributes W[j][n+r] z_rk dx^j ^ dx^k
          K(e, r * n + k) += W[j][n + r];
          K(e, r * n + j) -= W[k][n + r];
        }
      }
  }
  auto ech = rref(K);
  std::vector<Expr> out;
  for (std::size_t qi = ech.rank(); qi < torsion.size(); ++qi) {
    Expr c;
    for (std::size_t k = 0; k < torsion.size(); ++k)
      if (!ech.transform(qi, k).is_zero()) c += ech.transform(qi, k) * torsion[k];
    c = R.reduce(c);
    if (!c.is_zero()) out.push_back(c);
  }
  return out;
}

CrosscheckReport crosscheck(const GStructureProblem& start, const Policy& policy) {
  CrosscheckReport rep;
  GStructureProblem p = start;
  bool done = false;
  for (int loop = 0; loop < policy.max_loops && !done; ++loop) {
    StructureData data = compute_structure_data(p);
    AbsorptionSolution sol = solve_absorption(build_absorption(p, data, AbsorptionMode::normalized));
    TorsionClassification cls = classify_torsion(sol, p.group, policy.seed);
    if (p.group.r() == 0) {
      rep.engine.r2 = sol.r2;
      rep.engine.s.assign(p.n(), 0);
      rep.engine_log.push_back("stage " + std::to_string(p.stage) + ": trivial group");
      done = true;
      break;
    }
    if (!cls.constant_type) throw EngineError("constant-type violation on the engine path");
    if (!cls.normalizable.empty()) {
      auto red = reduce_group(p, data, sol, cls, policy);
      if (!red.record.genuine.empty()) throw EngineError("constant-type violation on the engine path");
      rep.engine.conditions += cls.normalizable.size();
      for (const auto& h : red.record.residuals)
        rep.engine_log.push_back("stage " + std::to_string(p.stage) + ": normalized " + h.str());
      p = red.problem;
      continue;
    }
    auto ch = cartan_characters(data, sol, policy.seed);
    rep.engine.r2 = sol.r2;
    rep.engine.s = ch.s;
    rep.engine_log.push_back("stage " + std::to_string(p.stage) + ": r2 " + std::to_string(sol.r2));
    done = true;
  }
  if (!done) throw EngineError("engine path did not settle within the iteration cap");

  JetSystem R = complete_to_order(encode_gstructure(start));
  rep.jet_log.push_back("encoded " + std::to_string(R.equations().size()) + " equations");
  for (int round = 0;; ++round) {
    if (round > 64) throw JetError("integrability projection does not stabilize");
    ProlongedSystem P = prolong_system(R);
    Projection proj = project_integrability(P);
    if (proj.conditions.empty()) {
      auto ch = characters_with(R, P.parametric_next, policy.seed);
      rep.jet.r2 = ch.r2;
      rep.jet.s = ch.s;
      rep.jet_log.push_back("order " + std::to_string(R.order()) + ": r2 " + std::to_string(ch.r2));
      break;
    }
    for (const auto& c : proj.conditions) rep.jet_log.push_back("condition " + c.str() + " = 0");
    rep.jet.conditions += proj.conditions.size();
    R = proj.reduced;
  }
  rep.equal = rep.engine == rep.jet;
  return rep;
}

bool crosscheck_characters(const GStructureProblem& p, const Policy& policy) {
  return crosscheck(p, policy).equal;
}

}  // namespace cartan
