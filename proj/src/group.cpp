#include "cartan/group.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace cartan {

std::vector<Symbol> slot_symbols(std::size_t n) {
  std::vector<Symbol> out;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= n; ++j) {
      std::string name = n <= 9 ? "g" + std::to_string(i) + std::to_string(j)
                                : "g" + std::to_string(i) + "_" + std::to_string(j);
      out.push_back(declare_symbol(name, SymbolKind::auxiliary));
    }
  return out;
}

Bindings ParamGroup::identity_bindings() const {
  Bindings b;
  for (auto& [id, v] : identity) b[id] = Expr(v);
  return b;
}

void ParamGroup::validate() const {
  std::size_t dim = n();
  if (dim == 0 || entries.cols() != dim) throw GroupError("group matrix must be square");
  if (r() > dim * dim) throw GroupError("more parameters than matrix entries");
  std::set<Symbol> seen(params.begin(), params.end());
  if (seen.size() != params.size()) throw GroupError("duplicate group parameter");
  for (Symbol s : params) {
    if (!identity.count(s.id())) throw GroupError("no identity value for parameter " + s.name());
  }
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      for (Symbol s : symbols_in(entries(i, j)))
        if (!seen.count(s)) throw GroupError("group entry depends on non-parameter " + s.name());
  if (determinant(entries).is_zero()) throw GroupError("group determinant is identically zero");
  ExprMatrix at_id;
  try {
    at_id = substitute(entries, identity_bindings());
  } catch (const SingularError&) {
    throw GroupError("identity values hit a pole of the parametrization");
  }
  if (!(at_id == ExprMatrix::identity(dim))) {
    throw GroupError("identity values do not give the identity matrix");
  }
}

ExprMatrix group_inverse(const ParamGroup& g) {
  try {
    return inverse(g.entries);
  } catch (const SingularError&) {
    throw GroupError("group determinant is identically zero");
  }
}

namespace {

NumericPoint random_params(const ParamGroup& g, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(-60, 60), den(1, 13);
  NumericPoint pt;
  for (Symbol s : g.params) {
    Rational q;
    do {
      q = Rational(num(rng), den(rng));
      q.canonicalize();
    } while (q == 0);
    pt[s.id()] = q;
  }
  return pt;
}

}  // namespace

MCBasis right_mc(const ParamGroup& g) {
  std::size_t n = g.n(), r = g.r();
  ExprMatrix ginv = group_inverse(g);
  MCBasis mc;
  for (Symbol a : g.params) mc.E.push_back(differentiate(g.entries, a) * ginv);

  auto entry_vector = [&](std::size_t i, std::size_t j) {
    std::vector<Expr> v(r);
    for (std::size_t m = 0; m < r; ++m) v[m] = mc.E[m](i, j);
    return v;
  };

  // row-major scan, independence tested at a generic point
  std::mt19937_64 rng(7);
  NumericPoint pt;
  for (int attempt = 0;; ++attempt) {
    pt = random_params(g, rng);
    try {
      for (const auto& e : mc.E) eval_numeric(e, pt);
      break;
    } catch (const EvalError&) {
      if (attempt > 20) throw GroupError("cannot find a regular point of the group");
    }
  }
  QMatrix kept(0, r);
  std::vector<std::vector<Rational>> rows;
  for (std::size_t i = 0; i < n && mc.chosen.size() < r; ++i)
    for (std::size_t j = 0; j < n && mc.chosen.size() < r; ++j) {
      auto v = entry_vector(i, j);
      std::vector<Rational> nv(r);
      for (std::size_t m = 0; m < r; ++m) nv[m] = eval_numeric(v[m], pt);
      QMatrix trial(rows.size() + 1, r);
      for (std::size_t k = 0; k < rows.size(); ++k)
        for (std::size_t m = 0; m < r; ++m) trial(k, m) = rows[k][m];
      for (std::size_t m = 0; m < r; ++m) trial(rows.size(), m) = nv[m];
      if (rank(trial) == rows.size() + 1) {
        rows.push_back(nv);
        mc.chosen.emplace_back(i, j);
        mc.alpha.push_back(v);
      }
    }
  if (mc.chosen.size() < r) {
    throw GroupError("parametrization is degenerate: only " + std::to_string(mc.chosen.size()) +
                     " independent entries of dg g^-1 for " + std::to_string(r) + " parameters");
  }

  ExprMatrix M(r, r);
  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t m = 0; m < r; ++m) M(k, m) = mc.alpha[k][m];
  ExprMatrix Minv;
  try {
    Minv = inverse(M);
  } catch (const SingularError&) {
    throw GroupError("chosen Maurer-Cartan entries are not independent");
  }

  mc.F.assign(r, QMatrix(n, n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      auto v = entry_vector(i, j);
      for (std::size_t k = 0; k < r; ++k) {
        Expr f;
        for (std::size_t m = 0; m < r; ++m)
          if (!v[m].is_zero() && !Minv(m, k).is_zero()) f += v[m] * Minv(m, k);
        if (!f.is_constant()) {
          throw GroupError("Maurer-Cartan coefficient F at (" + std::to_string(i + 1) + "," +
                           std::to_string(j + 1) + ") is not constant: " + f.str());
        }
        mc.F[k](i, j) = f.constant_value();
      }
    }
  return mc;
}

std::optional<std::vector<Expr>> derive_membership(const ParamGroup& g) {
  std::size_t n = g.n();
  auto slots = slot_symbols(n);
  Bindings solved;
  std::vector<bool> used(n * n, false);
  bool progress = true;
  while (progress && solved.size() < g.r()) {
    progress = false;
    for (std::size_t e = 0; e < n * n; ++e) {
      if (used[e]) continue;
      Expr entry = substitute(g.entries(e / n, e % n), solved);
      std::vector<Symbol> open;
      for (Symbol s : symbols_in(entry))
        if (s.kind() == SymbolKind::group_parameter && !solved.count(s.id())) open.push_back(s);
      if (open.size() != 1) continue;
      Symbol a = open.front();
      // entry - slot = 0 must be affine in a
      Expr eq = entry - Expr(slots[e]);
      Poly num = eq.num();
      if (num.degree_in(a.id()) != 1) continue;
      auto c = num.coefficients_in(a.id());
      solved[a.id()] = -Expr::fraction(c[0], 1) / Expr::fraction(c[1], 1);
      used[e] = true;
      progress = true;
    }
  }
  if (solved.size() < g.r()) return std::nullopt;
  std::vector<Expr> eqs;
  for (std::size_t e = 0; e < n * n; ++e) {
    if (used[e]) continue;
    Expr eq;
    try {
      eq = Expr(slots[e]) - substitute(g.entries(e / n, e % n), solved);
    } catch (const SingularError&) {
      return std::nullopt;
    }
    if (!eq.is_zero()) eqs.push_back(Expr::fraction(eq.num().monic(), 1));
  }
  return eqs;
}

ClosureReport check_closure(const ParamGroup& g, std::size_t samples, std::uint64_t seed) {
  ClosureReport rep;
  std::vector<Expr> eqs = g.membership;
  if (eqs.empty()) {
    auto derived = derive_membership(g);
    if (!derived) {
      rep.ok = false;
      rep.diagnostic = "no membership equations given and none could be derived";
      return rep;
    }
    eqs = *derived;
  }
  auto slots = slot_symbols(g.n());
  std::mt19937_64 rng(seed);
  std::size_t n = g.n();
  for (std::size_t s = 0; s < samples; ++s) {
    QMatrix prod;
    for (int attempt = 0;; ++attempt) {
      try {
        prod = eval_numeric(g.entries, random_params(g, rng)) *
               eval_numeric(g.entries, random_params(g, rng));
        break;
      } catch (const EvalError&) {
        if (attempt > 20) {
          rep.ok = false;
          rep.diagnostic = "could not sample regular group elements";
          return rep;
        }
      }
    }
    NumericPoint at;
    for (std::size_t e = 0; e < n * n; ++e) at[slots[e].id()] = prod(e / n, e % n);
    for (const auto& eq : eqs) {
      Rational v;
      try {
        v = eval_numeric(eq, at);
      } catch (const EvalError&) {
        continue;
      }
      if (v != 0) {
        rep.ok = false;
        rep.diagnostic = "product of sampled elements violates membership equation " + eq.str() +
                         " = 0 (sample " + std::to_string(s + 1) + ")";
        return rep;
      }
    }
    ++rep.samples;
  }
  return rep;
}

}  // namespace cartan
