#include "cartan/expr.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <mutex>
#include <ostream>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

namespace cartan {

std::string to_string(SymbolKind kind) {
  switch (kind) {
    case SymbolKind::coordinate: return "coordinate";
    case SymbolKind::group_parameter: return "group-parameter";
    case SymbolKind::jet_variable: return "jet-variable";
    case SymbolKind::auxiliary: return "auxiliary";
  }
  return "?";
}

namespace {

// Append-only table. Entries are never mutated after insertion, so references
// handed out under a shared lock stay valid (std::deque keeps addresses).
struct Registry {
  std::shared_mutex mu;
  std::deque<IndetInfo> indets;
  std::unordered_map<std::string, IndetId> symbol_names;
  std::deque<OpaqueFunc> funcs;
  std::unordered_map<std::string, FuncId> func_names;
  std::unordered_map<std::string, IndetId> applications;

  Registry() {
    IndetInfo none;
    none.name = "<none>";
    indets.push_back(std::move(none));
  }
};

Registry& registry() {
  static Registry r;
  return r;
}

std::string rational_str(const Rational& q) { return q.get_str(); }

std::string monomial_str(const Monomial& m) {
  std::string out;
  for (const auto& [v, e] : m.factors()) {
    if (!out.empty()) out += '*';
    const IndetInfo& info = indet_info(v);
    if (!info.opaque) {
      out += info.name;
    } else {
      const OpaqueFunc& f = function_info(info.func);
      out += f.name;
      std::string tag;
      for (std::size_t s = 0; s < info.deriv.size(); ++s) {
        for (std::uint32_t k = 0; k < info.deriv[s]; ++k) tag += f.slots[s];
      }
      if (!tag.empty()) out += "_" + tag;
      out += '(';
      for (std::size_t a = 0; a < info.args.size(); ++a) {
        if (a) out += ',';
        out += info.args[a].str();
      }
      out += ')';
    }
    if (e > 1) out += "^" + std::to_string(e);
  }
  return out;
}

std::string poly_str(const Poly& p) {
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& t : p.terms()) {
    Rational c = t.coeff;
    bool negative = c < 0;
    if (!first) {
      out += negative ? " - " : " + ";
      if (negative) c = -c;
    }
    if (t.mono.is_one()) {
      out += rational_str(c);
    } else if (c == 1) {
      out += monomial_str(t.mono);
    } else if (c == -1) {
      out += "-" + monomial_str(t.mono);
    } else {
      out += rational_str(c) + "*" + monomial_str(t.mono);
    }
    first = false;
  }
  return out;
}

Poly exact_div(const Poly& a, const Poly& b) {
  auto q = divide_exact(a, b);
  if (!q) throw std::logic_error("non-exact division during canonicalization");
  return *q;
}

}  // namespace

const std::string& Symbol::name() const { return indet_info(id_).name; }
SymbolKind Symbol::kind() const { return indet_info(id_).kind; }

Symbol declare_symbol(const std::string& name, SymbolKind kind) {
  if (name.empty()) throw std::invalid_argument("empty symbol name");
  Registry& r = registry();
  std::unique_lock lock(r.mu);
  if (r.func_names.count(name)) {
    throw std::invalid_argument("'" + name + "' is already a function");
  }
  auto it = r.symbol_names.find(name);
  if (it != r.symbol_names.end()) {
    if (r.indets[it->second].kind != kind) {
      throw std::invalid_argument("symbol '" + name + "' already declared as " +
                                  to_string(r.indets[it->second].kind));
    }
    return Symbol(it->second);
  }
  IndetInfo info;
  info.name = name;
  info.kind = kind;
  auto id = static_cast<IndetId>(r.indets.size());
  r.indets.push_back(std::move(info));
  r.symbol_names.emplace(name, id);
  return Symbol(id);
}

std::optional<Symbol> find_symbol(const std::string& name) {
  Registry& r = registry();
  std::shared_lock lock(r.mu);
  auto it = r.symbol_names.find(name);
  if (it == r.symbol_names.end()) return std::nullopt;
  return Symbol(it->second);
}

FuncId declare_function(const std::string& name, std::vector<std::string> slots) {
  if (slots.empty()) throw std::invalid_argument("function '" + name + "' needs arity >= 1");
  Registry& r = registry();
  std::unique_lock lock(r.mu);
  if (r.symbol_names.count(name)) {
    throw std::invalid_argument("'" + name + "' is already a symbol");
  }
  auto it = r.func_names.find(name);
  if (it != r.func_names.end()) {
    if (r.funcs[it->second].slots != slots) {
      throw std::invalid_argument("function '" + name + "' redeclared with other slots");
    }
    return it->second;
  }
  auto id = static_cast<FuncId>(r.funcs.size());
  r.funcs.push_back({name, std::move(slots)});
  r.func_names.emplace(name, id);
  return id;
}

std::optional<FuncId> find_function(const std::string& name) {
  Registry& r = registry();
  std::shared_lock lock(r.mu);
  auto it = r.func_names.find(name);
  if (it == r.func_names.end()) return std::nullopt;
  return it->second;
}

const OpaqueFunc& function_info(FuncId f) {
  Registry& r = registry();
  std::shared_lock lock(r.mu);
  return r.funcs.at(f);
}

const IndetInfo& indet_info(IndetId id) {
  Registry& r = registry();
  std::shared_lock lock(r.mu);
  return r.indets.at(id);
}

Expr apply(FuncId f, std::vector<std::uint32_t> deriv, std::vector<Expr> args) {
  const OpaqueFunc& fn = function_info(f);
  if (args.size() != fn.slots.size()) {
    throw std::invalid_argument("function '" + fn.name + "' expects " +
                                std::to_string(fn.slots.size()) + " arguments");
  }
  deriv.resize(fn.slots.size(), 0);
  std::string key = std::to_string(f) + "|";
  for (auto d : deriv) key += std::to_string(d) + ",";
  key += "|";
  for (const auto& a : args) key += a.str() + ";";

  Registry& r = registry();
  {
    std::shared_lock lock(r.mu);
    auto it = r.applications.find(key);
    if (it != r.applications.end()) return Expr::indeterminate(it->second);
  }
  std::unique_lock lock(r.mu);
  auto it = r.applications.find(key);
  if (it != r.applications.end()) return Expr::indeterminate(it->second);
  IndetInfo info;
  info.opaque = true;
  info.name = fn.name;
  info.func = f;
  info.deriv = std::move(deriv);
  info.args = std::move(args);
  auto id = static_cast<IndetId>(r.indets.size());
  r.indets.push_back(std::move(info));
  r.applications.emplace(std::move(key), id);
  return Expr::indeterminate(id);
}

Expr apply(FuncId f, std::vector<Expr> args) { return apply(f, {}, std::move(args)); }

// ---- Expr ----------------------------------------------------------------

Expr::Expr() : Expr(Rational(0)) {}
Expr::Expr(long c) : Expr(Rational(c)) {}
Expr::Expr(const Rational& c) : rep_(std::make_shared<Rep>(Rep{Poly(c), Poly(1)})) {}
Expr::Expr(Symbol s) : Expr(indeterminate(s.id())) {}

Expr Expr::indeterminate(IndetId id) {
  return Expr(std::make_shared<Rep>(Rep{Poly::variable(id), Poly(1)}));
}

Expr Expr::fraction(const Poly& num, const Poly& den) {
  if (den.is_zero()) throw SingularError("division by zero");
  if (num.is_zero()) return Expr(0);
  if (den.is_constant()) {
    return Expr(std::make_shared<Rep>(Rep{num.scaled(Rational(1) / den.constant_value()), Poly(1)}));
  }
  Poly g = gcd(num, den);
  Poly n = g.is_constant() ? num : exact_div(num, g);
  Poly d = g.is_constant() ? den : exact_div(den, g);
  Rational lc = d.leading_coeff();
  if (lc != 1) {
    Rational inv = Rational(1) / lc;
    n = n.scaled(inv);
    d = d.scaled(inv);
  }
  return Expr(std::make_shared<Rep>(Rep{std::move(n), std::move(d)}));
}

const Poly& Expr::num() const { return rep_->num; }
const Poly& Expr::den() const { return rep_->den; }

Rational Expr::constant_value() const {
  if (!is_constant()) throw std::logic_error("expression is not constant: " + str());
  return num().constant_value();
}

Expr Expr::operator-() const { return Expr(std::make_shared<Rep>(Rep{-num(), den()})); }

Expr Expr::operator+(const Expr& o) const {
  if (is_zero()) return o;
  if (o.is_zero()) return *this;
  if (den() == o.den()) {
    if (den().is_constant()) return Expr(std::make_shared<Rep>(Rep{num() + o.num(), den()}));
    return fraction(num() + o.num(), den());
  }
  if (den().is_constant() && o.den().is_constant()) {
    return fraction(num() + o.num(), Poly(1));
  }
  Poly g = gcd(den(), o.den());
  Poly a = exact_div(den(), g);
  Poly b = exact_div(o.den(), g);
  return fraction(num() * b + o.num() * a, a * o.den());
}

Expr Expr::operator-(const Expr& o) const { return *this + (-o); }

Expr Expr::operator*(const Expr& o) const {
  if (is_zero() || o.is_zero()) return Expr(0);
  if (is_polynomial() && o.is_polynomial()) {
    return Expr(std::make_shared<Rep>(Rep{num() * o.num(), Poly(1)}));
  }
  Poly g1 = gcd(num(), o.den());
  Poly g2 = gcd(o.num(), den());
  Poly n1 = g1.is_constant() ? num() : exact_div(num(), g1);
  Poly d2 = g1.is_constant() ? o.den() : exact_div(o.den(), g1);
  Poly n2 = g2.is_constant() ? o.num() : exact_div(o.num(), g2);
  Poly d1 = g2.is_constant() ? den() : exact_div(den(), g2);
  Poly n = n1 * n2;
  Poly d = d1 * d2;
  Rational lc = d.leading_coeff();
  if (lc != 1) {
    Rational inv = Rational(1) / lc;
    n = n.scaled(inv);
    d = d.scaled(inv);
  }
  return Expr(std::make_shared<Rep>(Rep{std::move(n), std::move(d)}));
}

Expr Expr::operator/(const Expr& o) const {
  if (o.is_zero()) throw SingularError("division by zero expression");
  Rational lc = o.num().leading_coeff();
  Expr inv(std::make_shared<Rep>(Rep{o.den().scaled(Rational(1) / lc), o.num().scaled(Rational(1) / lc)}));
  return *this * inv;
}

Expr Expr::pow(int e) const {
  if (e < 0) return Expr(1) / pow(-e);
  auto u = static_cast<std::uint32_t>(e);
  return Expr(std::make_shared<Rep>(Rep{num().pow(u), den().pow(u)}));
}

bool operator==(const Expr& a, const Expr& b) {
  return a.rep_ == b.rep_ || (a.num() == b.num() && a.den() == b.den());
}

std::string Expr::str() const {
  if (den().is_constant()) return poly_str(num());
  return "(" + poly_str(num()) + ")/(" + poly_str(den()) + ")";
}

std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << e.str(); }

// ---- operations ------------------------------------------------------------

namespace {

Expr eval_poly(const Poly& p, const std::function<Expr(IndetId)>& value) {
  // Terms sharing a polynomial image are summed in the polynomial domain.
  Expr total(0);
  Poly poly_part;
  bool all_poly = true;
  std::map<IndetId, Expr> cache;
  auto val = [&](IndetId v) -> const Expr& {
    auto it = cache.find(v);
    if (it == cache.end()) it = cache.emplace(v, value(v)).first;
    return it->second;
  };
  for (const auto& t : p.terms()) {
    for (const auto& f : t.mono.factors()) {
      if (!val(f.first).is_polynomial()) all_poly = false;
    }
  }
  for (const auto& t : p.terms()) {
    if (all_poly) {
      Poly term(t.coeff);
      for (const auto& [v, e] : t.mono.factors()) term = term * val(v).num().pow(e);
      poly_part += term;
    } else {
      Expr term(t.coeff);
      for (const auto& [v, e] : t.mono.factors()) term = term * val(v).pow(static_cast<int>(e));
      total += term;
    }
  }
  if (all_poly) return Expr::fraction(poly_part, Poly(1));
  return total;
}

Rational eval_poly_numeric(const Poly& p, const NumericPoint& point) {
  Rational total = 0;
  for (const auto& t : p.terms()) {
    Rational term = t.coeff;
    for (const auto& [v, e] : t.mono.factors()) {
      auto it = point.find(v);
      if (it == point.end()) {
        throw EvalError("unbound indeterminate '" + Expr::indeterminate(v).str() + "'");
      }
      Rational pw = 1;
      for (std::uint32_t k = 0; k < e; ++k) pw *= it->second;
      term *= pw;
    }
    total += term;
  }
  return total;
}

}  // namespace

Expr differentiate(const Expr& e, Symbol s) {
  std::map<IndetId, Expr> dv;
  std::function<const Expr&(IndetId)> d_indet = [&](IndetId v) -> const Expr& {
    auto it = dv.find(v);
    if (it != dv.end()) return it->second;
    Expr result(0);
    if (v == s.id()) {
      result = Expr(1);
    } else {
      const IndetInfo& info = indet_info(v);
      if (info.opaque) {
        for (std::size_t slot = 0; slot < info.args.size(); ++slot) {
          Expr da = differentiate(info.args[slot], s);
          if (da.is_zero()) continue;
          auto deriv = info.deriv;
          deriv[slot] += 1;
          result += apply(info.func, deriv, info.args) * da;
        }
      }
    }
    return dv.emplace(v, result).first->second;
  };
  auto d_poly = [&](const Poly& p) {
    Expr total(0);
    for (IndetId v : p.variables()) {
      const Expr& d = d_indet(v);
      if (d.is_zero()) continue;
      total += Expr::fraction(p.partial(v), Poly(1)) * d;
    }
    return total;
  };
  Expr dn = d_poly(e.num());
  if (e.is_polynomial()) return dn;
  Expr dd = d_poly(e.den());
  Expr n = Expr::fraction(e.num(), Poly(1));
  Expr d = Expr::fraction(e.den(), Poly(1));
  return (dn * d - n * dd) / (d * d);
}

Expr substitute(const Expr& e, const Bindings& bindings) {
  if (bindings.empty()) return e;
  std::function<Expr(IndetId)> value = [&](IndetId v) -> Expr {
    auto it = bindings.find(v);
    if (it != bindings.end()) return it->second;
    const IndetInfo& info = indet_info(v);
    if (!info.opaque) return Expr::indeterminate(v);
    std::vector<Expr> args;
    bool changed = false;
    for (const auto& a : info.args) {
      args.push_back(substitute(a, bindings));
      if (args.back() != a) changed = true;
    }
    if (!changed) return Expr::indeterminate(v);
    return apply(info.func, info.deriv, std::move(args));
  };
  Expr n = eval_poly(e.num(), value);
  if (e.is_polynomial()) return n;
  Expr d = eval_poly(e.den(), value);
  if (d.is_zero()) {
    throw SingularError("denominator vanishes identically after substitution in " + e.str());
  }
  return n / d;
}

bool is_zero(const Expr& e) { return e.is_zero(); }

Rational eval_numeric(const Expr& e, const NumericPoint& point) {
  Rational d = eval_poly_numeric(e.den(), point);
  if (d == 0) throw EvalError("pole at the evaluation point of " + e.str());
  return eval_poly_numeric(e.num(), point) / d;
}

std::vector<IndetId> indeterminates(const Expr& e) {
  auto a = e.num().variables();
  auto b = e.den().variables();
  std::vector<IndetId> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<Symbol> symbols_in(const Expr& e) {
  std::set<IndetId> seen;
  std::set<IndetId> syms;
  std::function<void(const Expr&)> walk = [&](const Expr& x) {
    for (IndetId v : indeterminates(x)) {
      if (!seen.insert(v).second) continue;
      const IndetInfo& info = indet_info(v);
      if (!info.opaque) {
        syms.insert(v);
      } else {
        for (const auto& a : info.args) walk(a);
      }
    }
  };
  walk(e);
  std::vector<Symbol> out;
  for (IndetId v : syms) out.emplace_back(v);
  return out;
}

bool depends_on(const Expr& e, Symbol s) {
  auto syms = symbols_in(e);
  return std::find(syms.begin(), syms.end(), s) != syms.end();
}

}  // namespace cartan
