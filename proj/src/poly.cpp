#include "cartan/poly.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <random>
#include <stdexcept>

namespace cartan {

Monomial::Monomial(std::vector<Factor> factors) : factors_(std::move(factors)) {
  std::sort(factors_.begin(), factors_.end());
  // merge repeated ids
  std::vector<Factor> merged;
  for (const auto& f : factors_) {
    if (f.second == 0) continue;
    if (!merged.empty() && merged.back().first == f.first) {
      merged.back().second += f.second;
    } else {
      merged.push_back(f);
    }
  }
  factors_ = std::move(merged);
  for (const auto& f : factors_) degree_ += f.second;
}

Monomial Monomial::variable(IndetId v, std::uint32_t exp) {
  return Monomial({{v, exp}});
}

std::uint32_t Monomial::degree_in(IndetId v) const {
  for (const auto& f : factors_) {
    if (f.first == v) return f.second;
    if (f.first > v) break;
  }
  return 0;
}

Monomial Monomial::operator*(const Monomial& other) const {
  Monomial out;
  out.factors_.reserve(factors_.size() + other.factors_.size());
  auto a = factors_.begin();
  auto b = other.factors_.begin();
  while (a != factors_.end() || b != other.factors_.end()) {
    if (b == other.factors_.end() || (a != factors_.end() && a->first < b->first)) {
      out.factors_.push_back(*a++);
    } else if (a == factors_.end() || b->first < a->first) {
      out.factors_.push_back(*b++);
    } else {
      out.factors_.emplace_back(a->first, a->second + b->second);
      ++a;
      ++b;
    }
  }
  out.degree_ = degree_ + other.degree_;
  return out;
}

std::optional<Monomial> Monomial::divide(const Monomial& other) const {
  Monomial out;
  auto a = factors_.begin();
  for (const auto& f : other.factors_) {
    while (a != factors_.end() && a->first < f.first) out.factors_.push_back(*a++);
    if (a == factors_.end() || a->first != f.first || a->second < f.second) {
      return std::nullopt;
    }
    if (a->second > f.second) out.factors_.emplace_back(a->first, a->second - f.second);
    ++a;
  }
  while (a != factors_.end()) out.factors_.push_back(*a++);
  out.degree_ = degree_ - other.degree_;
  return out;
}

Monomial Monomial::without(IndetId v) const {
  Monomial out;
  for (const auto& f : factors_) {
    if (f.first != v) {
      out.factors_.push_back(f);
      out.degree_ += f.second;
    }
  }
  return out;
}

Monomial Monomial::gcd(const Monomial& other) const {
  Monomial out;
  auto a = factors_.begin();
  auto b = other.factors_.begin();
  while (a != factors_.end() && b != other.factors_.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      auto e = std::min(a->second, b->second);
      out.factors_.emplace_back(a->first, e);
      out.degree_ += e;
      ++a;
      ++b;
    }
  }
  return out;
}

int grlex_compare(const Monomial& a, const Monomial& b) {
  if (a.degree() != b.degree()) return a.degree() > b.degree() ? 1 : -1;
  const auto& fa = a.factors();
  const auto& fb = b.factors();
  std::size_t i = 0;
  for (; i < fa.size() && i < fb.size(); ++i) {
    if (fa[i].first != fb[i].first) return fa[i].first < fb[i].first ? 1 : -1;
    if (fa[i].second != fb[i].second) return fa[i].second > fb[i].second ? 1 : -1;
  }
  if (i < fa.size()) return 1;
  if (i < fb.size()) return -1;
  return 0;
}

namespace {

bool term_greater(const Term& a, const Term& b) {
  return grlex_compare(a.mono, b.mono) > 0;
}

}  // namespace

Poly::Poly(long c) {
  if (c != 0) terms_.push_back({Rational(c), Monomial()});
}

Poly::Poly(const Rational& c) {
  if (c != 0) {
    terms_.push_back({c, Monomial()});
    terms_.back().coeff.canonicalize();
  }
}

Poly Poly::variable(IndetId v) { return term(Rational(1), Monomial::variable(v)); }

Poly Poly::term(const Rational& c, Monomial m) {
  Poly p;
  if (c != 0) {
    p.terms_.push_back({c, std::move(m)});
    p.terms_.back().coeff.canonicalize();
  }
  return p;
}

Poly Poly::from_univariate(IndetId v, const std::vector<Poly>& coeffs) {
  std::vector<Term> terms;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    for (const auto& t : coeffs[k].terms_) {
      terms.push_back({t.coeff, k == 0 ? t.mono : t.mono * Monomial::variable(v, k)});
    }
  }
  return from_unsorted(std::move(terms));
}

Poly Poly::from_unsorted(std::vector<Term> terms) {
  std::sort(terms.begin(), terms.end(), term_greater);
  for (auto& t : terms) t.coeff.canonicalize();
  Poly p;
  for (auto& t : terms) {
    if (!p.terms_.empty() && p.terms_.back().mono == t.mono) {
      p.terms_.back().coeff += t.coeff;
    } else {
      if (!p.terms_.empty() && p.terms_.back().coeff == 0) p.terms_.pop_back();
      p.terms_.push_back(std::move(t));
    }
  }
  if (!p.terms_.empty() && p.terms_.back().coeff == 0) p.terms_.pop_back();
  return p;
}

bool Poly::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_[0].mono.is_one());
}

Rational Poly::constant_value() const {
  if (terms_.empty()) return Rational(0);
  const auto& last = terms_.back();
  return last.mono.is_one() ? last.coeff : Rational(0);
}

std::vector<IndetId> Poly::variables() const {
  std::vector<IndetId> vars;
  for (const auto& t : terms_) {
    for (const auto& f : t.mono.factors()) vars.push_back(f.first);
  }
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

bool Poly::contains(IndetId v) const {
  for (const auto& t : terms_) {
    if (t.mono.degree_in(v) > 0) return true;
  }
  return false;
}

std::uint32_t Poly::degree_in(IndetId v) const {
  std::uint32_t d = 0;
  for (const auto& t : terms_) d = std::max(d, t.mono.degree_in(v));
  return d;
}

std::uint32_t Poly::total_degree() const {
  return terms_.empty() ? 0 : terms_.front().mono.degree();
}

std::vector<Poly> Poly::coefficients_in(IndetId v) const {
  std::vector<std::vector<Term>> buckets(degree_in(v) + 1);
  for (const auto& t : terms_) {
    buckets[t.mono.degree_in(v)].push_back({t.coeff, t.mono.without(v)});
  }
  std::vector<Poly> out;
  out.reserve(buckets.size());
  for (auto& b : buckets) out.push_back(from_unsorted(std::move(b)));
  return out;
}

Poly Poly::operator-() const {
  Poly p = *this;
  for (auto& t : p.terms_) t.coeff = -t.coeff;
  return p;
}

Poly Poly::operator+(const Poly& o) const {
  Poly out;
  out.terms_.reserve(terms_.size() + o.terms_.size());
  auto a = terms_.begin();
  auto b = o.terms_.begin();
  while (a != terms_.end() && b != o.terms_.end()) {
    int c = grlex_compare(a->mono, b->mono);
    if (c > 0) {
      out.terms_.push_back(*a++);
    } else if (c < 0) {
      out.terms_.push_back(*b++);
    } else {
      Rational s = a->coeff + b->coeff;
      if (s != 0) out.terms_.push_back({s, a->mono});
      ++a;
      ++b;
    }
  }
  out.terms_.insert(out.terms_.end(), a, terms_.end());
  out.terms_.insert(out.terms_.end(), b, o.terms_.end());
  return out;
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator*(const Poly& o) const {
  if (is_zero() || o.is_zero()) return Poly();
  if (o.is_constant()) return scaled(o.constant_value());
  if (is_constant()) return o.scaled(constant_value());
  std::vector<Term> prod;
  prod.reserve(terms_.size() * o.terms_.size());
  for (const auto& a : terms_) {
    for (const auto& b : o.terms_) prod.push_back({a.coeff * b.coeff, a.mono * b.mono});
  }
  return from_unsorted(std::move(prod));
}

Poly Poly::scaled(const Rational& c) const {
  if (c == 0) return Poly();
  Poly p = *this;
  for (auto& t : p.terms_) t.coeff *= c;
  return p;
}

Poly Poly::pow(std::uint32_t e) const {
  Poly result(1);
  Poly base = *this;
  while (e > 0) {
    if (e & 1U) result = result * base;
    e >>= 1U;
    if (e > 0) base = base * base;
  }
  return result;
}

Poly Poly::partial(IndetId v) const {
  std::vector<Term> out;
  for (const auto& t : terms_) {
    auto d = t.mono.degree_in(v);
    if (d == 0) continue;
    auto rest = t.mono.without(v);
    out.push_back({t.coeff * d, d > 1 ? rest * Monomial::variable(v, d - 1) : rest});
  }
  return from_unsorted(std::move(out));
}

Poly Poly::monic() const {
  if (is_zero()) return *this;
  Rational lc = leading_coeff();
  if (lc == 1) return *this;
  return scaled(Rational(1) / lc);
}

bool operator==(const Poly& a, const Poly& b) {
  if (a.terms_.size() != b.terms_.size()) return false;
  for (std::size_t i = 0; i < a.terms_.size(); ++i) {
    if (a.terms_[i].coeff != b.terms_[i].coeff || !(a.terms_[i].mono == b.terms_[i].mono)) {
      return false;
    }
  }
  return true;
}

std::optional<Poly> divide_exact(const Poly& a, const Poly& b) {
  if (b.is_zero()) throw std::domain_error("polynomial division by zero");
  if (a.is_zero()) return Poly();
  if (b.is_constant()) return a.scaled(Rational(1) / b.constant_value());
  std::vector<Term> quotient;
  Poly rem = a;
  const Term& lb = b.leading_term();
  while (!rem.is_zero()) {
    const Term& lr = rem.leading_term();
    auto m = lr.mono.divide(lb.mono);
    if (!m) return std::nullopt;
    Rational c = lr.coeff / lb.coeff;
    Poly t = Poly::term(c, *m);
    quotient.push_back({c, *m});
    rem = rem - t * b;
  }
  return Poly::from_unsorted(std::move(quotient));
}

Poly pseudo_remainder(const Poly& a, const Poly& b, IndetId v) {
  auto bc = b.coefficients_in(v);
  const std::size_t n = bc.size() - 1;
  const Poly& lcb = bc.back();
  auto rc = a.coefficients_in(v);
  if (rc.size() - 1 < n) return a;
  std::size_t e = rc.size() - 1 - n + 1;
  while (!rc.empty() && rc.size() - 1 >= n) {
    std::size_t d = rc.size() - 1;
    Poly lcr = rc.back();
    for (auto& c : rc) c = c * lcb;
    for (std::size_t k = 0; k <= n; ++k) rc[d - n + k] -= lcr * bc[k];
    rc.pop_back();
    while (!rc.empty() && rc.back().is_zero()) rc.pop_back();
    --e;
    if (rc.empty()) break;
  }
  Poly r = Poly::from_univariate(v, rc);
  if (e > 0) r = r * lcb.pow(static_cast<std::uint32_t>(e));
  return r;
}

namespace {

Poly exact(const Poly& a, const Poly& b) {
  auto q = divide_exact(a, b);
  if (!q) throw std::logic_error("expected exact polynomial division");
  return *q;
}

// Modular images for degree bounds. Arithmetic mod the Mersenne prime 2^61 - 1.
constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
  unsigned __int128 r = static_cast<unsigned __int128>(a) * b;
  std::uint64_t lo = static_cast<std::uint64_t>(r & kPrime);
  std::uint64_t hi = static_cast<std::uint64_t>(r >> 61);
  std::uint64_t s = lo + hi;
  return s >= kPrime ? s - kPrime : s;
}

std::uint64_t addmod(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a + b;
  return s >= kPrime ? s - kPrime : s;
}

std::uint64_t submod(std::uint64_t a, std::uint64_t b) { return a >= b ? a - b : a + kPrime - b; }

std::uint64_t powmod(std::uint64_t a, std::uint64_t e) {
  std::uint64_t r = 1;
  while (e) {
    if (e & 1) r = mulmod(r, a);
    a = mulmod(a, a);
    e >>= 1;
  }
  return r;
}

std::uint64_t invmod(std::uint64_t a) { return powmod(a, kPrime - 2); }

std::optional<std::uint64_t> rational_mod(const Rational& q) {
  mpz_class n = q.get_num() % kPrime, d = q.get_den() % kPrime;
  if (n < 0) n += kPrime;
  std::uint64_t dm = d.get_ui();
  if (dm == 0) return std::nullopt;
  return mulmod(n.get_ui(), invmod(dm));
}

using ModPoly = std::vector<std::uint64_t>;  // dense, index = degree

void trim(ModPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

// Image of p as a univariate polynomial in v, other variables fixed by point.
std::optional<ModPoly> image_in(const Poly& p, IndetId v,
                                const std::map<IndetId, std::uint64_t>& point) {
  ModPoly out(p.degree_in(v) + 1, 0);
  for (const auto& t : p.terms()) {
    auto c = rational_mod(t.coeff);
    if (!c) return std::nullopt;
    std::uint64_t val = *c;
    std::uint32_t d = 0;
    for (auto [w, e] : t.mono.factors()) {
      if (w == v) {
        d = e;
      } else {
        val = mulmod(val, powmod(point.at(w), e));
      }
    }
    out[d] = addmod(out[d], val);
  }
  return out;
}

std::size_t mod_gcd_degree(ModPoly a, ModPoly b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    if (a.size() < b.size()) std::swap(a, b);
    std::uint64_t inv = invmod(b.back());
    while (a.size() >= b.size()) {
      std::uint64_t f = mulmod(a.back(), inv);
      std::size_t shift = a.size() - b.size();
      for (std::size_t i = 0; i < b.size(); ++i) a[i + shift] = submod(a[i + shift], mulmod(f, b[i]));
      trim(a);
      if (a.empty()) break;
    }
    std::swap(a, b);
  }
  return a.empty() ? 0 : a.size() - 1;
}

// Upper bound for deg_v gcd(a, b); exact whenever it reports 0.
std::uint32_t gcd_degree_bound(const Poly& a, const Poly& b, IndetId v,
                               const std::vector<IndetId>& vars, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint64_t> dist(1, kPrime - 1);
  for (int attempt = 0; attempt < 3; ++attempt) {
    std::map<IndetId, std::uint64_t> point;
    for (IndetId w : vars) point[w] = dist(rng);
    auto ia = image_in(a, v, point);
    auto ib = image_in(b, v, point);
    if (!ia || !ib) continue;
    // leading coefficients must survive so the image keeps the true degree
    if (ia->back() == 0 || ib->back() == 0) continue;
    return static_cast<std::uint32_t>(mod_gcd_degree(*ia, *ib));
  }
  return std::min(a.degree_in(v), b.degree_in(v));
}

// Coefficients of p regarded as a polynomial in the variables `outer`.
std::vector<Poly> coefficients_wrt(const Poly& p, const std::vector<IndetId>& outer) {
  std::map<std::vector<Monomial::Factor>, std::vector<Term>> groups;
  for (const auto& t : p.terms()) {
    std::vector<Monomial::Factor> key, rest;
    for (const auto& f : t.mono.factors()) {
      (std::binary_search(outer.begin(), outer.end(), f.first) ? key : rest).push_back(f);
    }
    groups[key].push_back({t.coeff, Monomial(std::move(rest))});
  }
  std::vector<Poly> out;
  for (auto& [k, terms] : groups) out.push_back(Poly::from_unsorted(std::move(terms)));
  return out;
}

Poly gcd_impl(const Poly& a, const Poly& b);

// gcd of the coefficients of p viewed as a polynomial in v
Poly content_in(const Poly& p, IndetId v) {
  Poly g;
  for (const auto& c : p.coefficients_in(v)) {
    if (c.is_zero()) continue;
    g = g.is_zero() ? c.monic() : gcd_impl(g, c);
    if (g.is_constant()) return Poly(1);
  }
  return g;
}

Poly monomial_gcd_with(const Monomial& m, const Poly& p) {
  Monomial g = m;
  for (const auto& t : p.terms()) {
    g = g.gcd(t.mono);
    if (g.is_one()) break;
  }
  return Poly::term(Rational(1), g);
}

// subresultant PRS on polynomials primitive in v
Poly subresultant_gcd(Poly a, Poly b, IndetId v) {
  if (a.degree_in(v) < b.degree_in(v)) std::swap(a, b);
  Poly g(1), h(1);
  while (true) {
    std::uint32_t delta = a.degree_in(v) - b.degree_in(v);
    Poly r = pseudo_remainder(a, b, v);
    if (r.is_zero()) break;
    if (r.degree_in(v) == 0) return Poly(1);
    a = b;
    b = exact(r, g * h.pow(delta));
    g = a.coefficients_in(v).back();
    if (delta == 0) {
      // h unchanged
    } else if (delta == 1) {
      h = g;
    } else {
      h = exact(g.pow(delta), h.pow(delta - 1));
    }
  }
  return exact(b, content_in(b, v)).monic();
}

// Heuristic gcd over Z: evaluate at a large integer, recurse, rebuild the
// gcd from its xi-adic expansion and keep it only if it divides both.
mpz_class max_norm(const Poly& p) {
  mpz_class m = 0;
  for (const auto& t : p.terms()) {
    mpz_class c = abs(t.coeff.get_num());
    if (c > m) m = c;
  }
  return m;
}

mpz_class integer_content(const Poly& p) {
  mpz_class g = 0;
  for (const auto& t : p.terms()) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), t.coeff.get_num_mpz_t());
    if (g == 1) break;
  }
  return g;
}

// Clears denominators and removes the integer content.
Poly primitive_integer(const Poly& p) {
  mpz_class l = 1;
  for (const auto& t : p.terms()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), t.coeff.get_den_mpz_t());
  Poly q = p.scaled(Rational(l));
  mpz_class c = integer_content(q);
  if (q.leading_coeff() < 0) c = -c;
  return q.scaled(Rational(1) / Rational(c));
}

Poly evaluate_at(const Poly& p, IndetId x, const mpz_class& xi) {
  std::vector<Term> terms;
  terms.reserve(p.terms().size());
  for (const auto& t : p.terms()) {
    std::uint32_t d = t.mono.degree_in(x);
    mpz_class f;
    mpz_pow_ui(f.get_mpz_t(), xi.get_mpz_t(), d);
    terms.push_back({t.coeff * f, d ? t.mono.without(x) : t.mono});
  }
  return Poly::from_unsorted(std::move(terms));
}

Poly interpolate_at(Poly h, IndetId x, const mpz_class& xi) {
  std::vector<Term> out;
  mpz_class half = xi / 2;
  for (std::uint32_t i = 0; !h.is_zero(); ++i) {
    std::vector<Term> low, rest;
    for (const auto& t : h.terms()) {
      mpz_class c = t.coeff.get_num();
      mpz_class r;
      mpz_fdiv_r(r.get_mpz_t(), c.get_mpz_t(), xi.get_mpz_t());
      if (r > half) r -= xi;
      if (r != 0) {
        low.push_back({Rational(r), t.mono});
        out.push_back({Rational(r), t.mono * Monomial::variable(x, i)});
      }
      mpz_class q = (c - r) / xi;
      if (q != 0) rest.push_back({Rational(q), t.mono});
    }
    h = Poly::from_unsorted(std::move(rest));
  }
  return Poly::from_unsorted(std::move(out));
}

std::optional<Poly> heuristic_gcd(Poly f, Poly g, std::vector<IndetId> vars) {
  mpz_class common;
  mpz_class cf = integer_content(f), cg = integer_content(g);
  mpz_gcd(common.get_mpz_t(), cf.get_mpz_t(), cg.get_mpz_t());
  if (vars.empty()) return Poly(Rational(common));
  if (common != 1) {
    f = f.scaled(Rational(1) / Rational(common));
    g = g.scaled(Rational(1) / Rational(common));
  }
  IndetId x = vars.back();
  vars.pop_back();
  mpz_class fn = max_norm(f), gn = max_norm(g);
  mpz_class b = 2 * (fn < gn ? fn : gn) + 29;
  mpz_class cap = 99 * sqrt(b);
  mpz_class xi = b < cap ? b : cap;
  mpz_class fr = fn / abs(f.leading_coeff().get_num());
  mpz_class gr = gn / abs(g.leading_coeff().get_num());
  mpz_class alt = 2 * (fr < gr ? fr : gr) + 2;
  if (alt > xi) xi = alt;
  for (int attempt = 0; attempt < 6; ++attempt) {
    Poly fe = evaluate_at(f, x, xi), ge = evaluate_at(g, x, xi);
    if (!fe.is_zero() && !ge.is_zero()) {
      if (auto h = heuristic_gcd(fe, ge, vars)) {
        Poly cand = interpolate_at(*h, x, xi);
        if (!cand.is_zero()) {
          cand = primitive_integer(cand);
          if (divide_exact(f, cand) && divide_exact(g, cand)) {
            return cand.scaled(Rational(common));
          }
        }
      }
    }
    xi = 73794 * xi * sqrt(sqrt(xi)) / 27011;
  }
  return std::nullopt;
}

Poly gcd_impl(const Poly& a, const Poly& b) {
  if (a.is_zero()) return b.monic();
  if (b.is_zero()) return a.monic();
  if (a.is_constant() || b.is_constant()) return Poly(1);
  if (a == b) return a.monic();
  if (a.is_monomial()) return monomial_gcd_with(a.leading_term().mono, b);
  if (b.is_monomial()) return monomial_gcd_with(b.leading_term().mono, a);

  auto va = a.variables();
  auto vb = b.variables();
  std::vector<IndetId> common;
  std::set_intersection(va.begin(), va.end(), vb.begin(), vb.end(),
                        std::back_inserter(common));
  if (common.empty()) return Poly(1);

  // The gcd can only involve common variables whose modular image bound is
  // positive; every other variable is eliminated by taking coefficients.
  {
    std::vector<IndetId> all;
    std::set_union(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(all));
    static thread_local std::mt19937_64 rng(0x5eed);
    std::vector<IndetId> outer;
    std::vector<IndetId> inner;
    for (IndetId v : all) {
      bool shared = std::binary_search(common.begin(), common.end(), v);
      if (shared && gcd_degree_bound(a, b, v, all, rng) > 0) {
        inner.push_back(v);
      } else {
        outer.push_back(v);
      }
    }
    if (inner.empty()) return Poly(1);
    if (!outer.empty()) {
      std::vector<Poly> coeffs = coefficients_wrt(a, outer);
      for (auto& c : coefficients_wrt(b, outer)) coeffs.push_back(std::move(c));
      std::sort(coeffs.begin(), coeffs.end(), [](const Poly& x, const Poly& y) {
        return x.terms().size() < y.terms().size();
      });
      Poly g = coeffs.front().monic();
      for (std::size_t i = 1; i < coeffs.size(); ++i) {
        g = gcd_impl(g, coeffs[i]);
        if (g.is_constant()) return Poly(1);
      }
      return g;
    }
  }

  if (auto h = heuristic_gcd(primitive_integer(a), primitive_integer(b), common)) {
    // accept only when the cofactors are certified coprime
    Poly ca = *divide_exact(a, *h), cb = *divide_exact(b, *h);
    static thread_local std::mt19937_64 crng(0xc0f);
    bool certified = true;
    for (IndetId v : common) {
      if (ca.contains(v) && cb.contains(v) && gcd_degree_bound(ca, cb, v, common, crng) > 0) {
        certified = false;
        break;
      }
    }
    if (certified) return h->monic();
  }

  // a variable present in only one argument reduces to a content computation
  for (IndetId v : va) {
    if (!b.contains(v)) return gcd_impl(content_in(a, v), b);
  }
  for (IndetId v : vb) {
    if (!a.contains(v)) return gcd_impl(a, content_in(b, v));
  }

  // main variable: lowest combined degree keeps the PRS short
  IndetId v = common.front();
  std::uint32_t best = a.degree_in(v) + b.degree_in(v);
  for (IndetId w : common) {
    std::uint32_t d = a.degree_in(w) + b.degree_in(w);
    if (d < best) {
      best = d;
      v = w;
    }
  }
  Poly ca = content_in(a, v);
  Poly cb = content_in(b, v);
  Poly pa = ca.is_constant() ? a : exact(a, ca);
  Poly pb = cb.is_constant() ? b : exact(b, cb);
  Poly cg = gcd_impl(ca, cb);
  Poly pg = subresultant_gcd(pa, pb, v);
  return (cg * pg).monic();
}

}  // namespace

Poly gcd(const Poly& a, const Poly& b) { return gcd_impl(a, b); }

}  // namespace cartan
