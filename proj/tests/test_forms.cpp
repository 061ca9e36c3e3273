#include "doctest.h"

#include <random>

#include "cartan/forms.hpp"
#include "cartan/parser.hpp"
#include "generators.hpp"

using namespace cartan;
using cartan::testing::random_poly_expr;
using cartan::testing::random_rational_expr;

namespace {

Expr P(const std::string& s) { return parse_expr(s); }

struct Setup {
  Symbol x = declare_symbol("x", SymbolKind::coordinate);
  Symbol u = declare_symbol("u", SymbolKind::coordinate);
  Symbol p = declare_symbol("p", SymbolKind::coordinate);
  Symbol y = declare_symbol("y", SymbolKind::coordinate);
  Symbol z = declare_symbol("z", SymbolKind::coordinate);
  FuncId L = declare_function("L", {"x", "u", "p"});
  Chart xup{{x, u, p}};
  Chart xy{{x, y}};
  Chart xyz{{x, y, z}};
  CoframePtr dxup = std::make_shared<const Coframe>(Coframe::coordinate(xup));
  CoframePtr dxy = std::make_shared<const Coframe>(Coframe::coordinate(xy));
  CoframePtr dxyz = std::make_shared<const Coframe>(Coframe::coordinate(xyz));

  Expr E = P("L_u(x,u,p) - L_px(x,u,p) - p*L_pu(x,u,p)");
  Expr Lpp = P("L_pp(x,u,p)");

  CoframePtr lagrangian() const {
    ExprMatrix A(3, 3);
    A(0, 0) = 1;
    A(1, 0) = -Expr(p);
    A(1, 1) = 1;
    A(2, 0) = -E;
    A(2, 2) = Lpp;
    return std::make_shared<const Coframe>(xup, std::vector<std::string>{"eta1", "eta2", "eta3"}, A);
  }
};

DiffForm one_form(const CoframePtr& f, std::vector<Expr> c) { return DiffForm(f, 1, std::move(c)); }

}  // namespace

TEST_CASE("pair indexing") {
  CHECK(pair_index(3, 0, 1) == 0);
  CHECK(pair_index(3, 0, 2) == 1);
  CHECK(pair_index(3, 1, 2) == 2);
  CHECK(pair_index(4, 2, 3) == 5);
}

TEST_CASE("wedge examples") {
  Setup s;
  auto dx = DiffForm::basis(s.dxy, 0);
  auto dy = DiffForm::basis(s.dxy, 1);
  CHECK(wedge(dx, dx).is_zero());
  auto w = wedge(dx * Expr(s.u), dy);
  CHECK(w.pair(0, 1) == Expr(s.u));
  CHECK(w.pair(1, 0) == -Expr(s.u));

  // (du - p dx) ^ (-E dx + Lpp dp) expanded by hand
  auto eta2 = one_form(s.dxup, {-Expr(s.p), 1, 0});
  auto eta3 = one_form(s.dxup, {-s.E, 0, s.Lpp});
  auto prod = wedge(eta2, eta3);
  CHECK(prod.pair(0, 1) == s.E);
  CHECK(prod.pair(0, 2) == -Expr(s.p) * s.Lpp);
  CHECK(prod.pair(1, 2) == s.Lpp);
  CHECK_THROWS_AS(wedge(prod, dx), FormError);
}

TEST_CASE("exterior derivative examples") {
  Setup s;
  CHECK(exterior_derivative(DiffForm::basis(s.dxy, 0)).is_zero());
  auto d = exterior_derivative(one_form(s.dxup, {Expr(s.u), 0, 0}));
  // d(u dx) = du ^ dx = -dx ^ du
  CHECK(d.pair(1, 0) == Expr(1));

  auto eta = s.lagrangian();
  auto d3 = rewrite_in_coframe(exterior_derivative(DiffForm::basis(eta, 2)), s.dxup);
  CHECK(d3.pair(0, 1) == differentiate(s.E, s.u));
  CHECK(d3.pair(0, 2) == differentiate(s.E, s.p) + differentiate(s.Lpp, s.x));
  CHECK(d3.pair(1, 2) == differentiate(s.Lpp, s.u));
}

TEST_CASE("rewrite_in_coframe examples") {
  Setup s;
  Chart cx{{s.x}};
  auto dx = std::make_shared<const Coframe>(Coframe::coordinate(cx));
  ExprMatrix A(1, 1);
  A(0, 0) = Expr(s.x);
  auto xdx = std::make_shared<const Coframe>(cx, std::vector<std::string>{"theta"}, A);
  CHECK(rewrite_in_coframe(DiffForm::basis(dx, 0), xdx).coeffs()[0] == P("1/x"));

  auto f = one_form(s.dxy, {Expr(s.y), Expr(s.x)});
  CHECK(rewrite_in_coframe(f, s.dxy).coeffs() == f.coeffs());

  ExprMatrix B = ExprMatrix::identity(2);
  B(1, 1) = Expr(s.x);
  auto fr = std::make_shared<const Coframe>(s.xy, std::vector<std::string>{"e1", "e2"}, B);
  auto dxdy = wedge(DiffForm::basis(s.dxy, 0), DiffForm::basis(s.dxy, 1));
  CHECK(rewrite_in_coframe(dxdy, fr).pair(0, 1) == P("1/x"));

  ExprMatrix Z(2, 2);
  CHECK_THROWS_AS(Coframe(s.xy, {"a", "b"}, Z), FormError);
}

TEST_CASE("structure functions") {
  Setup s;
  for (const auto& row : structure_functions(*s.dxyz))
    for (const auto& b : row) CHECK(b.is_zero());

  ExprMatrix B = ExprMatrix::identity(2);
  B(1, 1) = Expr(s.x);
  auto t = structure_functions(Coframe(s.xy, {"e1", "e2"}, B));
  CHECK(t[0][0].is_zero());
  CHECK(t[1][0] == P("1/x"));

  // Lagrangian coframe, hand computed:
  // d eta2 = dx ^ dp = eta1 ^ eta3 / Lpp
  // d eta3 = E_u dx^du + (E_p + Lpp_x) dx^dp + Lpp_u du^dp with du = eta2 + p eta1,
  // dp = (eta3 + E eta1)/Lpp
  auto lt = structure_functions(*s.lagrangian());
  Expr Eu = differentiate(s.E, s.u), Ep = differentiate(s.E, s.p);
  Expr Lx = differentiate(s.Lpp, s.x), Lu = differentiate(s.Lpp, s.u);
  for (const auto& b : lt[0]) CHECK(b.is_zero());
  CHECK(lt[1][0].is_zero());
  CHECK(lt[1][1] == Expr(1) / s.Lpp);
  CHECK(lt[1][2].is_zero());
  CHECK(lt[2][0] == Eu - s.E * Lu / s.Lpp);
  CHECK(lt[2][1] == (Ep + Lx + Expr(s.p) * Lu) / s.Lpp);
  CHECK(lt[2][2] == Lu / s.Lpp);
}

TEST_CASE("interior product examples") {
  Setup s;
  auto dx = DiffForm::basis(s.dxyz, 0), dy = DiffForm::basis(s.dxyz, 1),
       dz = DiffForm::basis(s.dxyz, 2);
  VectorField ex{s.dxyz, {1, 0, 0}};
  auto r = interior_product(ex, wedge(dx, dy));
  CHECK(r.coeffs() == dy.coeffs());
  CHECK(interior_product(ex, wedge(dy, dz)).is_zero());
  Symbol a = declare_symbol("ca", SymbolKind::auxiliary), b = declare_symbol("cb", SymbolKind::auxiliary);
  VectorField v{s.dxyz, {Expr(a), Expr(b), 0}};
  auto q = interior_product(v, wedge(dx, dy));
  CHECK(q.coeffs() == (dy * Expr(a) - dx * Expr(b)).coeffs());
}

TEST_CASE("property: d of d vanishes") {
  Setup s;
  std::mt19937_64 rng(11);
  std::vector<Expr> gens{Expr(s.x), Expr(s.u), Expr(s.p), P("L(x,u,p)"), P("L_p(x,u,p)")};
  auto eta = s.lagrangian();
  for (int trial = 0; trial < 100; ++trial) {
    auto frame = trial % 2 ? eta : s.dxup;
    auto f = DiffForm::function(frame, random_rational_expr(rng, gens));
    CHECK(exterior_derivative(exterior_derivative(f)).is_zero());
  }
}

TEST_CASE("property: coordinate coframes have vanishing structure functions") {
  Setup s;
  std::mt19937_64 rng(12);
  std::vector<Symbol> pool{s.x, s.u, s.p, s.y, s.z};
  for (int trial = 0; trial < 100; ++trial) {
    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t n = 1 + trial % 5;
    Chart c(std::vector<Symbol>(pool.begin(), pool.begin() + n));
    for (const auto& row : structure_functions(Coframe::coordinate(c)))
      for (const auto& b : row) CHECK(b.is_zero());
  }
}

TEST_CASE("property: rewrite round trip") {
  Setup s;
  std::mt19937_64 rng(13);
  std::vector<Expr> gens{Expr(s.x), Expr(s.u), Expr(s.p), P("L_pp(x,u,p)")};
  for (int trial = 0; trial < 100; ++trial) {
    ExprMatrix A(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) A(i, j) = random_poly_expr(rng, gens, 2, 1);
    CoframePtr target;
    try {
      target = std::make_shared<const Coframe>(s.xup, std::vector<std::string>{"a", "b", "c"}, A);
    } catch (const FormError&) {
      continue;
    }
    auto f1 = one_form(s.dxup, {random_poly_expr(rng, gens), random_poly_expr(rng, gens),
                                random_poly_expr(rng, gens)});
    auto f2 = wedge(f1, one_form(s.dxup, {1, Expr(s.x), 0}));
    CHECK(rewrite_in_coframe(rewrite_in_coframe(f1, target), s.dxup).coeffs() == f1.coeffs());
    CHECK(rewrite_in_coframe(rewrite_in_coframe(f2, target), s.dxup).coeffs() == f2.coeffs());
  }
}

TEST_CASE("property: wedge of 1-forms is antisymmetric") {
  Setup s;
  std::mt19937_64 rng(14);
  std::vector<Expr> gens{Expr(s.x), Expr(s.y), Expr(s.z)};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Expr> ca, cb;
    for (int i = 0; i < 3; ++i) {
      ca.push_back(random_poly_expr(rng, gens));
      cb.push_back(random_poly_expr(rng, gens));
    }
    auto a = one_form(s.dxyz, ca), b = one_form(s.dxyz, cb);
    auto ab = wedge(a, b), ba = wedge(b, a);
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(ab.pair(j, k) == -ba.pair(j, k));
        CHECK(ab.pair(j, k) == -ab.pair(k, j));
      }
  }
}
