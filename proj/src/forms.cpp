#include "cartan/forms.hpp"

#include <set>
#include <sstream>

namespace cartan {

Chart::Chart(std::vector<Symbol> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw FormError("chart needs at least one coordinate");
  std::set<Symbol> seen(coords_.begin(), coords_.end());
  if (seen.size() != coords_.size()) throw FormError("chart coordinates must be distinct");
}

int Chart::index_of(Symbol s) const {
  for (std::size_t i = 0; i < coords_.size(); ++i)
    if (coords_[i] == s) return static_cast<int>(i);
  return -1;
}

Coframe::Coframe(Chart chart, std::vector<std::string> names, ExprMatrix transition)
    : chart_(std::move(chart)), names_(std::move(names)), a_(std::move(transition)) {
  std::size_t n = chart_.dim();
  if (a_.rows() != n || a_.cols() != n) throw FormError("coframe matrix must be n x n");
  if (names_.size() != n) throw FormError("coframe needs one name per element");
  det_ = cartan::determinant(a_);
  if (det_.is_zero()) throw FormError("coframe transition determinant is identically zero");
  if (block_split(a_)) {
    // prolonged frames are block triangular; cofactors would be wasteful
    ainv_ = cartan::inverse(a_);
    adj_ = ainv_;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) adj_(i, j) *= det_;
  } else {
    adj_ = cartan::adjugate(a_);
    ainv_ = adj_;
    Expr d = Expr(1) / det_;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) ainv_(i, j) *= d;
  }
}

Coframe Coframe::coordinate(const Chart& chart) {
  std::vector<std::string> names;
  for (Symbol s : chart.coords()) names.push_back("d" + s.name());
  return Coframe(chart, names, ExprMatrix::identity(chart.dim()));
}

bool Coframe::same_as(const Coframe& o) const { return chart_ == o.chart_ && a_ == o.a_; }

std::size_t pair_index(std::size_t n, std::size_t j, std::size_t k) {
  // rows j = 0..n-2 hold n-1-j entries each
  return j * (2 * n - j - 1) / 2 + (k - j - 1);
}

DiffForm::DiffForm(CoframePtr frame, int degree, std::vector<Expr> coeffs)
    : frame_(std::move(frame)), degree_(degree), coeffs_(std::move(coeffs)) {
  if (degree_ < 0 || degree_ > 2) throw FormError("form degree must be 0, 1 or 2");
  std::size_t n = frame_->dim();
  std::size_t want = degree_ == 0 ? 1 : degree_ == 1 ? n : pair_count(n);
  if (coeffs_.size() != want) throw FormError("wrong number of form coefficients");
}

DiffForm DiffForm::zero(CoframePtr frame, int degree) {
  std::size_t n = frame->dim();
  std::size_t want = degree == 0 ? 1 : degree == 1 ? n : pair_count(n);
  return DiffForm(std::move(frame), degree, std::vector<Expr>(want));
}

DiffForm DiffForm::function(CoframePtr frame, Expr f) {
  return DiffForm(std::move(frame), 0, {std::move(f)});
}

DiffForm DiffForm::basis(CoframePtr frame, std::size_t i) {
  DiffForm f = zero(std::move(frame), 1);
  f.coeffs_.at(i) = Expr(1);
  return f;
}

Expr DiffForm::pair(std::size_t j, std::size_t k) const {
  if (degree_ != 2) throw FormError("pair() needs a 2-form");
  if (j == k) return Expr(0);
  std::size_t n = frame_->dim();
  if (j < k) return coeffs_[pair_index(n, j, k)];
  return -coeffs_[pair_index(n, k, j)];
}

bool DiffForm::is_zero() const {
  for (const auto& c : coeffs_)
    if (!c.is_zero()) return false;
  return true;
}

namespace {

void require_same(const DiffForm& a, const DiffForm& b) {
  if (!(a.frame()->chart() == b.frame()->chart())) throw FormError("chart mismatch");
  if (!a.frame()->same_as(*b.frame())) throw FormError("coframe mismatch");
}

}  // namespace

DiffForm DiffForm::operator+(const DiffForm& o) const {
  require_same(*this, o);
  if (degree_ != o.degree_) throw FormError("cannot add forms of different degree");
  std::vector<Expr> c(coeffs_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = coeffs_[i] + o.coeffs_[i];
  return DiffForm(frame_, degree_, std::move(c));
}

DiffForm DiffForm::operator-(const DiffForm& o) const { return *this + o * Expr(-1); }

DiffForm DiffForm::operator*(const Expr& f) const {
  std::vector<Expr> c(coeffs_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = coeffs_[i] * f;
  return DiffForm(frame_, degree_, std::move(c));
}

std::string DiffForm::str() const {
  if (degree_ == 0) return coeffs_[0].str();
  const auto& names = frame_->names();
  std::size_t n = frame_->dim();
  std::ostringstream os;
  bool first = true;
  auto emit = [&](const Expr& c, const std::string& basis) {
    if (c.is_zero()) return;
    os << (first ? "" : " + ") << "(" << c.str() << ")*" << basis;
    first = false;
  };
  if (degree_ == 1) {
    for (std::size_t i = 0; i < n; ++i) emit(coeffs_[i], names[i]);
  } else {
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        emit(coeffs_[pair_index(n, j, k)], names[j] + "^" + names[k]);
  }
  return first ? "0" : os.str();
}

DiffForm wedge(const DiffForm& a, const DiffForm& b) {
  require_same(a, b);
  int deg = a.degree() + b.degree();
  if (deg > 2) throw FormError("wedge product would exceed degree 2");
  if (a.degree() == 0) return b * a.coeffs()[0];
  if (b.degree() == 0) return a * b.coeffs()[0];
  std::size_t n = a.frame()->dim();
  std::vector<Expr> c(pair_count(n));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j + 1; k < n; ++k)
      c[pair_index(n, j, k)] = a.coeffs()[j] * b.coeffs()[k] - a.coeffs()[k] * b.coeffs()[j];
  return DiffForm(a.frame(), 2, std::move(c));
}

namespace {

// With old = M new (as columns of basis forms), coefficients transform by M.
std::vector<Expr> change_basis(const std::vector<Expr>& c, int degree, const ExprMatrix& M) {
  std::size_t n = M.rows();
  if (degree == 0) return c;
  if (degree == 1) {
    std::vector<Expr> out(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t m = 0; m < n; ++m)
        if (!c[m].is_zero() && !M(m, i).is_zero()) out[i] += c[m] * M(m, i);
    return out;
  }
  std::vector<Expr> out(pair_count(n));
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t l = m + 1; l < n; ++l) {
      const Expr& w = c[pair_index(n, m, l)];
      if (w.is_zero()) continue;
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) {
          Expr minor = M(m, j) * M(l, k) - M(m, k) * M(l, j);
          if (!minor.is_zero()) out[pair_index(n, j, k)] += w * minor;
        }
    }
  return out;
}

// Coefficients relative to dx of a form given in frame f: eta = A dx.
std::vector<Expr> to_coordinates(const DiffForm& a) {
  return change_basis(a.coeffs(), a.degree(), a.frame()->transition());
}

// dx = A^{-1} eta.
std::vector<Expr> from_coordinates(const std::vector<Expr>& coords, int degree,
                                   const Coframe& f) {
  std::vector<Expr> out = change_basis(coords, degree, f.adjugate());
  if (degree == 0) return out;
  Expr scale = Expr(1) / (degree == 1 ? f.determinant() : f.determinant() * f.determinant());
  for (auto& e : out) e *= scale;
  return out;
}

}  // namespace

DiffForm exterior_derivative(const DiffForm& a) {
  if (a.degree() == 2) throw FormError("exterior derivative of a 2-form is out of range");
  const Coframe& f = *a.frame();
  const auto& xs = f.chart().coords();
  std::size_t n = f.dim();
  std::vector<Expr> c = to_coordinates(a);
  if (a.degree() == 0) {
    std::vector<Expr> dc(n);
    for (std::size_t m = 0; m < n; ++m) dc[m] = differentiate(c[0], xs[m]);
    return DiffForm(a.frame(), 1, from_coordinates(dc, 1, f));
  }
  // d(sum_l c_l dx^l) = sum_{m<l} (d_m c_l - d_l c_m) dx^m ^ dx^l
  std::vector<Expr> dc(pair_count(n));
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t l = m + 1; l < n; ++l)
      dc[pair_index(n, m, l)] = differentiate(c[l], xs[m]) - differentiate(c[m], xs[l]);
  return DiffForm(a.frame(), 2, from_coordinates(dc, 2, f));
}

DiffForm rewrite_in_coframe(const DiffForm& a, const CoframePtr& target) {
  if (!(a.frame()->chart() == target->chart())) throw FormError("chart mismatch");
  return DiffForm(target, a.degree(), from_coordinates(to_coordinates(a), a.degree(), *target));
}

DiffForm interior_product(const VectorField& v, const DiffForm& a) {
  if (a.degree() == 0) throw FormError("interior product of a 0-form");
  if (!(v.frame->chart() == a.frame()->chart())) throw FormError("chart mismatch");
  if (v.components.size() != a.frame()->dim()) throw FormError("vector field has wrong length");
  DiffForm b = v.frame->same_as(*a.frame()) ? a : rewrite_in_coframe(a, v.frame);
  std::size_t n = b.frame()->dim();
  const auto& w = v.components;
  if (b.degree() == 1) {
    Expr s;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * b.coeffs()[i];
    return DiffForm::function(b.frame(), s);
  }
  // v _| (e^j ^ e^k) = w_j e^k - w_k e^j
  std::vector<Expr> out(n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j + 1; k < n; ++k) {
      const Expr& c = b.coeffs()[pair_index(n, j, k)];
      if (c.is_zero()) continue;
      out[k] += c * w[j];
      out[j] -= c * w[k];
    }
  return DiffForm(b.frame(), 1, std::move(out));
}

StructureTable structure_functions(const Coframe& c) {
  auto frame = std::make_shared<const Coframe>(c);
  StructureTable table;
  for (std::size_t i = 0; i < c.dim(); ++i)
    table.push_back(exterior_derivative(DiffForm::basis(frame, i)).coeffs());
  return table;
}

}  // namespace cartan
