#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cartan/linalg.hpp"

namespace cartan {

/// Ordered coordinate symbols.
class Chart {
 public:
  Chart() = default;
  explicit Chart(std::vector<Symbol> coords);

  const std::vector<Symbol>& coords() const { return coords_; }
  std::size_t dim() const { return coords_.size(); }
  /// Index of s among the coordinates, or -1.
  int index_of(Symbol s) const;

  friend bool operator==(const Chart& a, const Chart& b) { return a.coords_ == b.coords_; }

 private:
  std::vector<Symbol> coords_;
};

/// eta = A dx; the inverse of A is computed once on construction.
class Coframe {
 public:
  Coframe(Chart chart, std::vector<std::string> names, ExprMatrix transition);
  static Coframe coordinate(const Chart& chart);

  const Chart& chart() const { return chart_; }
  std::size_t dim() const { return chart_.dim(); }
  const std::vector<std::string>& names() const { return names_; }
  const ExprMatrix& transition() const { return a_; }
  const ExprMatrix& inverse_transition() const { return ainv_; }
  /// inverse_transition() == adjugate() / determinant().
  const ExprMatrix& adjugate() const { return adj_; }
  const Expr& determinant() const { return det_; }

  bool same_as(const Coframe& o) const;

 private:
  Chart chart_;
  std::vector<std::string> names_;
  ExprMatrix a_;
  ExprMatrix ainv_;
  ExprMatrix adj_;
  Expr det_;
};

using CoframePtr = std::shared_ptr<const Coframe>;

class FormError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Number of stored 2-form coefficients for dimension n.
inline std::size_t pair_count(std::size_t n) { return n * (n - 1) / 2; }
/// Position of the pair (j, k), j < k, in the stored list.
std::size_t pair_index(std::size_t n, std::size_t j, std::size_t k);

/// Exterior form of degree 0, 1 or 2 with coefficients in a coframe basis.
class DiffForm {
 public:
  DiffForm(CoframePtr frame, int degree, std::vector<Expr> coeffs);
  static DiffForm zero(CoframePtr frame, int degree);
  static DiffForm function(CoframePtr frame, Expr f);
  /// The i-th basis 1-form of the coframe.
  static DiffForm basis(CoframePtr frame, std::size_t i);

  int degree() const { return degree_; }
  const CoframePtr& frame() const { return frame_; }
  const std::vector<Expr>& coeffs() const { return coeffs_; }
  /// 2-form coefficient of e^j ^ e^k for any j != k (antisymmetric).
  Expr pair(std::size_t j, std::size_t k) const;
  bool is_zero() const;

  DiffForm operator+(const DiffForm& o) const;
  DiffForm operator-(const DiffForm& o) const;
  DiffForm operator*(const Expr& f) const;

  std::string str() const;

 private:
  CoframePtr frame_;
  int degree_;
  std::vector<Expr> coeffs_;
};

/// Components in the dual basis of a coframe.
struct VectorField {
  CoframePtr frame;
  std::vector<Expr> components;
};

DiffForm wedge(const DiffForm& a, const DiffForm& b);
DiffForm exterior_derivative(const DiffForm& a);
DiffForm rewrite_in_coframe(const DiffForm& a, const CoframePtr& target);
DiffForm interior_product(const VectorField& v, const DiffForm& a);

/// B[i][pair_index(j,k)] with d eta^i = sum_{j<k} B^i_jk eta^j ^ eta^k.
using StructureTable = std::vector<std::vector<Expr>>;
StructureTable structure_functions(const Coframe& c);

}  // namespace cartan
