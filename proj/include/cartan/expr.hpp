#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cartan/poly.hpp"

namespace cartan {

enum class SymbolKind { coordinate, group_parameter, jet_variable, auxiliary };

std::string to_string(SymbolKind kind);

class Expr;

/// Raised when an operation would divide by an identically vanishing expression.
class SingularError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised by numeric evaluation (unbound indeterminate, pole).
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A named indeterminate. Cheap handle into the process-wide symbol table.
class Symbol {
 public:
  Symbol() = default;
  explicit Symbol(IndetId id) : id_(id) {}

  IndetId id() const { return id_; }
  const std::string& name() const;
  SymbolKind kind() const;

  friend bool operator==(Symbol a, Symbol b) { return a.id_ == b.id_; }
  friend bool operator!=(Symbol a, Symbol b) { return a.id_ != b.id_; }
  friend bool operator<(Symbol a, Symbol b) { return a.id_ < b.id_; }

 private:
  IndetId id_ = 0;
};

using FuncId = std::uint32_t;

/// A declared opaque function; slot names double as derivative tags.
struct OpaqueFunc {
  std::string name;
  std::vector<std::string> slots;
};

/// Everything the table knows about an indeterminate.
struct IndetInfo {
  bool opaque = false;
  std::string name;  // symbol name, or function name for applications
  SymbolKind kind = SymbolKind::auxiliary;
  FuncId func = 0;
  std::vector<std::uint32_t> deriv;  // one counter per slot
  std::vector<Expr> args;
};

/// Declares (or returns the existing) symbol. Throws if the name exists with a
/// different kind or names a function.
Symbol declare_symbol(const std::string& name, SymbolKind kind);
std::optional<Symbol> find_symbol(const std::string& name);

FuncId declare_function(const std::string& name, std::vector<std::string> slots);
std::optional<FuncId> find_function(const std::string& name);
const OpaqueFunc& function_info(FuncId f);

const IndetInfo& indet_info(IndetId id);

/// Canonical rational expression num/den: gcd 1, den monic in graded-lex.
class Expr {
 public:
  Expr();
  Expr(long c);  // NOLINT(google-explicit-constructor)
  Expr(const Rational& c);  // NOLINT(google-explicit-constructor)
  Expr(Symbol s);  // NOLINT(google-explicit-constructor)
  /// Builds num/den and canonicalizes. Throws SingularError if den is zero.
  static Expr fraction(const Poly& num, const Poly& den);
  static Expr indeterminate(IndetId id);

  const Poly& num() const;
  const Poly& den() const;

  bool is_zero() const { return num().is_zero(); }
  bool is_constant() const { return num().is_constant() && den().is_constant(); }
  bool is_polynomial() const { return den().is_constant(); }
  /// Value of a constant expression.
  Rational constant_value() const;

  Expr operator-() const;
  Expr operator+(const Expr& o) const;
  Expr operator-(const Expr& o) const;
  Expr operator*(const Expr& o) const;
  Expr operator/(const Expr& o) const;
  Expr& operator+=(const Expr& o) { return *this = *this + o; }
  Expr& operator-=(const Expr& o) { return *this = *this - o; }
  Expr& operator*=(const Expr& o) { return *this = *this * o; }
  Expr& operator/=(const Expr& o) { return *this = *this / o; }
  Expr pow(int e) const;

  /// Structural equality; equivalent to mathematical equality by canonicity.
  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

  /// Deterministic, parseable rendering.
  std::string str() const;

 private:
  struct Rep {
    Poly num;
    Poly den;
  };
  explicit Expr(std::shared_ptr<const Rep> rep) : rep_(std::move(rep)) {}
  std::shared_ptr<const Rep> rep_;
};

/// Application of an opaque function with accumulated partial derivatives.
Expr apply(FuncId f, std::vector<std::uint32_t> deriv, std::vector<Expr> args);
Expr apply(FuncId f, std::vector<Expr> args);

using Bindings = std::map<IndetId, Expr>;
using NumericPoint = std::map<IndetId, Rational>;

Expr differentiate(const Expr& e, Symbol s);
/// Simultaneous substitution. Keys may be symbols or opaque applications;
/// arguments of untouched applications are substituted recursively.
Expr substitute(const Expr& e, const Bindings& bindings);
bool is_zero(const Expr& e);
Rational eval_numeric(const Expr& e, const NumericPoint& point);

/// Indeterminates occurring in num or den (applications count as one each).
std::vector<IndetId> indeterminates(const Expr& e);
/// All symbols reachable, including those inside application arguments.
std::vector<Symbol> symbols_in(const Expr& e);
bool depends_on(const Expr& e, Symbol s);

std::ostream& operator<<(std::ostream& os, const Expr& e);

}  // namespace cartan
