#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "cartan/expr.hpp"

namespace cartan {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : std::runtime_error(message + " at column " + std::to_string(position + 1)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Names visible to the parser beyond the global symbol table.
struct ParseContext {
  std::map<std::string, Expr> definitions;
};

/// Grammar (see docs/grammar.md):
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' ['-'] integer)?
///   primary := integer | name | name '(' expr (',' expr)* ')'
///            | 'D' '(' expr ',' name ')' | '(' expr ')'
/// A function name may carry a derivative tag, `L_pp(x,u,p)`, spelled with the
/// function's slot names.
Expr parse_expr(const std::string& text, const ParseContext& context = {});

}  // namespace cartan
