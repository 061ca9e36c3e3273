#include "cartan/parser.hpp"

#include <cctype>
#include <functional>
#include <optional>
#include <vector>

namespace cartan {

namespace {

class Parser {
 public:
  Parser(const std::string& text, const ParseContext& ctx) : text_(text), ctx_(ctx) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }
  [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const {
    throw ParseError(msg, at);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' but input ended");
      fail(std::string("expected '") + c + "'");
    }
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  Expr expr() {
    Expr e = term();
    while (true) {
      if (accept('+')) {
        e += term();
      } else if (accept('-')) {
        e -= term();
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = unary();
    while (true) {
      if (accept('*')) {
        e *= unary();
      } else if (peek('/')) {
        ++pos_;
        skip_ws();
        std::size_t at = pos_;
        Expr d = unary();
        if (d.is_zero()) fail_at("division by syntactic zero", at);
        e /= d;
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) {
      bool negative = false;
      bool paren = accept('(');
      if (accept('-')) negative = true;
      skip_ws();
      std::size_t at = pos_;
      auto n = integer();
      if (!n) fail("expected integer exponent");
      if (paren) expect(')');
      if (!n->fits_sint_p()) fail_at("exponent too large", at);
      int e = static_cast<int>(n->get_si());
      if (negative) {
        if (base.is_zero()) fail_at("division by syntactic zero", at);
        e = -e;
      }
      return base.pow(e);
    }
    return base;
  }

  std::optional<mpz_class> integer() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) return std::nullopt;
    return mpz_class(text_.substr(start, pos_ - start));
  }

  std::string name() {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ < text_.size() &&
        (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
    }
    return text_.substr(start, pos_ - start);
  }

  std::vector<Expr> arguments() {
    std::vector<Expr> args;
    expect('(');
    args.push_back(expr());
    while (accept(',')) args.push_back(expr());
    expect(')');
    return args;
  }

  // Splits a tag like "pxp" into slot indices; longest slot names first.
  static std::optional<std::vector<std::uint32_t>> decode_tag(const std::string& tag,
                                                              const OpaqueFunc& f) {
    std::vector<std::uint32_t> deriv(f.slots.size(), 0);
    std::function<bool(std::size_t)> go = [&](std::size_t at) -> bool {
      if (at == tag.size()) return true;
      std::vector<std::size_t> order(f.slots.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return f.slots[a].size() > f.slots[b].size();
      });
      for (std::size_t s : order) {
        const auto& slot = f.slots[s];
        if (tag.compare(at, slot.size(), slot) == 0) {
          ++deriv[s];
          if (go(at + slot.size())) return true;
          --deriv[s];
        }
      }
      return false;
    };
    if (!go(0)) return std::nullopt;
    return deriv;
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (accept('(')) {
      Expr e = expr();
      expect(')');
      return e;
    }
    std::size_t at = pos_;
    if (auto n = integer()) return Expr(Rational(*n));
    std::string id = name();
    if (id.empty()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");

    if (auto it = ctx_.definitions.find(id); it != ctx_.definitions.end()) return it->second;
    if (auto s = find_symbol(id)) return Expr(*s);

    if (peek('(')) {
      if (id == "D" && !find_function("D")) {
        expect('(');
        Expr inner = expr();
        expect(',');
        std::size_t sat = pos_;
        std::string var = name();
        auto s = find_symbol(var);
        if (!s) fail_at("unknown symbol '" + var + "'", sat);
        expect(')');
        return differentiate(inner, *s);
      }
      if (auto f = find_function(id)) {
        auto args = arguments();
        if (args.size() != function_info(*f).slots.size()) {
          fail_at("wrong number of arguments for '" + id + "'", at);
        }
        return apply(*f, std::move(args));
      }
      for (std::size_t cut = id.find('_'); cut != std::string::npos; cut = id.find('_', cut + 1)) {
        auto f = find_function(id.substr(0, cut));
        if (!f) continue;
        auto deriv = decode_tag(id.substr(cut + 1), function_info(*f));
        if (!deriv) fail_at("bad derivative tag in '" + id + "'", at);
        auto args = arguments();
        if (args.size() != function_info(*f).slots.size()) {
          fail_at("wrong number of arguments for '" + id + "'", at);
        }
        return apply(*f, *deriv, std::move(args));
      }
      fail_at("unknown function '" + id + "'", at);
    }
    fail_at("unknown symbol '" + id + "'", at);
  }

  const std::string& text_;
  const ParseContext& ctx_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(const std::string& text, const ParseContext& context) {
  return Parser(text, context).parse();
}

}  // namespace cartan
