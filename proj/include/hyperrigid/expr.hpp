#pragma once

// Arithmetic expressions in one variable `x`, used to pass real functions on
// the command line ("abs(x-1/2)", "x^3", ...).
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | 'x' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func    := abs | sqrt | exp | log | sin | cos

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hyperrigid/errors.hpp"

namespace hyperrigid::expr {

enum class Op { Number, Var, Neg, Add, Sub, Mul, Div, Pow, Func };
enum class Func { Abs, Sqrt, Exp, Log, Sin, Cos };

inline constexpr std::array<std::pair<std::string_view, Func>, 6> kFunctions{{
    {"abs", Func::Abs},
    {"sqrt", Func::Sqrt},
    {"exp", Func::Exp},
    {"log", Func::Log},
    {"sin", Func::Sin},
    {"cos", Func::Cos},
}};

inline std::string_view function_name(Func f) {
  for (const auto& [name, fn] : kFunctions)
    if (fn == f) return name;
  return "?";
}

class ParseError : public DomainError {
 public:
  enum class Kind { Syntax, UnknownIdentifier };
  ParseError(Kind kind, std::size_t offset, std::string expected, const std::string& what)
      : DomainError(what), kind_(kind), offset_(offset), expected_(std::move(expected)) {}
  Kind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  Kind kind_;
  std::size_t offset_;
  std::string expected_;
};

class EvalError : public DomainError {
 public:
  EvalError(double x, const std::string& what) : DomainError(what), x_(x) {}
  double x() const noexcept { return x_; }

 private:
  double x_;
};

// Immutable expression tree with value semantics (nodes are shared).
class Expr {
 public:
  static Expr number(double v) { return Expr(std::make_shared<Node>(Node{Op::Number, v, {}, {}})); }
  static Expr var() { return Expr(std::make_shared<Node>(Node{Op::Var, 0.0, {}, {}})); }
  static Expr neg(Expr a) { return Expr(std::make_shared<Node>(Node{Op::Neg, 0.0, {}, {a.node_}})); }
  static Expr binary(Op op, Expr a, Expr b) {
    return Expr(std::make_shared<Node>(Node{op, 0.0, {}, {a.node_, b.node_}}));
  }
  static Expr call(Func f, Expr a) {
    return Expr(std::make_shared<Node>(Node{Op::Func, 0.0, f, {a.node_}}));
  }

  Op op() const { return node_->op; }
  double value() const { return node_->value; }
  Func func() const { return *node_->func; }
  std::size_t arity() const { return node_->children.size(); }
  Expr child(std::size_t i) const { return Expr(node_->children.at(i)); }

  friend bool operator==(const Expr& a, const Expr& b) { return equal(*a.node_, *b.node_); }

  // Fully parenthesized text that parses back to an equal tree.
  std::string to_string() const {
    std::string out;
    print(*node_, out);
    return out;
  }

  double operator()(double x) const { return eval(*node_, x); }

 private:
  struct Node {
    Op op;
    double value;
    std::optional<Func> func;
    std::vector<std::shared_ptr<const Node>> children;
  };

  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static bool equal(const Node& a, const Node& b) {
    if (a.op != b.op || a.children.size() != b.children.size()) return false;
    if (a.op == Op::Number && a.value != b.value) return false;
    if (a.op == Op::Func && a.func != b.func) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
      if (!equal(*a.children[i], *b.children[i])) return false;
    return true;
  }

  static void print(const Node& n, std::string& out) {
    switch (n.op) {
      case Op::Number: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        out += buf;
        return;
      }
      case Op::Var:
        out += 'x';
        return;
      case Op::Neg:
        out += "(-";
        print(*n.children[0], out);
        out += ')';
        return;
      case Op::Func:
        out += function_name(*n.func);
        out += '(';
        print(*n.children[0], out);
        out += ')';
        return;
      default: {
        static constexpr char sym[] = {'+', '-', '*', '/', '^'};
        out += '(';
        print(*n.children[0], out);
        out += ' ';
        out += sym[static_cast<int>(n.op) - static_cast<int>(Op::Add)];
        out += ' ';
        print(*n.children[1], out);
        out += ')';
      }
    }
  }

  static double eval(const Node& n, double x) {
    switch (n.op) {
      case Op::Number:
        return n.value;
      case Op::Var:
        return x;
      case Op::Neg:
        return -eval(*n.children[0], x);
      case Op::Add:
        return eval(*n.children[0], x) + eval(*n.children[1], x);
      case Op::Sub:
        return eval(*n.children[0], x) - eval(*n.children[1], x);
      case Op::Mul:
        return eval(*n.children[0], x) * eval(*n.children[1], x);
      case Op::Div: {
        const double num = eval(*n.children[0], x);
        const double den = eval(*n.children[1], x);
        if (den == 0.0) throw EvalError(x, "division by zero at x=" + fmt(x));
        return num / den;
      }
      case Op::Pow: {
        const double base = eval(*n.children[0], x);
        const double ex = eval(*n.children[1], x);
        const double r = std::pow(base, ex);
        if (std::isnan(r) || (base == 0.0 && ex < 0.0))
          throw EvalError(x, "pow(" + fmt(base) + ", " + fmt(ex) + ") undefined at x=" + fmt(x));
        return r;
      }
      case Op::Func: {
        const double a = eval(*n.children[0], x);
        switch (*n.func) {
          case Func::Abs:
            return std::abs(a);
          case Func::Sqrt:
            if (a < 0.0) throw EvalError(x, "sqrt of negative value " + fmt(a) + " at x=" + fmt(x));
            return std::sqrt(a);
          case Func::Exp:
            return std::exp(a);
          case Func::Log:
            if (a <= 0.0) throw EvalError(x, "log of non-positive value " + fmt(a) + " at x=" + fmt(x));
            return std::log(a);
          case Func::Sin:
            return std::sin(a);
          case Func::Cos:
            return std::cos(a);
        }
      }
    }
    return 0.0;
  }

  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

  std::shared_ptr<const Node> node_;
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = expression();
    skip_ws();
    if (pos_ < text_.size()) fail("end of input");
    return e;
  }

 private:
  Expr expression() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary(Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = Expr::binary(Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(Op::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = Expr::binary(Op::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return Expr::neg(unary());
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return Expr::binary(Op::Pow, base, unary());
    return base;
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("number, 'x', function or '('");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = expression();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail("number, 'x', function or '('");
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    // optional exponent: e[+-]digits
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p;
        pos_ = p;
      }
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_) {
      pos_ = start;
      fail("numeric literal");
    }
    return Expr::number(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "x") return Expr::var();
    if (name == "pi") return Expr::number(std::numbers::pi);
    for (const auto& [fname, fn] : kFunctions) {
      if (name == fname) {
        expect('(');
        Expr arg = expression();
        expect(')');
        return Expr::call(fn, arg);
      }
    }
    throw ParseError(ParseError::Kind::UnknownIdentifier, start, "x, pi or a function name",
                     "unknown identifier '" + std::string(name) + "' at offset " + std::to_string(start));
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
    if (!accept(c)) fail(std::string("'") + c + "'");
  }

  [[noreturn]] void fail(const std::string& expected) {
    skip_ws();
    const std::string found =
        pos_ < text_.size() ? "'" + std::string(1, text_[pos_]) + "'" : std::string("end of input");
    throw ParseError(ParseError::Kind::Syntax, pos_, expected,
                     "syntax error at offset " + std::to_string(pos_) + ": expected " + expected +
                         ", found " + found);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse(std::string_view text) { return detail::Parser(text).parse(); }

inline double eval(const Expr& e, double x) { return e(x); }

}  // namespace hyperrigid::expr
