#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "holderlab/errors.hpp"
#include "holderlab/format.hpp"

// A small expression language for scalar fields over points (x1, ..., xN) and
// for boolean domain predicates.  Design points:
//   - expressions parse to immutable shared ASTs, cheap to copy and safe to
//     evaluate from many threads at once;
//   - `^` binds tightest and associates to the right, unary minus sits below
//     it (so -x^2 means -(x^2) and 2^3^2 means 2^(3^2));
//   - evaluation is plain IEEE arithmetic except for three domain checks that
//     raise EvalError: sqrt of a negative, ln of a non-positive, and a
//     negative base raised to a non-integer power;
//   - unparse() emits a fully parenthesized form, and parsing that form gives
//     back a structurally identical tree.

namespace holderlab {

enum class UnaryOp { Neg, Abs, Sqrt, Sin, Cos, Exp, Ln };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class CmpOp { Lt, Le, Gt, Ge };
enum class BoolOp { And, Or, Not };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Kind { Number, Pi, Variable, Unary, Binary };
  Kind kind;
  double number = 0.0;  // Kind::Number
  int var = 0;          // Kind::Variable, zero-based axis
  UnaryOp uop = UnaryOp::Neg;
  BinaryOp bop = BinaryOp::Add;
  ExprPtr lhs, rhs;  // Unary uses lhs only
};

struct PredNode;
using PredPtr = std::shared_ptr<const PredNode>;

struct PredNode {
  enum class Kind { Cmp, Bool };
  Kind kind;
  CmpOp cmp = CmpOp::Lt;
  BoolOp bop = BoolOp::And;
  ExprPtr a, b;  // Cmp
  PredPtr x, y;  // Bool; Not uses x only
};

// --- node constructors ---------------------------------------------------

inline ExprPtr make_number(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Number;
  n->number = v;
  return n;
}

inline ExprPtr make_pi() {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Pi;
  return n;
}

inline ExprPtr make_variable(int zero_based_axis) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Variable;
  n->var = zero_based_axis;
  return n;
}

inline ExprPtr make_unary(UnaryOp op, ExprPtr operand) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Unary;
  n->uop = op;
  n->lhs = std::move(operand);
  return n;
}

inline ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Binary;
  n->bop = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

// --- unparse -------------------------------------------------------------

inline std::string unparse(const ExprNode* n) {
  switch (n->kind) {
    case ExprNode::Kind::Number:
      return format_double(n->number);
    case ExprNode::Kind::Pi:
      return "pi";
    case ExprNode::Kind::Variable:
      return "x" + std::to_string(n->var + 1);
    case ExprNode::Kind::Unary: {
      const std::string inner = unparse(n->lhs.get());
      switch (n->uop) {
        case UnaryOp::Neg:
          return "(-" + inner + ")";
        case UnaryOp::Abs:
          return "abs(" + inner + ")";
        case UnaryOp::Sqrt:
          return "sqrt(" + inner + ")";
        case UnaryOp::Sin:
          return "sin(" + inner + ")";
        case UnaryOp::Cos:
          return "cos(" + inner + ")";
        case UnaryOp::Exp:
          return "exp(" + inner + ")";
        case UnaryOp::Ln:
          return "ln(" + inner + ")";
      }
      return "";
    }
    case ExprNode::Kind::Binary: {
      const char* op = "+";
      switch (n->bop) {
        case BinaryOp::Add: op = "+"; break;
        case BinaryOp::Sub: op = "-"; break;
        case BinaryOp::Mul: op = "*"; break;
        case BinaryOp::Div: op = "/"; break;
        case BinaryOp::Pow: op = "^"; break;
      }
      return "(" + unparse(n->lhs.get()) + op + unparse(n->rhs.get()) + ")";
    }
  }
  return "";
}

inline std::string unparse(const PredNode* n) {
  if (n->kind == PredNode::Kind::Cmp) {
    const char* op = "<";
    switch (n->cmp) {
      case CmpOp::Lt: op = "<"; break;
      case CmpOp::Le: op = "<="; break;
      case CmpOp::Gt: op = ">"; break;
      case CmpOp::Ge: op = ">="; break;
    }
    return "(" + unparse(n->a.get()) + op + unparse(n->b.get()) + ")";
  }
  switch (n->bop) {
    case BoolOp::Not:
      return "(!" + unparse(n->x.get()) + ")";
    case BoolOp::And:
      return "(" + unparse(n->x.get()) + "&" + unparse(n->y.get()) + ")";
    case BoolOp::Or:
      return "(" + unparse(n->x.get()) + "|" + unparse(n->y.get()) + ")";
  }
  return "";
}

// --- evaluation ----------------------------------------------------------

inline double eval_node(const ExprNode* n, std::span<const double> pt) {
  switch (n->kind) {
    case ExprNode::Kind::Number:
      return n->number;
    case ExprNode::Kind::Pi:
      return std::numbers::pi;
    case ExprNode::Kind::Variable:
      if (static_cast<std::size_t>(n->var) >= pt.size())
        throw EvalError(unparse(n), {pt.begin(), pt.end()},
                        "variable index exceeds point dimension");
      return pt[static_cast<std::size_t>(n->var)];
    case ExprNode::Kind::Unary: {
      const double v = eval_node(n->lhs.get(), pt);
      switch (n->uop) {
        case UnaryOp::Neg:
          return -v;
        case UnaryOp::Abs:
          return std::fabs(v);
        case UnaryOp::Sqrt:
          if (v < 0.0)
            throw EvalError(unparse(n), {pt.begin(), pt.end()},
                            "square root of a negative number");
          return std::sqrt(v);
        case UnaryOp::Sin:
          return std::sin(v);
        case UnaryOp::Cos:
          return std::cos(v);
        case UnaryOp::Exp:
          return std::exp(v);
        case UnaryOp::Ln:
          if (!(v > 0.0))
            throw EvalError(unparse(n), {pt.begin(), pt.end()},
                            "logarithm of a non-positive number");
          return std::log(v);
      }
      return 0.0;
    }
    case ExprNode::Kind::Binary: {
      const double a = eval_node(n->lhs.get(), pt);
      const double b = eval_node(n->rhs.get(), pt);
      switch (n->bop) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div: return a / b;
        case BinaryOp::Pow:
          if (a < 0.0 && !(std::rint(b) == b && std::fabs(b) < 0x1p53))
            throw EvalError(unparse(n), {pt.begin(), pt.end()},
                            "negative base raised to a non-integer power");
          return std::pow(a, b);
      }
      return 0.0;
    }
  }
  return 0.0;
}

inline bool eval_pred(const PredNode* n, std::span<const double> pt) {
  if (n->kind == PredNode::Kind::Cmp) {
    const double a = eval_node(n->a.get(), pt);
    const double b = eval_node(n->b.get(), pt);
    switch (n->cmp) {
      case CmpOp::Lt: return a < b;
      case CmpOp::Le: return a <= b;
      case CmpOp::Gt: return a > b;
      case CmpOp::Ge: return a >= b;
    }
    return false;
  }
  switch (n->bop) {
    case BoolOp::Not:
      return !eval_pred(n->x.get(), pt);
    case BoolOp::And:
      return eval_pred(n->x.get(), pt) && eval_pred(n->y.get(), pt);
    case BoolOp::Or:
      return eval_pred(n->x.get(), pt) || eval_pred(n->y.get(), pt);
  }
  return false;
}

// --- structural comparison ----------------------------------------------

inline bool structural_equal(const ExprNode* a, const ExprNode* b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprNode::Kind::Number:
      return a->number == b->number;
    case ExprNode::Kind::Pi:
      return true;
    case ExprNode::Kind::Variable:
      return a->var == b->var;
    case ExprNode::Kind::Unary:
      return a->uop == b->uop && structural_equal(a->lhs.get(), b->lhs.get());
    case ExprNode::Kind::Binary:
      return a->bop == b->bop && structural_equal(a->lhs.get(), b->lhs.get()) &&
             structural_equal(a->rhs.get(), b->rhs.get());
  }
  return false;
}

inline bool structural_equal(const PredNode* a, const PredNode* b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  if (a->kind == PredNode::Kind::Cmp)
    return a->cmp == b->cmp && structural_equal(a->a.get(), b->a.get()) &&
           structural_equal(a->b.get(), b->b.get());
  if (a->bop != b->bop) return false;
  if (a->bop == BoolOp::Not) return structural_equal(a->x.get(), b->x.get());
  return structural_equal(a->x.get(), b->x.get()) &&
         structural_equal(a->y.get(), b->y.get());
}

inline int max_var_index(const ExprNode* n) {
  switch (n->kind) {
    case ExprNode::Kind::Number:
    case ExprNode::Kind::Pi:
      return 0;
    case ExprNode::Kind::Variable:
      return n->var + 1;
    case ExprNode::Kind::Unary:
      return max_var_index(n->lhs.get());
    case ExprNode::Kind::Binary:
      return std::max(max_var_index(n->lhs.get()), max_var_index(n->rhs.get()));
  }
  return 0;
}

inline int max_var_index(const PredNode* n) {
  if (n->kind == PredNode::Kind::Cmp)
    return std::max(max_var_index(n->a.get()), max_var_index(n->b.get()));
  if (n->bop == BoolOp::Not) return max_var_index(n->x.get());
  return std::max(max_var_index(n->x.get()), max_var_index(n->y.get()));
}

// --- lexer / parser ------------------------------------------------------

namespace detail {

enum class Tok {
  Number, Ident, Plus, Minus, Star, Slash, Caret,
  LParen, RParen, Lt, Le, Gt, Ge, Amp, Pipe, Bang, End
};

struct Token {
  Tok kind;
  std::size_t offset;
  double num = 0.0;
  std::string text;
};

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  const auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  const auto is_alpha = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      // digits [ '.' digits ] [ (e|E) [+|-] digits ]; a '.' only joins the
      // number when a digit follows it.
      std::size_t j = i;
      while (j < src.size() && is_digit(src[j])) ++j;
      if (j < src.size() && src[j] == '.' && j + 1 < src.size() &&
          is_digit(src[j + 1])) {
        ++j;
        while (j < src.size() && is_digit(src[j])) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && is_digit(src[k])) {
          while (k < src.size() && is_digit(src[k])) ++k;
          j = k;
        }
      }
      double value = 0.0;
      const auto res = std::from_chars(src.data() + i, src.data() + j, value,
                                       std::chars_format::general);
      if (res.ec != std::errc{} || res.ptr != src.data() + j)
        throw ParseError(std::string(src), start, {"a representable number"});
      out.push_back({Tok::Number, start, value, std::string(src.substr(i, j - i))});
      i = j;
      continue;
    }
    if (is_alpha(c)) {
      std::size_t j = i;
      while (j < src.size() && (is_alpha(src[j]) || is_digit(src[j]))) ++j;
      out.push_back({Tok::Ident, start, 0.0, std::string(src.substr(i, j - i))});
      i = j;
      continue;
    }
    switch (c) {
      case '+': out.push_back({Tok::Plus, start}); ++i; continue;
      case '-': out.push_back({Tok::Minus, start}); ++i; continue;
      case '*': out.push_back({Tok::Star, start}); ++i; continue;
      case '/': out.push_back({Tok::Slash, start}); ++i; continue;
      case '^': out.push_back({Tok::Caret, start}); ++i; continue;
      case '(': out.push_back({Tok::LParen, start}); ++i; continue;
      case ')': out.push_back({Tok::RParen, start}); ++i; continue;
      case '&': out.push_back({Tok::Amp, start}); ++i; continue;
      case '|': out.push_back({Tok::Pipe, start}); ++i; continue;
      case '!': out.push_back({Tok::Bang, start}); ++i; continue;
      case '<':
        if (i + 1 < src.size() && src[i + 1] == '=') {
          out.push_back({Tok::Le, start});
          i += 2;
        } else {
          out.push_back({Tok::Lt, start});
          ++i;
        }
        continue;
      case '>':
        if (i + 1 < src.size() && src[i + 1] == '=') {
          out.push_back({Tok::Ge, start});
          i += 2;
        } else {
          out.push_back({Tok::Gt, start});
          ++i;
        }
        continue;
      default:
        throw ParseError(std::string(src), start, {"a recognized token"});
    }
  }
  out.push_back({Tok::End, src.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src), toks_(lex(src)) {}

  ExprPtr parse_expression() {
    ExprPtr e = parse_add();
    expect_end();
    return e;
  }

  PredPtr parse_predicate() {
    PredPtr p = parse_or();
    expect_end();
    return p;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& get() { return toks_[pos_++]; }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    throw ParseError(src_, peek().offset, std::move(expected));
  }

  void expect_end() {
    if (peek().kind != Tok::End)
      fail({"an operator", "end of input"});
  }

  void expect(Tok k, const char* what) {
    if (peek().kind != k) fail({what});
    ++pos_;
  }

  // expr := add; add := mul (('+'|'-') mul)*
  ExprPtr parse_add() {
    ExprPtr e = parse_mul();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const BinaryOp op =
          get().kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
      e = make_binary(op, std::move(e), parse_mul());
    }
    return e;
  }

  ExprPtr parse_mul() {
    ExprPtr e = parse_unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      const BinaryOp op =
          get().kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
      e = make_binary(op, std::move(e), parse_unary());
    }
    return e;
  }

  // unary minus binds looser than '^': -x^2 parses as -(x^2).
  ExprPtr parse_unary() {
    if (peek().kind == Tok::Minus) {
      ++pos_;
      return make_unary(UnaryOp::Neg, parse_unary());
    }
    return parse_power();
  }

  // power := primary ['^' unary], right-associative, exponent may be signed.
  ExprPtr parse_power() {
    ExprPtr base = parse_primary();
    if (peek().kind == Tok::Caret) {
      ++pos_;
      return make_binary(BinaryOp::Pow, std::move(base), parse_unary());
    }
    return base;
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number:
        ++pos_;
        return make_number(t.num);
      case Tok::LParen: {
        ++pos_;
        ExprPtr e = parse_add();
        expect(Tok::RParen, "\")\"");
        return e;
      }
      case Tok::Ident:
        ++pos_;
        return resolve_identifier(t);
      default:
        fail({"a number", "an identifier", "\"(\"", "\"-\""});
    }
  }

  ExprPtr resolve_identifier(const Token& t) {
    const std::string& name = t.text;
    if (name == "pi") return make_pi();
    if (name == "x" || name == "y" || name == "z")
      return make_variable(name[0] - 'x');
    if (name.size() > 1 && name[0] == 'x' && name[1] != '0') {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i)
        if (name[i] < '0' || name[i] > '9') digits = false;
      if (digits) {
        const long idx = std::strtol(name.c_str() + 1, nullptr, 10);
        if (idx >= 1 && idx <= 1024) return make_variable(static_cast<int>(idx) - 1);
      }
    }
    static const std::pair<const char*, UnaryOp> fns[] = {
        {"abs", UnaryOp::Abs}, {"sqrt", UnaryOp::Sqrt}, {"sin", UnaryOp::Sin},
        {"cos", UnaryOp::Cos}, {"exp", UnaryOp::Exp},   {"ln", UnaryOp::Ln}};
    for (const auto& [fname, op] : fns) {
      if (name == fname) {
        expect(Tok::LParen, "\"(\"");
        ExprPtr arg = parse_add();
        expect(Tok::RParen, "\")\"");
        return make_unary(op, std::move(arg));
      }
    }
    throw UnknownIdentifierError(name, t.offset);
  }

  // pred := or; or := and ('|' and)*; and := not ('&' not)*
  PredPtr parse_or() {
    PredPtr p = parse_and();
    while (peek().kind == Tok::Pipe) {
      ++pos_;
      auto n = std::make_shared<PredNode>();
      n->kind = PredNode::Kind::Bool;
      n->bop = BoolOp::Or;
      n->x = std::move(p);
      n->y = parse_and();
      p = std::move(n);
    }
    return p;
  }

  PredPtr parse_and() {
    PredPtr p = parse_not();
    while (peek().kind == Tok::Amp) {
      ++pos_;
      auto n = std::make_shared<PredNode>();
      n->kind = PredNode::Kind::Bool;
      n->bop = BoolOp::And;
      n->x = std::move(p);
      n->y = parse_not();
      p = std::move(n);
    }
    return p;
  }

  PredPtr parse_not() {
    if (peek().kind == Tok::Bang) {
      ++pos_;
      auto n = std::make_shared<PredNode>();
      n->kind = PredNode::Kind::Bool;
      n->bop = BoolOp::Not;
      n->x = parse_not();
      return n;
    }
    return parse_atom();
  }

  // A parenthesis is ambiguous here: it may group a predicate or open an
  // arithmetic subexpression ("(x1<1)&..." vs "(x1+1)<2").  Try the predicate
  // group first and fall back to a comparison, keeping whichever error got
  // further when both fail.
  PredPtr parse_atom() {
    if (peek().kind == Tok::LParen) {
      const std::size_t save = pos_;
      try {
        ++pos_;
        PredPtr inner = parse_or();
        expect(Tok::RParen, "\")\"");
        return inner;
      } catch (const ParseError& group_err) {
        pos_ = save;
        try {
          return parse_comparison();
        } catch (const ParseError& cmp_err) {
          throw cmp_err.offset() >= group_err.offset() ? cmp_err : group_err;
        }
      }
    }
    return parse_comparison();
  }

  PredPtr parse_comparison() {
    ExprPtr lhs = parse_add();
    CmpOp op;
    switch (peek().kind) {
      case Tok::Lt: op = CmpOp::Lt; break;
      case Tok::Le: op = CmpOp::Le; break;
      case Tok::Gt: op = CmpOp::Gt; break;
      case Tok::Ge: op = CmpOp::Ge; break;
      default:
        fail({"\"<\"", "\"<=\"", "\">\"", "\">=\""});
    }
    ++pos_;
    auto n = std::make_shared<PredNode>();
    n->kind = PredNode::Kind::Cmp;
    n->cmp = op;
    n->a = std::move(lhs);
    n->b = parse_add();
    return n;
  }

  std::string src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// --- public wrappers -----------------------------------------------------

// A scalar field expression.  Immutable; copies share the tree.
class FieldExpr {
 public:
  FieldExpr() = default;

  static FieldExpr parse(std::string_view source) {
    detail::Parser p(source);
    return FieldExpr(p.parse_expression());
  }

  static FieldExpr number(double v) { return FieldExpr(make_number(v)); }
  static FieldExpr pi() { return FieldExpr(make_pi()); }
  // one-based axis, matching the surface syntax x1, x2, ...
  static FieldExpr variable(int axis) { return FieldExpr(make_variable(axis - 1)); }
  static FieldExpr unary(UnaryOp op, const FieldExpr& e) {
    return FieldExpr(make_unary(op, e.root_));
  }
  static FieldExpr binary(BinaryOp op, const FieldExpr& a, const FieldExpr& b) {
    return FieldExpr(make_binary(op, a.root_, b.root_));
  }

  bool valid() const { return root_ != nullptr; }

  double eval(std::span<const double> point) const {
    return eval_node(root_.get(), point);
  }
  double eval(std::initializer_list<double> point) const {
    return eval(std::span<const double>(point.begin(), point.size()));
  }

  std::string unparse() const { return holderlab::unparse(root_.get()); }
  int max_var_index() const { return holderlab::max_var_index(root_.get()); }
  const ExprPtr& root() const { return root_; }

  friend bool structural_equal(const FieldExpr& a, const FieldExpr& b) {
    return holderlab::structural_equal(a.root_.get(), b.root_.get());
  }

 private:
  explicit FieldExpr(ExprPtr root) : root_(std::move(root)) {}
  ExprPtr root_;
};

// A boolean membership predicate over points, built from comparisons of
// field expressions combined with & | !.
class DomainPredicate {
 public:
  DomainPredicate() = default;

  static DomainPredicate parse(std::string_view source) {
    detail::Parser p(source);
    return DomainPredicate(p.parse_predicate());
  }

  bool valid() const { return root_ != nullptr; }

  bool eval(std::span<const double> point) const {
    return eval_pred(root_.get(), point);
  }
  bool eval(std::initializer_list<double> point) const {
    return eval(std::span<const double>(point.begin(), point.size()));
  }

  std::string unparse() const { return holderlab::unparse(root_.get()); }
  int max_var_index() const { return holderlab::max_var_index(root_.get()); }
  const PredPtr& root() const { return root_; }

  friend bool structural_equal(const DomainPredicate& a,
                               const DomainPredicate& b) {
    return holderlab::structural_equal(a.root_.get(), b.root_.get());
  }

 private:
  explicit DomainPredicate(PredPtr root) : root_(std::move(root)) {}
  PredPtr root_;
};

}  // namespace holderlab
