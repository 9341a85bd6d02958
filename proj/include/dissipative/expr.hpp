#pragma once

// Scalar fields on R^n written in a small expression language:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?        right associative, integer exponent
//   primary := number | variable | func '(' expr ')' | '(' expr ')'
//
// Variables are x1..xn; for n = 3 the aliases x, y, z are accepted too.
// Functions: sin cos exp sqrt tanh. Evaluation is templated on the scalar
// type so the same tree yields values and forward-mode derivatives.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dissipative/dual.hpp"
#include "dissipative/errors.hpp"

namespace dissipative {

namespace expr {

enum class Op { constant, variable, add, sub, mul, div, neg, pow, func };
enum class Func { sin, cos, exp, sqrt, tanh };

struct Node {
  Op op = Op::constant;
  double value = 0.0;  // constant
  int variable = 0;    // 0-based, variable
  long exponent = 0;   // pow
  Func func = Func::sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

using NodePtr = std::shared_ptr<const Node>;

inline const char* func_name(Func f) {
  switch (f) {
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::exp: return "exp";
    case Func::sqrt: return "sqrt";
    case Func::tanh: return "tanh";
  }
  return "?";
}

/// Shortest decimal that reads back to the same double.
inline std::string format_number(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

class Parser {
 public:
  Parser(std::string_view text, int arity) : text_(text), arity_(arity) {}

  NodePtr parse() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
    NodePtr root = parse_sum();
    skip_space();
    if (pos_ < text_.size()) {
      throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    }
    return root;
  }

 private:
  static NodePtr binary(Op op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = binary(Op::add, lhs, parse_product());
      } else if (accept('-')) {
        lhs = binary(Op::sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = binary(Op::mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = binary(Op::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->op = Op::neg;
      n->lhs = parse_unary();
      return n;
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    skip_space();
    const std::size_t at = pos_;
    if (!accept('^')) return base;
    NodePtr exponent = parse_unary();
    double e = 0.0;
    if (!fold_constant(*exponent, e) || e != std::floor(e) || std::abs(e) > 1e9) {
      throw ParseError("exponent must be a constant integer", at + 1);
    }
    auto n = std::make_shared<Node>();
    n->op = Op::pow;
    n->exponent = static_cast<long>(e);
    n->lhs = std::move(base);
    return n;
  }

  NodePtr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("expected operand", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_sum();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ParseError("expected operand", pos_);
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t count = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++count;
      }
      return count;
    };
    std::size_t mantissa = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      const std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;  // leave 'e' for the caller to reject
    }
    auto n = std::make_shared<Node>();
    n->op = Op::constant;
    n->value = std::strtod(std::string(text_.substr(start, pos_ - start)).c_str(), nullptr);
    return n;
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(text_.substr(start, pos_ - start));

    static constexpr std::pair<const char*, Func> kFuncs[] = {
        {"sin", Func::sin}, {"cos", Func::cos}, {"exp", Func::exp},
        {"sqrt", Func::sqrt}, {"tanh", Func::tanh}};
    for (const auto& [fname, f] : kFuncs) {
      if (name == fname) {
        if (!accept('(')) throw ParseError("expected '(' after " + name, pos_);
        auto n = std::make_shared<Node>();
        n->op = Op::func;
        n->func = f;
        n->lhs = parse_sum();
        if (accept(',')) throw ParseError(name + " takes exactly one argument", pos_ - 1);
        if (!accept(')')) throw ParseError("expected ')'", pos_);
        return n;
      }
    }

    int index = -1;
    if (arity_ == 3 && name.size() == 1 && name[0] >= 'x' && name[0] <= 'z') {
      index = name[0] - 'x';
    } else if (name.size() >= 2 && name[0] == 'x' &&
               name.find_first_not_of("0123456789", 1) == std::string::npos) {
      const long k = std::strtol(name.c_str() + 1, nullptr, 10);
      if (k < 1 || k > arity_) {
        throw ParseError("variable " + name + " outside arity " + std::to_string(arity_), start);
      }
      index = static_cast<int>(k - 1);
    }
    if (index < 0) throw ParseError("unknown identifier '" + name + "'", start);
    auto n = std::make_shared<Node>();
    n->op = Op::variable;
    n->variable = index;
    return n;
  }

  static bool fold_constant(const Node& n, double& out) {
    double a = 0.0, b = 0.0;
    switch (n.op) {
      case Op::constant: out = n.value; return true;
      case Op::variable: return false;
      case Op::neg:
        if (!fold_constant(*n.lhs, a)) return false;
        out = -a;
        return true;
      case Op::pow:
        if (!fold_constant(*n.lhs, a)) return false;
        out = ipow(a, n.exponent);
        return true;
      case Op::func: return false;
      default:
        if (!fold_constant(*n.lhs, a) || !fold_constant(*n.rhs, b)) return false;
        switch (n.op) {
          case Op::add: out = a + b; break;
          case Op::sub: out = a - b; break;
          case Op::mul: out = a * b; break;
          case Op::div: out = a / b; break;
          default: return false;
        }
        return true;
    }
  }

  std::string_view text_;
  int arity_;
  std::size_t pos_ = 0;
};

template <typename T>
T evaluate(const Node& n, std::span<const T> x) {
  switch (n.op) {
    case Op::constant: return T(n.value);
    case Op::variable: return x[n.variable];
    case Op::add: return evaluate(*n.lhs, x) + evaluate(*n.rhs, x);
    case Op::sub: return evaluate(*n.lhs, x) - evaluate(*n.rhs, x);
    case Op::mul: return evaluate(*n.lhs, x) * evaluate(*n.rhs, x);
    case Op::div: {
      T den = evaluate(*n.rhs, x);
      if (primal(den) == 0.0) throw DomainError("division by zero");
      return evaluate(*n.lhs, x) / den;
    }
    case Op::neg: return -evaluate(*n.lhs, x);
    case Op::pow: {
      T base = evaluate(*n.lhs, x);
      if (n.exponent < 0 && primal(base) == 0.0) {
        throw DomainError("zero raised to a negative power");
      }
      return ipow(base, n.exponent);
    }
    case Op::func: {
      T a = evaluate(*n.lhs, x);
      switch (n.func) {
        case Func::sin: return sin(a);
        case Func::cos: return cos(a);
        case Func::exp: return exp(a);
        case Func::tanh: return tanh(a);
        case Func::sqrt:
          if (primal(a) < 0.0) throw DomainError("sqrt of a negative number");
          return sqrt(a);
      }
    }
  }
  throw DomainError("malformed expression tree");
}

inline void print(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::constant:
      out += '(';
      out += format_number(n.value);
      out += ')';
      return;
    case Op::variable:
      out += 'x';
      out += std::to_string(n.variable + 1);
      return;
    case Op::neg:
      out += "(-";
      print(*n.lhs, out);
      out += ')';
      return;
    case Op::pow:
      out += '(';
      print(*n.lhs, out);
      out += "^(" + std::to_string(n.exponent) + "))";
      return;
    case Op::func:
      out += func_name(n.func);
      out += '(';
      print(*n.lhs, out);
      out += ')';
      return;
    default: {
      const char sym = n.op == Op::add ? '+' : n.op == Op::sub ? '-' : n.op == Op::mul ? '*' : '/';
      out += '(';
      print(*n.lhs, out);
      out += sym;
      print(*n.rhs, out);
      out += ')';
    }
  }
}

}  // namespace expr

/// A parsed scalar field on R^arity. Immutable; copies share the tree.
class ScalarField {
 public:
  static ScalarField parse(std::string_view text, int arity) {
    if (arity < 1) throw DimensionError("field arity must be positive");
    expr::Parser p(text, arity);
    return ScalarField(p.parse(), arity, std::string(text));
  }

  static ScalarField constant(double value, int arity) {
    return parse(expr::format_number(value), arity);
  }

  int arity() const noexcept { return arity_; }

  /// The text this field was parsed from.
  const std::string& source() const noexcept { return source_; }

  /// Fully parenthesized canonical form using x1..xn; parses back to an
  /// equivalent tree.
  std::string print() const {
    std::string out;
    expr::print(*root_, out);
    return out;
  }

  template <typename T>
  T evaluate(std::span<const T> x) const {
    check_arity(x.size());
    return expr::evaluate(*root_, x);
  }

  double operator()(std::span<const double> x) const { return evaluate<double>(x); }

  /// Exact gradient by forward-mode differentiation, one pass per coordinate.
  template <typename T>
  std::vector<T> gradient(std::span<const T> x) const {
    check_arity(x.size());
    std::vector<Dual<T>> seed(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) seed[i] = Dual<T>(x[i], T(0.0));
    std::vector<T> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      seed[i].deriv = T(1.0);
      g[i] = expr::evaluate<Dual<T>>(*root_, seed).deriv;
      seed[i].deriv = T(0.0);
    }
    return g;
  }

  std::vector<double> gradient(std::span<const double> x) const {
    return gradient<double>(x);
  }

  const expr::Node& tree() const noexcept { return *root_; }

 private:
  ScalarField(expr::NodePtr root, int arity, std::string source)
      : root_(std::move(root)), arity_(arity), source_(std::move(source)) {}

  void check_arity(std::size_t n) const {
    if (static_cast<int>(n) != arity_) {
      throw DimensionError("field of arity " + std::to_string(arity_) +
                           " evaluated at a point of dimension " + std::to_string(n));
    }
  }

  expr::NodePtr root_;
  int arity_;
  std::string source_;
};

}  // namespace dissipative
