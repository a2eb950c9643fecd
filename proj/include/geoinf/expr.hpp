#pragma once

// Expression trees for chart maps: parser, printer, evaluator and forward-mode
// differentiation. Grammar:
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := ("-")? power
//   power  := atom ("^" factor)?
//   atom   := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "geoinf/error.hpp"
#include "geoinf/lexer.hpp"

namespace geoinf {

enum class Op {
  Const,
  Var,
  Neg,
  Sqrt,
  Exp,
  Log,
  Sin,
  Cos,
  Sinh,
  Cosh,
  Atan,
  Abs,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Atan2,
};

inline constexpr int arity(Op op) {
  switch (op) {
    case Op::Const:
    case Op::Var:
      return 0;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
    case Op::Atan2:
      return 2;
    default:
      return 1;
  }
}

inline std::optional<Op> unary_function(std::string_view name) {
  static const std::map<std::string_view, Op> table = {
      {"sqrt", Op::Sqrt}, {"exp", Op::Exp},   {"log", Op::Log},   {"sin", Op::Sin},
      {"cos", Op::Cos},   {"sinh", Op::Sinh}, {"cosh", Op::Cosh}, {"atan", Op::Atan},
      {"abs", Op::Abs}};
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

inline const char* function_name(Op op) {
  switch (op) {
    case Op::Sqrt: return "sqrt";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Sinh: return "sinh";
    case Op::Cosh: return "cosh";
    case Op::Atan: return "atan";
    case Op::Abs: return "abs";
    case Op::Atan2: return "atan2";
    default: return "";
  }
}

/// Immutable expression node handle. Copies share the underlying tree.
class Expr {
 public:
  static Expr constant(double v) { return Expr(std::make_shared<Node>(Node{Op::Const, v, {}, {}})); }
  static Expr variable(std::string name) {
    return Expr(std::make_shared<Node>(Node{Op::Var, 0.0, std::move(name), {}}));
  }
  static Expr unary(Op op, Expr a) {
    return Expr(std::make_shared<Node>(Node{op, 0.0, {}, {std::move(a)}}));
  }
  static Expr binary(Op op, Expr a, Expr b) {
    return Expr(std::make_shared<Node>(Node{op, 0.0, {}, {std::move(a), std::move(b)}}));
  }

  Op op() const { return node_->op; }
  double value() const { return node_->value; }
  const std::string& name() const { return node_->name; }
  std::size_t size() const { return node_->kids.size(); }
  const Expr& child(std::size_t i) const { return node_->kids[i]; }

  /// Structural equality; constants compare bitwise.
  friend bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (a.op() != b.op() || a.size() != b.size()) return false;
    if (a.op() == Op::Const) return std::memcmp(&a.node_->value, &b.node_->value, sizeof(double)) == 0;
    if (a.op() == Op::Var) return a.name() == b.name();
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!(a.child(i) == b.child(i))) return false;
    return true;
  }

  /// The exponent of a Pow node counts as integer if it is an integer literal,
  /// optionally negated.
  bool has_integer_exponent() const {
    if (op() != Op::Pow) return false;
    const Expr* e = &child(1);
    if (e->op() == Op::Neg) e = &e->child(0);
    return e->op() == Op::Const && std::isfinite(e->value()) && std::floor(e->value()) == e->value();
  }

 private:
  struct Node {
    Op op;
    double value;
    std::string name;
    std::vector<Expr> kids;
  };
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// One expression per output coordinate, all over the same parameter list.
using VecExpr = std::vector<Expr>;

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Fully parenthesized text that parses back to a structurally equal tree.
inline std::string to_string(const Expr& e) {
  switch (e.op()) {
    case Op::Const:
      return format_double(e.value());
    case Op::Var:
      return e.name();
    case Op::Neg:
      return "(-" + to_string(e.child(0)) + ")";
    case Op::Add:
      return "(" + to_string(e.child(0)) + "+" + to_string(e.child(1)) + ")";
    case Op::Sub:
      return "(" + to_string(e.child(0)) + "-" + to_string(e.child(1)) + ")";
    case Op::Mul:
      return "(" + to_string(e.child(0)) + "*" + to_string(e.child(1)) + ")";
    case Op::Div:
      return "(" + to_string(e.child(0)) + "/" + to_string(e.child(1)) + ")";
    case Op::Pow:
      return "(" + to_string(e.child(0)) + "^" + to_string(e.child(1)) + ")";
    case Op::Atan2:
      return std::string("atan2(") + to_string(e.child(0)) + "," + to_string(e.child(1)) + ")";
    default:
      return std::string(function_name(e.op())) + "(" + to_string(e.child(0)) + ")";
  }
}

namespace detail {

class ExprParser {
 public:
  ExprParser(TokenStream& ts, const std::vector<std::string>* vars) : ts_(ts), vars_(vars) {}

  Expr expr() {
    Expr lhs = term();
    while (ts_.is_punct('+') || ts_.is_punct('-')) {
      const Op op = ts_.next().text[0] == '+' ? Op::Add : Op::Sub;
      lhs = Expr::binary(op, lhs, term());
    }
    return lhs;
  }

 private:
  Expr term() {
    Expr lhs = factor();
    while (ts_.is_punct('*') || ts_.is_punct('/')) {
      const Op op = ts_.next().text[0] == '*' ? Op::Mul : Op::Div;
      lhs = Expr::binary(op, lhs, factor());
    }
    return lhs;
  }

  Expr factor() {
    if (ts_.accept_punct('-')) return Expr::unary(Op::Neg, power());
    return power();
  }

  Expr power() {
    Expr base = atom();
    if (ts_.accept_punct('^')) return Expr::binary(Op::Pow, base, factor());
    return base;
  }

  Expr atom() {
    const Token& t = ts_.peek();
    if (t.kind == TokenKind::Number) {
      ts_.next();
      return Expr::constant(t.number);
    }
    if (ts_.accept_punct('(')) {
      Expr inner = expr();
      ts_.expect_punct(')');
      return inner;
    }
    if (t.kind == TokenKind::Ident) {
      const std::string name = t.text;
      const std::size_t offset = t.offset;
      ts_.next();
      if (ts_.accept_punct('(')) {
        std::vector<Expr> args{expr()};
        while (ts_.accept_punct(',')) args.push_back(expr());
        ts_.expect_punct(')');
        if (name == "atan2") {
          if (args.size() != 2) throw ParseError(offset, {"2 arguments"}, "atan2 takes two arguments");
          return Expr::binary(Op::Atan2, args[0], args[1]);
        }
        if (auto op = unary_function(name)) {
          if (args.size() != 1) throw ParseError(offset, {"1 argument"}, name + " takes one argument");
          return Expr::unary(*op, args[0]);
        }
        throw UnknownIdentifierError(offset, name);
      }
      if (name == "pi") return Expr::constant(M_PI);
      if (name == "e") return Expr::constant(M_E);
      if (name == "atan2" || unary_function(name)) ts_.fail({"("});
      if (vars_ && std::find(vars_->begin(), vars_->end(), name) == vars_->end())
        throw UnknownIdentifierError(offset, name);
      return Expr::variable(name);
    }
    ts_.fail({"number", "identifier", "("});
  }

  TokenStream& ts_;
  const std::vector<std::string>* vars_;
};

}  // namespace detail

/// Parses one expression from the stream, stopping at the first token that
/// cannot continue it. If `vars` is given, other free identifiers are errors.
inline Expr parse_expr(TokenStream& ts, const std::vector<std::string>* vars = nullptr) {
  detail::ExprParser p(ts, vars);
  return p.expr();
}

inline Expr parse_expr(std::string_view text, const std::vector<std::string>* vars = nullptr) {
  TokenStream ts(tokenize(text));
  Expr e = parse_expr(ts, vars);
  if (!ts.at_end()) ts.fail({"operator", "end of input"});
  return e;
}

inline Expr parse_expr(std::string_view text, const std::vector<std::string>& vars) {
  return parse_expr(text, &vars);
}

/// Tree-walking evaluation. Throws DomainError on domain violations.
inline double eval(const Expr& e, const std::map<std::string, double>& env) {
  auto fail = [&]() -> double { throw DomainError(to_string(e)); };
  switch (e.op()) {
    case Op::Const:
      return e.value();
    case Op::Var: {
      auto it = env.find(e.name());
      if (it == env.end()) throw UnknownIdentifierError(0, e.name());
      return it->second;
    }
    default:
      break;
  }
  const double a = eval(e.child(0), env);
  switch (e.op()) {
    case Op::Neg: return -a;
    case Op::Sqrt: return a < 0 ? fail() : std::sqrt(a);
    case Op::Exp: return std::exp(a);
    case Op::Log: return a <= 0 ? fail() : std::log(a);
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Sinh: return std::sinh(a);
    case Op::Cosh: return std::cosh(a);
    case Op::Atan: return std::atan(a);
    case Op::Abs: return std::fabs(a);
    default: break;
  }
  const double b = eval(e.child(1), env);
  switch (e.op()) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return b == 0 ? fail() : a / b;
    case Op::Pow:
      if (!e.has_integer_exponent() && !(a > 0)) return fail();
      return std::pow(a, b);
    case Op::Atan2: return std::atan2(a, b);
    default: return fail();
  }
}

/// A vector expression compiled to a flat instruction list over a fixed
/// parameter order. Immutable after construction; evaluation is reentrant.
class Program {
 public:
  Program() = default;

  Program(const VecExpr& components, std::vector<std::string> params) : params_(std::move(params)) {
    for (const auto& c : components) outputs_.push_back(compile(c));
  }

  std::size_t num_params() const { return params_.size(); }
  std::size_t num_outputs() const { return outputs_.size(); }
  const std::vector<std::string>& params() const { return params_; }

  /// Evaluates all outputs. Returns the index of the failing instruction on a
  /// domain violation, or -1 on success.
  int try_eval(std::span<const double> p, std::span<double> out) const {
    auto& v = scratch_values();
    const int bad = forward(p, v);
    if (bad >= 0) return bad;
    for (std::size_t i = 0; i < outputs_.size(); ++i) out[i] = v[outputs_[i]];
    return -1;
  }

  void eval(std::span<const double> p, std::span<double> out) const {
    const int bad = try_eval(p, out);
    if (bad >= 0) throw DomainError(to_string(code_[bad].source));
  }

  /// Values and the m x d Jacobian, one forward-mode pass per parameter.
  int try_jacobian(std::span<const double> p, std::span<double> out, Eigen::Ref<Eigen::MatrixXd> jac) const {
    auto& v = scratch_values();
    const int bad = forward(p, v);
    if (bad >= 0) return bad;
    for (std::size_t i = 0; i < outputs_.size(); ++i) out[i] = v[outputs_[i]];
    auto& dv = scratch_derivs();
    dv.resize(code_.size());
    for (std::size_t j = 0; j < params_.size(); ++j) {
      tangent(v, static_cast<int>(j), dv);
      for (std::size_t i = 0; i < outputs_.size(); ++i) jac(i, j) = dv[outputs_[i]];
    }
    return -1;
  }

  Eigen::MatrixXd jacobian(std::span<const double> p) const {
    std::vector<double> out(outputs_.size());
    Eigen::MatrixXd jac(outputs_.size(), params_.size());
    const int bad = try_jacobian(p, out, jac);
    if (bad >= 0) throw DomainError(to_string(code_[bad].source));
    return jac;
  }

 private:
  struct Instr {
    Op op;
    int a = -1;
    int b = -1;
    double c = 0.0;  // constant value, or integer exponent flag for Pow
    Expr source;
  };

  int compile(const Expr& e) {
    Instr ins{e.op(), -1, -1, 0.0, e};
    if (e.op() == Op::Const) {
      ins.c = e.value();
    } else if (e.op() == Op::Var) {
      auto it = std::find(params_.begin(), params_.end(), e.name());
      if (it == params_.end()) throw UnknownIdentifierError(0, e.name());
      ins.a = static_cast<int>(it - params_.begin());
    } else {
      ins.a = compile(e.child(0));
      if (arity(e.op()) == 2) ins.b = compile(e.child(1));
      if (e.op() == Op::Pow) ins.c = e.has_integer_exponent() ? 1.0 : 0.0;
    }
    code_.push_back(std::move(ins));
    return static_cast<int>(code_.size()) - 1;
  }

  static std::vector<double>& scratch_values() {
    thread_local std::vector<double> v;
    return v;
  }
  static std::vector<double>& scratch_derivs() {
    thread_local std::vector<double> v;
    return v;
  }

  int forward(std::span<const double> p, std::vector<double>& v) const {
    v.resize(code_.size());
    for (std::size_t k = 0; k < code_.size(); ++k) {
      const Instr& in = code_[k];
      const double a = in.a >= 0 && in.op != Op::Var ? v[in.a] : 0.0;
      const double b = in.b >= 0 ? v[in.b] : 0.0;
      double r = 0.0;
      switch (in.op) {
        case Op::Const: r = in.c; break;
        case Op::Var: r = p[in.a]; break;
        case Op::Neg: r = -a; break;
        case Op::Sqrt:
          if (a < 0) return static_cast<int>(k);
          r = std::sqrt(a);
          break;
        case Op::Exp: r = std::exp(a); break;
        case Op::Log:
          if (!(a > 0)) return static_cast<int>(k);
          r = std::log(a);
          break;
        case Op::Sin: r = std::sin(a); break;
        case Op::Cos: r = std::cos(a); break;
        case Op::Sinh: r = std::sinh(a); break;
        case Op::Cosh: r = std::cosh(a); break;
        case Op::Atan: r = std::atan(a); break;
        case Op::Abs: r = std::fabs(a); break;
        case Op::Add: r = a + b; break;
        case Op::Sub: r = a - b; break;
        case Op::Mul: r = a * b; break;
        case Op::Div:
          if (b == 0) return static_cast<int>(k);
          r = a / b;
          break;
        case Op::Pow:
          if (in.c == 0.0 && !(a > 0)) return static_cast<int>(k);
          r = std::pow(a, b);
          break;
        case Op::Atan2: r = std::atan2(a, b); break;
      }
      v[k] = r;
    }
    return -1;
  }

  void tangent(const std::vector<double>& v, int seed, std::vector<double>& dv) const {
    for (std::size_t k = 0; k < code_.size(); ++k) {
      const Instr& in = code_[k];
      const double x = in.a >= 0 && in.op != Op::Var ? v[in.a] : 0.0;
      const double dx = in.a >= 0 && in.op != Op::Var ? dv[in.a] : 0.0;
      const double y = in.b >= 0 ? v[in.b] : 0.0;
      const double dy = in.b >= 0 ? dv[in.b] : 0.0;
      double d = 0.0;
      switch (in.op) {
        case Op::Const: d = 0.0; break;
        case Op::Var: d = in.a == seed ? 1.0 : 0.0; break;
        case Op::Neg: d = -dx; break;
        case Op::Sqrt: d = dx == 0.0 ? 0.0 : dx / (2.0 * v[k]); break;
        case Op::Exp: d = v[k] * dx; break;
        case Op::Log: d = dx / x; break;
        case Op::Sin: d = std::cos(x) * dx; break;
        case Op::Cos: d = -std::sin(x) * dx; break;
        case Op::Sinh: d = std::cosh(x) * dx; break;
        case Op::Cosh: d = std::sinh(x) * dx; break;
        case Op::Atan: d = dx / (1.0 + x * x); break;
        case Op::Abs: d = x > 0 ? dx : (x < 0 ? -dx : 0.0); break;
        case Op::Add: d = dx + dy; break;
        case Op::Sub: d = dx - dy; break;
        case Op::Mul: d = dx * y + x * dy; break;
        case Op::Div: d = (dx * y - x * dy) / (y * y); break;
        case Op::Pow:
          if (in.c != 0.0) {
            d = dx == 0.0 ? 0.0 : y * std::pow(x, y - 1.0) * dx;
          } else {
            d = v[k] * ((dy == 0.0 ? 0.0 : dy * std::log(x)) + y * dx / x);
          }
          break;
        case Op::Atan2: d = (y * dx - x * dy) / (x * x + y * y); break;
      }
      dv[k] = d;
    }
  }

  std::vector<std::string> params_;
  std::vector<Instr> code_;
  std::vector<int> outputs_;
};

/// m x d Jacobian of `f` at `point`, by forward-mode dual numbers.
inline Eigen::MatrixXd jacobian(const VecExpr& f, const std::vector<std::string>& params,
                                std::span<const double> point) {
  return Program(f, params).jacobian(point);
}

}  // namespace geoinf
