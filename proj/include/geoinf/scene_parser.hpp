#pragma once

// Scene DSL:
//   scene "<name>" {
//     ambient <m>; dim <n>; [overlap disjoint|declared;]
//     chart { params (p1,...,pd); domain { <p> in (<lo>,<hi>) [grow linear|acosh|pow(<e>)];
//                                          exclude ball((c..),r); within ball((c..),r); }
//             map (<expr>, ..., <expr>); [weight <w>;] }
//     graph { params (...); domain {...}; height (<expr>, ...); }
//     builtin staircase(<a1>) | lawson_osserman();
//     meta { definable=<bool>; minimal=<bool>; cone_vertex=(..); monotone_at=(..); }
//   }
// Semicolons are optional. Bounds are constant expressions or inf / -inf.

#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "geoinf/error.hpp"
#include "geoinf/expr.hpp"
#include "geoinf/lexer.hpp"
#include "geoinf/scene.hpp"

namespace geoinf {

namespace detail {

class SceneParser {
 public:
  explicit SceneParser(std::string_view text) : text_(text), ts_(tokenize(text)) {}

  Scene parse() {
    Scene s;
    s.source = std::string(text_);
    ts_.expect_ident("scene");
    if (ts_.peek().kind != TokenKind::String) ts_.fail({"scene name string"});
    s.name = ts_.next().text;
    ts_.expect_punct('{');
    std::size_t header_offset = ts_.peek().offset;
    while (!ts_.accept_punct('}')) {
      const Token& t = ts_.peek();
      if (t.kind != TokenKind::Ident) ts_.fail({"ambient", "dim", "chart", "graph", "builtin", "meta", "}"});
      const std::string kw = t.text;
      if (kw == "ambient") {
        ts_.next();
        s.ambient = integer();
      } else if (kw == "dim") {
        ts_.next();
        s.dim = integer();
      } else if (kw == "overlap") {
        ts_.next();
        const std::string v = ts_.expect_any_ident();
        if (v == "declared") s.declared_overlap = true;
        else if (v != "disjoint") throw ParseError(t.offset, {"disjoint", "declared"}, "bad overlap policy");
      } else if (kw == "chart" || kw == "graph") {
        ts_.next();
        pending_.push_back(chart_block(kw == "graph"));
      } else if (kw == "builtin") {
        ts_.next();
        builtin(s);
      } else if (kw == "meta") {
        ts_.next();
        meta_block(s.meta);
      } else {
        ts_.fail({"ambient", "dim", "overlap", "chart", "graph", "builtin", "meta", "}"});
      }
      ts_.accept_punct(';');
    }
    if (!ts_.at_end()) ts_.fail({"end of input"});
    finish(s, header_offset);
    return s;
  }

 private:
  struct PendingChart {
    std::size_t offset;
    bool graph;
    std::vector<std::string> params;
    std::vector<std::string> bound_names;
    std::vector<double> lo, hi;
    std::vector<GrowthHint> growth;
    std::vector<Ball> excluded, within;
    VecExpr map;
    double weight = 1.0;
  };

  int integer() {
    const Token& t = ts_.peek();
    if (t.kind != TokenKind::Number || std::floor(t.number) != t.number) ts_.fail({"integer"});
    return static_cast<int>(ts_.next().number);
  }

  double constant() {
    static const std::vector<std::string> none;
    const std::size_t at = ts_.peek().offset;
    const Expr e = parse_expr(ts_, &none);
    try {
      return eval(e, {});
    } catch (const DomainError& err) {
      throw ParseError(at, {"constant"}, err.what());
    }
  }

  double bound() {
    if (ts_.is_ident("inf")) {
      ts_.next();
      return std::numeric_limits<double>::infinity();
    }
    if (ts_.is_punct('-') && ts_.peek(1).kind == TokenKind::Ident && ts_.peek(1).text == "inf") {
      ts_.next();
      ts_.next();
      return -std::numeric_limits<double>::infinity();
    }
    return constant();
  }

  bool boolean() {
    if (ts_.is_ident("true")) {
      ts_.next();
      return true;
    }
    if (ts_.is_ident("false")) {
      ts_.next();
      return false;
    }
    ts_.fail({"true", "false"});
  }

  std::vector<double> tuple() {
    std::vector<double> v;
    ts_.expect_punct('(');
    v.push_back(constant());
    while (ts_.accept_punct(',')) v.push_back(constant());
    ts_.expect_punct(')');
    return v;
  }

  Ball ball() {
    ts_.expect_ident("ball");
    ts_.expect_punct('(');
    Ball b{to_vec(tuple()), 0.0};
    ts_.expect_punct(',');
    b.radius = constant();
    ts_.expect_punct(')');
    if (!(b.radius > 0)) ts_.fail({"positive radius"});
    return b;
  }

  PendingChart chart_block(bool graph) {
    PendingChart c;
    c.offset = ts_.peek().offset;
    c.graph = graph;
    ts_.expect_punct('{');
    bool have_map = false;
    while (!ts_.accept_punct('}')) {
      if (ts_.is_ident("params")) {
        ts_.next();
        ts_.expect_punct('(');
        c.params.push_back(ts_.expect_any_ident());
        while (ts_.accept_punct(',')) c.params.push_back(ts_.expect_any_ident());
        ts_.expect_punct(')');
        c.lo.assign(c.params.size(), -std::numeric_limits<double>::infinity());
        c.hi.assign(c.params.size(), std::numeric_limits<double>::infinity());
        c.growth.assign(c.params.size(), GrowthHint{});
      } else if (ts_.is_ident("domain")) {
        if (c.params.empty()) ts_.fail({"params"});
        ts_.next();
        domain_block(c);
      } else if (ts_.is_ident(graph ? "height" : "map")) {
        if (c.params.empty()) ts_.fail({"params"});
        ts_.next();
        ts_.expect_punct('(');
        c.map.push_back(parse_expr(ts_, &c.params));
        while (ts_.accept_punct(',')) c.map.push_back(parse_expr(ts_, &c.params));
        ts_.expect_punct(')');
        have_map = true;
      } else if (ts_.is_ident("weight")) {
        ts_.next();
        c.weight = constant();
        if (!(c.weight > 0 && c.weight <= 1)) ts_.fail({"weight in (0,1]"});
      } else {
        ts_.fail({"params", "domain", graph ? "height" : "map", "weight", "}"});
      }
      ts_.accept_punct(';');
    }
    if (c.params.empty()) throw ParseError(c.offset, {"params"}, "chart without params");
    if (!have_map) throw ParseError(c.offset, {graph ? "height" : "map"}, "chart without map");
    if (graph) {
      VecExpr full;
      for (const auto& p : c.params) full.push_back(Expr::variable(p));
      full.insert(full.end(), c.map.begin(), c.map.end());
      c.map = std::move(full);
    }
    return c;
  }

  void domain_block(PendingChart& c) {
    ts_.expect_punct('{');
    while (!ts_.accept_punct('}')) {
      if (ts_.is_ident("exclude")) {
        ts_.next();
        c.excluded.push_back(ball());
      } else if (ts_.is_ident("within")) {
        ts_.next();
        c.within.push_back(ball());
      } else {
        const std::size_t at = ts_.peek().offset;
        const std::string name = ts_.expect_any_ident();
        auto it = std::find(c.params.begin(), c.params.end(), name);
        if (it == c.params.end()) throw UnknownIdentifierError(at, name);
        const std::size_t k = static_cast<std::size_t>(it - c.params.begin());
        ts_.expect_ident("in");
        ts_.expect_punct('(');
        c.lo[k] = bound();
        ts_.expect_punct(',');
        c.hi[k] = bound();
        ts_.expect_punct(')');
        if (!(c.lo[k] < c.hi[k])) throw ParseError(at, {"lo < hi"}, "empty interval for '" + name + "'");
        if (ts_.is_ident("grow")) {
          ts_.next();
          const std::string g = ts_.expect_any_ident();
          if (g == "linear") {
            c.growth[k].kind = GrowthHint::Linear;
          } else if (g == "acosh") {
            c.growth[k].kind = GrowthHint::Acosh;
          } else if (g == "pow") {
            ts_.expect_punct('(');
            c.growth[k] = {GrowthHint::Pow, constant()};
            ts_.expect_punct(')');
          } else {
            throw ParseError(at, {"linear", "acosh", "pow"}, "unknown growth hint '" + g + "'");
          }
        }
        c.bound_names.push_back(name);
      }
      ts_.accept_punct(';');
    }
  }

  void builtin(Scene& s) {
    const std::size_t at = ts_.peek().offset;
    const std::string name = ts_.expect_any_ident();
    std::vector<double> args;
    ts_.expect_punct('(');
    if (!ts_.is_punct(')')) {
      args.push_back(constant());
      while (ts_.accept_punct(',')) args.push_back(constant());
    }
    ts_.expect_punct(')');
    if (name == "staircase") {
      if (args.size() != 1 || !(args[0] > 0)) throw ParseError(at, {"staircase(a1 > 0)"}, "bad staircase arguments");
      s.staircase = StaircaseSet{args[0]};
    } else if (name == "lawson_osserman") {
      if (!args.empty()) throw ParseError(at, {"lawson_osserman()"}, "lawson_osserman takes no arguments");
      // f(x) = (sqrt5/2) eta(x)/|x| with eta the quadratic Hopf map of C^2.
      static const char* kLO =
          "scene \"lo\" { ambient 7 dim 4 graph { params (x1,x2,x3,x4)"
          " domain { x1 in (-inf,inf) grow linear x2 in (-inf,inf) grow linear"
          " x3 in (-inf,inf) grow linear x4 in (-inf,inf) grow linear exclude ball((0,0,0,0),1e-6) }"
          " height (sqrt(5)/2*(x1^2+x2^2-x3^2-x4^2)/sqrt(x1^2+x2^2+x3^2+x4^2),"
          " sqrt(5)/2*2*(x1*x3+x2*x4)/sqrt(x1^2+x2^2+x3^2+x4^2),"
          " sqrt(5)/2*2*(x2*x3-x1*x4)/sqrt(x1^2+x2^2+x3^2+x4^2)) } }";
      SceneParser inner(kLO);
      Scene lo = inner.parse();
      s.charts.push_back(std::move(lo.charts[0]));
    } else {
      throw UnknownBuiltinError("unknown builtin '" + name + "' at byte " + std::to_string(at));
    }
  }

  void meta_block(Meta& m) {
    ts_.expect_punct('{');
    while (!ts_.accept_punct('}')) {
      const std::string key = ts_.expect_any_ident();
      ts_.expect_punct('=');
      if (key == "definable") m.definable = boolean();
      else if (key == "minimal") m.minimal = boolean();
      else if (key == "cone_vertex") m.cone_vertex = to_vec(tuple());
      else if (key == "monotone_at") m.monotone_at = to_vec(tuple());
      else ts_.fail({"definable", "minimal", "cone_vertex", "monotone_at"});
      ts_.accept_punct(';');
    }
  }

  void finish(Scene& s, std::size_t at) {
    if (s.ambient < 2 || s.ambient > kMaxAmbient || s.dim < 1 || s.dim >= s.ambient || s.dim > kMaxParams)
      throw DimensionMismatchError("need 1 <= dim < ambient <= 8 and dim <= 4, got dim " + std::to_string(s.dim) +
                                   ", ambient " + std::to_string(s.ambient));
    for (auto& c : pending_) {
      if (static_cast<int>(c.params.size()) != s.dim)
        throw DimensionMismatchError("chart at byte " + std::to_string(c.offset) + " has " +
                                     std::to_string(c.params.size()) + " parameters, scene dim is " +
                                     std::to_string(s.dim));
      if (static_cast<int>(c.map.size()) != s.ambient)
        throw DimensionMismatchError("chart at byte " + std::to_string(c.offset) + " maps into R^" +
                                     std::to_string(c.map.size()) + ", scene ambient is " +
                                     std::to_string(s.ambient));
      for (const auto& b : c.excluded)
        if (b.center.size() != s.dim) throw DimensionMismatchError("excluded ball center has wrong dimension");
      for (const auto& b : c.within)
        if (b.center.size() != s.dim) throw DimensionMismatchError("domain ball center has wrong dimension");
      for (std::size_t k = 0; k < c.params.size(); ++k) {
        const bool bounded = std::isfinite(c.lo[k]) && std::isfinite(c.hi[k]);
        if (!bounded && c.growth[k].kind == GrowthHint::None && c.within.empty())
          throw ParseError(c.offset, {"grow"}, "parameter '" + c.params[k] + "' is unbounded without a growth hint");
      }
      Chart ch;
      ch.params = c.params;
      ch.domain = Region{c.lo, c.hi, c.excluded, c.within};
      ch.growth = c.growth;
      ch.map = c.map;
      ch.program = Program(c.map, c.params);
      ch.weight = c.weight;
      ch.graph = c.graph;
      s.charts.push_back(std::move(ch));
    }
    if (s.staircase && (s.ambient != 2 || s.dim != 1))
      throw DimensionMismatchError("staircase needs ambient 2 and dim 1");
    if (s.staircase && !s.charts.empty()) throw ParseError(at, {}, "staircase cannot be combined with charts");
    for (const auto& c : s.charts)
      if (c.dim() != s.dim || c.ambient() != s.ambient)
        throw DimensionMismatchError("builtin chart does not match scene dimensions");
    if (s.charts.empty() && !s.staircase) throw ParseError(at, {"chart", "graph", "builtin"}, "scene has no charts");
    if (s.meta.cone_vertex && s.meta.cone_vertex->size() != s.ambient)
      throw DimensionMismatchError("cone_vertex has wrong dimension");
    if (s.meta.monotone_at && s.meta.monotone_at->size() != s.ambient)
      throw DimensionMismatchError("monotone_at has wrong dimension");
  }

  std::string_view text_;
  TokenStream ts_;
  std::vector<PendingChart> pending_;
};

}  // namespace detail

inline Scene parse_scene(std::string_view text) { return detail::SceneParser(text).parse(); }

/// 1-based line and column of a byte offset, for error messages.
inline std::pair<int, int> line_col(std::string_view text, std::size_t offset) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace geoinf
