#pragma once

#include <string>
#include <utility>
#include <vector>

#include "geoinf/error.hpp"
#include "geoinf/expr.hpp"
#include "geoinf/scene_parser.hpp"

namespace geoinf {

/// Scene text of alpha_cone(alpha): the double cone z^2 = alpha (x^2 + y^2) as
/// two radial charts. The vertex density is 2/sqrt(1+alpha), which is >= 1 and
/// attained by a singular point unless alpha < 3, so only then is the vertex
/// declared a monotonicity point.
inline std::string alpha_cone_text(double alpha) {
  const std::string a = format_double(alpha);
  const std::string meta = alpha < 3 ? "; monotone_at=(0,0,0)" : "";
  std::string chart = "  chart { params (r,s) domain { r in (0,inf) grow linear; s in (0,2*pi) } map (r*cos(s), r*sin(s), ";
  return "scene \"alpha_cone(" + a + ")\" {\n  ambient 3; dim 2\n" + chart + "sqrt(" + a + ")*r) }\n" + chart + "-sqrt(" +
         a + ")*r) }\n  meta { definable=true; minimal=false; cone_vertex=(0,0,0)" + meta + " }\n}\n";
}

/// The named scenes, as DSL text.
inline const std::vector<std::pair<std::string, std::string>>& builtin_texts() {
  static const std::vector<std::pair<std::string, std::string>> lib = {
      {"plane", R"S(scene "plane" {
  ambient 3; dim 2
  graph { params (x,y); domain { x in (-inf,inf) grow linear; y in (-inf,inf) grow linear } height (0) }
  meta { definable=true; minimal=true; cone_vertex=(0,0,0); monotone_at=(0,0,0) }
}
)S"},
      {"parabola", R"S(scene "parabola" {
  ambient 2; dim 1
  graph { params (x); domain { x in (-inf,inf) grow linear } height (x^2) }
  meta { definable=true; minimal=false }
}
)S"},
      {"catenoid", R"S(scene "catenoid" {
  ambient 3; dim 2
  chart {
    params (t,s)
    domain { t in (-inf,inf) grow acosh; s in (0,2*pi) }
    map (cosh(t)*cos(s), cosh(t)*sin(s), t)
  }
  meta { definable=true; minimal=true; monotone_at=(1,0,0) }
}
)S"},
      {"upper_catenoid", R"S(scene "upper_catenoid" {
  ambient 3; dim 2
  # arccosh(|x|) over the plane minus the closed disk of radius 2
  graph {
    params (x,y)
    domain { x in (-inf,inf) grow linear; y in (-inf,inf) grow linear; exclude ball((0,0),2) }
    height (log(sqrt(x^2+y^2) + sqrt(x^2+y^2-1)))
  }
  meta { definable=true; minimal=false }
}
)S"},
      {"alpha_cone", alpha_cone_text(1.0)},
      {"helicoid", R"S(scene "helicoid" {
  ambient 3; dim 2
  chart {
    params (t,s)
    domain { t in (-inf,inf) grow linear; s in (-inf,inf) grow linear }
    map (t*cos(s), t*sin(s), s)
  }
  meta { definable=false; minimal=true; monotone_at=(0,0,0) }
}
)S"},
      {"staircase", R"S(scene "staircase(1)" {
  ambient 2; dim 1
  builtin staircase(1)
  meta { definable=false; minimal=false }
}
)S"},
      {"complex_parabola", R"S(scene "complex_parabola" {
  ambient 4; dim 2
  # z = w^2 with w = u + i v
  graph { params (u,v); domain { u in (-inf,inf) grow pow(1/2); v in (-inf,inf) grow pow(1/2) } height (u^2-v^2, 2*u*v) }
  meta { definable=true; minimal=true; monotone_at=(0,0,0,0) }
}
)S"},
      {"cubic_graph", R"S(scene "cubic_graph" {
  ambient 3; dim 2
  graph { params (x,y); domain { x in (-inf,inf) grow linear; y in (-inf,inf) grow linear } height ((x^2+y^2+1)^(1/3)) }
  meta { definable=true; minimal=false }
}
)S"},
      {"lawson_osserman", R"S(scene "lawson_osserman" {
  ambient 7; dim 4
  builtin lawson_osserman()
  meta { definable=true; minimal=true; cone_vertex=(0,0,0,0,0,0,0); monotone_at=(0,0,0,0,0,0,0) }
}
)S"},
  };
  return lib;
}

/// Further scenes used by tests and the acceptance suite.
inline const std::vector<std::pair<std::string, std::string>>& extra_texts() {
  static const std::vector<std::pair<std::string, std::string>> lib = {
      {"complex_line", R"S(scene "complex_line" {
  ambient 4; dim 2
  graph { params (u,v); domain { u in (-inf,inf) grow linear; v in (-inf,inf) grow linear } height (0, 0) }
  meta { definable=true; minimal=true; cone_vertex=(0,0,0,0); monotone_at=(0,0,0,0) }
}
)S"},
      {"complex_cubic", R"S(scene "complex_cubic" {
  ambient 4; dim 2
  # z = w^3
  graph { params (u,v); domain { u in (-inf,inf) grow pow(1/3); v in (-inf,inf) grow pow(1/3) } height (u^3-3*u*v^2, 3*u^2*v-v^3) }
  meta { definable=true; minimal=true; monotone_at=(0,0,0,0) }
}
)S"},
      {"plane_minus_ball", R"S(scene "plane_minus_ball" {
  ambient 3; dim 2
  graph { params (x,y); domain { x in (-inf,inf) grow linear; y in (-inf,inf) grow linear; exclude ball((0,0),1) } height (0) }
  meta { definable=true; minimal=false }
}
)S"},
  };
  return lib;
}

/// Names of the built-in library, in a fixed order.
inline std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : builtin_texts()) out.push_back(name);
  return out;
}

/// DSL text for a library name. Accepts "alpha_cone(<a>)" and "staircase(<a1>)".
inline std::string builtin_text(const std::string& name) {
  const auto open = name.find('(');
  if (open != std::string::npos && name.back() == ')') {
    const std::string head = name.substr(0, open);
    double arg = 0;
    try {
      arg = eval(parse_expr(name.substr(open + 1, name.size() - open - 2), std::vector<std::string>{}), {});
    } catch (const Error&) {
      throw UnknownBuiltinError("bad argument in '" + name + "'");
    }
    if (head == "alpha_cone" && arg > 0) return alpha_cone_text(arg);
    if (head == "staircase" && arg > 0) {
      const std::string a = format_double(arg);
      return "scene \"staircase(" + a + ")\" {\n  ambient 2; dim 1\n  builtin staircase(" + a +
             ")\n  meta { definable=false; minimal=false }\n}\n";
    }
    throw UnknownBuiltinError("unknown builtin '" + name + "'");
  }
  for (const auto* lib : {&builtin_texts(), &extra_texts()})
    for (const auto& [n, text] : *lib)
      if (n == name) return text;
  throw UnknownBuiltinError("unknown builtin '" + name + "'");
}

inline Scene builtin_scene(const std::string& name) { return parse_scene(builtin_text(name)); }

/// The built-in library as parsed scenes.
inline std::vector<Scene> builtin_library() {
  std::vector<Scene> out;
  for (const auto& [name, text] : builtin_texts()) out.push_back(parse_scene(text));
  return out;
}

}  // namespace geoinf
