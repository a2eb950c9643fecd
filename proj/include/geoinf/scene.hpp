#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "geoinf/error.hpp"
#include "geoinf/expr.hpp"
#include "geoinf/linalg.hpp"
#include "geoinf/region.hpp"

namespace geoinf {

/// Bound on |p_i| over all parameters whose image has norm <= R. Needed for
/// every infinite side of a chart domain.
struct GrowthHint {
  enum Kind { None, Linear, Acosh, Pow } kind = None;
  double exponent = 1.0;

  double bound(double R) const {
    switch (kind) {
      case Linear: return R;
      case Acosh: return std::acosh(std::max(R, 1.0));
      case Pow: return std::pow(std::max(R, 1.0), exponent);
      default: return std::numeric_limits<double>::infinity();
    }
  }
};

struct Chart {
  std::vector<std::string> params;
  Region domain;
  std::vector<GrowthHint> growth;  // one per parameter
  VecExpr map;
  Program program;
  double weight = 1.0;  // 1 / overlap count for declared overlaps
  bool graph = false;   // first n components are the parameters themselves

  int dim() const { return static_cast<int>(params.size()); }
  int ambient() const { return static_cast<int>(map.size()); }

  /// Parameter box containing every point of the domain whose image lies in
  /// the ball of radius R around the origin.
  Box bounds(double R) const {
    Box b{Vec(dim()), Vec(dim())};
    for (int i = 0; i < dim(); ++i) {
      const double g = growth[i].bound(R);
      b.lo[i] = std::max(domain.lo[i], -g);
      b.hi[i] = std::min(domain.hi[i], g);
      for (const auto& ball : domain.within) {
        b.lo[i] = std::max(b.lo[i], ball.center[i] - ball.radius);
        b.hi[i] = std::min(b.hi[i], ball.center[i] + ball.radius);
      }
      if (!std::isfinite(b.lo[i]) || !std::isfinite(b.hi[i]))
        throw UnsupportedError("parameter '" + params[i] + "' is unbounded and has no growth hint");
    }
    return b;
  }

  bool eval(const Vec& p, Vec& x) const {
    x.resize(ambient());
    return program.try_eval(as_span(p), as_span(x)) < 0;
  }

  bool eval_jacobian(const Vec& p, Vec& x, Jac& J) const {
    x.resize(ambient());
    J.resize(ambient(), dim());
    Eigen::Map<Eigen::MatrixXd> jm(J.data(), J.rows(), J.cols());
    return program.try_jacobian(as_span(p), as_span(x), jm) < 0;
  }
};

/// User-asserted scene metadata. Reported verbatim, never verified.
struct Meta {
  bool definable = true;
  bool minimal = false;
  std::optional<Vec> cone_vertex;
  std::optional<Vec> monotone_at;
};

/// Union of horizontal segments over consecutive intervals I_j of length
/// 2^{j-1} a1. Odd j carry one segment at height 0, even j two segments at
/// heights +-1/2.
struct StaircaseSet {
  double a1 = 1.0;

  struct Segment {
    double x0, x1, y;
  };

  double left_end(int j) const { return a1 * (std::ldexp(1.0, j - 1) - 1.0); }
  double right_end(int j) const { return left_end(j + 1); }
  static int multiplicity(int j) { return j % 2 == 1 ? 1 : 2; }

  /// Length of the generated set on (0, a_J), summed interval by interval.
  double cumulative_length(int J) const {
    double s = 0;
    for (int j = 1; j <= J; ++j) s += multiplicity(j) * std::ldexp(a1, j - 1);
    return s;
  }

  /// Segments meeting the ball of radius r about the origin.
  std::vector<Segment> segments(double r) const {
    std::vector<Segment> out;
    for (int j = 1; left_end(j) < r; ++j) {
      if (j % 2 == 1) {
        out.push_back({left_end(j), right_end(j), 0.0});
      } else {
        out.push_back({left_end(j), right_end(j), 0.5});
        out.push_back({left_end(j), right_end(j), -0.5});
      }
    }
    return out;
  }

  /// Exact length inside the open ball B_r(0).
  double length_in_ball(double r) const {
    double s = 0;
    for (const auto& seg : segments(r)) {
      if (r <= std::fabs(seg.y)) continue;
      const double xmax = std::sqrt(r * r - seg.y * seg.y);
      s += std::max(0.0, std::min(seg.x1, xmax) - seg.x0);
    }
    return s;
  }
};

struct Scene {
  std::string name;
  int ambient = 0;
  int dim = 0;
  std::vector<Chart> charts;
  std::optional<StaircaseSet> staircase;
  bool declared_overlap = false;
  Meta meta;
  std::string source;  // text the scene was parsed from

  bool is_staircase() const { return staircase.has_value(); }
  bool is_graph() const { return !charts.empty() && charts.size() == 1 && charts[0].graph; }
};

}  // namespace geoinf
