#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "geoinf/linalg.hpp"

namespace geoinf {

struct Ball {
  Vec center;
  double radius = 0.0;
};

/// Axis-aligned box in parameter space.
struct Box {
  Vec lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  Vec center() const { return 0.5 * (lo + hi); }
  double volume() const { return (hi - lo).prod(); }
  double half_diagonal() const { return 0.5 * (hi - lo).norm(); }
  double max_side() const { return (hi - lo).maxCoeff(); }
  Vec corner(int mask) const {
    Vec c = lo;
    for (int i = 0; i < dim(); ++i)
      if (mask & (1 << i)) c[i] = hi[i];
    return c;
  }
};

enum class Cover { Inside, Outside, Straddle };

inline double box_min_distance(const Box& b, const Vec& c) {
  double s = 0;
  for (int i = 0; i < b.dim(); ++i) {
    const double d = std::max({b.lo[i] - c[i], 0.0, c[i] - b.hi[i]});
    s += d * d;
  }
  return std::sqrt(s);
}

inline double box_max_distance(const Box& b, const Vec& c) {
  double s = 0;
  for (int i = 0; i < b.dim(); ++i) {
    const double d = std::max(std::fabs(b.lo[i] - c[i]), std::fabs(b.hi[i] - c[i]));
    s += d * d;
  }
  return std::sqrt(s);
}

/// Chart domain: a rectangle (bounds may be infinite) intersected with up to
/// four balls and ball complements.
struct Region {
  std::vector<double> lo, hi;
  std::vector<Ball> excluded;  // points with |p - c| <= r are removed
  std::vector<Ball> within;    // points must satisfy |p - c| < r

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(std::span<const double> p) const {
    for (int i = 0; i < dim(); ++i)
      if (!(p[i] > lo[i] && p[i] < hi[i])) return false;
    for (const auto& b : excluded) {
      double s = 0;
      for (int i = 0; i < dim(); ++i) s += (p[i] - b.center[i]) * (p[i] - b.center[i]);
      if (s <= b.radius * b.radius) return false;
    }
    for (const auto& b : within) {
      double s = 0;
      for (int i = 0; i < dim(); ++i) s += (p[i] - b.center[i]) * (p[i] - b.center[i]);
      if (s >= b.radius * b.radius) return false;
    }
    return true;
  }
  bool contains(const Vec& p) const { return contains(as_span(p)); }

  /// Exact classification of a closed box against the open region, up to
  /// boundary sets of measure zero.
  Cover classify(const Box& box) const {
    bool straddle = false;
    for (int i = 0; i < dim(); ++i) {
      if (box.hi[i] <= lo[i] || box.lo[i] >= hi[i]) return Cover::Outside;
      if (box.lo[i] < lo[i] || box.hi[i] > hi[i]) straddle = true;
    }
    for (const auto& b : excluded) {
      if (box_max_distance(box, b.center) <= b.radius) return Cover::Outside;
      if (box_min_distance(box, b.center) <= b.radius) straddle = true;
    }
    for (const auto& b : within) {
      if (box_min_distance(box, b.center) >= b.radius) return Cover::Outside;
      if (box_max_distance(box, b.center) >= b.radius) straddle = true;
    }
    return straddle ? Cover::Straddle : Cover::Inside;
  }
};

}  // namespace geoinf
