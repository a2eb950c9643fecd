#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "geoinf/linalg.hpp"
#include "geoinf/region.hpp"
#include "geoinf/scene.hpp"

namespace geoinf {

/// Bounds on phi(p) = |map(p) - c| over a parameter box, from phi and its
/// gradient J^T (x - c) / phi at the center and corners, with a 1.5 safety
/// factor on the resulting Lipschitz estimate.
struct Probe {
  bool ok = false;
  double phi_c = 0.0;   // phi at the box center
  double lip = 0.0;     // safety-factored Lipschitz bound of phi
  double reach = 0.0;   // lip * half diagonal
  double area_max = 0.0;  // largest area element seen
  double map_reach = 0.0;  // bound on |map(p) - x_c| over the box
  Vec x_c;               // image of the center

  double lower() const { return phi_c - reach; }
  double upper() const { return phi_c + reach; }
  bool inside(double r) const { return ok && upper() < r; }
  bool outside(double r) const { return ok && lower() > r; }
  bool outside_annulus(double r_lo, double r_hi) const { return ok && (lower() > r_hi || upper() < r_lo); }
};

inline constexpr double kLipschitzSafety = 1.5;

inline Probe probe_cell(const Chart& ch, const Box& box, const Vec& c) {
  Probe pr;
  const int d = box.dim();
  const Vec pc = box.center();
  Vec x;
  Jac J;
  double gmax = 0.0, secant = 0.0, amax = 0.0, jmax = 0.0, xsecant = 0.0;
  double phi_c = 0.0;
  for (int k = -1; k < (1 << d); ++k) {
    const Vec p = k < 0 ? pc : box.corner(k);
    if (!ch.eval_jacobian(p, x, J)) return pr;
    if (!x.allFinite() || !J.allFinite()) return pr;
    const Vec dx = x - c;
    const double phi = dx.norm();
    const double g = phi > 0 ? (J.transpose() * dx).norm() / phi : J.norm();
    gmax = std::max(gmax, g);
    amax = std::max(amax, area_element(J));
    jmax = std::max(jmax, J.norm());
    if (k < 0) {
      phi_c = phi;
      pr.x_c = x;
    } else {
      const double dp = (p - pc).norm();
      if (dp > 0) {
        secant = std::max(secant, std::fabs(phi - phi_c) / dp);
        xsecant = std::max(xsecant, (x - pr.x_c).norm() / dp);
      }
    }
  }
  pr.ok = true;
  pr.phi_c = phi_c;
  pr.lip = kLipschitzSafety * std::max(gmax, secant);
  pr.reach = pr.lip * box.half_diagonal();
  pr.area_max = amax;
  pr.map_reach = kLipschitzSafety * std::max(jmax, xsecant) * box.half_diagonal();
  return pr;
}

inline std::vector<Box> split_box(const Box& b) {
  const int d = b.dim();
  const Vec mid = b.center();
  std::vector<Box> out;
  out.reserve(1u << d);
  for (int m = 0; m < (1 << d); ++m) {
    Box c{b.lo, b.hi};
    for (int i = 0; i < d; ++i) {
      if (m & (1 << i)) c.lo[i] = mid[i];
      else c.hi[i] = mid[i];
    }
    out.push_back(c);
  }
  return out;
}

inline int initial_splits(int d) {
  static const int table[] = {1, 16, 8, 4, 3};
  return table[std::clamp(d, 0, 4)];
}

inline std::vector<Box> grid_boxes(const Box& b, int per_axis) {
  const int d = b.dim();
  int total = 1;
  for (int i = 0; i < d; ++i) total *= per_axis;
  std::vector<Box> out;
  out.reserve(total);
  for (int idx = 0; idx < total; ++idx) {
    Box c{b.lo, b.hi};
    int rem = idx;
    for (int i = 0; i < d; ++i) {
      const int k = rem % per_axis;
      rem /= per_axis;
      const double w = (b.hi[i] - b.lo[i]) / per_axis;
      c.lo[i] = b.lo[i] + k * w;
      c.hi[i] = k + 1 == per_axis ? b.hi[i] : b.lo[i] + (k + 1) * w;
    }
    out.push_back(c);
  }
  return out;
}

/// Circular cone {w : angle(w - apex, axis) < half_angle}, used to prune
/// cover cells whose image provably misses it.
struct ConeFilter {
  Vec apex;
  Vec axis;  // unit
  double half_angle = 0.0;

  bool contains(const Vec& x) const {
    const Vec w = x - apex;
    const double nw = w.norm();
    if (nw == 0) return false;
    return std::acos(std::clamp(w.dot(axis) / nw, -1.0, 1.0)) < half_angle;
  }
  bool misses(const Probe& pr) const {
    if (!pr.ok) return false;
    const Vec w = pr.x_c - apex;
    const double nw = w.norm();
    const double radius = pr.map_reach;
    if (nw <= radius) return false;
    const double ang = std::acos(std::clamp(w.dot(axis) / nw, -1.0, 1.0));
    return ang - std::asin(std::min(1.0, radius / nw)) > half_angle;
  }
};

/// A set of parameter cells whose images cover X intersected with the
/// annulus r_lo <= |x - c| <= r_hi.
struct CoverCell {
  int chart;
  Box box;
  Probe probe;
  bool straddle;
  double weight;  // volume times largest area element, the sampling weight
};

struct ParamCover {
  std::vector<CoverCell> cells;
  double total_weight = 0.0;
};

inline ParamCover build_cover(const Scene& s, const Vec& c, double r_lo, double r_hi,
                              const std::optional<ConeFilter>& cone = std::nullopt, std::size_t max_cells = 4096) {
  struct Item {
    int chart;
    Box box;
  };
  std::vector<Item> work;
  for (int k = 0; k < static_cast<int>(s.charts.size()); ++k) {
    const Chart& ch = s.charts[k];
    const Box b = ch.bounds(c.norm() + r_hi);
    for (auto& g : grid_boxes(b, initial_splits(ch.dim()))) work.push_back({k, g});
  }
  ParamCover cover;
  auto evaluate = [&](const Item& it, std::vector<CoverCell>& out) {
    const Chart& ch = s.charts[it.chart];
    const Cover rc = ch.domain.classify(it.box);
    if (rc == Cover::Outside) return;
    const Probe pr = probe_cell(ch, it.box, c);
    if (pr.outside_annulus(r_lo, r_hi)) return;
    if (cone && cone->misses(pr)) return;
    const bool straddle = rc == Cover::Straddle || !pr.ok || pr.upper() > r_hi || pr.lower() < r_lo;
    const double a = pr.ok ? pr.area_max : 0.0;
    out.push_back({it.chart, it.box, pr, straddle, it.box.volume() * a});
  };
  std::vector<CoverCell> cells;
  for (const auto& it : work) evaluate(it, cells);
  // Refine straddling cells until they carry at most a quarter of the volume.
  for (int round = 0; round < 64; ++round) {
    double vol = 0, svol = 0;
    for (const auto& cc : cells) {
      vol += cc.box.volume();
      if (cc.straddle) svol += cc.box.volume();
    }
    if (svol <= 0.25 * vol) break;
    const std::size_t nstr = std::count_if(cells.begin(), cells.end(), [](const CoverCell& cc) { return cc.straddle; });
    const std::size_t branch = std::size_t{1} << s.dim;
    if (cells.size() + nstr * (branch - 1) > max_cells) break;
    std::vector<CoverCell> next;
    next.reserve(cells.size() + nstr * (branch - 1));
    for (const auto& cc : cells) {
      if (!cc.straddle) {
        next.push_back(cc);
        continue;
      }
      for (const auto& child : split_box(cc.box)) evaluate({cc.chart, child}, next);
    }
    cells.swap(next);
  }
  // Cells where the probe failed get a weight from the volume alone, scaled
  // by the largest area element seen on their chart.
  std::vector<double> chart_amax(s.charts.size(), 0.0);
  for (const auto& cc : cells) chart_amax[cc.chart] = std::max(chart_amax[cc.chart], cc.probe.ok ? cc.probe.area_max : 0.0);
  for (auto& cc : cells) {
    if (!(cc.weight > 0)) cc.weight = cc.box.volume() * std::max(chart_amax[cc.chart], 1e-300);
    cover.total_weight += cc.weight;
  }
  cover.cells = std::move(cells);
  return cover;
}

}  // namespace geoinf
