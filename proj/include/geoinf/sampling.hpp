#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "geoinf/cells.hpp"
#include "geoinf/error.hpp"
#include "geoinf/linalg.hpp"
#include "geoinf/scene.hpp"

namespace geoinf {

struct SampleOptions {
  Vec center;                        // annulus center; empty means the origin
  std::optional<ConeFilter> cone;    // keep only points inside this cone
  bool want_density = true;
};

/// Points of X in an annulus. density[i] is the expected number of samples
/// per unit n-volume of X near points[i]; the metric module uses it to pick
/// connection radii.
struct Samples {
  std::vector<Vec> points;
  std::vector<Vec> params;
  std::vector<int> chart;
  std::vector<double> density;
  std::size_t draws = 0;
  bool low_acceptance = false;

  std::size_t size() const { return points.size(); }
};

inline constexpr double kMinAcceptance = 1e-4;

namespace detail {

inline Samples sample_staircase(const StaircaseSet& st, const Vec& c, double r_lo, double r_hi, std::size_t count,
                                Rng& rng, const std::optional<ConeFilter>& cone) {
  struct Piece {
    double x0, x1, y;
  };
  std::vector<Piece> pieces;
  double total = 0;
  // Centered at the origin the pieces are exact; otherwise sample the pieces
  // meeting the enclosing ball and reject.
  const double reach = c.norm() + r_hi;
  for (const auto& seg : st.segments(reach)) {
    double x0 = seg.x0, x1 = seg.x1;
    if (c.norm() == 0) {
      if (r_hi <= std::fabs(seg.y)) continue;
      x1 = std::min(x1, std::sqrt(r_hi * r_hi - seg.y * seg.y));
      if (r_lo > std::fabs(seg.y)) x0 = std::max(x0, std::sqrt(r_lo * r_lo - seg.y * seg.y));
    } else {
      x1 = std::min(x1, reach);
    }
    if (x1 > x0) {
      pieces.push_back({x0, x1, seg.y});
      total += x1 - x0;
    }
  }
  if (pieces.empty()) throw EmptyIntersectionError("annulus does not meet the staircase");
  std::vector<double> cum;
  double acc = 0;
  for (const auto& p : pieces) cum.push_back(acc += p.x1 - p.x0);
  Samples out;
  const std::size_t cap = std::max<std::size_t>(100000, count * 10000);
  while (out.size() < count && out.draws < cap) {
    ++out.draws;
    const double u = rng.uniform() * total;
    const std::size_t k = std::min<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin(), pieces.size() - 1);
    const double x = rng.uniform(pieces[k].x0, pieces[k].x1);
    Vec pt(2);
    pt << x, pieces[k].y;
    const double rr = (pt - c).norm();
    if (rr < r_lo || rr > r_hi) continue;
    if (cone && !cone->contains(pt)) continue;
    out.points.push_back(pt);
    Vec prm(1);
    prm << x;
    out.params.push_back(prm);
    out.chart.push_back(0);
    out.density.push_back(0.0);
    if (out.draws >= 100000 && static_cast<double>(out.size()) < kMinAcceptance * static_cast<double>(out.draws)) {
      out.low_acceptance = true;
      break;
    }
  }
  for (auto& d : out.density) d = static_cast<double>(out.draws) / total;
  return out;
}

}  // namespace detail

/// Rejection sampling of X intersected with r_lo <= |x - c| <= r_hi, drawing
/// parameter cells with probability proportional to volume times area
/// element. Deterministic for a fixed seed.
inline Samples sample_points(const Scene& s, double r_lo, double r_hi, std::size_t count, std::uint64_t seed,
                             const SampleOptions& opt = {}) {
  if (!(r_lo >= 0 && r_lo < r_hi)) throw Error("sample_points needs 0 <= r_lo < r_hi");
  const Vec c = opt.center.size() ? opt.center : Vec(Vec::Zero(s.ambient));
  Rng rng(seed, 0x5a3b1e);
  if (s.is_staircase()) return detail::sample_staircase(*s.staircase, c, r_lo, r_hi, count, rng, opt.cone);

  const ParamCover cover = build_cover(s, c, r_lo, r_hi, opt.cone);
  if (cover.cells.empty()) throw EmptyIntersectionError("annulus does not meet the scene");
  std::vector<double> cum;
  cum.reserve(cover.cells.size());
  double acc = 0;
  for (const auto& cc : cover.cells) cum.push_back(acc += cc.weight);

  Samples out;
  const std::size_t cap = std::max<std::size_t>(200000, count * 20000);
  Vec p(s.dim), x;
  Jac J;
  std::vector<std::size_t> cell_of;
  while (out.size() < count && out.draws < cap) {
    ++out.draws;
    const double u = rng.uniform() * acc;
    const std::size_t k =
        std::min<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin(), cover.cells.size() - 1);
    const CoverCell& cc = cover.cells[k];
    for (int i = 0; i < s.dim; ++i) p[i] = rng.uniform(cc.box.lo[i], cc.box.hi[i]);
    if (out.draws >= 200000 && static_cast<double>(out.size()) < kMinAcceptance * static_cast<double>(out.draws)) {
      out.low_acceptance = true;
      break;
    }
    const Chart& ch = s.charts[cc.chart];
    if (!ch.domain.contains(p)) continue;
    if (!ch.eval(p, x) || !x.allFinite()) continue;
    const double rr = (x - c).norm();
    if (rr < r_lo || rr > r_hi) continue;
    if (opt.cone && !opt.cone->contains(x)) continue;
    out.points.push_back(x);
    out.params.push_back(p);
    out.chart.push_back(cc.chart);
    cell_of.push_back(k);
  }
  if (out.draws >= cap && out.size() < count) out.low_acceptance = true;
  if (opt.want_density) {
    out.density.resize(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const CoverCell& cc = cover.cells[cell_of[i]];
      const Chart& ch = s.charts[out.chart[i]];
      double a = 0;
      if (ch.eval_jacobian(out.params[i], x, J)) a = area_element(J);
      const double per_param = static_cast<double>(out.draws) * cc.weight / acc / cc.box.volume();
      out.density[i] = a > 0 ? per_param / a : std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

/// Nearest point of X to x found by Gauss-Newton from the best cells of a
/// local cover. Returns the distance and the foot point.
struct Projection {
  double distance = std::numeric_limits<double>::infinity();
  Vec foot;
  Vec param;
  int chart = -1;
};

/// With only_chart >= 0 the search is restricted to that chart's image.
inline Projection project_to_set(const Scene& s, const Vec& x, double search_radius = 1.0, int only_chart = -1) {
  Projection best;
  if (s.is_staircase()) {
    for (const auto& seg : s.staircase->segments(x.norm() + search_radius + 1.0)) {
      const double px = std::clamp(x[0], seg.x0, seg.x1);
      Vec f(2);
      f << px, seg.y;
      const double d = (f - x).norm();
      if (d < best.distance) best = {d, f, Vec::Constant(1, px), 0};
    }
    return best;
  }
  ParamCover cover;
  try {
    cover = build_cover(s, x, 0.0, search_radius);
  } catch (const Error&) {
    return best;
  }
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < cover.cells.size(); ++i)
    if (only_chart < 0 || cover.cells[i].chart == only_chart) order.push_back(i);
  auto key = [&](std::size_t i) { return cover.cells[i].probe.ok ? cover.cells[i].probe.phi_c : 1e300; };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  const std::size_t tries = std::min<std::size_t>(order.size(), 48);
  Vec y;
  Jac J;
  for (std::size_t t = 0; t < tries; ++t) {
    const CoverCell& cc = cover.cells[order[t]];
    const Chart& ch = s.charts[cc.chart];
    Vec p = cc.box.center();
    if (!ch.domain.contains(p)) continue;
    double lambda = 1e-9;
    if (!ch.eval_jacobian(p, y, J)) continue;
    double f = (y - x).squaredNorm();
    for (int it = 0; it < 100; ++it) {
      const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxParams, kMaxParams> g = J.transpose() * J;
      const Vec rhs = J.transpose() * (x - y);
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxParams, kMaxParams> A =
          g + lambda * Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxParams, kMaxParams>::Identity(s.dim, s.dim);
      const Vec step = A.ldlt().solve(rhs);
      Vec q = p + step;
      for (int i = 0; i < s.dim; ++i) {
        const double lo = ch.domain.lo[i], hi = ch.domain.hi[i];
        const double eps = 1e-13 * std::max(1.0, std::fabs(q[i]));
        q[i] = std::clamp(q[i], lo + eps, hi - eps);
      }
      Vec yq;
      Jac Jq;
      if (ch.domain.contains(q) && ch.eval_jacobian(q, yq, Jq) && (yq - x).squaredNorm() <= f) {
        const double gain = f - (yq - x).squaredNorm();
        p = q;
        y = yq;
        J = Jq;
        f = (y - x).squaredNorm();
        lambda = std::max(lambda * 0.3, 1e-12);
        if (gain <= 1e-30 + 1e-24 * f || step.norm() < 1e-15) break;
      } else {
        lambda *= 10;
        if (lambda > 1e12) break;
      }
    }
    const double d = std::sqrt(f);
    if (d < best.distance) best = {d, y, p, cc.chart};
    if (d < 1e-12) break;
  }
  return best;
}

struct DisjointnessReport {
  std::size_t samples = 0;
  std::size_t collisions = 0;
  double rate = 0.0;
  bool ok = true;
};

/// Spot check that chart images meet only in a null set: sampled points of
/// one chart lying within 1e-9 (relative) of another chart's image count as
/// collisions, and the check passes when they are below 1e-3 of the samples.
inline DisjointnessReport check_chart_disjointness(const Scene& s, double r_lo, double r_hi, std::size_t count,
                                                   std::uint64_t seed) {
  DisjointnessReport rep;
  if (s.is_staircase() || s.charts.size() < 2) return rep;
  const Samples smp = sample_points(s, r_lo, r_hi, count, seed, {Vec(), std::nullopt, false});
  rep.samples = smp.size();
  for (std::size_t i = 0; i < smp.size(); ++i) {
    const double tol = 1e-9 * std::max(1.0, smp.points[i].norm());
    for (int k = 0; k < static_cast<int>(s.charts.size()); ++k) {
      if (k == smp.chart[i]) continue;
      if (project_to_set(s, smp.points[i], 1e-3 * std::max(1.0, smp.points[i].norm()), k).distance <= tol) {
        ++rep.collisions;
        break;
      }
    }
  }
  rep.rate = rep.samples ? static_cast<double>(rep.collisions) / static_cast<double>(rep.samples) : 0.0;
  rep.ok = rep.rate < 1e-3;
  return rep;
}

}  // namespace geoinf
