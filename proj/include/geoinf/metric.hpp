#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "geoinf/error.hpp"
#include "geoinf/expr.hpp"
#include "geoinf/kdtree.hpp"
#include "geoinf/linalg.hpp"
#include "geoinf/parallel.hpp"
#include "geoinf/sampling.hpp"
#include "geoinf/scene.hpp"

namespace geoinf {

/// Points of X joined when closer than h, edges weighted by Euclidean length.
/// Shortest paths upper-bound the inner distance up to discretization.
class NeighborGraph {
 public:
  NeighborGraph(std::vector<Vec> pts, double h) : pts_(std::move(pts)), h_(h) {
    const KdTree tree(pts_);
    offs_.reserve(pts_.size() + 1);
    offs_.push_back(0);
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      for (std::size_t j : tree.radius(pts_[i], h_)) {
        if (j == i) continue;
        adj_.push_back(static_cast<std::uint32_t>(j));
        w_.push_back((pts_[i] - pts_[j]).norm());
      }
      offs_.push_back(adj_.size());
    }
  }

  std::size_t size() const { return pts_.size(); }
  std::size_t edges() const { return adj_.size() / 2; }
  double h() const { return h_; }
  const Vec& vertex(std::size_t i) const { return pts_[i]; }
  const std::vector<Vec>& vertices() const { return pts_; }

  /// Single-source shortest paths; unreachable vertices get +inf.
  std::vector<double> distances(std::size_t src) const {
    std::vector<double> d(pts_.size(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    d[src] = 0;
    pq.push({0.0, static_cast<std::uint32_t>(src)});
    while (!pq.empty()) {
      const auto [du, u] = pq.top();
      pq.pop();
      if (du > d[u]) continue;
      for (std::size_t e = offs_[u]; e < offs_[u + 1]; ++e) {
        const double nd = du + w_[e];
        if (nd < d[adj_[e]]) {
          d[adj_[e]] = nd;
          pq.push({nd, adj_[e]});
        }
      }
    }
    return d;
  }

  std::size_t component_count() const {
    std::vector<int> seen(pts_.size(), 0);
    std::size_t count = 0;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < pts_.size(); ++s) {
      if (seen[s]) continue;
      ++count;
      seen[s] = 1;
      stack.push_back(s);
      while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t e = offs_[u]; e < offs_[u + 1]; ++e)
          if (!seen[adj_[e]]) seen[adj_[e]] = 1, stack.push_back(adj_[e]);
      }
    }
    return count;
  }

 private:
  std::vector<Vec> pts_;
  double h_;
  std::vector<std::size_t> offs_;
  std::vector<std::uint32_t> adj_;
  std::vector<double> w_;
};

struct GraphSample {
  std::vector<Vec> points;
  double h = 0.0;
};

namespace detail {

/// Typical spacing lambda^(-1/n) from a low quantile of the sampler's
/// density, so sparse regions are still connected.
inline double spacing(const Samples& smp, int n) {
  std::vector<double> d = smp.density;
  std::sort(d.begin(), d.end());
  const double q = d[d.size() / 10];
  return std::pow(q, -1.0 / n);
}

/// Connection radius: factor * spacing, raised if needed so the expected
/// degree mu_n (h / spacing)^n is at least 3 log N (matters for curves).
inline double connection_radius(double spacing, double factor, int n, std::size_t N) {
  const double conn = std::pow(3 * std::log(static_cast<double>(std::max<std::size_t>(N, 2))) / unit_ball_volume(n), 1.0 / n);
  return spacing * std::max(factor, conn);
}

}  // namespace detail

/// 4 for curves and surfaces; above that the factor giving the same expected
/// degree 16 pi as a surface, since 4^n neighbours would swamp the graph.
inline double default_graph_factor(int n) {
  return n <= 2 ? 4.0 : std::pow(16 * M_PI / unit_ball_volume(n), 1.0 / n);
}

/// `count` points of X in the ball of radius r around the origin, with
/// h = factor * spacing.
inline GraphSample sample_for_graph(const Scene& s, double r, std::size_t count, double factor, std::uint64_t seed) {
  const Samples smp = sample_points(s, 0, r, count, seed);
  if (smp.size() < 2) throw EmptyIntersectionError("too few points for a neighbour graph");
  return {smp.points, detail::connection_radius(detail::spacing(smp, s.dim), factor, s.dim, smp.size())};
}

/// Points of X in the ball of radius r with the density that makes the
/// spacing h / factor, estimated from a pilot draw.
inline GraphSample sample_for_spacing(const Scene& s, double r, double h, double factor, std::uint64_t seed,
                                      std::size_t max_vertices) {
  const std::size_t pilot = 2000;
  const Samples p = sample_points(s, 0, r, pilot, splitmix64(seed ^ 0x9e37));
  if (p.size() < 2) throw EmptyIntersectionError("too few points for a neighbour graph");
  const double sp = detail::spacing(p, s.dim);
  const double want = std::pow(sp * factor / h, s.dim) * static_cast<double>(p.size());
  const auto count = static_cast<std::size_t>(std::clamp(std::ceil(want), 100.0, static_cast<double>(max_vertices)));
  const Samples smp = sample_points(s, 0, r, count, seed);
  return {smp.points, h};
}

struct InnerDistance {
  double distance = std::numeric_limits<double>::infinity();  // +inf: not connected in the graph
  double euclidean = 0.0;
  bool connected = false;
  double h = 0.0;
  std::size_t vertices = 0;
};

struct InnerDistanceOptions {
  double factor = 0.0;        // h over expected spacing; 0: default_graph_factor
  double ball_factor = 1.5;   // graph covers B(0, ball_factor max(|x|,|y|) + h)
  std::size_t max_vertices = 400000;
};

/// Shortest path from x to y in a neighbour graph on X with connection
/// radius h.
inline InnerDistance inner_distance(const Scene& s, const Vec& x, const Vec& y, double h, std::uint64_t seed,
                                    const InnerDistanceOptions& opt = {}) {
  if (x.size() != s.ambient || y.size() != s.ambient) throw DimensionMismatchError("points have the wrong dimension");
  if (!(h > 0)) throw Error("connection radius must be positive");
  for (const Vec* p : {&x, &y})
    if (project_to_set(s, *p, 1e-3 * std::max(1.0, p->norm())).distance > 1e-6 * std::max(1.0, p->norm()))
      throw PointNotOnSetError("endpoint is not on the set");
  const double r = opt.ball_factor * std::max(x.norm(), y.norm()) + h;
  const double factor = opt.factor > 0 ? opt.factor : default_graph_factor(s.dim);
  GraphSample g = sample_for_spacing(s, r, h, factor, seed, opt.max_vertices);
  const std::size_t ix = g.points.size();
  g.points.push_back(x);
  g.points.push_back(y);
  const NeighborGraph G(std::move(g.points), h);
  InnerDistance out;
  out.distance = G.distances(ix)[ix + 1];
  out.euclidean = (x - y).norm();
  out.connected = std::isfinite(out.distance);
  out.h = h;
  out.vertices = G.size();
  return out;
}

struct Witness {
  Vec x, y;
  double graph_distance = 0.0;
  double euclidean = 0.0;
};

struct LNELevel {
  double R = 0.0;
  double h = 0.0;
  std::size_t vertices = 0;
  std::size_t pairs = 0;
  bool connected = true;  // every tested pair reachable
  double C_hat = 0.0;
  Witness witness;
};

struct LNEReport {
  enum class Kind { Lne, NotLne, Inconclusive };
  Kind verdict = Kind::Inconclusive;
  double C_bound = 0.0;              // lne: largest C_hat
  std::vector<double> growth;        // C_hat(R_i) / C_hat(R_{i-1})
  std::vector<LNELevel> levels;
  std::string reason;
};

inline const char* to_string(LNEReport::Kind k) {
  switch (k) {
    case LNEReport::Kind::Lne: return "lne";
    case LNEReport::Kind::NotLne: return "not_lne";
    case LNEReport::Kind::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct LNEOptions {
  std::vector<double> levels{4, 8, 16};
  std::size_t sources = 8;           // Dijkstra sources per level
  std::size_t base_vertices = 4000;  // at the first level; later levels keep its spacing
  std::size_t max_vertices = 100000;
  double factor = 0.0;               // h over expected spacing; 0: default_graph_factor
  double min_separation = 2.0;       // pairs closer than this many h are skipped
  double max_h_growth = 1.25;        // beyond this the budget cannot hold h and the verdict is withheld
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

namespace detail {

/// Area of X in B_r as the sum of 1/density over a pilot sample.
inline double pilot_area(const Scene& s, double r, std::uint64_t seed) {
  const Samples p = sample_points(s, 0, r, 2000, seed);
  double a = 0;
  for (double d : p.density) a += 1 / d;
  return a;
}

}  // namespace detail

/// Estimates C(R) = max d_graph / |x - y| over pairs in the annulus
/// [R, 4R], on a graph covering X in B_{5R}. Paths may pass through the
/// compact part, which is what separates the catenoid's sheets. Vertex
/// counts follow the area of X in B_{5R} so h stays that of the first level.
inline LNEReport lne_at_infinity(const Scene& s, const LNEOptions& opt = {}) {
  if (opt.levels.size() < 3) throw Error("LNE test needs at least three levels");
  for (std::size_t i = 1; i < opt.levels.size(); ++i)
    if (!(opt.levels[i] > opt.levels[i - 1])) throw Error("LNE levels must increase");
  LNEReport rep;
  rep.levels.resize(opt.levels.size());
  std::vector<double> area(opt.levels.size());
  parallel_for(opt.levels.size(), opt.threads, [&](std::size_t li) {
    area[li] = detail::pilot_area(s, 5 * opt.levels[li], splitmix64(opt.seed ^ (0xa5a5 + li)));
  });
  parallel_for(opt.levels.size(), opt.threads, [&](std::size_t li) {
    const double R = opt.levels[li];
    LNELevel& L = rep.levels[li];
    L.R = R;
    const double want = static_cast<double>(opt.base_vertices) * area[li] / area.front();
    const auto count = static_cast<std::size_t>(std::min(static_cast<double>(opt.max_vertices), std::ceil(want)));
    const double factor = opt.factor > 0 ? opt.factor : default_graph_factor(s.dim);
    const GraphSample g = sample_for_graph(s, 5 * R, count, factor, splitmix64(opt.seed + li));
    const NeighborGraph G(g.points, g.h);
    L.h = g.h;
    L.vertices = G.size();
    std::vector<std::size_t> ann;
    for (std::size_t i = 0; i < G.size(); ++i) {
      const double r = G.vertex(i).norm();
      if (r >= R && r <= 4 * R) ann.push_back(i);
    }
    if (ann.size() < 2) {
      L.connected = false;
      return;
    }
    Rng rng(opt.seed + 101 * li, 0x11e);
    const std::size_t nsrc = std::min(opt.sources, ann.size());
    for (std::size_t q = 0; q < nsrc; ++q) {
      const std::size_t src = ann[static_cast<std::size_t>(rng.uniform() * static_cast<double>(ann.size())) % ann.size()];
      const std::vector<double> d = G.distances(src);
      for (std::size_t t : ann) {
        const double e = (G.vertex(src) - G.vertex(t)).norm();
        if (e < opt.min_separation * g.h) continue;
        ++L.pairs;
        if (!std::isfinite(d[t])) L.connected = false;
        const double ratio = d[t] / e;
        if (ratio > L.C_hat) L.C_hat = ratio, L.witness = {G.vertex(src), G.vertex(t), d[t], e};
      }
    }
  });

  for (const auto& L : rep.levels)
    if (L.h > opt.max_h_growth * rep.levels.front().h) {
      rep.reason = "vertex budget cannot keep the connection radius at R = " + format_double(L.R);
      return rep;
    }
  for (const auto& L : rep.levels)
    if (!L.connected || L.pairs == 0) {
      rep.reason = "graph disconnected or no pairs at R = " + format_double(L.R);
      return rep;
    }
  for (std::size_t i = 1; i < rep.levels.size(); ++i) rep.growth.push_back(rep.levels[i].C_hat / rep.levels[i - 1].C_hat);
  const bool growing = std::all_of(rep.growth.begin(), rep.growth.end(), [](double g) { return g >= 1.5; });
  if (growing) {
    rep.verdict = LNEReport::Kind::NotLne;
    rep.reason = "C grows by at least 50% per level";
  } else if (rep.growth.back() <= 1.1) {
    rep.verdict = LNEReport::Kind::Lne;
    for (const auto& L : rep.levels) rep.C_bound = std::max(rep.C_bound, L.C_hat);
    rep.reason = "C stable within 10% at the top level";
  } else {
    rep.reason = "C neither stable nor growing steadily";
  }
  return rep;
}

}  // namespace geoinf
