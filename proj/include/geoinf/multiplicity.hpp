#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geoinf/asymptotics.hpp"
#include "geoinf/cones.hpp"
#include "geoinf/error.hpp"
#include "geoinf/kdtree.hpp"
#include "geoinf/linalg.hpp"
#include "geoinf/parallel.hpp"
#include "geoinf/sampling.hpp"
#include "geoinf/scene.hpp"

namespace geoinf {

/// {w : |w| > R and |t v - w| < eta t for some t > 0}. The second condition
/// says the angle between w and v has sine below eta.
struct ConicalShell {
  Vec v;  // unit
  double eta = 0.2;
  double R = 1.0;

  bool contains(const Vec& w) const {
    const double nw = w.norm();
    if (!(nw > R)) return false;
    const double c = w.dot(v);
    return c > 0 && c * c > (1 - eta * eta) * nw * nw;
  }
  ConeFilter filter() const { return {Vec::Zero(v.size()), v, std::asin(eta)}; }
};

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }
  std::size_t size_of(std::size_t a) { return size_[find(a)]; }

 private:
  std::vector<std::size_t> parent_, size_;
};

/// Connected components of the eps-neighbourhood graph. Components smaller
/// than `min_size` are dropped and counted in `discarded`.
struct Components {
  std::vector<std::vector<std::size_t>> members;  // largest first
  std::size_t discarded = 0;
};

inline Components eps_components(const std::vector<Vec>& pts, double eps, std::size_t min_size = 1) {
  Components out;
  if (pts.empty()) return out;
  const KdTree tree(pts);
  UnionFind uf(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j : tree.radius(pts[i], eps))
      if (j > i) uf.unite(i, j);
  std::vector<std::vector<std::size_t>> groups(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) groups[uf.find(i)].push_back(i);
  for (auto& g : groups) {
    if (g.empty()) continue;
    if (g.size() < min_size)
      out.discarded += g.size();
    else
      out.members.push_back(std::move(g));
  }
  std::stable_sort(out.members.begin(), out.members.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return out;
}

struct MultiplicityOptions {
  std::size_t per_band = 4000;
  int max_doublings = 12;     // auto-grow budget when a shell is empty
  double noise_fraction = 0.01;  // components below this share of a band are sampling noise
};

/// One (eta, R) refinement: bands [R', 2R'], [2R', 4R'], [4R', 8R'] where
/// R' >= R is the first radius whose band meets X. At a point the bands halve
/// instead, starting from [R/2, R].
struct ShellTrial {
  double eta = 0.0;
  double R = 0.0;        // requested
  double R_used = 0.0;   // after auto-grow
  bool empty = false;
  std::vector<double> band_radius;
  std::vector<double> eps;
  std::vector<int> components;
  std::vector<std::size_t> samples;
  std::vector<std::size_t> discarded;
  std::vector<std::vector<Vec>> representatives;  // one point per sheet per band
};

struct MultiplicityReport {
  Vec direction;
  int k = 0;
  std::vector<ShellTrial> trials;  // trials[0] is the requested (eta, R)
  bool stable = false;
};

namespace detail {

/// Bands grow from R outward (at infinity) or shrink from R toward p.
inline ShellTrial shell_trial(const Scene& s, const Vec& p, bool at_infinity, const Vec& v, double eta, double R,
                              std::uint64_t seed, const MultiplicityOptions& opt) {
  ShellTrial t;
  t.eta = eta;
  t.R = R;
  SampleOptions so;
  so.center = p;
  so.cone = ConeFilter{p, v, std::asin(eta)};
  so.want_density = false;
  const double step = at_infinity ? 2.0 : 0.5;
  auto draw = [&](double rb, std::uint64_t sd) -> Samples {
    try {
      return sample_points(s, rb, 2 * rb, opt.per_band, sd, so);
    } catch (const EmptyIntersectionError&) {
      return {};
    }
  };
  double Ru = at_infinity ? R : R / 2;
  Samples first;
  for (int g = 0; g <= opt.max_doublings; ++g, Ru *= step) {
    first = draw(Ru, splitmix64(seed + 977 * static_cast<std::uint64_t>(g)));
    if (first.size() > 0) break;
  }
  if (first.size() == 0) {
    t.empty = true;
    return t;
  }
  t.R_used = at_infinity ? Ru : 2 * Ru;
  for (int b = 0; b < 3; ++b) {
    const double rb = Ru * std::pow(step, b);
    const Samples smp = b == 0 ? first : draw(rb, splitmix64(seed + 31 * static_cast<std::uint64_t>(b) + 7));
    const double eps = eta * rb / 4;
    const auto min_size = static_cast<std::size_t>(std::max(3.0, opt.noise_fraction * static_cast<double>(smp.size())));
    const Components c = eps_components(smp.points, eps, min_size);
    t.band_radius.push_back(rb);
    t.eps.push_back(eps);
    t.components.push_back(static_cast<int>(c.members.size()));
    t.samples.push_back(smp.size());
    t.discarded.push_back(c.discarded);
    std::vector<Vec> reps;
    for (const auto& m : c.members) reps.push_back(smp.points[m.front()]);
    t.representatives.push_back(std::move(reps));
  }
  return t;
}

inline MultiplicityReport multiplicity(const Scene& s, const Vec& p, bool at_infinity, const Vec& v, double eta,
                                       double R, std::uint64_t seed, const MultiplicityOptions& opt) {
  if (v.size() != s.ambient) throw DimensionMismatchError("direction has the wrong dimension");
  if (!(v.norm() > 0)) throw Error("direction must be nonzero");
  if (!(eta > 0 && eta < 0.5)) throw Error("aperture must lie in (0, 1/2)");
  if (!(R > 0)) throw Error("shell radius must be positive");
  MultiplicityReport rep;
  rep.direction = v.normalized();
  const double etas[3] = {eta, eta / 2, eta};
  const double radii[3] = {R, R, at_infinity ? 2 * R : R / 2};
  for (int i = 0; i < 3; ++i)
    rep.trials.push_back(shell_trial(s, p, at_infinity, rep.direction, etas[i], radii[i], splitmix64(seed + 1009 * i), opt));
  if (rep.trials[0].empty) throw EmptyShellError("no point of the set in the shell around the direction");
  rep.k = rep.trials[0].components.back();
  rep.stable = true;
  for (const auto& t : rep.trials) {
    if (t.empty) rep.stable = false;
    for (int c : t.components) rep.stable = rep.stable && c == rep.k;
  }
  return rep;
}

}  // namespace detail

/// Number of sheets of X in the conical shell around v. The requested
/// (eta, R) is refined to (eta/2, R) and (eta, 2R); k is the component count
/// in the outermost band of the requested trial, and `stable` requires all
/// nine band counts to agree.
inline MultiplicityReport relative_multiplicity(const Scene& s, const Vec& v, double eta, double R, std::uint64_t seed,
                                                const MultiplicityOptions& opt = {}) {
  return detail::multiplicity(s, Vec::Zero(s.ambient), true, v, eta, R, seed, opt);
}

/// The same count at a point p on shrinking shells r, r/2, r/4 (r/2 first
/// if nothing lies in [r, 2r]).
inline MultiplicityReport relative_multiplicity_at(const Scene& s, const Vec& p, const Vec& v, double eta, double r,
                                                   std::uint64_t seed, const MultiplicityOptions& opt = {}) {
  if (p.size() != s.ambient) throw DimensionMismatchError("point has the wrong dimension");
  return detail::multiplicity(s, p, false, v, eta, r, seed, opt);
}

/// Cone directions away from the boundary of the link: within eta every
/// neighbour set spreads to both sides along each local tangent axis. For
/// n = 1 the link is a finite set and every direction qualifies.
inline std::vector<Vec> simple_directions(const Scene& s, const ConeEstimate& cone, int count, std::uint64_t seed,
                                          double eta = 0.2) {
  const auto& D = cone.directions;
  std::vector<std::size_t> ok;
  if (s.dim == 1) {
    ok.resize(D.size());
    std::iota(ok.begin(), ok.end(), 0);
  } else if (!D.empty()) {
    const KdTree tree(D);
    for (std::size_t i = 0; i < D.size(); ++i) {
      const auto nb = tree.radius(D[i], eta);
      if (nb.size() < static_cast<std::size_t>(2 * s.dim)) continue;
      Eigen::MatrixXd P(nb.size(), D[i].size());
      for (std::size_t j = 0; j < nb.size(); ++j) P.row(j) = (D[nb[j]] - D[i]).transpose();
      const Eigen::JacobiSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeThinV);
      const Eigen::MatrixXd proj = P * svd.matrixV().leftCols(s.dim - 1);
      bool inner = true;
      for (int a = 0; a < s.dim - 1; ++a)
        inner = inner && proj.col(a).maxCoeff() > eta / 3 && -proj.col(a).minCoeff() > eta / 3;
      if (inner) ok.push_back(i);
    }
  }
  std::vector<Vec> out;
  if (ok.empty() || count <= 0) return out;
  Rng rng(seed, 0x51d);
  const std::size_t take = std::min<std::size_t>(count, ok.size());
  // Evenly spaced in index order from a random offset.
  const std::size_t off = static_cast<std::size_t>(rng.uniform() * static_cast<double>(ok.size())) % ok.size();
  for (std::size_t j = 0; j < take; ++j) out.push_back(D[ok[(off + j * ok.size() / take) % ok.size()]]);
  return out;
}

/// A connected piece of the link of the cone and the measure of the cone
/// over it inside the unit ball.
struct ConeComponent {
  std::vector<std::size_t> members;  // indices into ConeEstimate::directions
  double slice_measure = 0.0;
  double slice_err = 0.0;
};

namespace detail {

/// Length of a closed or open curve on the sphere sampled by `dirs`, via
/// bin means in the plane of the two leading principal axes.
inline double link_length(const std::vector<Vec>& dirs, int bins) {
  const int m = static_cast<int>(dirs.front().size());
  Vec mean = Vec::Zero(m);
  for (const auto& u : dirs) mean += u;
  mean /= static_cast<double>(dirs.size());
  Eigen::MatrixXd P(dirs.size(), m);
  for (std::size_t i = 0; i < dirs.size(); ++i) P.row(i) = (dirs[i] - mean).transpose();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeThinV);
  const Vec e1 = svd.matrixV().col(0), e2 = svd.matrixV().col(1);
  std::vector<Vec> sum(bins, Vec::Zero(m));
  std::vector<int> cnt(bins, 0);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double phi = std::atan2(P.row(i).dot(e2), P.row(i).dot(e1));
    int b = static_cast<int>(std::floor((phi + M_PI) / (2 * M_PI) * bins));
    b = std::clamp(b, 0, bins - 1);
    sum[b] += dirs[i];
    ++cnt[b];
  }
  auto arc = [&](int a, int b) {
    const Vec x = sum[a].normalized(), y = sum[b].normalized();
    return 2 * std::asin(std::min(1.0, 0.5 * (x - y).norm()));
  };
  double L = 0;
  for (int b = 0; b < bins; ++b) {
    const int nb = (b + 1) % bins;
    if (cnt[b] && cnt[nb]) L += arc(b, nb);
  }
  return L;
}

}  // namespace detail

/// Splits the cone's directions into link components (chains of directions
/// within 4 tol) and measures each slice C_j with B_1 radially: a ray for
/// n = 1, length/2 of the link curve for n = 2, mu_n for a flat piece.
inline std::vector<ConeComponent> cone_components(const ConeEstimate& cone, int n) {
  if (cone.directions.empty()) throw InsufficientClustersError("cone has no directions");
  const Components comps = eps_components(cone.directions, 4 * cone.tol);
  const int m = static_cast<int>(cone.directions.front().size());
  std::vector<ConeComponent> out;
  for (const auto& mem : comps.members) {
    ConeComponent c;
    c.members = mem;
    std::vector<Vec> dirs;
    for (std::size_t i : mem) dirs.push_back(cone.directions[i]);
    if (n == 1) {
      c.slice_measure = 1.0;
    } else if (n == 2 && dirs.size() >= 8) {
      const double fine = detail::link_length(dirs, 72);
      const double coarse = detail::link_length(dirs, 36);
      c.slice_measure = fine / 2;
      c.slice_err = std::fabs(fine - coarse) / 2;
    } else {
      const auto [B, res] = fit_subspace(dirs, m, cone.tol);
      if (B.cols() != n || res > cone.tol)
        throw UnsupportedError("slice measure of a curved " + std::to_string(n) + "-dimensional cone piece");
      c.slice_measure = unit_ball_volume(n);
    }
    c.slice_err += c.slice_measure * cone.max_residual;
    out.push_back(std::move(c));
  }
  return out;
}

/// theta^n of the estimated cone: the slices' total measure over mu_n.
inline double cone_density(const std::vector<ConeComponent>& comps, int n) {
  double t = 0;
  for (const auto& c : comps) t += c.slice_measure;
  return t / unit_ball_volume(n);
}

struct KRComponent {
  int id = 0;
  int k = 0;
  std::vector<int> k_samples;
  bool stable = false;
  std::size_t directions = 0;
  Vec representative;
  double slice_measure = 0.0;
  double slice_err = 0.0;
};

struct KROptions {
  double eta = 0.2;
  double R = 10.0;
  int directions_per_component = 5;
  ConeOptions cone;
  LimitOptions limit;
  MultiplicityOptions mult;
  unsigned threads = 0;
  std::optional<LimitVerdict> lhs;    // reuse a density verdict
  std::optional<ConeEstimate> cone_estimate;  // reuse a cone
};

struct KRReport {
  LimitVerdict lhs;
  std::vector<KRComponent> components;
  double rhs = 0.0;
  double rhs_err = 0.0;
  bool agree = false;
  std::string failure;  // nonempty when the report is partial
};

/// Compares theta^n at infinity with sum_j k_j H^n(C_j cap B_1) / mu_n.
inline KRReport kr_check(const Scene& s, double tol, std::uint64_t seed, const KROptions& opt = {}) {
  KRReport rep;
  try {
    if (opt.lhs) {
      rep.lhs = *opt.lhs;
    } else {
      LimitOptions lo = opt.limit;
      lo.profile.seed = seed;
      rep.lhs = density_at_infinity(s, tol, lo);
    }
    if (rep.lhs.kind == LimitVerdict::Kind::NoLimit) throw Error("density at infinity has no limit");
    if (rep.lhs.kind == LimitVerdict::Kind::Diverges) throw Error("density at infinity diverges");
    ConeOptions co = opt.cone;
    co.seed = seed;
    const ConeEstimate cone = opt.cone_estimate ? *opt.cone_estimate : tangent_cone_infinity(s, co);
    const auto comps = cone_components(cone, s.dim);
    const auto simple = simple_directions(s, cone, static_cast<int>(cone.directions.size()), seed, opt.eta);

    struct Job {
      std::size_t comp;
      Vec v;
    };
    std::vector<Job> jobs;
    for (std::size_t j = 0; j < comps.size(); ++j) {
      KRComponent kc;
      kc.id = static_cast<int>(j);
      kc.directions = comps[j].members.size();
      kc.slice_measure = comps[j].slice_measure;
      kc.slice_err = comps[j].slice_err;
      std::vector<Vec> mine;
      for (const auto& u : simple)
        for (std::size_t i : comps[j].members)
          if (cone.directions[i] == u) mine.push_back(u);
      if (mine.empty())
        for (std::size_t i : comps[j].members) mine.push_back(cone.directions[i]);
      const std::size_t take = std::min<std::size_t>(opt.directions_per_component, mine.size());
      for (std::size_t q = 0; q < take; ++q) jobs.push_back({j, mine[q * mine.size() / take]});
      kc.representative = mine.front();
      rep.components.push_back(std::move(kc));
    }

    std::vector<MultiplicityReport> mult(jobs.size());
    parallel_for(jobs.size(), opt.threads, [&](std::size_t i) {
      mult[i] = relative_multiplicity(s, jobs[i].v, opt.eta, opt.R, splitmix64(seed + 7 * i), opt.mult);
    });
    for (auto& kc : rep.components) kc.stable = true;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      auto& kc = rep.components[jobs[i].comp];
      kc.k_samples.push_back(mult[i].k);
      kc.stable = kc.stable && mult[i].stable;
    }
    const double mu = unit_ball_volume(s.dim);
    for (auto& kc : rep.components) {
      std::vector<int> ks = kc.k_samples;
      std::sort(ks.begin(), ks.end());
      kc.k = ks[ks.size() / 2];
      kc.stable = kc.stable && ks.front() == ks.back();
      rep.rhs += kc.k * kc.slice_measure / mu;
      rep.rhs_err += kc.k * kc.slice_err / mu;
    }
    rep.agree = rep.lhs.kind == LimitVerdict::Kind::Converges &&
                std::fabs(rep.lhs.value - rep.rhs) <= 3 * (rep.lhs.err + rep.rhs_err);
  } catch (const Error& e) {
    rep.failure = e.what();
    rep.agree = false;
  }
  return rep;
}

struct DegreeReport {
  LimitVerdict verdict;
  int declared_degree = 0;
  double theta_inf = 0.0;
  bool matches_degree = false;
};

/// For a graph of a polynomial map C^n -> C^k with real coordinates, the
/// density at infinity should equal the degree.
inline DegreeReport degree_density_check(const Scene& s, int declared_degree, double tol, std::uint64_t seed = 1) {
  if (s.charts.size() != 1 || !s.charts.front().graph || s.dim % 2 != 0 || s.ambient % 2 != 0)
    throw UnsupportedError("degree check needs a single graph chart over C^n");
  if (declared_degree < 1) throw Error("declared degree must be positive");
  DegreeReport rep;
  rep.declared_degree = declared_degree;
  LimitOptions lo;
  lo.profile.seed = seed;
  rep.verdict = density_at_infinity(s, tol, lo);
  if (rep.verdict.kind != LimitVerdict::Kind::Converges)
    throw Error(std::string("density at infinity does not converge: ") + to_string(rep.verdict.kind));
  rep.theta_inf = rep.verdict.value;
  rep.matches_degree = std::fabs(rep.theta_inf - declared_degree) <= tol + rep.verdict.err;
  return rep;
}

}  // namespace geoinf
