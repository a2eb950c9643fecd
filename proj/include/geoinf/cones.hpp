#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "geoinf/error.hpp"
#include "geoinf/kdtree.hpp"
#include "geoinf/linalg.hpp"
#include "geoinf/parallel.hpp"
#include "geoinf/sampling.hpp"
#include "geoinf/scene.hpp"

namespace geoinf {

/// A point of the spherical blow-up: direction and scale. At infinity
/// s = 1/|x|, at a point p s = |x - p|.
struct BlowupPoint {
  Vec u;
  double s = 0.0;
  Vec x;
  int level = 0;
};

inline Vec blowup_inverse_infinity(const BlowupPoint& b) { return b.u / b.s; }
inline Vec blowup_inverse_at(const BlowupPoint& b, const Vec& p) { return p + b.s * b.u; }

struct ConeOptions {
  double tol = 1e-2;
  std::uint64_t seed = 1;
  std::vector<double> levels;  // empty: defaults below
  std::size_t per_level = 0;   // 0: by intrinsic dimension
  unsigned threads = 0;
};

inline std::vector<double> default_infinity_levels() { return {1e6, 1e7, 1e8}; }
inline std::vector<double> default_point_levels() { return {1e-2, 1e-3, 1e-4}; }

/// Dense enough that a one-dimensional link is sampled more finely than tol/2.
inline std::size_t default_per_level(int n) { return n == 1 ? 1000 : n == 2 ? 20000 : 4000; }

namespace detail {

inline std::vector<BlowupPoint> blowup(const Scene& s, const Vec& p, bool at_infinity, const std::vector<double>& levels,
                                       std::size_t per_level, std::uint64_t seed, unsigned threads) {
  std::vector<std::vector<BlowupPoint>> per(levels.size());
  parallel_for(levels.size(), threads, [&](std::size_t i) {
    SampleOptions so;
    so.center = p;
    so.want_density = false;
    const Samples smp = sample_points(s, levels[i], 2 * levels[i], per_level, splitmix64(seed + i), so);
    for (const auto& x : smp.points) {
      const Vec w = x - p;
      const double r = w.norm();
      if (!(r > 0)) continue;
      per[i].push_back({w / r, at_infinity ? 1.0 / r : r, x, static_cast<int>(i)});
    }
  });
  std::vector<BlowupPoint> out;
  for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
  return out;
}

}  // namespace detail

/// Blow-up at infinity: per level R, points in the annulus [R, 2R] mapped to
/// (x/|x|, 1/|x|). Levels must increase and number at least three.
inline std::vector<BlowupPoint> blowup_cloud(const Scene& s, const std::vector<double>& levels, std::size_t per_level,
                                             std::uint64_t seed, unsigned threads = 0) {
  if (levels.size() < 3) throw Error("blow-up needs at least three levels");
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (!(levels[i] > levels[i - 1])) throw Error("blow-up levels must increase");
  return detail::blowup(s, Vec::Zero(s.ambient), true, levels, per_level, seed, threads);
}

/// Blow-up at p: per radius r (decreasing), points with r <= |x - p| <= 2r.
inline std::vector<BlowupPoint> blowup_cloud_at(const Scene& s, const Vec& p, const std::vector<double>& radii,
                                                std::size_t per_level, std::uint64_t seed, unsigned threads = 0) {
  if (radii.size() < 3) throw Error("blow-up needs at least three levels");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] < radii[i - 1])) throw Error("blow-up radii must decrease");
  return detail::blowup(s, p, false, radii, per_level, seed, threads);
}

struct ConeEstimate {
  std::vector<Vec> directions;  // extrapolated limit directions, one per cluster
  int fitted_dim = 0;
  Eigen::MatrixXd basis;        // ambient x fitted_dim, orthonormal columns
  double max_residual = 0.0;    // subspace residual plus extrapolation residual
  double extrapolation_residual = 0.0;
  bool is_linear_subspace = false;
  bool two_sided = false;
  double tol = 0.0;
  std::vector<double> levels;
  std::size_t samples = 0;
};

/// Greedy epsilon-net in index order: returns the chosen centre indices.
inline std::vector<std::size_t> epsilon_net(const std::vector<Vec>& pts, double eps) {
  const KdTree tree(pts);
  std::vector<char> covered(pts.size(), 0);
  std::vector<std::size_t> centers;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (covered[i]) continue;
    centers.push_back(i);
    for (std::size_t j : tree.radius(pts[i], eps)) covered[j] = 1;
  }
  return centers;
}

/// Smallest-dimension subspace through 0 whose largest residual over `dirs`
/// is within `budget`; returns its basis and that residual.
inline std::pair<Eigen::MatrixXd, double> fit_subspace(const std::vector<Vec>& dirs, int m, double budget) {
  Eigen::MatrixXd D(dirs.size(), m);
  for (std::size_t i = 0; i < dirs.size(); ++i) D.row(i) = dirs[i].transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeFullV);
  const Eigen::MatrixXd V = svd.matrixV();
  for (int d = 1; d <= m; ++d) {
    const Eigen::MatrixXd B = V.leftCols(d);
    double res = 0;
    for (const auto& u : dirs) res = std::max(res, (u - B * (B.transpose() * u)).norm());
    if (res <= budget || d == m) return {B, res};
  }
  return {V, 0.0};
}

namespace detail {

inline ConeEstimate cone_from_cloud(const std::vector<BlowupPoint>& cloud, const std::vector<double>& h, int n, int m,
                                    double tol) {
  const int L = static_cast<int>(h.size());
  std::vector<std::vector<Vec>> dirs(L);
  for (const auto& b : cloud) dirs[b.level].push_back(b.u);
  const std::vector<Vec>& top = dirs[L - 1];
  if (top.size() < static_cast<std::size_t>(8 * n))
    throw InsufficientClustersError("only " + std::to_string(top.size()) + " directions at the deepest level");

  const std::vector<std::size_t> net = epsilon_net(top, tol / 2);
  std::vector<Vec> centers;
  for (std::size_t i : net) centers.push_back(top[i]);
  const KdTree ctree(centers);

  // Mean direction of each cluster at each level; clusters are the Voronoi
  // cells of the deepest level's net.
  const std::size_t K = centers.size();
  std::vector<std::vector<Vec>> sum(L, std::vector<Vec>(K, Vec::Zero(m)));
  std::vector<std::vector<int>> cnt(L, std::vector<int>(K, 0));
  for (int l = 0; l < L; ++l)
    for (const auto& u : dirs[l]) {
      const std::size_t k = ctree.nearest(u).first;
      sum[l][k] += u;
      ++cnt[l][k];
    }

  ConeEstimate est;
  est.tol = tol;
  est.samples = top.size();
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> hs;
    std::vector<Vec> ms;
    for (int l = 0; l < L; ++l) {
      if (!cnt[l][k] || sum[l][k].norm() == 0) continue;
      hs.push_back(h[l]);
      ms.push_back(sum[l][k].normalized());
    }
    // Richardson, order one in h: least squares m = a + b h, limit a.
    Vec a = ms.back();
    if (hs.size() >= 2) {
      double mh = 0;
      Vec mm = Vec::Zero(m);
      for (std::size_t j = 0; j < hs.size(); ++j) {
        mh += hs[j] / hs.size();
        mm += ms[j] / static_cast<double>(hs.size());
      }
      double shh = 0;
      Vec shm = Vec::Zero(m);
      for (std::size_t j = 0; j < hs.size(); ++j) {
        shh += (hs[j] - mh) * (hs[j] - mh);
        shm += (hs[j] - mh) * (ms[j] - mm);
      }
      const Vec b = shh > 0 ? Vec(shm / shh) : Vec(Vec::Zero(m));
      a = mm - b * mh;
      if (hs.size() >= 3)
        for (std::size_t j = 0; j < hs.size(); ++j)
          est.extrapolation_residual = std::max(est.extrapolation_residual, (ms[j] - a - b * hs[j]).norm());
      if (a.norm() == 0) a = ms.back();
    }
    est.directions.push_back(a.normalized());
  }

  auto [basis, res] = fit_subspace(est.directions, m, tol - est.extrapolation_residual);
  est.basis = basis;
  est.fitted_dim = static_cast<int>(basis.cols());
  est.max_residual = res + est.extrapolation_residual;

  const KdTree ltree(est.directions);
  est.two_sided = true;
  for (const auto& u : est.directions)
    if (ltree.nearest(Vec(-u)).second > tol) {
      est.two_sided = false;
      break;
    }
  est.is_linear_subspace = est.fitted_dim == n && est.max_residual <= tol && est.two_sided;
  return est;
}

}  // namespace detail

/// Estimate of C(X, infinity): directions of far samples, extrapolated in 1/R.
inline ConeEstimate tangent_cone_infinity(const Scene& s, const ConeOptions& opt = {}) {
  const std::vector<double> levels = opt.levels.empty() ? default_infinity_levels() : opt.levels;
  const std::size_t per = opt.per_level ? opt.per_level : default_per_level(s.dim);
  const auto cloud = blowup_cloud(s, levels, per, opt.seed, opt.threads);
  std::vector<double> h;
  for (double R : levels) h.push_back(1.0 / R);
  ConeEstimate est = detail::cone_from_cloud(cloud, h, s.dim, s.ambient, opt.tol);
  est.levels = levels;
  return est;
}

/// Estimate of C(X, p) from shrinking annuli, extrapolated in r.
inline ConeEstimate tangent_cone_at_point(const Scene& s, const Vec& p, const ConeOptions& opt = {}) {
  if (p.size() != s.ambient) throw DimensionMismatchError("point has the wrong dimension");
  if (!(project_to_set(s, p, 1.0).distance < 1e-6)) throw PointNotOnSetError("point is not on the set");
  const std::vector<double> levels = opt.levels.empty() ? default_point_levels() : opt.levels;
  const std::size_t per = opt.per_level ? opt.per_level : default_per_level(s.dim);
  const auto cloud = blowup_cloud_at(s, p, levels, per, opt.seed, opt.threads);
  ConeEstimate est = detail::cone_from_cloud(cloud, levels, s.dim, s.ambient, opt.tol);
  est.levels = levels;
  return est;
}

/// Estimate of the limit tangent planes along sequences escaping to infinity.
struct PlaneLimitEstimate {
  std::vector<Jac> frames;    // deepest level, orthonormal n-frames
  std::vector<Jac> clusters;  // representatives, pairwise principal sine > tol
  bool is_single_plane = false;
  Eigen::MatrixXd basis;      // limit plane when single
  double max_pairwise = 0.0;  // largest principal sine at the deepest level
  double limit_gap = 0.0;     // lambda_n - lambda_{n+1} of the extrapolated mean projector
  std::size_t skipped = 0;    // singular Jacobians
  double tol = 0.0;
  std::vector<double> levels;
};

inline PlaneLimitEstimate normal_set_infinity(const Scene& s, const ConeOptions& opt = {}) {
  const std::vector<double> levels = opt.levels.empty() ? default_infinity_levels() : opt.levels;
  if (levels.size() < 3) throw Error("normal set needs at least three levels");
  const std::size_t per = opt.per_level ? opt.per_level : 300;
  const int m = s.ambient, n = s.dim;
  std::vector<std::vector<Jac>> frames(levels.size());
  std::vector<std::size_t> skipped(levels.size(), 0);
  parallel_for(levels.size(), opt.threads, [&](std::size_t i) {
    if (s.is_staircase()) {
      Jac e = Jac::Zero(2, 1);
      e(0, 0) = 1;
      frames[i].assign(per, e);
      return;
    }
    SampleOptions so;
    so.want_density = false;
    const Samples smp = sample_points(s, levels[i], 2 * levels[i], per, splitmix64(opt.seed + 7919 * (i + 1)), so);
    Vec x;
    Jac J;
    for (std::size_t j = 0; j < smp.size(); ++j) {
      if (!s.charts[smp.chart[j]].eval_jacobian(smp.params[j], x, J) || !J.allFinite()) {
        ++skipped[i];
        continue;
      }
      const double a = area_element(J);
      if (!(a > 1e-12 * std::pow(std::max(1.0, J.norm()), n))) {
        ++skipped[i];
        continue;
      }
      frames[i].push_back(orthonormal_frame(J));
    }
  });
  PlaneLimitEstimate est;
  est.tol = opt.tol;
  est.levels = levels;
  for (auto k : skipped) est.skipped += k;
  est.frames = frames.back();
  if (est.frames.empty()) throw InsufficientClustersError("no tangent planes at the deepest level");

  for (std::size_t i = 0; i < est.frames.size(); ++i)
    for (std::size_t j = i + 1; j < est.frames.size(); ++j)
      est.max_pairwise = std::max(est.max_pairwise, principal_sine(est.frames[i], est.frames[j]));
  for (const auto& F : est.frames) {
    bool near = false;
    for (const auto& C : est.clusters)
      if (principal_sine(C, F) <= opt.tol) {
        near = true;
        break;
      }
    if (!near) est.clusters.push_back(F);
  }

  // Mean projector per level, extrapolated linearly in 1/R.
  const std::size_t L = levels.size();
  std::vector<Eigen::MatrixXd> P(L, Eigen::MatrixXd::Zero(m, m));
  for (std::size_t l = 0; l < L; ++l) {
    for (const auto& F : frames[l]) P[l] += F * F.transpose();
    if (!frames[l].empty()) P[l] /= static_cast<double>(frames[l].size());
  }
  double mh = 0;
  Eigen::MatrixXd mP = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t l = 0; l < L; ++l) {
    mh += 1.0 / levels[l] / L;
    mP += P[l] / static_cast<double>(L);
  }
  double shh = 0;
  Eigen::MatrixXd shP = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t l = 0; l < L; ++l) {
    const double d = 1.0 / levels[l] - mh;
    shh += d * d;
    shP += d * (P[l] - mP);
  }
  const Eigen::MatrixXd Pinf = mP - (shh > 0 ? Eigen::MatrixXd(shP / shh) : Eigen::MatrixXd::Zero(m, m)) * mh;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Pinf + Pinf.transpose()));
  const Eigen::VectorXd lam = es.eigenvalues();  // ascending
  const double ln = lam(m - n), ln1 = m - n - 1 >= 0 ? lam(m - n - 1) : 0.0;
  est.limit_gap = ln - ln1;
  const bool unique = ln >= 1 - opt.tol && ln1 <= opt.tol;
  est.is_single_plane = est.max_pairwise <= opt.tol && unique;
  if (est.is_single_plane) est.basis = es.eigenvectors().rightCols(n);
  return est;
}

}  // namespace geoinf
