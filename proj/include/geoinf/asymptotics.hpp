#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "geoinf/error.hpp"
#include "geoinf/linalg.hpp"
#include "geoinf/measure.hpp"
#include "geoinf/parallel.hpp"
#include "geoinf/sampling.hpp"
#include "geoinf/scene.hpp"

namespace geoinf {

/// theta(r) = H^n(X in B_r(p)) / (mu_n r^n) on a log-spaced grid.
struct DensityProfile {
  Vec center;
  std::vector<double> radii;
  std::vector<double> theta;
  std::vector<double> err;
  int n = 0;

  std::size_t size() const { return radii.size(); }
};

struct Band {
  double lo = 0.0;
  double hi = 0.0;
};

/// Verdict thresholds; fixed and echoed into reports.
struct VerdictThresholds {
  double converge_band = 3.0;     // tail band width <= this * (tail err + fit residual)
  double no_limit_separation = 5.0;  // limsup_band.lo - liminf_band.hi > this * max tail err
  double diverge_factor = 4.0;    // growth across the top decade
};

struct LimitVerdict {
  enum class Kind { Converges, Diverges, NoLimit, Inconclusive };
  Kind kind = Kind::Inconclusive;
  double value = 0.0;  // converges
  double err = 0.0;
  double rate = 0.0;  // diverges: slope of log theta against log r
  Band liminf_band, limsup_band;  // no_limit
  std::string reason;             // inconclusive
  double fit_residual = 0.0;
  VerdictThresholds thresholds;
  DensityProfile profile;
};

inline const char* to_string(LimitVerdict::Kind k) {
  switch (k) {
    case LimitVerdict::Kind::Converges: return "converges";
    case LimitVerdict::Kind::Diverges: return "diverges";
    case LimitVerdict::Kind::NoLimit: return "no_limit";
    case LimitVerdict::Kind::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct ProfileOptions {
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: hardware concurrency
  std::size_t max_cells = 200000;
};

inline std::vector<double> log_grid(double r_lo, double r_hi, int k) {
  std::vector<double> r(k);
  const double a = std::log(r_lo), b = std::log(r_hi);
  for (int i = 0; i < k; ++i) r[i] = i + 1 == k ? r_hi : std::exp(a + (b - a) * i / (k - 1));
  r[0] = r_lo;
  return r;
}

namespace detail {

inline double theta_at(const Scene& s, const Vec& p, double r, double tol, std::uint64_t seed, std::size_t max_cells,
                       double* err) {
  const MeasureEstimate m = area(s, {p, r}, {tol, seed, max_cells});
  const double scale = unit_ball_volume(s.dim) * std::pow(r, s.dim);
  *err = m.abs_error / scale;
  return m.value / scale;
}

}  // namespace detail

/// Density profile on k log-spaced radii. Radius i uses seed splitmix64(seed + i)
/// so the result does not depend on the thread count.
inline DensityProfile profile(const Scene& s, const Vec& p, double r_lo, double r_hi, int k, double tol,
                              const ProfileOptions& opt = {}) {
  if (!(r_lo > 0 && r_lo < r_hi)) throw Error("profile needs 0 < r_lo < r_hi");
  if (k < 8) throw Error("profile needs at least 8 grid points");
  DensityProfile out;
  out.center = p.size() ? p : Vec(Vec::Zero(s.ambient));
  if (out.center.size() != s.ambient) throw DimensionMismatchError("profile center has the wrong dimension");
  out.n = s.dim;
  out.radii = log_grid(r_lo, r_hi, k);
  out.theta.assign(k, 0.0);
  out.err.assign(k, 0.0);
  parallel_for(k, opt.threads, [&](std::size_t i) {
    out.theta[i] = detail::theta_at(s, out.center, out.radii[i], tol, splitmix64(opt.seed + i), opt.max_cells, &out.err[i]);
  });
  return out;
}

/// Writes `r,theta,err` rows with 17 significant digits.
inline void write_profile_csv(const DensityProfile& pr, std::ostream& os) {
  os << "r,theta,err\n";
  char buf[96];
  for (std::size_t i = 0; i < pr.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", pr.radii[i], pr.theta[i], pr.err[i]);
    os << buf;
  }
}

struct LimitOptions {
  Vec center;  // empty: origin
  double r_lo = 10.0;
  double r_hi = 1e4;
  int k = 24;
  ProfileOptions profile;
};

namespace detail {

struct LinearFit {
  double a = 0, b = 0, se_a = 0, rms = 0;
};

// Least squares theta = a + b u.
inline LinearFit fit_line(const std::vector<double>& u, const std::vector<double>& y) {
  const std::size_t m = u.size();
  double su = 0, sy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    su += u[i];
    sy += y[i];
  }
  const double mu = su / m, my = sy / m;
  double suu = 0, suy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    suy += (u[i] - mu) * (y[i] - my);
  }
  LinearFit f;
  f.b = suu > 0 ? suy / suu : 0.0;
  f.a = my - f.b * mu;
  double ss = 0;
  for (std::size_t i = 0; i < m; ++i) ss += std::pow(y[i] - f.a - f.b * u[i], 2);
  f.rms = std::sqrt(ss / m);
  const double s2 = m > 2 ? ss / (m - 2) : ss;
  f.se_a = std::sqrt(s2 * (1.0 / m + (suu > 0 ? mu * mu / suu : 0.0)));
  return f;
}

struct Extremum {
  std::size_t index;
  bool is_max;
  double value;
  double err;
};

// Interior grid points that beat both neighbours by more than their combined errors.
inline std::vector<Extremum> significant_extrema(const DensityProfile& pr, std::size_t from) {
  std::vector<Extremum> out;
  for (std::size_t i = std::max<std::size_t>(from, 1); i + 1 < pr.size(); ++i) {
    const double t = pr.theta[i];
    const double gl = t - pr.theta[i - 1], gr = t - pr.theta[i + 1];
    const double el = pr.err[i] + pr.err[i - 1], er = pr.err[i] + pr.err[i + 1];
    if (gl > el && gr > er) out.push_back({i, true, t, pr.err[i]});
    if (-gl > el && -gr > er) out.push_back({i, false, t, pr.err[i]});
  }
  return out;
}

// Golden-section search for the extremum of theta on [a, b].
inline Extremum refine_extremum(const std::function<double(double, double*)>& theta, double a, double b, bool is_max,
                                int iters) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double e1 = 0, e2 = 0;
  double f1 = theta(x1, &e1), f2 = theta(x2, &e2);
  for (int it = 0; it < iters; ++it) {
    const bool keep_left = is_max ? f1 > f2 : f1 < f2;
    if (keep_left) {
      b = x2;
      x2 = x1;
      f2 = f1;
      e2 = e1;
      x1 = b - g * (b - a);
      f1 = theta(x1, &e1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      e1 = e2;
      x2 = a + g * (b - a);
      f2 = theta(x2, &e2);
    }
  }
  const bool first = is_max ? f1 > f2 : f1 < f2;
  return {0, is_max, first ? f1 : f2, first ? e1 : e2};
}

/// Classifies a profile whose tail runs toward the limit; `u(r)` is the
/// correction variable of the tail model theta = a + b u (1/r at infinity,
/// r at a point). `theta` re-evaluates single radii for extremum refinement.
inline LimitVerdict classify_tail(DensityProfile pr, const std::function<double(double)>& u, bool toward_infinity,
                                  const std::function<double(double, double*)>& theta) {
  LimitVerdict v;
  const std::size_t k = pr.size();
  // Orient so that index k-1 is deepest into the limit.
  auto at = [&](std::size_t j) { return toward_infinity ? j : k - 1 - j; };
  const double r_far = pr.radii[at(k - 1)];

  // Divergence across the last decade.
  std::size_t dec = at(0);
  for (std::size_t j = 0; j < k; ++j) {
    const double r = pr.radii[at(j)];
    if (toward_infinity ? r <= r_far / 10 : r >= r_far * 10) dec = at(j);
  }
  const double t_far = pr.theta[at(k - 1)], t_dec = pr.theta[dec];
  {
    std::vector<double> lr, lt;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = at(j);
      const bool in_decade = toward_infinity ? pr.radii[i] >= pr.radii[dec] : pr.radii[i] <= pr.radii[dec];
      if (in_decade && pr.theta[i] > 0) {
        lr.push_back(std::log(pr.radii[i]));
        lt.push_back(std::log(pr.theta[i]));
      }
    }
    const LinearFit lf = fit_line(lr, lt);
    const double slope = toward_infinity ? lf.b : -lf.b;
    if (t_dec > 0 && t_far >= v.thresholds.diverge_factor * t_dec && slope > 0) {
      v.kind = LimitVerdict::Kind::Diverges;
      v.rate = lf.b;
      v.profile = std::move(pr);
      return v;
    }
  }

  // Tail: the half of the grid deepest into the limit.
  std::vector<std::size_t> tail;
  for (std::size_t j = k / 2; j < k; ++j) tail.push_back(at(j));
  double tail_err = 0;
  for (std::size_t i : tail) tail_err = std::max(tail_err, pr.err[i]);

  // Oscillation: alternating significant extrema over the last two decades.
  const std::size_t from = [&] {
    std::size_t lo = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const bool far = toward_infinity ? pr.radii[i] >= r_far / 100 : pr.radii[i] <= r_far * 100;
      if (far) {
        lo = i;
        break;
      }
    }
    return lo;
  }();
  std::vector<Extremum> ext = significant_extrema(pr, toward_infinity ? from : 0);
  int nmax = 0, nmin = 0;
  for (const auto& e : ext) (e.is_max ? nmax : nmin)++;
  if (nmax >= 2 && nmin >= 2) {
    double max_err = 0;
    for (auto& e : ext) {
      const Extremum f = refine_extremum(theta, pr.radii[e.index - 1], pr.radii[e.index + 1], e.is_max, 24);
      e.value = f.value;
      e.err = f.err;
      max_err = std::max(max_err, e.err);
    }
    Band inf{1e300, -1e300}, sup{1e300, -1e300};
    for (const auto& e : ext) {
      Band& b = e.is_max ? sup : inf;
      b.lo = std::min(b.lo, e.value - e.err);
      b.hi = std::max(b.hi, e.value + e.err);
    }
    if (sup.lo - inf.hi > v.thresholds.no_limit_separation * max_err) {
      v.kind = LimitVerdict::Kind::NoLimit;
      v.liminf_band = inf;
      v.limsup_band = sup;
      v.profile = std::move(pr);
      return v;
    }
  }

  std::vector<double> us, ys;
  for (std::size_t i : tail) {
    us.push_back(u(pr.radii[i]));
    ys.push_back(pr.theta[i]);
  }
  const LinearFit f = fit_line(us, ys);
  v.fit_residual = f.rms;
  double lo = 1e300, hi = -1e300;
  for (std::size_t j = 0; j < tail.size(); ++j) {
    const double corrected = ys[j] - f.b * us[j];
    lo = std::min(lo, corrected);
    hi = std::max(hi, corrected);
  }
  if (hi - lo <= v.thresholds.converge_band * (tail_err + f.rms)) {
    v.kind = LimitVerdict::Kind::Converges;
    v.value = f.a;
    v.err = f.se_a + tail_err;
  } else {
    v.kind = LimitVerdict::Kind::Inconclusive;
    v.reason = "tail band " + format_double(hi - lo) + " exceeds " + format_double(v.thresholds.converge_band) +
               " x (tail error + fit residual)";
  }
  v.profile = std::move(pr);
  return v;
}

}  // namespace detail

/// Density at infinity: profile on [r_lo, r_hi], tail fit theta = a + b/r.
/// Budget exhaustion gives an inconclusive verdict.
inline LimitVerdict density_at_infinity(const Scene& s, double tol, const LimitOptions& opt = {}) {
  const Vec c = opt.center.size() ? opt.center : Vec(Vec::Zero(s.ambient));
  DensityProfile pr;
  try {
    pr = profile(s, c, opt.r_lo, opt.r_hi, opt.k, tol, opt.profile);
  } catch (const BudgetExceededError& e) {
    LimitVerdict v;
    v.reason = std::string("measure budget exhausted: ") + e.what();
    return v;
  }
  std::uint64_t extra = 1000;
  auto theta = [&](double r, double* err) {
    return detail::theta_at(s, c, r, tol, splitmix64(opt.profile.seed + extra++), opt.profile.max_cells, err);
  };
  try {
    return detail::classify_tail(std::move(pr), [](double r) { return 1.0 / r; }, true, theta);
  } catch (const BudgetExceededError& e) {
    LimitVerdict v;
    v.reason = std::string("measure budget exhausted: ") + e.what();
    return v;
  }
}

/// Smallest radius of the grid used at a point: the profile must resolve tol.
inline double point_grid_floor(double tol) { return std::clamp(std::sqrt(tol), 1e-3, 0.1); }

/// Density at p in X. The tail model is theta = a + b r on [floor, 1].
inline LimitVerdict density_at_point(const Scene& s, const Vec& p, double tol, const LimitOptions& opt = {}) {
  if (p.size() != s.ambient) throw DimensionMismatchError("point has the wrong dimension");
  const Projection proj = project_to_set(s, p, 1.0);
  if (!(proj.distance < 1e-6))
    throw PointNotOnSetError("point is at distance " + format_double(proj.distance) + " from the set");
  const double r_lo = point_grid_floor(tol);
  DensityProfile pr;
  try {
    pr = profile(s, p, r_lo, 1.0, opt.k, tol, opt.profile);
  } catch (const BudgetExceededError& e) {
    LimitVerdict v;
    v.reason = std::string("measure budget exhausted: ") + e.what();
    return v;
  }
  std::uint64_t extra = 1000;
  auto theta = [&](double r, double* err) {
    return detail::theta_at(s, p, r, tol, splitmix64(opt.profile.seed + extra++), opt.profile.max_cells, err);
  };
  return detail::classify_tail(std::move(pr), [](double r) { return r; }, false, theta);
}

struct MonotonicityReport {
  bool nondecreasing = true;
  double max_violation = 0.0;  // largest decrease theta(r_i) - theta(r_j), r_i < r_j
  bool constant = false;
  bool cone_consistent = true;
  double violation_factor = 3.0;  // a decrease counts beyond this * combined errors
  DensityProfile profile;
};

/// Checks r -> theta(X, p, r) for monotonicity and constancy on [r_lo, r_hi].
inline MonotonicityReport check_monotonicity(const Scene& s, const Vec& p, double r_lo = 0.05, double r_hi = 50.0,
                                             int k = 24, double tol = 1e-3, const ProfileOptions& opt = {}) {
  MonotonicityReport rep;
  rep.profile = profile(s, p, r_lo, r_hi, k, tol, opt);
  const DensityProfile& pr = rep.profile;
  // All pairs: a slow decline hides below the noise of adjacent radii.
  for (std::size_t i = 0; i < pr.size(); ++i)
    for (std::size_t j = i + 1; j < pr.size(); ++j) {
      const double drop = pr.theta[i] - pr.theta[j];
      rep.max_violation = std::max(rep.max_violation, drop);
      if (drop > rep.violation_factor * (pr.err[i] + pr.err[j])) rep.nondecreasing = false;
    }
  rep.constant = true;
  for (std::size_t i = 0; i < pr.size(); ++i)
    for (std::size_t j = i + 1; j < pr.size(); ++j)
      if (std::fabs(pr.theta[i] - pr.theta[j]) > rep.violation_factor * (pr.err[i] + pr.err[j])) rep.constant = false;
  const bool vertex_here = s.meta.cone_vertex && s.meta.cone_vertex->size() == p.size() &&
                           (*s.meta.cone_vertex - p).norm() <= 1e-12 * std::max(1.0, p.norm());
  rep.cone_consistent = vertex_here == rep.constant;
  return rep;
}

}  // namespace geoinf
