#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geoinf/asymptotics.hpp"
#include "geoinf/cones.hpp"
#include "geoinf/error.hpp"
#include "geoinf/expr.hpp"
#include "geoinf/measure.hpp"
#include "geoinf/metric.hpp"
#include "geoinf/multiplicity.hpp"
#include "geoinf/sampling.hpp"
#include "geoinf/scene.hpp"

namespace geoinf {

/// Where the monotonicity hypothesis comes from: the scene's assertion, or
/// a profile check at the sampled point of X nearest the origin.
struct MonotoneEvidence {
  bool asserted = false;
  bool checked = false;
  bool holds = false;
  Vec point;
  std::optional<MonotonicityReport> report;
};

namespace detail {

inline std::string format_point(const Vec& p) {
  std::string out = "(";
  for (int i = 0; i < p.size(); ++i) out += (i ? ", " : "") + format_double(p[i]);
  return out + ")";
}

inline Vec nearest_point_to_origin(const Scene& s, std::uint64_t seed) {
  for (double r = 1; r < 1e6; r *= 4) {
    try {
      const Samples smp = sample_points(s, 0, r, 500, seed);
      if (smp.size() == 0) continue;
      std::size_t best = 0;
      for (std::size_t i = 1; i < smp.size(); ++i)
        if (smp.points[i].norm() < smp.points[best].norm()) best = i;
      return smp.points[best];
    } catch (const EmptyIntersectionError&) {
    }
  }
  throw EmptyIntersectionError("no point of the set found near the origin");
}

}  // namespace detail

inline MonotoneEvidence monotone_evidence(const Scene& s, std::uint64_t seed, double check_tol = 1e-3) {
  MonotoneEvidence ev;
  if (s.meta.monotone_at) {
    ev.asserted = true;
    ev.holds = true;
    ev.point = *s.meta.monotone_at;
    return ev;
  }
  ev.checked = true;
  ev.point = detail::nearest_point_to_origin(s, seed);
  ProfileOptions po;
  po.seed = seed;
  ev.report = check_monotonicity(s, ev.point, 0.05, 50.0, 24, check_tol, po);
  ev.holds = ev.report->nondecreasing;
  return ev;
}

/// Closedness cannot be sampled; a chart whose domain removes a ball of
/// positive size leaves an open rim, which is the one case we can name.
/// Excisions at the measure engine's numerical size do not count.
struct ClosedHint {
  bool closed = true;
  std::string reason;
};

inline ClosedHint closed_hint(const Scene& s) {
  for (const auto& ch : s.charts)
    for (const auto& b : ch.domain.excluded)
      if (b.radius > kExciseSize) return {false, "chart domain excludes a ball of radius " + format_double(b.radius)};
  return {};
}

/// Bounded-slope graph route: sup |Du| per annulus, plus the normal-plane,
/// monotonicity and closedness hypotheses. Only an asserted monotonicity
/// counts here, since a passing profile check at one point is weaker than
/// the hypothesis.
struct MoserReport {
  std::vector<double> radii;
  std::vector<double> sup_derivative;
  bool bounded_derivative = false;
  bool normal_single_plane = false;
  bool monotone = false;
  bool closed = false;
  bool implies_affine = false;
};

namespace detail {

inline MoserReport moser_from(const Scene& s, const PlaneLimitEstimate& normals, const MonotoneEvidence& mono,
                              double tol, std::uint64_t seed) {
  if (!s.is_graph()) throw UnsupportedError("bounded-slope check needs a graph scene");
  MoserReport rep;
  const Chart& ch = s.charts.front();
  Vec x;
  Jac J;
  for (double R : {10.0, 100.0, 1000.0}) {
    const Samples smp = sample_points(s, R, 2 * R, 2000, splitmix64(seed + static_cast<std::uint64_t>(R)));
    double sup = 0;
    for (const auto& p : smp.params) {
      if (!ch.eval_jacobian(p, x, J)) continue;
      const Eigen::MatrixXd Du = J.bottomRows(s.ambient - s.dim);
      sup = std::max(sup, Eigen::JacobiSVD<Eigen::MatrixXd>(Du).singularValues()(0));
    }
    rep.radii.push_back(R);
    rep.sup_derivative.push_back(sup);
  }
  const auto& d = rep.sup_derivative;
  rep.bounded_derivative = std::isfinite(d.back()) && d.back() <= 1.1 * d[d.size() - 2] + tol;
  rep.normal_single_plane = normals.is_single_plane;
  rep.monotone = mono.asserted;
  rep.closed = closed_hint(s).closed;
  rep.implies_affine = rep.bounded_derivative && rep.normal_single_plane && rep.monotone && rep.closed;
  return rep;
}

}  // namespace detail

inline MoserReport moser_graph_check(const Scene& s, double tol, std::uint64_t seed) {
  if (!s.is_graph()) throw UnsupportedError("bounded-slope check needs a graph scene");
  ConeOptions co;
  co.seed = seed;
  const PlaneLimitEstimate normals = normal_set_infinity(s, co);
  return detail::moser_from(s, normals, monotone_evidence(s, seed), tol, seed);
}

/// Total least squares affine fit on far samples.
struct AffineFit {
  Vec offset;
  Eigen::MatrixXd basis;
  double max_residual = 0.0;
};

inline AffineFit fit_affine(const Scene& s, std::uint64_t seed) {
  const Samples smp = sample_points(s, 10, 100, 2000, seed);
  if (smp.size() <= static_cast<std::size_t>(s.dim)) throw EmptyIntersectionError("too few far samples for a fit");
  AffineFit f;
  f.offset = Vec::Zero(s.ambient);
  for (const auto& x : smp.points) f.offset += x;
  f.offset /= static_cast<double>(smp.size());
  Eigen::MatrixXd P(smp.size(), s.ambient);
  for (std::size_t i = 0; i < smp.size(); ++i) P.row(i) = (smp.points[i] - f.offset).transpose();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeThinV);
  f.basis = svd.matrixV().leftCols(s.dim);
  for (const auto& x : smp.points) {
    const Vec w = x - f.offset;
    f.max_residual = std::max(f.max_residual, (w - f.basis * (f.basis.transpose() * w)).norm());
  }
  return f;
}

enum class RouteState { Holds, Fails, Unknown };

inline const char* to_string(RouteState r) {
  switch (r) {
    case RouteState::Holds: return "holds";
    case RouteState::Fails: return "fails";
    case RouteState::Unknown: return "unknown";
  }
  return "?";
}

struct Classification {
  enum class Verdict { AffineSubspace, NotAffine, Inconclusive };
  std::string scene;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<std::string> failed;   // hypotheses the evidence contradicts
  std::vector<std::string> missing;  // evidence that could not be obtained
  std::string statement;

  LimitVerdict theta_inf;
  MonotoneEvidence monotone;
  std::optional<ConeEstimate> cone;
  std::optional<PlaneLimitEstimate> normal_planes;
  std::optional<LNEReport> lne;
  std::optional<KRReport> kr;
  std::optional<MoserReport> moser;
  ClosedHint closed;
  bool definable = true;  // asserted

  RouteState density_route = RouteState::Unknown;  // theta = 1 and monotone
  RouteState lne_route = RouteState::Unknown;      // LNE and linear cone
  RouteState multiplicity_proxy = RouteState::Unknown;  // all k = 1 and linear cone
  bool routes_agree = true;

  std::optional<AffineFit> fit;
};

inline const char* to_string(Classification::Verdict v) {
  switch (v) {
    case Classification::Verdict::AffineSubspace: return "affine_subspace";
    case Classification::Verdict::NotAffine: return "not_affine";
    case Classification::Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct ClassifyOptions {
  double monotone_check_tol = 1e-3;
  bool run_lne = true;
  bool run_kr = true;
  unsigned threads = 0;
};

/// Gathers density, monotonicity, cone, normal-plane, LNE and multiplicity
/// evidence. Affine only through theta = 1 with monotonicity; everything
/// else is reported as a named failed hypothesis or as missing evidence.
inline Classification classify(const Scene& s, double tol, std::uint64_t seed, const ClassifyOptions& opt = {}) {
  Classification c;
  c.scene = s.name;
  c.definable = s.meta.definable;
  c.closed = closed_hint(s);
  if (!c.closed.closed) c.failed.push_back("set is not closed: " + c.closed.reason);

  LimitOptions lo;
  lo.profile.seed = seed;
  lo.profile.threads = opt.threads;
  c.theta_inf = density_at_infinity(s, tol, lo);
  const double tol_prime = tol + c.theta_inf.err;
  bool theta_one = false;
  switch (c.theta_inf.kind) {
    case LimitVerdict::Kind::Converges:
      theta_one = std::fabs(c.theta_inf.value - 1) <= tol_prime;
      if (!theta_one) c.failed.push_back("density at infinity " + format_double(c.theta_inf.value) + " is not 1");
      break;
    case LimitVerdict::Kind::Diverges: c.failed.push_back("density at infinity diverges"); break;
    case LimitVerdict::Kind::NoLimit: c.failed.push_back("density at infinity has no limit"); break;
    case LimitVerdict::Kind::Inconclusive: c.missing.push_back("density at infinity: " + c.theta_inf.reason); break;
  }

  try {
    c.monotone = monotone_evidence(s, seed, opt.monotone_check_tol);
    if (!c.monotone.holds)
      c.failed.push_back("monotonicity violated at " + detail::format_point(c.monotone.point) + " (max drop " +
                         format_double(c.monotone.report->max_violation) + ")");
  } catch (const Error& e) {
    c.missing.push_back(std::string("monotonicity: ") + e.what());
  }

  ConeOptions co;
  co.seed = seed;
  co.threads = opt.threads;
  try {
    c.cone = tangent_cone_infinity(s, co);
    if (!c.cone->is_linear_subspace) {
      std::string why = "tangent cone at infinity is not a linear subspace (fitted dimension " +
                        std::to_string(c.cone->fitted_dim);
      if (!c.cone->two_sided) why += ", one-sided";
      c.failed.push_back(why + ")");
    }
  } catch (const Error& e) {
    c.missing.push_back(std::string("tangent cone: ") + e.what());
  }
  try {
    c.normal_planes = normal_set_infinity(s, co);
    if (!c.normal_planes->is_single_plane) c.failed.push_back("tangent planes do not converge to a single plane");
  } catch (const Error& e) {
    c.missing.push_back(std::string("normal planes: ") + e.what());
  }

  if (opt.run_lne) {
    try {
      LNEOptions lno;
      lno.seed = seed;
      lno.threads = opt.threads;
      c.lne = lne_at_infinity(s, lno);
      if (c.lne->verdict == LNEReport::Kind::NotLne) c.failed.push_back("not LNE at infinity");
    } catch (const Error& e) {
      c.missing.push_back(std::string("LNE: ") + e.what());
    }
  }

  if (opt.run_kr && c.theta_inf.kind == LimitVerdict::Kind::Converges && c.cone) {
    KROptions ko;
    ko.lhs = c.theta_inf;
    ko.cone_estimate = *c.cone;
    ko.threads = opt.threads;
    c.kr = kr_check(s, tol, seed, ko);
    if (!c.kr->failure.empty()) c.missing.push_back("multiplicities: " + c.kr->failure);
    for (const auto& k : c.kr->components)
      if (k.k > 1) {
        c.failed.push_back("relative multiplicity " + std::to_string(k.k) + " on a cone component");
        break;
      }
  }

  if (s.is_graph() && c.normal_planes) {
    try {
      c.moser = detail::moser_from(s, *c.normal_planes, c.monotone, tol, seed);
    } catch (const Error& e) {
      c.missing.push_back(std::string("bounded slope: ") + e.what());
    }
  }

  // Routes.
  if (c.theta_inf.kind != LimitVerdict::Kind::Inconclusive)
    c.density_route = theta_one && c.monotone.holds ? RouteState::Holds : RouteState::Fails;
  const bool linear = c.cone && c.cone->is_linear_subspace;
  if (c.cone && c.lne && c.lne->verdict != LNEReport::Kind::Inconclusive)
    c.lne_route = linear && c.lne->verdict == LNEReport::Kind::Lne && c.definable ? RouteState::Holds : RouteState::Fails;
  else if (c.cone && !linear)
    c.lne_route = RouteState::Fails;
  if (c.kr && c.kr->failure.empty()) {
    bool all_one = true;
    for (const auto& k : c.kr->components) all_one = all_one && k.k == 1 && k.stable;
    c.multiplicity_proxy = all_one && linear && c.definable ? RouteState::Holds : RouteState::Fails;
  } else if (c.cone && !linear) {
    c.multiplicity_proxy = RouteState::Fails;
  }
  for (RouteState r : {c.lne_route, c.multiplicity_proxy})
    if (r != RouteState::Unknown && c.density_route != RouteState::Unknown && r != c.density_route)
      c.routes_agree = false;

  if (c.density_route == RouteState::Holds && c.closed.closed) {
    c.verdict = Classification::Verdict::AffineSubspace;
    c.fit = fit_affine(s, seed);
    c.statement = "numerically consistent with an affine subspace";
  } else if (!c.failed.empty()) {
    c.verdict = Classification::Verdict::NotAffine;
    c.statement = "evidence contradicts the affine hypotheses";
  } else {
    c.verdict = Classification::Verdict::Inconclusive;
    c.statement = "evidence insufficient for a verdict";
  }
  return c;
}

}  // namespace geoinf
