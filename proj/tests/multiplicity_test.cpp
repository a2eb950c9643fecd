#include <cmath>
#include <queue>

#include <gtest/gtest.h>

#include "geoinf/builtins.hpp"
#include "geoinf/measure.hpp"
#include "geoinf/multiplicity.hpp"

namespace geoinf {
namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

TEST(ConicalShell, MatchesDefinitionByScanningT) {
  Rng rng(3);
  const ConicalShell sh{vec({0.6, 0.8, 0}), 0.2, 2.0};
  int inside = 0;
  for (int q = 0; q < 3000; ++q) {
    Vec w(3);
    for (int i = 0; i < 3; ++i) w[i] = rng.uniform(-1, 6);
    bool brute = false;
    for (int j = 1; j <= 20000 && !brute; ++j) {
      const double t = 2.0 * w.norm() * j / 20000;
      brute = (t * sh.v - w).norm() < sh.eta * t;
    }
    brute = brute && w.norm() > sh.R;
    // The scan can miss only razor-thin margins.
    const double c = w.normalized().dot(sh.v);
    const double margin = std::fabs(std::sqrt(std::max(0.0, 1 - c * c)) - sh.eta);
    if (margin > 1e-3) EXPECT_EQ(sh.contains(w), brute) << w.transpose();
    inside += brute;
    EXPECT_EQ(sh.contains(w), sh.filter().contains(w) && w.norm() > sh.R);
  }
  EXPECT_GT(inside, 10);
}

TEST(Components, MatchBreadthFirstSearch) {
  Rng rng(4);
  std::vector<Vec> pts(600);
  for (auto& p : pts) p = vec({rng.uniform(0, 10), rng.uniform(0, 10)});
  for (double eps : {0.3, 0.5, 0.8}) {
    std::vector<int> label(pts.size(), -1);
    int count = 0;
    for (std::size_t s = 0; s < pts.size(); ++s) {
      if (label[s] >= 0) continue;
      std::queue<std::size_t> q;
      q.push(s);
      label[s] = count;
      while (!q.empty()) {
        const std::size_t a = q.front();
        q.pop();
        for (std::size_t b = 0; b < pts.size(); ++b)
          if (label[b] < 0 && (pts[a] - pts[b]).norm() <= eps) label[b] = count, q.push(b);
      }
      ++count;
    }
    const Components c = eps_components(pts, eps);
    EXPECT_EQ(static_cast<int>(c.members.size()), count) << eps;
    for (const auto& m : c.members)
      for (std::size_t i : m) EXPECT_EQ(label[i], label[m.front()]);
  }
}

TEST(RelativeMultiplicity, CatenoidHasTwoSheets) {
  // Both sheets z = +-acosh(rho) enter every shell around (1,0,0); their gap
  // 2 acosh(rho) is far above eta rho / 4 for the bands used.
  const MultiplicityReport r = relative_multiplicity(builtin_scene("catenoid"), vec({1, 0, 0}), 0.2, 10, 1);
  EXPECT_EQ(r.k, 2);
  EXPECT_TRUE(r.stable);
  ASSERT_EQ(r.trials.size(), 3u);
  for (const auto& t : r.trials)
    for (const auto& reps : t.representatives) {
      ASSERT_EQ(reps.size(), 2u);
      EXPECT_LT(reps[0][2] * reps[1][2], 0.0);
      for (const auto& x : reps) EXPECT_NEAR(std::fabs(x[2]), std::acosh(std::hypot(x[0], x[1])), 1e-9);
    }
}

TEST(RelativeMultiplicity, ParabolaHasTwoBranches) {
  const MultiplicityReport r = relative_multiplicity(builtin_scene("parabola"), vec({0, 1}), 0.2, 10, 2);
  EXPECT_EQ(r.k, 2);
  EXPECT_TRUE(r.stable);
  // Points with angle below asin(0.2) to the y axis need y > 24, so the
  // first band [10, 20] is skipped.
  EXPECT_EQ(r.trials[0].R_used, 20.0);
  const auto& reps = r.trials[0].representatives.back();
  ASSERT_EQ(reps.size(), 2u);
  EXPECT_LT(reps[0][0] * reps[1][0], 0.0);
}

TEST(RelativeMultiplicity, PlaneHasOneSheet) {
  const MultiplicityReport r = relative_multiplicity(builtin_scene("plane"), vec({0.6, -0.8, 0}), 0.2, 10, 3);
  EXPECT_EQ(r.k, 1);
  EXPECT_TRUE(r.stable);
}

TEST(RelativeMultiplicity, EmptyShellAndBadArguments) {
  const Scene s = builtin_scene("plane");
  MultiplicityOptions opt;
  opt.max_doublings = 3;
  EXPECT_THROW(relative_multiplicity(s, vec({0, 0, 1}), 0.2, 10, 1, opt), EmptyShellError);
  EXPECT_THROW(relative_multiplicity(s, vec({1, 0, 0}), 0.5, 10, 1), Error);
  EXPECT_THROW(relative_multiplicity(s, vec({1, 0, 0}), 0.2, 0, 1), Error);
  EXPECT_THROW(relative_multiplicity(s, vec({1, 0}), 0.2, 10, 1), DimensionMismatchError);
}

TEST(RelativeMultiplicity, SmoothBuiltinsAreStable) {
  struct Case {
    const char* name;
    Vec v;
    int k;
  };
  const double h = std::sqrt(0.5);
  for (const Case& c : {Case{"alpha_cone(1)", vec({h, 0, h}), 1}, Case{"complex_parabola", vec({0, 0, 1, 0}), 2},
                        Case{"cubic_graph", vec({0, 1, 0}), 1}, Case{"upper_catenoid", vec({1, 0, 0}), 1}}) {
    const MultiplicityReport r = relative_multiplicity(builtin_scene(c.name), c.v, 0.2, 10, 5);
    EXPECT_GE(r.k, 1) << c.name;
    EXPECT_EQ(r.k, c.k) << c.name;
    EXPECT_TRUE(r.stable) << c.name;
  }
}

TEST(RelativeMultiplicity, HelicoidSheetCountGrows) {
  // The shell around (1,0,0) meets the sheets z = k pi with |z| < eta |x|,
  // so their number grows with the radius.
  const MultiplicityReport r = relative_multiplicity(builtin_scene("helicoid"), vec({1, 0, 0}), 0.2, 10, 6);
  EXPECT_FALSE(r.stable);
  EXPECT_GT(r.trials[0].components.back(), r.trials[0].components.front());
}

TEST(RelativeMultiplicity, AtAPoint) {
  const Scene s = builtin_scene("alpha_cone(1)");
  const double h = std::sqrt(0.5);
  const MultiplicityReport r = relative_multiplicity_at(s, vec({0, 0, 0}), vec({h, 0, h}), 0.2, 1e-2, 1);
  EXPECT_EQ(r.k, 1);
  EXPECT_TRUE(r.stable);
  EXPECT_LT(r.trials[0].band_radius.back(), r.trials[0].band_radius.front());
}

TEST(SimpleDirections, RayAndCircle) {
  const Scene par = builtin_scene("parabola");
  const auto d = simple_directions(par, tangent_cone_infinity(par), 5, 1);
  ASSERT_FALSE(d.empty());
  for (const auto& u : d) EXPECT_LE((u - vec({0, 1})).norm(), 1e-2);

  const Scene cat = builtin_scene("catenoid");
  const ConeEstimate c = tangent_cone_infinity(cat);
  const auto e = simple_directions(cat, c, 50, 2);
  EXPECT_EQ(e.size(), 50u);
  for (const auto& u : e) EXPECT_NEAR(u[2], 0.0, 1e-2);
}

TEST(SimpleDirections, HalfPlaneDropsTheEdge) {
  // The link of a half plane is a half circle; its end points are not simple.
  const Scene s = parse_scene(R"(scene "half" { ambient 3 dim 2
    graph { params (x,y) domain { x in (0,inf) grow linear; y in (-inf,inf) grow linear } height (0) } })");
  const ConeEstimate c = tangent_cone_infinity(s);
  const double eta = 0.2;
  const auto d = simple_directions(s, c, static_cast<int>(c.directions.size()), 1, eta);
  ASSERT_GT(d.size(), c.directions.size() / 2);
  EXPECT_LT(d.size(), c.directions.size());
  for (const auto& u : d) EXPECT_GT(std::fabs(std::asin(std::clamp(u[0], -1.0, 1.0))), eta / 3 - 2e-2);
}

TEST(ConeComponents, AlphaConeSlices) {
  // Each nappe's link is a circle of radius 1/sqrt2, so the cone over it
  // meets B_1 in measure (sqrt2 pi) / 2.
  const ConeEstimate c = tangent_cone_infinity(builtin_scene("alpha_cone(1)"));
  const auto comps = cone_components(c, 2);
  ASSERT_EQ(comps.size(), 2u);
  for (const auto& k : comps) {
    EXPECT_NEAR(k.slice_measure, M_SQRT2 * M_PI / 2, 3 * k.slice_err + 1e-3);
    EXPECT_LE(k.slice_err, 1e-2);
  }
  EXPECT_NEAR(cone_density(comps, 2), M_SQRT2, 1e-2);
}

TEST(KurdykaRaby, FormulaHoldsOnSmoothBuiltins) {
  struct Case {
    const char* name;
    double theta;
    std::vector<int> ks;
  };
  for (const Case& c : {Case{"plane", 1, {1}}, Case{"parabola", 1, {2}}, Case{"catenoid", 2, {2}},
                        Case{"alpha_cone(1)", M_SQRT2, {1, 1}}, Case{"complex_parabola", 2, {2}}}) {
    const KRReport r = kr_check(builtin_scene(c.name), 1e-3, 1);
    ASSERT_TRUE(r.failure.empty()) << c.name << ": " << r.failure;
    EXPECT_TRUE(r.agree) << c.name << " lhs " << r.lhs.value << " rhs " << r.rhs;
    EXPECT_NEAR(r.rhs, c.theta, 3 * r.rhs_err + 1e-3) << c.name;
    ASSERT_EQ(r.components.size(), c.ks.size()) << c.name;
    for (std::size_t j = 0; j < c.ks.size(); ++j) {
      EXPECT_EQ(r.components[j].k, c.ks[j]) << c.name;
      EXPECT_TRUE(r.components[j].stable) << c.name;
    }
  }
}

TEST(KurdykaRaby, PartialReportWithoutLimit) {
  const KRReport r = kr_check(builtin_scene("staircase"), 1e-3, 1);
  EXPECT_FALSE(r.agree);
  EXPECT_FALSE(r.failure.empty());
  EXPECT_EQ(r.lhs.kind, LimitVerdict::Kind::NoLimit);
}

// Closed forms for z = w^d over C: |x|^2 = rho^2 + rho^(2d) and the area
// element is 1 + d^2 rho^(2d-2), so the area in B_r is pi (s + d s^d) with
// s = rho0^2 solving s + s^d = r^2.
double complex_graph_theta(int d, double r) {
  double lo = 0, hi = r * r;
  for (int i = 0; i < 200; ++i) {
    const double s = 0.5 * (lo + hi);
    (s + std::pow(s, d) < r * r ? lo : hi) = s;
  }
  const double s = 0.5 * (lo + hi);
  return (s + d * std::pow(s, d)) / (r * r);
}

TEST(DegreeDensity, ComplexGraphsMatchClosedForm) {
  for (int d : {2, 3}) {
    const Scene s = builtin_scene(d == 2 ? "complex_parabola" : "complex_cubic");
    for (double r : {3.0, 30.0}) {
      const MeasureEstimate m = area(s, {Vec::Zero(4), r}, {1e-3, 1});
      const double theta = m.value / (M_PI * r * r);
      EXPECT_NEAR(theta, complex_graph_theta(d, r), 3 * m.abs_error / (M_PI * r * r)) << d << " " << r;
    }
  }
}

TEST(DegreeDensity, DensityEqualsDegree) {
  for (auto [name, deg] : std::vector<std::pair<const char*, int>>{{"complex_line", 1}, {"complex_parabola", 2},
                                                                   {"complex_cubic", 3}}) {
    const DegreeReport r = degree_density_check(builtin_scene(name), deg, 1e-3);
    EXPECT_TRUE(r.matches_degree) << name << " " << r.theta_inf << " +- " << r.verdict.err;
  }
  const DegreeReport wrong = degree_density_check(builtin_scene("complex_parabola"), 3, 1e-3);
  EXPECT_FALSE(wrong.matches_degree);
  EXPECT_THROW(degree_density_check(builtin_scene("catenoid"), 1, 1e-3), UnsupportedError);
}

TEST(LneDensity, GraphsWithPlaneConeHaveDensityOne) {
  // For LNE sets theta(X) equals the density of the cone at infinity.
  for (const char* name : {"plane", "upper_catenoid"}) {
    const Scene s = builtin_scene(name);
    const LimitVerdict v = density_at_infinity(s, 1e-3);
    ASSERT_EQ(v.kind, LimitVerdict::Kind::Converges) << name;
    const ConeEstimate c = tangent_cone_infinity(s);
    const double tc = cone_density(cone_components(c, 2), 2);
    EXPECT_NEAR(v.value, tc, 3 * v.err + 1e-2) << name;
  }
}

}  // namespace
}  // namespace geoinf
