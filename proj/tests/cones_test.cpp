#include <cmath>

#include <gtest/gtest.h>

#include "geoinf/builtins.hpp"
#include "geoinf/cones.hpp"

namespace geoinf {
namespace {

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

double distance_to_span(const Vec& u, const Eigen::MatrixXd& B) { return (u - B * (B.transpose() * u)).norm(); }

TEST(KdTree, MatchesBruteForce) {
  Rng rng(5);
  for (int m : {2, 3, 7}) {
    std::vector<Vec> pts(700);
    for (auto& p : pts) {
      p.resize(m);
      for (int i = 0; i < m; ++i) p[i] = rng.normal();
    }
    const KdTree tree(pts);
    for (int q = 0; q < 60; ++q) {
      Vec x(m);
      for (int i = 0; i < m; ++i) x[i] = rng.normal();
      const double r = rng.uniform(0.1, 1.5);
      std::vector<std::size_t> brute;
      std::size_t nb = 0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if ((pts[i] - x).norm() <= r) brute.push_back(i);
        if ((pts[i] - x).norm() < (pts[nb] - x).norm()) nb = i;
      }
      EXPECT_EQ(tree.radius(x, r), brute);
      EXPECT_EQ(tree.nearest(x).first, nb);
    }
  }
}

TEST(EpsilonNet, CoversAndSeparates) {
  Rng rng(6);
  std::vector<Vec> pts(2000);
  for (auto& p : pts) {
    p = Vec(3);
    for (int i = 0; i < 3; ++i) p[i] = rng.normal();
    p.normalize();
  }
  const double eps = 0.1;
  const auto net = epsilon_net(pts, eps);
  for (std::size_t a = 0; a < net.size(); ++a)
    for (std::size_t b = a + 1; b < net.size(); ++b) EXPECT_GT((pts[net[a]] - pts[net[b]]).norm(), eps);
  for (const auto& p : pts) {
    double d = 1e9;
    for (std::size_t c : net) d = std::min(d, (pts[c] - p).norm());
    EXPECT_LE(d, eps);
  }
}

TEST(Blowup, InverseIdentity) {
  for (const char* name : {"catenoid", "lawson_osserman", "helicoid"}) {
    const Scene s = builtin_scene(name);
    const auto cloud = blowup_cloud(s, {1.0, 10.0, 100.0}, 334, 3);
    ASSERT_GE(cloud.size(), 1000u);
    for (const auto& b : cloud) {
      EXPECT_NEAR(b.u.norm(), 1.0, 1e-12);
      EXPECT_GT(b.s, 0.0);
      EXPECT_LE((blowup_inverse_infinity(b) - b.x).norm(), 1e-12 * b.x.norm()) << name;
    }
  }
  const Scene s = builtin_scene("catenoid");
  const Vec p = v3(1, 0, 0);
  for (const auto& b : blowup_cloud_at(s, p, {0.1, 0.01, 0.001}, 300, 4))
    EXPECT_LE((blowup_inverse_at(b, p) - b.x).norm(), 1e-12 * std::max(1.0, b.x.norm()));
}

TEST(Blowup, CatenoidFlattens) {
  // On the annulus [R, 2R], |z| <= acosh(2R) and |x| >= R.
  const auto cloud = blowup_cloud(builtin_scene("catenoid"), {10, 100, 1000}, 500, 8);
  double prev = 2;
  for (int level = 0; level < 3; ++level) {
    const double R = std::pow(10.0, level + 1);
    double worst = 0;
    for (const auto& b : cloud)
      if (b.level == level) worst = std::max(worst, std::fabs(b.u[2]));
    EXPECT_LE(worst, std::acosh(2 * R) / R);
    EXPECT_LT(worst, prev);
    prev = worst;
  }
}

TEST(Blowup, AlphaConeDirectionsOnTwoCircles) {
  const auto cloud = blowup_cloud(builtin_scene("alpha_cone(1)"), {1, 10, 100}, 200, 9);
  bool up = false, down = false;
  for (const auto& b : cloud) {
    EXPECT_NEAR(std::fabs(b.u[2]), std::sqrt(0.5), 1e-12);
    (b.u[2] > 0 ? up : down) = true;
  }
  EXPECT_TRUE(up && down);
}

TEST(Blowup, RejectsBadLevels) {
  const Scene s = builtin_scene("plane");
  EXPECT_THROW(blowup_cloud(s, {1, 10}, 10, 1), Error);
  EXPECT_THROW(blowup_cloud(s, {1, 10, 5}, 10, 1), Error);
}

TEST(ConeAtInfinity, CatenoidIsTheHorizontalPlane) {
  const ConeEstimate c = tangent_cone_infinity(builtin_scene("catenoid"));
  EXPECT_TRUE(c.is_linear_subspace);
  EXPECT_TRUE(c.two_sided);
  EXPECT_EQ(c.fitted_dim, 2);
  EXPECT_LE(c.max_residual, 1e-2);
  EXPECT_NEAR(distance_to_span(v3(0, 0, 1), c.basis), 1.0, 1e-2);
}

TEST(ConeAtInfinity, PlaneIsLinear) {
  const ConeEstimate c = tangent_cone_infinity(builtin_scene("plane"));
  EXPECT_TRUE(c.is_linear_subspace);
}

TEST(ConeAtInfinity, AlphaConeIsNotLinear) {
  const ConeEstimate c = tangent_cone_infinity(builtin_scene("alpha_cone(1)"));
  EXPECT_FALSE(c.is_linear_subspace);
  EXPECT_EQ(c.fitted_dim, 3);
  EXPECT_TRUE(c.two_sided);
}

TEST(ConeAtInfinity, ParabolaIsOneSided) {
  // y = x^2 gives x/|x| -> (0, 1) along both branches.
  const ConeEstimate c = tangent_cone_infinity(builtin_scene("parabola"));
  EXPECT_FALSE(c.is_linear_subspace);
  EXPECT_FALSE(c.two_sided);
  for (const auto& u : c.directions) {
    EXPECT_NEAR(u[0], 0.0, 1e-2);
    EXPECT_NEAR(u[1], 1.0, 1e-2);
  }
}

TEST(ConeAtInfinity, StaircaseIsARay) {
  const ConeEstimate c = tangent_cone_infinity(builtin_scene("staircase"));
  EXPECT_FALSE(c.two_sided);
  for (const auto& u : c.directions) EXPECT_NEAR(u[0], 1.0, 1e-9);
}

TEST(ConeAtInfinity, TooFewDirections) {
  ConeOptions opt;
  opt.per_level = 10;
  EXPECT_THROW(tangent_cone_infinity(builtin_scene("catenoid"), opt), InsufficientClustersError);
}

TEST(ConeAtInfinity, Deterministic) {
  ConeOptions opt;
  opt.per_level = 2000;
  const ConeEstimate a = tangent_cone_infinity(builtin_scene("cubic_graph"), opt);
  const ConeEstimate b = tangent_cone_infinity(builtin_scene("cubic_graph"), opt);
  ASSERT_EQ(a.directions.size(), b.directions.size());
  for (std::size_t i = 0; i < a.directions.size(); ++i) EXPECT_EQ(a.directions[i], b.directions[i]);
}

TEST(ConeAtPoint, SmoothPointGivesTangentPlane) {
  // The catenoid's tangent plane at (1,0,0) is spanned by e_y and e_z.
  const ConeEstimate c = tangent_cone_at_point(builtin_scene("catenoid"), v3(1, 0, 0));
  EXPECT_TRUE(c.is_linear_subspace);
  EXPECT_NEAR(distance_to_span(v3(1, 0, 0), c.basis), 1.0, 1e-2);
  const ConeEstimate pl = tangent_cone_at_point(builtin_scene("plane"), v3(2, 1, 0));
  EXPECT_TRUE(pl.is_linear_subspace);
  EXPECT_NEAR(distance_to_span(v3(0, 0, 1), pl.basis), 1.0, 1e-2);
}

TEST(ConeAtPoint, VertexOfDoubleCone) {
  const ConeEstimate c = tangent_cone_at_point(builtin_scene("alpha_cone(1)"), v3(0, 0, 0));
  EXPECT_FALSE(c.is_linear_subspace);
  for (const auto& u : c.directions) EXPECT_NEAR(std::fabs(u[2]), std::sqrt(0.5), 1e-3);
}

TEST(ConeAtPoint, OffTheSet) {
  EXPECT_THROW(tangent_cone_at_point(builtin_scene("catenoid"), v3(0, 0, 0)), PointNotOnSetError);
}

TEST(NormalSet, CatenoidAndCubicGraphLimitToHorizontal) {
  for (const char* name : {"catenoid", "cubic_graph", "upper_catenoid"}) {
    const PlaneLimitEstimate p = normal_set_infinity(builtin_scene(name));
    ASSERT_TRUE(p.is_single_plane) << name;
    EXPECT_NEAR(distance_to_span(v3(0, 0, 1), p.basis), 1.0, 1e-2) << name;
    for (const auto& F : p.frames) EXPECT_LE((F.transpose() * F - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-10);
  }
}

TEST(NormalSet, LawsonOssermanPlanesDiffer) {
  const PlaneLimitEstimate p = normal_set_infinity(builtin_scene("lawson_osserman"));
  EXPECT_FALSE(p.is_single_plane);
  EXPECT_GT(std::asin(p.max_pairwise), 0.1);
  EXPECT_GT(p.clusters.size(), 1u);
}

TEST(NormalSet, ConeDirectionsLieInLimitPlane) {
  // For graphs with bounded slope the tangent cone at infinity sits inside
  // the limit of tangent planes.
  for (const char* name : {"cubic_graph", "upper_catenoid", "plane"}) {
    const Scene s = builtin_scene(name);
    const PlaneLimitEstimate p = normal_set_infinity(s);
    ASSERT_TRUE(p.is_single_plane) << name;
    const ConeEstimate c = tangent_cone_infinity(s);
    for (const auto& u : c.directions) EXPECT_LE(distance_to_span(u, p.basis), c.tol) << name;
  }
}

}  // namespace
}  // namespace geoinf
