#include <cmath>

#include <gtest/gtest.h>

#include "geoinf/builtins.hpp"
#include "geoinf/cones.hpp"
#include "geoinf/metric.hpp"
#include "geoinf/multiplicity.hpp"

namespace geoinf {
namespace {

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

TEST(NeighborGraph, DijkstraMatchesFloydWarshall) {
  Rng rng(8);
  std::vector<Vec> pts(120);
  for (auto& p : pts) p = v3(rng.uniform(0, 5), rng.uniform(0, 5), 0);
  const double h = 0.9;
  const NeighborGraph G(pts, h);
  const std::size_t n = pts.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> D(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double e = (pts[i] - pts[j]).norm();
      if (i == j) D[i][j] = 0;
      else if (e <= h) D[i][j] = e;
    }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) D[i][j] = std::min(D[i][j], D[i][k] + D[k][j]);
  std::size_t comps = 0;
  std::vector<char> seen(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i]) continue;
    ++comps;
    for (std::size_t j = 0; j < n; ++j)
      if (std::isfinite(D[i][j])) seen[j] = 1;
  }
  EXPECT_EQ(G.component_count(), comps);
  for (std::size_t s : {0u, 17u, 64u}) {
    const auto d = G.distances(s);
    for (std::size_t j = 0; j < n; ++j) {
      if (std::isinf(D[s][j])) EXPECT_TRUE(std::isinf(d[j]));
      else EXPECT_NEAR(d[j], D[s][j], 1e-12);
    }
  }
}

TEST(NeighborGraph, MetricProperties) {
  // Graph distances dominate Euclidean distances and obey the triangle
  // inequality on every sampled triple.
  const Scene s = builtin_scene("catenoid");
  const GraphSample g = sample_for_graph(s, 12, 3000, 4, 3);
  const NeighborGraph G(g.points, g.h);
  Rng rng(9);
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> src;
  for (int q = 0; q < 6; ++q) {
    src.push_back(static_cast<std::size_t>(rng.uniform() * static_cast<double>(G.size())) % G.size());
    rows.push_back(G.distances(src.back()));
  }
  for (std::size_t a = 0; a < src.size(); ++a) {
    for (std::size_t j = 0; j < G.size(); ++j)
      if (std::isfinite(rows[a][j])) ASSERT_GE(rows[a][j], (G.vertex(src[a]) - G.vertex(j)).norm() * (1 - 1e-12));
    for (std::size_t b = 0; b < src.size(); ++b)
      for (std::size_t j = 0; j < G.size(); j += 7)
        if (std::isfinite(rows[a][j]) && std::isfinite(rows[b][j]))
          ASSERT_LE(rows[a][src[b]], rows[a][j] + rows[b][j] + 1e-9);
  }
}

TEST(InnerDistance, PlaneIsStraight) {
  const Scene s = builtin_scene("plane");
  const InnerDistance d = inner_distance(s, v3(0, 0, 0), v3(3, 4, 0), 0.5, 1);
  ASSERT_TRUE(d.connected);
  EXPECT_NEAR(d.distance, 5.0, 0.1);
  EXPECT_GE(d.distance, 5.0);
  // Halving h at the same h / spacing ratio does not lengthen the path.
  const InnerDistance f = inner_distance(s, v3(0, 0, 0), v3(3, 4, 0), 0.25, 2);
  EXPECT_LE(f.distance, 1.01 * d.distance);
  EXPECT_GT(f.vertices, d.vertices);
}

TEST(InnerDistance, CatenoidSheetsMeetOnlyAtTheNeck) {
  // From (rho, 0, +-acosh rho) any path crosses the waist rho = 1; along a
  // meridian the length to the waist is sinh(acosh rho) = sqrt(rho^2 - 1).
  const Scene s = builtin_scene("catenoid");
  const double rho = 50, z = std::acosh(rho);
  const InnerDistance d = inner_distance(s, v3(rho, 0, z), v3(rho, 0, -z), 3.0, 1);
  ASSERT_TRUE(d.connected);
  EXPECT_NEAR(d.euclidean, 2 * z, 1e-12);
  EXPECT_NEAR(d.distance / (2 * std::sqrt(rho * rho - 1)), 1.0, 0.03);
}

TEST(InnerDistance, UpperCatenoidWithinPiOfChord) {
  const Scene s = builtin_scene("upper_catenoid");
  const double r = 2.2, z = std::acosh(r);
  const Vec x = v3(r, 0, z), y = v3(-r, 0, z);
  const InnerDistance d = inner_distance(s, x, y, 0.3, 4);
  ASSERT_TRUE(d.connected);
  EXPECT_LE(d.distance, M_PI * d.euclidean);
  EXPECT_GE(d.distance, d.euclidean);
  // The excluded disk forces a detour of at least the half circle of radius 2.
  EXPECT_GT(d.distance, 2 * M_PI);
}

TEST(InnerDistance, EndpointOffTheSet) {
  EXPECT_THROW(inner_distance(builtin_scene("plane"), v3(0, 0, 1), v3(1, 0, 0), 0.5, 1), PointNotOnSetError);
}

TEST(Lne, PlaneMinusBall) {
  const LNEReport r = lne_at_infinity(builtin_scene("plane_minus_ball"));
  ASSERT_EQ(r.verdict, LNEReport::Kind::Lne) << r.reason;
  EXPECT_LE(r.C_bound, 1.1 * M_PI);
  for (const auto& L : r.levels) EXPECT_GE(L.C_hat, 1 - 1e-9);
}

TEST(Lne, CatenoidFailsWithSheetWitnesses) {
  const LNEReport r = lne_at_infinity(builtin_scene("catenoid"));
  ASSERT_EQ(r.verdict, LNEReport::Kind::NotLne) << r.reason;
  ASSERT_EQ(r.growth.size(), 2u);
  for (double g : r.growth) EXPECT_GE(g, 1.5);
  for (const auto& L : r.levels) {
    EXPECT_LT(L.witness.x[2] * L.witness.y[2], 0.0) << L.R;
    EXPECT_NEAR(L.witness.graph_distance / L.witness.euclidean, L.C_hat, 1e-12);
  }
}

TEST(Lne, VerdictsAgreeWithMultiplicityOne) {
  // A sheet split in a shell would have inner distance growing linearly, so
  // every scene judged LNE must show a single sheet in each shell.
  int lne = 0;
  for (const char* name : {"plane", "upper_catenoid", "cubic_graph", "alpha_cone(1)"}) {
    const Scene s = builtin_scene(name);
    const LNEReport r = lne_at_infinity(s);
    if (r.verdict != LNEReport::Kind::Lne) continue;
    ++lne;
    const ConeEstimate c = tangent_cone_infinity(s);
    for (const auto& v : simple_directions(s, c, 3, 1)) {
      const MultiplicityReport m = relative_multiplicity(s, v, 0.2, 10, 2);
      EXPECT_EQ(m.k, 1) << name;
    }
  }
  EXPECT_GE(lne, 3);
}

TEST(Lne, BudgetLimitIsInconclusive) {
  // The helicoid's area in B_r grows like r^3, so a fixed vertex budget
  // cannot keep the connection radius and no verdict is given.
  LNEOptions opt;
  opt.max_vertices = 20000;
  const LNEReport r = lne_at_infinity(builtin_scene("helicoid"), opt);
  EXPECT_EQ(r.verdict, LNEReport::Kind::Inconclusive);
  EXPECT_THROW(lne_at_infinity(builtin_scene("plane"), LNEOptions{{4, 8}}), Error);
}

}  // namespace
}  // namespace geoinf
