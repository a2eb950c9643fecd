#include <cmath>
#include <cstring>
#include <sstream>

#include <gtest/gtest.h>

#include "geoinf/asymptotics.hpp"
#include "geoinf/builtins.hpp"

namespace geoinf {
namespace {

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

TEST(UnitBall, ClosedFormTable) {
  EXPECT_NEAR(unit_ball_volume(1) / 2.0, 1.0, 1e-12);
  EXPECT_NEAR(unit_ball_volume(2) / M_PI, 1.0, 1e-12);
  EXPECT_NEAR(unit_ball_volume(3) / (4 * M_PI / 3), 1.0, 1e-12);
  EXPECT_NEAR(unit_ball_volume(4) / (M_PI * M_PI / 2), 1.0, 1e-12);
}

TEST(Profile, PlaneIsOne) {
  const Scene s = builtin_scene("plane");
  const DensityProfile pr = profile(s, v3(0.5, -1, 0), 0.1, 100, 12, 1e-3);
  ASSERT_EQ(pr.size(), 12u);
  for (std::size_t i = 0; i < pr.size(); ++i) {
    EXPECT_NEAR(pr.theta[i], 1.0, 3 * pr.err[i]) << pr.radii[i];
    if (i) EXPECT_GT(pr.radii[i], pr.radii[i - 1]);
  }
  EXPECT_EQ(pr.radii.front(), 0.1);
  EXPECT_EQ(pr.radii.back(), 100.0);
}

TEST(Profile, AlphaConeConstantAtVertex) {
  const DensityProfile pr = profile(builtin_scene("alpha_cone(1)"), Vec(), 0.01, 1000, 10, 1e-3);
  for (std::size_t i = 0; i < pr.size(); ++i) EXPECT_NEAR(pr.theta[i], std::sqrt(2.0), 3 * pr.err[i]);
}

TEST(Profile, CatenoidIncreasesTowardTwo) {
  const DensityProfile pr = profile(builtin_scene("catenoid"), Vec(), 5, 200, 10, 1e-3);
  for (std::size_t i = 1; i < pr.size(); ++i) EXPECT_GT(pr.theta[i], pr.theta[i - 1] - pr.err[i] - pr.err[i - 1]);
  EXPECT_LT(pr.theta.back(), 2.0);
  EXPECT_GT(pr.theta.back(), 1.95);
}

TEST(Profile, ThreadCountDoesNotChangeResult) {
  const Scene s = builtin_scene("catenoid");
  ProfileOptions one{5, 1}, many{5, 4};
  const DensityProfile a = profile(s, Vec(), 2, 40, 8, 1e-3, one);
  const DensityProfile b = profile(s, Vec(), 2, 40, 8, 1e-3, many);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(std::memcmp(&a.theta[i], &b.theta[i], sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(&a.err[i], &b.err[i], sizeof(double)), 0);
  }
}

TEST(Profile, RejectsBadGrid) {
  const Scene s = builtin_scene("plane");
  EXPECT_THROW(profile(s, Vec(), 1, 10, 5, 1e-3), Error);
  EXPECT_THROW(profile(s, Vec(), 0, 10, 8, 1e-3), Error);
}

TEST(Profile, CsvHasSeventeenDigits) {
  DensityProfile pr;
  pr.radii = {0.1, 1.0 / 3};
  pr.theta = {1.0, 2.0 / 3};
  pr.err = {1e-3, 0.0};
  std::ostringstream os;
  write_profile_csv(pr, os);
  EXPECT_EQ(os.str(), "r,theta,err\n0.10000000000000001,1,0.001\n0.33333333333333331,0.66666666666666663,0\n");
}

TEST(Infinity, Catenoid) {
  const LimitVerdict v = density_at_infinity(builtin_scene("catenoid"), 1e-3);
  ASSERT_EQ(v.kind, LimitVerdict::Kind::Converges) << v.reason;
  EXPECT_NEAR(v.value, 2.0, 0.02);
}

TEST(Infinity, Parabola) {
  const LimitVerdict v = density_at_infinity(builtin_scene("parabola"), 1e-3);
  ASSERT_EQ(v.kind, LimitVerdict::Kind::Converges) << v.reason;
  EXPECT_NEAR(v.value, 1.0, 0.01);
}

TEST(Infinity, HelicoidDivergesLinearly) {
  // The pulled-back ball is the disk t^2 + s^2 < r^2 and the area element is
  // sqrt(1 + t^2), so the area grows like r^3 and theta like r.
  const LimitVerdict v = density_at_infinity(builtin_scene("helicoid"), 1e-3);
  ASSERT_EQ(v.kind, LimitVerdict::Kind::Diverges);
  EXPECT_NEAR(v.rate, 1.0, 0.05);
  const auto& pr = v.profile;
  EXPECT_GE(pr.theta.back() / pr.theta[pr.size() - 8], 4.0);
}

TEST(Infinity, StaircaseHasNoLimit) {
  const LimitVerdict v = density_at_infinity(builtin_scene("staircase"), 1e-3);
  ASSERT_EQ(v.kind, LimitVerdict::Kind::NoLimit);
  EXPECT_GT(v.limsup_band.lo - v.liminf_band.hi, 0.0);
  // At r = a_J = 2^J - 1 the length inside is C_J = sum c_j 2^{j-1} up to
  // O(1/r) from the offset heights; odd J end a single interval (minimum),
  // even J a double one (maximum). Extremes over the sampled tail:
  double lo = 1e9, hi = -1e9;
  for (int J = 1; J < 40; ++J) {
    const double a = std::ldexp(1.0, J) - 1;
    if (a < 100 || a > 1e4) continue;
    double C = 0;
    for (int j = 1; j <= J; ++j) C += (j % 2 ? 1 : 2) * std::ldexp(1.0, j - 1);
    const double theta = C / (2 * a);
    (J % 2 ? lo : hi) = J % 2 ? std::min(lo, theta) : std::max(hi, theta);
  }
  EXPECT_NEAR(0.5 * (v.liminf_band.lo + v.liminf_band.hi) / lo, 1.0, 0.02);
  EXPECT_NEAR(0.5 * (v.limsup_band.lo + v.limsup_band.hi) / hi, 1.0, 0.02);
  EXPECT_NEAR(lo, 2.0 / 3, 0.01);
  EXPECT_NEAR(hi, 5.0 / 6, 1e-9);
}

TEST(Infinity, CenterInvariance) {
  for (const char* name : {"catenoid", "alpha_cone(1)"}) {
    const Scene s = builtin_scene(name);
    LimitOptions shifted;
    shifted.center = v3(3, 0, 0);
    const LimitVerdict a = density_at_infinity(s, 1e-3);
    const LimitVerdict b = density_at_infinity(s, 1e-3, shifted);
    ASSERT_EQ(a.kind, LimitVerdict::Kind::Converges) << name;
    ASSERT_EQ(b.kind, LimitVerdict::Kind::Converges) << name;
    EXPECT_LE(std::fabs(a.value - b.value), 3 * (a.err + b.err)) << name;
  }
}

TEST(Infinity, ComplexCurvesHaveDegreeDensity) {
  const LimitVerdict p = density_at_infinity(builtin_scene("complex_parabola"), 1e-3);
  ASSERT_EQ(p.kind, LimitVerdict::Kind::Converges);
  EXPECT_NEAR(p.value, 2.0, 0.04);
  const LimitVerdict c = density_at_infinity(builtin_scene("complex_cubic"), 1e-3);
  ASSERT_EQ(c.kind, LimitVerdict::Kind::Converges);
  EXPECT_NEAR(c.value, 3.0, 0.06);
}

TEST(Point, SmoothAndConical) {
  const LimitVerdict cat = density_at_point(builtin_scene("catenoid"), v3(1, 0, 0), 1e-3);
  ASSERT_EQ(cat.kind, LimitVerdict::Kind::Converges);
  EXPECT_NEAR(cat.value, 1.0, 0.02);
  const LimitVerdict cone = density_at_point(builtin_scene("alpha_cone(1)"), v3(0, 0, 0), 1e-3);
  ASSERT_EQ(cone.kind, LimitVerdict::Kind::Converges);
  EXPECT_NEAR(cone.value, std::sqrt(2.0), 0.02);
  const LimitVerdict plane = density_at_point(builtin_scene("plane"), v3(0.3, -2, 0), 1e-3);
  ASSERT_EQ(plane.kind, LimitVerdict::Kind::Converges);
  EXPECT_NEAR(plane.value, 1.0, 3 * plane.err);
}

TEST(Point, OffTheSetIsAnError) {
  EXPECT_THROW(density_at_point(builtin_scene("catenoid"), v3(0, 0, 0), 1e-3), PointNotOnSetError);
}

TEST(Monotonicity, CatenoidIncreasing) {
  const MonotonicityReport r = check_monotonicity(builtin_scene("catenoid"), v3(0, 0, 0));
  EXPECT_TRUE(r.nondecreasing);
  EXPECT_FALSE(r.constant);
  EXPECT_TRUE(r.cone_consistent);
}

TEST(Monotonicity, ConeIsConstantAtVertex) {
  for (const char* name : {"alpha_cone(1)", "alpha_cone(3)", "plane"}) {
    const MonotonicityReport r = check_monotonicity(builtin_scene(name), v3(0, 0, 0));
    EXPECT_TRUE(r.constant) << name;
    EXPECT_TRUE(r.nondecreasing) << name;
    EXPECT_TRUE(r.cone_consistent) << name;
  }
}

TEST(Monotonicity, CubicGraphDecreases) {
  // z = (x^2+y^2+1)^(1/3) is not minimal; theta dips from 1 to about 0.935
  // near r = 8 before returning toward 1.
  const MonotonicityReport r = check_monotonicity(builtin_scene("cubic_graph"), v3(0, 0, 1));
  EXPECT_FALSE(r.nondecreasing);
  EXPECT_GT(r.max_violation, 5e-3);
}

TEST(Monotonicity, MinimalScenesStayAboveOne) {
  struct Case {
    const char* name;
    Vec p;
  };
  Vec origin4 = Vec::Zero(4);
  for (const Case& c : {Case{"catenoid", v3(1, 0, 0)}, Case{"helicoid", v3(0, 0, 0)}, Case{"complex_parabola", origin4}}) {
    const Scene s = builtin_scene(c.name);
    ASSERT_TRUE(s.meta.minimal);
    const DensityProfile pr = profile(s, c.p, 0.05, 50, 10, 1e-3);
    for (std::size_t i = 0; i < pr.size(); ++i) EXPECT_GE(pr.theta[i], 1 - 3 * pr.err[i]) << c.name << " " << pr.radii[i];
  }
}

TEST(LawsonOsserman, ConeDensity) {
  // On the unit sphere the graph's area element is 9, and the cone meets B_1
  // over |x| < 2/3 since |f(x)| = (sqrt5/2)|x|; so theta = 9 (2/3)^4 = 16/9.
  const Scene s = builtin_scene("lawson_osserman");
  const MeasureEstimate m = area(s, {Vec::Zero(7), 1.0}, {1e-2, 3});
  const double theta = m.value / unit_ball_volume(4);
  EXPECT_NEAR(theta, 16.0 / 9, 3 * m.abs_error / unit_ball_volume(4));
  EXPECT_NEAR(theta, 16.0 / 9, 0.03);
}

}  // namespace
}  // namespace geoinf
