#include <chrono>
#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "geoinf/builtins.hpp"
#include "geoinf/measure.hpp"

namespace geoinf {
namespace {

// Composite Simpson rule; the oracles below are smooth 1-d integrals.
double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

double bisect(const std::function<double(double)>& g, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Catenoid: |x|^2 = cosh^2 z + z^2 on the circle at height z.
double catenoid_area(double r) {
  const double zs = bisect([&](double z) { return std::cosh(z) * std::cosh(z) + z * z - r * r; }, 0, std::acosh(r) + 1);
  return 2 * M_PI * simpson([](double z) { return std::cosh(z) * std::cosh(z); }, -zs, zs);
}

// Helicoid: the pulled-back ball is the disk t^2 + s^2 < r^2, area element sqrt(1 + t^2).
double helicoid_area(double r) {
  return simpson([&](double t) { return 2 * std::sqrt(std::max(0.0, r * r - t * t)) * std::sqrt(1 + t * t); }, -r, r,
                 200000);
}

BallQuery ball(const Scene& s, double r) { return {Vec::Zero(s.ambient), r}; }

TEST(Area, PlaneUnitDisk) {
  const Scene s = builtin_scene("plane");
  const MeasureEstimate e = area(s, ball(s, 1.0), {1e-4, 1});
  EXPECT_NEAR(e.value, M_PI, 1e-3);
  EXPECT_LE(std::fabs(e.value - M_PI), 3 * e.abs_error + 1e-12);
  EXPECT_GE(e.abs_error, 0);
}

TEST(Area, AlphaConeUnitBall) {
  const Scene s = builtin_scene("alpha_cone(1)");
  // Each nappe: integral of sqrt(1+a) 2 pi rho over rho <= (1+a)^{-1/2}.
  const double oracle = 2 * simpson([](double rho) { return std::sqrt(2.0) * 2 * M_PI * rho; }, 0, 1 / std::sqrt(2.0));
  EXPECT_NEAR(oracle, 2 * M_PI / std::sqrt(2.0), 1e-12);
  const MeasureEstimate e = area(s, ball(s, 1.0), {1e-4, 1});
  EXPECT_NEAR(e.value, oracle, 1e-2);
}

TEST(Area, CatenoidRadius50) {
  const Scene s = builtin_scene("catenoid");
  const double oracle = catenoid_area(50);
  const MeasureEstimate e = area(s, ball(s, 50.0), {1e-4, 3});
  EXPECT_NEAR(e.value / oracle, 1.0, 1e-3);
}

TEST(Area, HelicoidAgainstDiskIntegral) {
  const Scene s = builtin_scene("helicoid");
  for (double r : {3.0, 30.0}) {
    const double oracle = helicoid_area(r);
    const MeasureEstimate e = area(s, ball(s, r), {1e-4, 5});
    EXPECT_NEAR(e.value / oracle, 1.0, 1e-3) << r;
  }
}

TEST(Area, StaircaseExact) {
  const Scene s = builtin_scene("staircase");
  EXPECT_EQ(area(s, ball(s, 1.0)).value, 1.0);
  EXPECT_EQ(area(s, ball(s, 0.5)).value, 0.5);
  EXPECT_EQ(area(s, ball(s, 1.0)).method, "exact");
  BallQuery off{Vec::Zero(2), 3.0};
  off.center[0] = 1;
  EXPECT_THROW(area(s, off), UnsupportedError);
}

TEST(Area, EmptyIntersectionIsZero) {
  const Scene s = builtin_scene("plane_minus_ball");
  const MeasureEstimate e = area(s, ball(s, 0.5));
  EXPECT_EQ(e.value, 0.0);
  EXPECT_EQ(e.abs_error, 0.0);
}

TEST(Area, BudgetExceededCarriesPartial) {
  const Scene s = builtin_scene("catenoid");
  try {
    area(s, ball(s, 50.0), {1e-9, 1, 200});
    FAIL();
  } catch (const BudgetExceededError& err) {
    EXPECT_GT(err.partial_value(), 0);
    EXPECT_GT(err.partial_error(), 0);
  }
}

TEST(Property, ReportedErrorIsHonest) {
  // 100 randomized (r, tol) trials across three closed-form oracles.
  Rng rng(2024);
  int covered = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int which = trial % 3;
    const double tol = std::pow(10.0, rng.uniform(-4.0, -2.5));
    double r = 0, oracle = 0;
    Scene s;
    if (which == 0) {
      s = builtin_scene("plane");
      r = std::pow(10.0, rng.uniform(-1, 3));
      oracle = M_PI * r * r;
    } else if (which == 1) {
      s = builtin_scene("alpha_cone(1)");
      r = std::pow(10.0, rng.uniform(-1, 3));
      oracle = 2 * M_PI / std::sqrt(2.0) * r * r;
    } else {
      s = builtin_scene("catenoid");
      r = std::pow(10.0, rng.uniform(0.2, 2.5));
      oracle = catenoid_area(r);
    }
    const MeasureEstimate e = area(s, ball(s, r), {tol, static_cast<std::uint64_t>(trial + 1)});
    if (std::fabs(e.value - oracle) <= 3 * e.abs_error) ++covered;
  }
  EXPECT_GE(covered, 95);
}

TEST(Property, MonotoneInRadius) {
  const Scene s = builtin_scene("catenoid");
  MeasureEstimate prev = area(s, ball(s, 2.0), {1e-3, 1});
  for (double r = 3.0; r < 100; r *= 1.7) {
    const MeasureEstimate e = area(s, ball(s, r), {1e-3, 1});
    EXPECT_LE(prev.value, e.value + prev.abs_error + e.abs_error);
    prev = e;
  }
}

TEST(Property, ConeScalingLaw) {
  for (const char* name : {"alpha_cone(1)", "alpha_cone(3)", "plane", "lawson_osserman"}) {
    const Scene s = builtin_scene(name);
    const double tol = s.dim > 2 ? 1e-3 : 1e-4;
    const MeasureEstimate base = area(s, ball(s, 1.0), {tol, 7});
    for (double lambda : {2.0, 5.0}) {
      const MeasureEstimate e = area(s, ball(s, lambda), {tol, 7});
      const double scaled = std::pow(lambda, s.dim) * base.value;
      EXPECT_NEAR(e.value / scaled, 1.0, 2e-3) << name << " lambda " << lambda;
    }
  }
}

TEST(Property, AdditivityUnderDomainSplit) {
  // Split the catenoid's s-range at pi; the two halves must sum to the whole.
  const Scene whole = builtin_scene("catenoid");
  auto half = [](double lo, double hi) {
    return parse_scene("scene \"h\" { ambient 3 dim 2 chart { params (t,s) domain { t in (-inf,inf) grow acosh; s in (" +
                       format_double(lo) + "," + format_double(hi) +
                       ") } map (cosh(t)*cos(s), cosh(t)*sin(s), t) } }");
  };
  BallQuery q{Vec::Zero(3), 20.0};
  q.center[0] = 2.0;
  const MeasureEstimate a = area(whole, q, {1e-4, 11});
  const MeasureEstimate b = area(half(0, M_PI), q, {1e-4, 12});
  const MeasureEstimate c = area(half(M_PI, 2 * M_PI), q, {1e-4, 13});
  EXPECT_LE(std::fabs(a.value - b.value - c.value), a.abs_error + b.abs_error + c.abs_error);
}

TEST(Property, SeedReproducible) {
  const Scene s = builtin_scene("catenoid");
  BallQuery q{Vec::Zero(3), 37.0};
  q.center[0] = 3.0;
  const MeasureEstimate a = area(s, q, {1e-4, 99});
  const MeasureEstimate b = area(s, q, {1e-4, 99});
  EXPECT_EQ(std::memcmp(&a.value, &b.value, sizeof(double)), 0);
  EXPECT_EQ(std::memcmp(&a.abs_error, &b.abs_error, sizeof(double)), 0);
  EXPECT_EQ(a.cells_or_samples, b.cells_or_samples);
}

}  // namespace
}  // namespace geoinf
