#pragma once

// Closed-form and one-dimensional reference values for the built-in scenes.
// These never touch the sampling or cell machinery.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "geoinf/error.hpp"
#include "geoinf/linalg.hpp"

namespace geoinf {

struct OracleValue {
  std::string label;
  double value = 0.0;
};

namespace oracle {

inline double root(const std::function<double(double)>& f, double lo, double hi) {
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (a + b);
}

/// Area of one nappe z = sqrt(alpha) rho inside B_r, both nappes together.
inline double alpha_cone_area(double alpha, double r) { return 2 * M_PI * r * r / std::sqrt(1 + alpha); }

/// Height where the catenoid leaves B_r: cosh^2 z + z^2 = r^2.
inline double catenoid_height(double r) {
  return root([r](double z) { return std::cosh(z) * std::cosh(z) + z * z - r * r; }, 0.0, std::acosh(r));
}

/// 2 pi int_{-z*}^{z*} cosh^2 z dz.
inline double catenoid_area(double r) {
  const double z = catenoid_height(r);
  return 2 * M_PI * (z + 0.5 * std::sinh(2 * z));
}

/// Length of y = x^2 inside B_r.
inline double parabola_length(double r) {
  const double x = std::sqrt(0.5 * (std::sqrt(1 + 4 * r * r) - 1));
  return x * std::sqrt(1 + 4 * x * x) + 0.5 * std::asinh(2 * x);
}

/// (t cos s, t sin s, s) has |x|^2 = t^2 + s^2 and area element sqrt(1 + t^2).
inline double helicoid_area(double r) {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate([r](double t) { return 2 * std::sqrt(1 + t * t) * std::sqrt(std::max(0.0, r * r - t * t)); },
                     -r, r);
}

/// Graph of w -> w^d over C: with s = |w|^2 the ball condition is
/// s + s^d <= r^2 and the area is pi (s + d s^d).
inline double complex_power_area(int d, double r) {
  const double s = root([d, r](double s) { return s + std::pow(s, d) - r * r; }, 0.0, r * r);
  return M_PI * (s + d * std::pow(s, d));
}

/// Staircase length on (0, a_J) with a_J = a1 (2^{J-1} - 1).
inline double staircase_cumulative(double a1, int J) {
  double c = 0;
  for (int j = 1; j < J; ++j) c += (j % 2 ? 1 : 2) * std::ldexp(a1, j - 1);
  return c;
}

}  // namespace oracle

inline std::vector<std::string> oracle_names() {
  return {"unit_ball", "alpha_cone", "catenoid", "parabola", "helicoid", "staircase",
          "complex_parabola", "complex_cubic", "lawson_osserman"};
}

/// Reference values for one oracle family.
inline std::vector<OracleValue> run_oracle(const std::string& name) {
  std::vector<OracleValue> out;
  auto add = [&](std::string label, double v) { out.push_back({std::move(label), v}); };
  auto tag = [](double r) { return std::to_string(static_cast<long long>(r)); };
  if (name == "unit_ball") {
    // mu_n by the even/odd recursions mu_n = 2 pi mu_{n-2} / n.
    double even = 1, odd = 2;
    for (int n = 1; n <= 8; ++n) {
      if (n % 2) {
        if (n > 1) odd *= 2 * M_PI / n;
        add("mu_" + std::to_string(n), odd);
      } else {
        even *= 2 * M_PI / n;
        add("mu_" + std::to_string(n), even);
      }
    }
  } else if (name == "alpha_cone") {
    for (double a : {1.0, 3.0}) {
      const std::string t = "alpha=" + tag(a);
      add(t + ":area_B1", oracle::alpha_cone_area(a, 1));
      add(t + ":theta", oracle::alpha_cone_area(a, 1) / M_PI);
    }
  } else if (name == "catenoid") {
    for (double r : {10.0, 50.0, 100.0, 1000.0}) {
      add("r=" + tag(r) + ":height", oracle::catenoid_height(r));
      add("r=" + tag(r) + ":area", oracle::catenoid_area(r));
      add("r=" + tag(r) + ":theta", oracle::catenoid_area(r) / (M_PI * r * r));
    }
    add("theta_inf", 2);
  } else if (name == "parabola") {
    for (double r : {10.0, 100.0, 1000.0}) {
      add("r=" + tag(r) + ":length", oracle::parabola_length(r));
      add("r=" + tag(r) + ":theta", oracle::parabola_length(r) / (2 * r));
    }
    add("theta_inf", 1);
  } else if (name == "helicoid") {
    for (double r : {10.0, 100.0, 1000.0}) {
      add("r=" + tag(r) + ":area", oracle::helicoid_area(r));
      add("r=" + tag(r) + ":theta", oracle::helicoid_area(r) / (M_PI * r * r));
    }
  } else if (name == "staircase") {
    for (int J = 1; J <= 6; ++J) add("a1=1:J=" + std::to_string(J) + ":cumulative", oracle::staircase_cumulative(1, J + 1));
    // Along a_J the ratio C_J / (2 a_J) tends to 2/3 (odd J) and 5/6 (even J).
    add("liminf", 2.0 / 3);
    add("limsup", 5.0 / 6);
  } else if (name == "complex_parabola" || name == "complex_cubic") {
    const int d = name == "complex_parabola" ? 2 : 3;
    for (double r : {10.0, 100.0, 1000.0}) {
      add("r=" + tag(r) + ":area", oracle::complex_power_area(d, r));
      add("r=" + tag(r) + ":theta", oracle::complex_power_area(d, r) / (M_PI * r * r));
    }
    add("theta_inf", d);
  } else if (name == "lawson_osserman") {
    // Cone over the graph of |f(x)| = (sqrt5/2)|x| on |x| < 2/3 with
    // area element 9: theta = 9 (2/3)^4.
    add("theta", 16.0 / 9);
  } else {
    throw UnknownBuiltinError("unknown oracle '" + name + "'");
  }
  return out;
}

}  // namespace geoinf
