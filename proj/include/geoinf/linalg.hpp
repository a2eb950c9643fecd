#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace geoinf {

inline constexpr int kMaxAmbient = 8;
inline constexpr int kMaxParams = 4;

/// Small vectors and matrices that never touch the heap.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxAmbient, 1>;
using Jac = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbient, kMaxParams>;

inline std::span<const double> as_span(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline std::span<double> as_span(Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

inline Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

inline std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

/// sqrt(det(J^T J)), the n-dimensional area element of a chart.
inline double area_element(const Jac& J) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxParams, kMaxParams> g = J.transpose() * J;
  const double det = g.determinant();
  return det > 0 ? std::sqrt(det) : 0.0;
}

inline double unit_ball_volume(int n) { return std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0 + 1.0); }

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// mt19937_64 with a stream index mixed into the seed, so per-cell and
/// per-level streams are independent of evaluation order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : eng_(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::uint64_t below(std::uint64_t n) { return eng_() % n; }
  double normal() {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * uniform());
  }

 private:
  std::mt19937_64 eng_;
};

/// Orthonormal basis of the column space of J (n columns assumed independent).
inline Jac orthonormal_frame(const Jac& J) {
  Eigen::HouseholderQR<Jac> qr(J);
  Jac q = qr.householderQ() * Jac::Identity(J.rows(), J.cols());
  return q;
}

/// sin of the largest principal angle between the spans of two orthonormal frames.
inline double principal_sine(const Jac& A, const Jac& B) {
  const Jac resid = B - A * (A.transpose() * B);
  Eigen::JacobiSVD<Jac> svd(resid);
  return std::min(1.0, svd.singularValues()(0));
}

}  // namespace geoinf
