#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "geoinf/cells.hpp"
#include "geoinf/error.hpp"
#include "geoinf/linalg.hpp"
#include "geoinf/scene.hpp"

namespace geoinf {

struct BallQuery {
  Vec center;
  double radius = 1.0;
};

struct MeasureEstimate {
  double value = 0.0;
  double abs_error = 0.0;
  std::string method = "quadrature";  // or "monte_carlo", "exact"
  std::size_t cells_or_samples = 0;
  std::optional<std::uint64_t> seed;
};

struct MeasureOptions {
  double tol = 1e-4;  // relative
  std::uint64_t seed = 1;
  std::size_t max_cells = 200000;
};

inline constexpr double kExciseSize = 1e-6;

namespace detail {

struct GaussRule {
  std::array<double, 5> x;
  std::array<double, 5> w;
  int n;
};

inline const GaussRule& gauss5() {
  static const GaussRule r{{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640},
                           {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                            0.2369268850561891},
                           5};
  return r;
}

inline const GaussRule& gauss3() {
  static const GaussRule r{{-0.7745966692414834, 0.0, 0.7745966692414834, 0, 0}, {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0, 0, 0}, 3};
  return r;
}

inline int strata_per_axis(int d) {
  static const int table[] = {1, 256, 16, 7, 4};
  return table[std::clamp(d, 0, 4)];
}

class MeasureEngine {
 public:
  MeasureEngine(const Scene& s, const BallQuery& q, const MeasureOptions& opt) : s_(s), q_(q), opt_(opt) {}

  MeasureEstimate run() {
    for (int k = 0; k < static_cast<int>(s_.charts.size()); ++k) {
      const Chart& ch = s_.charts[k];
      const Box b = ch.bounds(q_.center.norm() + q_.radius);
      for (auto& g : grid_boxes(b, initial_splits(ch.dim()))) add_cell(k, g, 0.0);
    }
    while (!heap_.empty()) {
      const double err = total_error();
      if (err <= opt_.tol * std::fabs(sum_value_) || err == 0.0) break;
      if (cells_.size() >= opt_.max_cells) {
        const MeasureEstimate part = finish();
        throw BudgetExceededError("measure: cell budget of " + std::to_string(opt_.max_cells) + " exhausted at r = " +
                                      format_double(q_.radius),
                                  part.value, part.abs_error);
      }
      const auto [prio, idx] = heap_.top();
      heap_.pop();
      Cell c = cells_[idx];
      remove(c);
      cells_[idx].leaf = false;
      if (c.bad && c.box.max_side() < kExciseSize) {
        // Excise: drop the cell and charge the largest possible lost measure.
        const double lip = std::max(c.lip, max_lip_);
        Cell ex = c;
        ex.value = 0;
        ex.quad_err = std::pow(lip, s_.dim) * c.box.volume() * s_.charts[c.chart].weight;
        ex.var = 0;
        ex.bad = false;
        ex.leaf = true;
        cells_[idx] = ex;
        include(ex);
        continue;
      }
      for (auto& child : split_box(c.box)) add_cell(c.chart, child, c.lip);
    }
    return finish();
  }

 private:
  struct Cell {
    int chart;
    Box box;
    double value = 0, quad_err = 0, var = 0, lip = 0;
    double bound = 0;  // sample-independent worst case of the Monte Carlo error
    bool mc = false, bad = false, leaf = true;
  };

  double total_error() const { return std::max(0.0, sum_quad_err_) + std::sqrt(std::max(0.0, sum_var_)); }

  void include(const Cell& c) {
    sum_value_ += c.value;
    sum_quad_err_ += c.quad_err;
    sum_var_ += c.var;
  }
  void remove(const Cell& c) {
    sum_value_ -= c.value;
    sum_quad_err_ -= c.quad_err;
    sum_var_ -= c.var;
  }

  void add_cell(int chart, const Box& box, double parent_lip) {
    Cell c{chart, box};
    c.lip = parent_lip;
    evaluate(c);
    cells_.push_back(c);
    const std::size_t idx = cells_.size() - 1;
    include(c);
    // Monte Carlo cells are ranked by a bound that does not depend on their
    // samples; ranking by the sampled variance would keep exactly the cells
    // whose samples happened to miss the boundary, biasing the sum.
    const double prio = c.bad ? std::numeric_limits<double>::infinity() : (c.mc ? c.bound : c.quad_err);
    if (prio > 0) heap_.push({prio, idx});
  }

  void evaluate(Cell& c) {
    const Chart& ch = s_.charts[c.chart];
    const Cover rc = ch.domain.classify(c.box);
    if (rc == Cover::Outside) return;
    const Probe pr = probe_cell(ch, c.box, q_.center);
    if (pr.ok) max_area_ = std::max(max_area_, pr.area_max);
    c.bound = c.box.volume() * ch.weight * (pr.ok ? pr.area_max : max_area_);
    if (pr.ok) {
      const double h = c.box.half_diagonal();
      c.lip = h > 0 ? pr.map_reach / h : c.lip;
      max_lip_ = std::max(max_lip_, c.lip);
      if (pr.outside(q_.radius)) return;
      if (rc == Cover::Inside && pr.inside(q_.radius)) {
        if (!quadrature(c, ch)) c.bad = true;
        return;
      }
    }
    if (!monte_carlo(c, ch, pr.ok ? pr.area_max : max_area_)) c.bad = true;
  }

  bool quadrature(Cell& c, const Chart& ch) {
    const double g5 = tensor_rule(c, ch, gauss5());
    if (!std::isfinite(g5)) return false;
    const double g3 = tensor_rule(c, ch, gauss3());
    if (!std::isfinite(g3)) return false;
    c.value = g5;
    c.quad_err = std::fabs(g5 - g3);
    return true;
  }

  double tensor_rule(const Cell& c, const Chart& ch, const GaussRule& rule) {
    const int d = ch.dim();
    int total = 1;
    for (int i = 0; i < d; ++i) total *= rule.n;
    const Vec mid = c.box.center();
    const Vec half = 0.5 * (c.box.hi - c.box.lo);
    Vec p(d), x;
    Jac J;
    double sum = 0;
    for (int idx = 0; idx < total; ++idx) {
      int rem = idx;
      double w = 1;
      for (int i = 0; i < d; ++i) {
        const int k = rem % rule.n;
        rem /= rule.n;
        p[i] = mid[i] + half[i] * rule.x[k];
        w *= rule.w[k];
      }
      if (!ch.eval_jacobian(p, x, J)) return std::numeric_limits<double>::quiet_NaN();
      const double a = area_element(J);
      if (!std::isfinite(a)) return a;
      sum += w * a;
    }
    return sum * half.prod() * ch.weight;
  }

  bool monte_carlo(Cell& c, const Chart& ch, double area_max) {
    const int d = ch.dim();
    const int k = strata_per_axis(d);
    int total = 1;
    for (int i = 0; i < d; ++i) total *= k;
    Rng rng(opt_.seed, cells_.size());
    const Vec width = (c.box.hi - c.box.lo) / k;
    Vec p(d), x;
    Jac J;
    std::vector<double> f(total);
    std::vector<char> in(total, 0);
    const double r2 = q_.radius * q_.radius;
    for (int idx = 0; idx < total; ++idx) {
      int rem = idx;
      for (int i = 0; i < d; ++i) {
        const int j = rem % k;
        rem /= k;
        p[i] = c.box.lo[i] + (j + rng.uniform()) * width[i];
      }
      f[idx] = 0;
      if (!ch.domain.contains(p)) continue;
      if (!ch.eval_jacobian(p, x, J)) return false;
      if ((x - q_.center).squaredNorm() >= r2) continue;
      const double a = area_element(J);
      if (!std::isfinite(a)) return false;
      f[idx] = a;
      in[idx] = 1;
    }
    const double cellw = c.box.volume() / total * ch.weight;
    double sum = 0, var = 0;
    for (int idx = 0; idx < total; ++idx) sum += f[idx];
    // A stratum next to an inside/outside switch may contain the boundary;
    // it is charged the largest Bernoulli variance a^2/4. Elsewhere neighboring
    // strata on the same side are paired and (f_a - f_b)^2 estimates the sum of
    // their variances.
    bool any_edge = false;
    for (int idx = 0; idx < total; ++idx) {
      double a = 0;
      bool edge = false;
      int stride = 1, rem = idx;
      for (int i = 0; i < d; ++i, stride *= k) {
        const int j = rem % k;
        rem /= k;
        for (int nb : {j > 0 ? idx - stride : -1, j + 1 < k ? idx + stride : -1}) {
          if (nb < 0 || in[nb] == in[idx]) continue;
          edge = true;
          a = std::max({a, f[idx], f[nb]});
        }
      }
      if (edge) var += a * a / 4;
      any_edge = any_edge || edge;
    }
    // No switch seen, yet the probe could not place the cell: the boundary
    // may hide inside one stratum.
    if (!any_edge) var += area_max * area_max / 4;
    for (int idx = 0; idx + 1 < total; idx += 2)
      if (in[idx] == in[idx + 1]) var += (f[idx] - f[idx + 1]) * (f[idx] - f[idx + 1]);
    if (total % 2 == 1) var += var / std::max(1, total / 2);
    c.value = sum * cellw;
    c.var = var * cellw * cellw;
    c.bound /= std::sqrt(static_cast<double>(total));
    c.mc = true;
    return true;
  }

  MeasureEstimate finish() const {
    MeasureEstimate e;
    double value = 0, quad = 0, var = 0;
    std::size_t leaves = 0;
    bool mc = false;
    for (const auto& c : cells_) {
      if (!c.leaf) continue;
      ++leaves;
      value += c.value;
      if (c.bad) {
        quad += std::pow(std::max(c.lip, max_lip_), s_.dim) * c.box.volume();
      } else {
        quad += c.quad_err;
        var += c.var;
      }
      mc = mc || (c.mc && c.value > 0);
    }
    e.value = std::max(0.0, value);
    e.abs_error = quad + std::sqrt(var);
    e.method = mc ? "monte_carlo" : "quadrature";
    e.cells_or_samples = leaves;
    if (mc) e.seed = opt_.seed;
    return e;
  }

  const Scene& s_;
  BallQuery q_;
  MeasureOptions opt_;
  std::vector<Cell> cells_;
  std::priority_queue<std::pair<double, std::size_t>> heap_;
  double sum_value_ = 0, sum_quad_err_ = 0, sum_var_ = 0;
  double max_lip_ = 0;
  double max_area_ = 0;
};

}  // namespace detail

/// Exact length of the staircase inside a ball centered at the origin.
inline MeasureEstimate area_staircase(const StaircaseSet& st, const BallQuery& q) {
  if (q.center.size() && q.center.norm() != 0)
    throw UnsupportedError("the staircase supports balls centered at the origin only");
  MeasureEstimate e;
  e.value = st.length_in_ball(q.radius);
  e.abs_error = 1e-15 * e.value;
  e.method = "exact";
  e.cells_or_samples = st.segments(q.radius).size();
  return e;
}

/// H^n(X intersected with B_r(c)) by integrating the chart area element over
/// the pulled-back ball.
inline MeasureEstimate area(const Scene& s, const BallQuery& q, const MeasureOptions& opt = {}) {
  if (!(opt.tol > 0)) throw Error("measure tolerance must be positive");
  if (!(q.radius > 0) || !std::isfinite(q.radius)) throw Error("ball radius must be finite and positive");
  BallQuery qq = q;
  if (qq.center.size() == 0) qq.center = Vec::Zero(s.ambient);
  if (qq.center.size() != s.ambient) throw DimensionMismatchError("ball center has the wrong dimension");
  if (s.is_staircase()) return area_staircase(*s.staircase, qq);
  return detail::MeasureEngine(s, qq, opt).run();
}

}  // namespace geoinf
