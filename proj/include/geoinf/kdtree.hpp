#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "geoinf/linalg.hpp"

namespace geoinf {

/// Static k-d tree over a point list (not copied; the list must outlive the
/// tree). Euclidean radius and nearest-neighbour queries.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec>& pts) : pts_(pts), idx_(pts.size()) {
    std::iota(idx_.begin(), idx_.end(), std::size_t{0});
    nodes_.resize(pts.size() + 16);
    if (!pts.empty()) build(0, 0, idx_.size());
  }

  /// Indices of points with |p - q| <= r, in increasing index order.
  std::vector<std::size_t> radius(const Vec& q, double r) const {
    std::vector<std::size_t> out;
    if (!pts_.empty()) radius_rec(0, 0, idx_.size(), q, r, out);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Nearest point index (smallest index on ties) and its distance.
  std::pair<std::size_t, double> nearest(const Vec& q) const {
    std::size_t best = pts_.size();
    double bd = std::numeric_limits<double>::infinity();
    if (!pts_.empty()) nearest_rec(0, 0, idx_.size(), q, best, bd);
    return {best, std::sqrt(bd)};
  }

  std::size_t size() const { return pts_.size(); }

 private:
  struct Node {
    int dim;
    double split;
  };

  static constexpr std::size_t kLeaf = 8;

  // Splits are at the median, so the tree is balanced and heap indexing fits.
  void build(std::size_t id, std::size_t lo, std::size_t hi) {
    if (hi - lo <= kLeaf) return;
    const int m = static_cast<int>(pts_[idx_[lo]].size());
    int dim = 0;
    double spread = -1;
    for (int d = 0; d < m; ++d) {
      double a = std::numeric_limits<double>::infinity(), b = -a;
      for (std::size_t i = lo; i < hi; ++i) {
        a = std::min(a, pts_[idx_[i]][d]);
        b = std::max(b, pts_[idx_[i]][d]);
      }
      if (b - a > spread) {
        spread = b - a;
        dim = d;
      }
    }
    const std::size_t mid = (lo + hi) / 2;
    std::nth_element(idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi,
                     [&](std::size_t a, std::size_t b) { return pts_[a][dim] < pts_[b][dim]; });
    nodes_[id] = {dim, pts_[idx_[mid]][dim]};
    build(2 * id + 1, lo, mid);
    build(2 * id + 2, mid, hi);
  }

  void radius_rec(std::size_t id, std::size_t lo, std::size_t hi, const Vec& q, double r, std::vector<std::size_t>& out) const {
    if (hi - lo <= kLeaf) {
      for (std::size_t i = lo; i < hi; ++i)
        if ((pts_[idx_[i]] - q).squaredNorm() <= r * r) out.push_back(idx_[i]);
      return;
    }
    const Node& nd = nodes_[id];
    const std::size_t mid = (lo + hi) / 2;
    const double diff = q[nd.dim] - nd.split;
    if (diff - r <= 0) radius_rec(2 * id + 1, lo, mid, q, r, out);
    if (diff + r >= 0) radius_rec(2 * id + 2, mid, hi, q, r, out);
  }

  void nearest_rec(std::size_t id, std::size_t lo, std::size_t hi, const Vec& q, std::size_t& best, double& bd) const {
    if (hi - lo <= kLeaf) {
      for (std::size_t i = lo; i < hi; ++i) {
        const double d = (pts_[idx_[i]] - q).squaredNorm();
        if (d < bd || (d == bd && idx_[i] < best)) {
          bd = d;
          best = idx_[i];
        }
      }
      return;
    }
    const Node& nd = nodes_[id];
    const std::size_t mid = (lo + hi) / 2;
    const double diff = q[nd.dim] - nd.split;
    const bool left_first = diff <= 0;
    if (left_first) {
      nearest_rec(2 * id + 1, lo, mid, q, best, bd);
      if (diff * diff <= bd) nearest_rec(2 * id + 2, mid, hi, q, best, bd);
    } else {
      nearest_rec(2 * id + 2, mid, hi, q, best, bd);
      if (diff * diff <= bd) nearest_rec(2 * id + 1, lo, mid, q, best, bd);
    }
  }

  const std::vector<Vec>& pts_;
  std::vector<std::size_t> idx_;
  std::vector<Node> nodes_;
};

}  // namespace geoinf
