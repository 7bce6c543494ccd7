#pragma once

#include "linalg.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace twograph {

/// Static k-d tree over a flat point array (row-major, `dim` doubles per point).
/// Immutable after construction; queries are safe from concurrent readers.
class KdTree {
 public:
  KdTree() = default;

  KdTree(std::vector<double> coords, int dim) : coords_(std::move(coords)), dim_(dim) {
    require(dim > 0, ErrorKind::invalid_input, "KdTree: dimension must be positive");
    const std::size_t n = coords_.size() / static_cast<std::size_t>(dim);
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.reserve(2 * n / kLeaf + 2);
    if (n > 0) build(0, static_cast<std::uint32_t>(n));
  }

  std::size_t size() const { return order_.size(); }
  int dim() const { return dim_; }
  const double* point(std::size_t i) const { return coords_.data() + i * dim_; }

  struct Hit {
    std::size_t index = 0;
    double dist2 = std::numeric_limits<double>::infinity();
  };

  Hit nearest(const double* q) const {
    Hit best;
    if (!nodes_.empty()) nearest_rec(0, q, best);
    return best;
  }

  template <class V>
  Hit nearest(const V& q) const {
    return nearest(q.data());
  }

  /// Indices of all points with |p - q| < r (strict).
  template <class V>
  void within(const V& q, double r, std::vector<std::size_t>& out) const {
    out.clear();
    if (!nodes_.empty()) within_rec(0, q.data(), r * r, out);
  }

 private:
  static constexpr std::uint32_t kLeaf = 12;

  struct Node {
    std::uint32_t begin, end;
    std::int32_t left = -1, right = -1;
    int axis = -1;
    double split = 0.0;
    std::vector<double> lo, hi;
  };

  double dist2_to(const double* q, std::size_t i) const {
    const double* p = point(i);
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) {
      const double d = p[a] - q[a];
      s += d * d;
    }
    return s;
  }

  double box_dist2(const Node& nd, const double* q) const {
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) {
      double d = 0.0;
      if (q[a] < nd.lo[a]) d = nd.lo[a] - q[a];
      else if (q[a] > nd.hi[a]) d = q[a] - nd.hi[a];
      s += d * d;
    }
    return s;
  }

  std::int32_t build(std::uint32_t begin, std::uint32_t end) {
    Node nd;
    nd.begin = begin;
    nd.end = end;
    nd.lo.assign(dim_, std::numeric_limits<double>::infinity());
    nd.hi.assign(dim_, -std::numeric_limits<double>::infinity());
    for (std::uint32_t i = begin; i < end; ++i) {
      const double* p = point(order_[i]);
      for (int a = 0; a < dim_; ++a) {
        nd.lo[a] = std::min(nd.lo[a], p[a]);
        nd.hi[a] = std::max(nd.hi[a], p[a]);
      }
    }
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(nd);
    if (end - begin <= kLeaf) return id;
    int axis = 0;
    double spread = -1.0;
    for (int a = 0; a < dim_; ++a)
      if (nd.hi[a] - nd.lo[a] > spread) {
        spread = nd.hi[a] - nd.lo[a];
        axis = a;
      }
    if (spread <= 0.0) return id;
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t x, std::uint32_t y) {
                       return point(x)[axis] < point(y)[axis];
                     });
    const double split = point(order_[mid])[axis];
    const std::int32_t l = build(begin, mid);
    const std::int32_t r = build(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  void nearest_rec(std::int32_t id, const double* q, Hit& best) const {
    const Node& nd = nodes_[id];
    if (box_dist2(nd, q) >= best.dist2) return;
    if (nd.left < 0) {
      for (std::uint32_t i = nd.begin; i < nd.end; ++i) {
        const double d2 = dist2_to(q, order_[i]);
        if (d2 < best.dist2 || (d2 == best.dist2 && order_[i] < best.index)) {
          best.dist2 = d2;
          best.index = order_[i];
        }
      }
      return;
    }
    const bool go_left = q[nd.axis] < nd.split;
    nearest_rec(go_left ? nd.left : nd.right, q, best);
    nearest_rec(go_left ? nd.right : nd.left, q, best);
  }

  void within_rec(std::int32_t id, const double* q, double r2, std::vector<std::size_t>& out) const {
    const Node& nd = nodes_[id];
    if (box_dist2(nd, q) >= r2) return;
    if (nd.left < 0) {
      for (std::uint32_t i = nd.begin; i < nd.end; ++i)
        if (dist2_to(q, order_[i]) < r2) out.push_back(order_[i]);
      return;
    }
    within_rec(nd.left, q, r2, out);
    within_rec(nd.right, q, r2, out);
  }

  std::vector<double> coords_;
  int dim_ = 0;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace twograph
