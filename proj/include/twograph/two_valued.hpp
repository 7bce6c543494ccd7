#pragma once

#include "linalg.hpp"
#include "parallel.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace twograph {

/// Unordered pair of points of R^k, stored in lexicographic order.
struct Pair2 {
  Vec a1;
  Vec a2;

  Pair2() = default;
  Pair2(const Vec& x, const Vec& y) : a1(x), a2(y) {
    require_dim(x.size(), y.size(), "Pair2");
    canonicalize();
  }

  /// Both values equal (a multiplicity-two point).
  static Pair2 doubled(const Vec& x) { return Pair2(x, x); }

  int k() const { return static_cast<int>(a1.size()); }
  double separation() const { return (a1 - a2).norm(); }

  void canonicalize() {
    for (Eigen::Index i = 0; i < a1.size(); ++i) {
      if (a1(i) < a2(i)) return;
      if (a1(i) > a2(i)) {
        std::swap(a1, a2);
        return;
      }
    }
  }

  bool operator==(const Pair2& o) const { return a1 == o.a1 && a2 == o.a2; }
  bool operator!=(const Pair2& o) const { return !(*this == o); }
};

/// Costs of the straight (a1-b1, a2-b2) and crossed (a1-b2, a2-b1) pairings.
struct PairingCost {
  double straight;
  double crossed;
  double best() const { return std::min(straight, crossed); }
  bool is_crossed() const { return crossed < straight; }
};

inline double dist_raw(const double* a, const double* b, int k) {
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline PairingCost pairing_cost(const double* a1, const double* a2, const double* b1,
                                const double* b2, int k) {
  return {dist_raw(a1, b1, k) + dist_raw(a2, b2, k), dist_raw(a1, b2, k) + dist_raw(a2, b1, k)};
}

/// The metric on unordered pairs: the cheaper of the two pairings.
inline double metric_G(const Pair2& a, const Pair2& b) {
  require_dim(a.k(), b.k(), "metric_G");
  return pairing_cost(a.a1.data(), a.a2.data(), b.a1.data(), b.a2.data(), a.k()).best();
}

// ---------------------------------------------------------------------------

using MultiIndex = std::array<int, kMaxDim>;

/// Cubic lattice center + h*i, i in [-half, half]^n, stored as a dense box.
class Lattice {
 public:
  Lattice() = default;
  Lattice(int n, const Vec& center, double radius, double h)
      : n_(n), center_(center), radius_(radius), h_(h) {
    require(n >= 1 && n <= kMaxDim, ErrorKind::invalid_input, "Lattice: bad dimension");
    require_dim(center.size(), n, "Lattice");
    require(h > 0.0 && radius > 0.0, ErrorKind::invalid_input, "Lattice: need h > 0, radius > 0");
    half_ = static_cast<int>(std::floor(radius / h + 1e-9));
    side_ = 2 * half_ + 1;
    double cells = std::pow(static_cast<double>(side_), n);
    require(cells < 6.0e7, ErrorKind::resolution, "Lattice: grid too large for this spacing");
    box_size_ = static_cast<std::int64_t>(cells);
  }

  int n() const { return n_; }
  const Vec& center() const { return center_; }
  double radius() const { return radius_; }
  double h() const { return h_; }
  int half() const { return half_; }
  int side() const { return side_; }
  std::int64_t box_size() const { return box_size_; }

  MultiIndex unflatten(std::int64_t box) const {
    MultiIndex idx{};
    for (int d = 0; d < n_; ++d) {
      idx[d] = static_cast<int>(box % side_) - half_;
      box /= side_;
    }
    return idx;
  }

  /// -1 when the index leaves the box.
  std::int64_t flatten(const MultiIndex& idx) const {
    std::int64_t box = 0;
    for (int d = n_ - 1; d >= 0; --d) {
      if (idx[d] < -half_ || idx[d] > half_) return -1;
      box = box * side_ + (idx[d] + half_);
    }
    return box;
  }

  std::int64_t stride(int d) const {
    std::int64_t s = 1;
    for (int i = 0; i < d; ++i) s *= side_;
    return s;
  }

  Vec position(const MultiIndex& idx) const {
    Vec x(n_);
    for (int d = 0; d < n_; ++d) x(d) = center_(d) + h_ * idx[d];
    return x;
  }

  Vec position(std::int64_t box) const { return position(unflatten(box)); }

  /// Squared |i| in index units.
  static double index_norm2(const MultiIndex& idx, int n) {
    double s = 0.0;
    for (int d = 0; d < n; ++d) s += static_cast<double>(idx[d]) * idx[d];
    return s;
  }

 private:
  int n_ = 0;
  Vec center_;
  double radius_ = 0.0;
  double h_ = 0.0;
  int half_ = 0;
  int side_ = 1;
  std::int64_t box_size_ = 0;
};

/// Two-valued map sampled at every lattice node of the closed ball B_radius(center).
class TwoValuedGrid {
 public:
  using Evaluator = std::function<Pair2(const Vec&)>;

  TwoValuedGrid() = default;

  /// Empty grid whose node set is the lattice inside the ball; values start at {0,0}.
  TwoValuedGrid(int n, int k, const Vec& center, double radius, double h)
      : lat_(n, center, radius, h), k_(k) {
    require(k >= 1 && k <= kMaxDim, ErrorKind::invalid_input, "TwoValuedGrid: bad codimension");
    const double lim = (radius / h) * (radius / h) * (1.0 + 1e-12);
    slot_of_box_.assign(lat_.box_size(), -1);
    for (std::int64_t b = 0; b < lat_.box_size(); ++b)
      if (Lattice::index_norm2(lat_.unflatten(b), n) <= lim) {
        slot_of_box_[b] = static_cast<std::int32_t>(box_of_slot_.size());
        box_of_slot_.push_back(b);
      }
    a1_.assign(box_of_slot_.size() * k_, 0.0);
    a2_.assign(box_of_slot_.size() * k_, 0.0);
  }

  static TwoValuedGrid sample(int n, int k, double radius, double h, const Evaluator& f,
                              const Vec& center) {
    TwoValuedGrid g(n, k, center, radius, h);
    parallel_for(g.size(), [&](std::size_t s) {
      const Pair2 p = f(g.position(s));
      require_dim(p.k(), k, "TwoValuedGrid::sample");
      require(p.a1.allFinite() && p.a2.allFinite(), ErrorKind::invalid_input,
              "TwoValuedGrid: non-finite value");
      g.set(s, p);
    });
    return g;
  }

  static TwoValuedGrid sample(int n, int k, double radius, double h, const Evaluator& f) {
    return sample(n, k, radius, h, f, Vec::Zero(n));
  }

  const Lattice& lattice() const { return lat_; }
  int n() const { return lat_.n(); }
  int k() const { return k_; }
  double h() const { return lat_.h(); }
  double radius() const { return lat_.radius(); }
  const Vec& center() const { return lat_.center(); }
  std::size_t size() const { return box_of_slot_.size(); }

  MultiIndex index(std::size_t slot) const { return lat_.unflatten(box_of_slot_[slot]); }
  Vec position(std::size_t slot) const { return lat_.position(box_of_slot_[slot]); }
  std::int64_t box(std::size_t slot) const { return box_of_slot_[slot]; }

  /// Slot of a lattice index, or -1 if the node is not in the grid.
  std::int64_t slot(const MultiIndex& idx) const {
    const std::int64_t b = lat_.flatten(idx);
    return b < 0 ? -1 : slot_of_box_[b];
  }

  /// Slot of the neighbor along axis d in direction dir (+1/-1), or -1.
  std::int64_t neighbor(std::size_t slot, int d, int dir) const {
    MultiIndex idx = index(slot);
    idx[d] += dir;
    return this->slot(idx);
  }

  const double* a1(std::size_t s) const { return a1_.data() + s * k_; }
  const double* a2(std::size_t s) const { return a2_.data() + s * k_; }
  /// Component c in {0, 1} of the stored (canonical) pair.
  const double* component(std::size_t s, int c) const { return c == 0 ? a1(s) : a2(s); }

  Pair2 value(std::size_t s) const {
    Pair2 p;
    p.a1 = Eigen::Map<const Eigen::VectorXd>(a1(s), k_);
    p.a2 = Eigen::Map<const Eigen::VectorXd>(a2(s), k_);
    return p;
  }

  void set(std::size_t s, const Pair2& p) {
    Pair2 c(p.a1, p.a2);
    std::copy(c.a1.data(), c.a1.data() + k_, a1_.data() + s * k_);
    std::copy(c.a2.data(), c.a2.data() + k_, a2_.data() + s * k_);
  }

  double separation(std::size_t s) const { return dist_raw(a1(s), a2(s), k_); }

 private:
  Lattice lat_;
  int k_ = 0;
  std::vector<std::int32_t> slot_of_box_;
  std::vector<std::int64_t> box_of_slot_;
  std::vector<double> a1_, a2_;
};

/// Largest G-difference quotient over lattice-adjacent node pairs.
inline double lipschitz_estimate(const TwoValuedGrid& f) {
  require(f.size() >= 2, ErrorKind::invalid_input, "lipschitz_estimate: need at least two nodes");
  const int n = f.n(), k = f.k();
  const double h = f.h();
  return parallel_reduce(
      f.size(), 0.0,
      [&](std::size_t lo, std::size_t hi) {
        double m = 0.0;
        for (std::size_t s = lo; s < hi; ++s)
          for (int d = 0; d < n; ++d) {
            const std::int64_t t = f.neighbor(s, d, +1);
            if (t < 0) continue;
            m = std::max(m, pairing_cost(f.a1(s), f.a2(s), f.a1(t), f.a2(t), k).best() / h);
          }
        return m;
      },
      max_combine);
}

/// sup over node pairs of G(Df(x), Df(y)) / |x - y|^alpha for a grid of
/// derivative samples. `max_pair_distance` restricts the pair sweep to nearby
/// nodes when the full quadratic sweep is too expensive.
inline double holder_seminorm(const TwoValuedGrid& df, double alpha,
                              double max_pair_distance = std::numeric_limits<double>::infinity()) {
  require(alpha > 0.0 && alpha <= 1.0, ErrorKind::invalid_input,
          "holder_seminorm: exponent must lie in (0, 1]");
  const int n = df.n(), k = df.k();
  const double h = df.h();
  if (std::isfinite(max_pair_distance)) {
    // Enumerate lattice offsets in a half-space so each pair is visited once.
    const int reach = static_cast<int>(std::floor(max_pair_distance / h + 1e-9));
    const double lim = (max_pair_distance / h) * (max_pair_distance / h) * (1.0 + 1e-12);
    std::vector<MultiIndex> offsets;
    Lattice box(n, Vec::Zero(n), reach * h + 0.5 * h, h);
    for (std::int64_t b = 0; b < box.box_size(); ++b) {
      MultiIndex o = box.unflatten(b);
      const double r2 = Lattice::index_norm2(o, n);
      if (r2 == 0.0 || r2 > lim) continue;
      int lead = 0;
      for (int d = n - 1; d >= 0; --d)
        if (o[d] != 0) {
          lead = o[d];
          break;
        }
      if (lead > 0) offsets.push_back(o);
    }
    return parallel_reduce(
        df.size(), 0.0,
        [&](std::size_t lo, std::size_t hi) {
          double m = 0.0;
          for (std::size_t s = lo; s < hi; ++s) {
            const MultiIndex base = df.index(s);
            for (const auto& o : offsets) {
              MultiIndex idx = base;
              for (int d = 0; d < n; ++d) idx[d] += o[d];
              const std::int64_t t = df.slot(idx);
              if (t < 0) continue;
              const double dist = h * std::sqrt(Lattice::index_norm2(o, n));
              m = std::max(m, pairing_cost(df.a1(s), df.a2(s), df.a1(t), df.a2(t), k).best() /
                                  std::pow(dist, alpha));
            }
          }
          return m;
        },
        max_combine);
  }
  return parallel_reduce(
      df.size(), 0.0,
      [&](std::size_t lo, std::size_t hi) {
        double m = 0.0;
        for (std::size_t s = lo; s < hi; ++s) {
          const Vec xs = df.position(s);
          for (std::size_t t = s + 1; t < df.size(); ++t) {
            const double dist = (df.position(t) - xs).norm();
            m = std::max(m, pairing_cost(df.a1(s), df.a2(s), df.a1(t), df.a2(t), k).best() /
                                std::pow(dist, alpha));
          }
        }
        return m;
      },
      max_combine);
}

}  // namespace twograph
