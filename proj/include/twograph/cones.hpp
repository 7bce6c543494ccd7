#pragma once

#include "geometry.hpp"
#include "kdtree.hpp"
#include "parallel.hpp"
#include "quasi_random.hpp"

#include <array>
#include <optional>
#include <vector>

namespace twograph {

/// Image of a subspace under X -> R X + t.
inline Subspace map_subspace(const Subspace& s, const Eigen::MatrixXd& rot, const Vec& t) {
  Eigen::MatrixXd b = rot * s.basis();
  return Subspace::spanned_by(b, Vec(rot * s.offset() + t));
}

/// Image under the dilation X -> (X - center) / scale.
inline Subspace dilate_subspace(const Subspace& s, const Vec& center, double scale) {
  return Subspace::spanned_by(s.basis(), Vec((s.offset() - center) / scale));
}

/// A plane, or a half-plane {p + t*side : p in boundary, t >= 0} inside it.
struct ConePiece {
  Subspace plane;
  std::optional<Subspace> boundary;
  Vec side;

  bool is_half() const { return boundary.has_value(); }

  /// Nearest point of the piece to X.
  Vec nearest(const Vec& x) const {
    Vec p = plane.project(x);
    if (!is_half()) return p;
    if (side.dot(p - boundary->offset()) >= 0.0) return p;
    return boundary->project(x);
  }

  double dist(const Vec& x) const { return (x - nearest(x)).norm(); }

  /// Nearest point of the piece intersected with the closed ball B_r(0).
  Vec nearest_in_ball(const Vec& x, double r) const {
    const Vec c0 = plane.project(Vec::Zero(x.size()));
    const double disk2 = r * r - c0.squaredNorm();
    require(disk2 >= 0.0, ErrorKind::undefined, "piece misses the ball");
    const double disk = std::sqrt(disk2);
    auto clamp_disk = [&](const Vec& p, const Vec& c, double rad) -> Vec {
      const Vec d = p - c;
      const double len = d.norm();
      return len <= rad ? p : Vec(c + d * (rad / len));
    };
    const Vec p = plane.project(x);
    const Vec in_disk = clamp_disk(p, c0, disk);
    if (!is_half()) return in_disk;
    auto in_half = [&](const Vec& q) { return side.dot(q - boundary->offset()) >= -1e-14; };
    // Convex set disk ∩ half-space: the optimum is the plane projection, the disk
    // clamp, or the nearest point of the flat edge.
    std::optional<Vec> best;
    double best_d = std::numeric_limits<double>::infinity();
    auto consider = [&](const Vec& q) {
      const double d = (x - q).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = q;
      }
    };
    if (in_half(in_disk)) consider(in_disk);
    const Vec e0 = boundary->project(Vec::Zero(x.size()));
    const double edge2 = r * r - e0.squaredNorm();
    if (edge2 >= 0.0) consider(clamp_disk(boundary->project(x), e0, std::sqrt(edge2)));
    require(best.has_value(), ErrorKind::undefined, "half-piece misses the ball");
    return *best;
  }

  ConePiece mapped(const Eigen::MatrixXd& rot, const Vec& t) const {
    ConePiece out;
    out.plane = map_subspace(plane, rot, t);
    if (boundary) {
      out.boundary = map_subspace(*boundary, rot, t);
      out.side = rot * side;
    }
    return out;
  }

  ConePiece dilated(const Vec& center, double scale) const {
    ConePiece out;
    out.plane = dilate_subspace(plane, center, scale);
    if (boundary) {
      out.boundary = dilate_subspace(*boundary, center, scale);
      out.side = side;
    }
    return out;
  }
};

/// Graph description of a piece over the first n coordinates:
/// {(x, L x + b)} restricted, for half-pieces, to {g . (x - x0) >= 0}.
struct PieceGraph {
  Eigen::MatrixXd slope;  // k x n
  Eigen::VectorXd shift;  // k
  bool half = false;
  Eigen::VectorXd normal;  // n, in base coordinates
  Eigen::VectorXd base_point;
  double jacobian = 1.0;  // sqrt det(I + L^T L)

  bool admits(const Eigen::VectorXd& x) const { return !half || normal.dot(x - base_point) >= 0.0; }
};

class Cone {
 public:
  enum class Kind { pair_of_planes, four_half_planes };

  Cone() = default;

  static Cone pair(const Subspace& p1, const Subspace& p2, int n, int k) {
    require(p1.ambient_dim() == n + k && p2.ambient_dim() == n + k, ErrorKind::dimension_mismatch,
            "Cone: planes must live in R^{n+k}");
    require(p1.dim() == n && p2.dim() == n, ErrorKind::invalid_input,
            "Cone: both planes must be n-dimensional");
    require(!p1.same_as(p2, 1e-9), ErrorKind::invalid_input, "Cone: coinciding planes");
    Cone c;
    c.kind_ = Kind::pair_of_planes;
    c.n_ = n;
    c.k_ = k;
    c.pieces_ = {ConePiece{p1, std::nullopt, Vec()}, ConePiece{p2, std::nullopt, Vec()}};
    const auto meet = intersect(p1, p2);
    if (!meet.empty) c.axis_ = meet.value;
    return c;
  }

  /// Four half-planes sharing the (n-1)-dimensional boundary `axis`, with unit
  /// cross-section directions orthogonal to it.
  static Cone four_half_planes(const Subspace& axis, const std::array<Vec, 4>& directions, int n,
                               int k) {
    require(axis.ambient_dim() == n + k, ErrorKind::dimension_mismatch,
            "Cone: axis must live in R^{n+k}");
    require(axis.dim() == n - 1, ErrorKind::invalid_input,
            "Cone: half-plane boundary must be (n-1)-dimensional");
    Cone c;
    c.kind_ = Kind::four_half_planes;
    c.n_ = n;
    c.k_ = k;
    for (int i = 0; i < 4; ++i) {
      Vec w = directions[i] - (axis.dim() ? Vec(axis.basis() * (axis.basis().transpose() *
                                                                directions[i]))
                                          : Vec::Zero(n + k));
      require(w.norm() > 1e-9, ErrorKind::invalid_input, "Cone: direction lies in the axis");
      w.normalize();
      require(std::abs(w.dot(directions[i].normalized()) - 1.0) < 1e-9, ErrorKind::invalid_input,
              "Cone: direction must be orthogonal to the axis");
      for (int j = 0; j < i; ++j)
        require((w - c.pieces_[j].side).norm() > 1e-9, ErrorKind::invalid_input,
                "Cone: half-planes must be pairwise distinct");
      Eigen::MatrixXd span(n + k, n);
      if (n > 1) span.leftCols(n - 1) = axis.basis();
      span.col(n - 1) = w;
      c.pieces_.push_back(ConePiece{Subspace::spanned_by(span, axis.offset()), axis, w});
    }
    c.axis_ = axis;
    return c;
  }

  Kind kind() const { return kind_; }
  bool is_pair() const { return kind_ == Kind::pair_of_planes; }
  int n() const { return n_; }
  int k() const { return k_; }
  int ambient_dim() const { return n_ + k_; }
  const std::vector<ConePiece>& pieces() const { return pieces_; }

  bool has_axis() const { return axis_.has_value(); }
  int axis_dim() const { return axis_ ? axis_->dim() : -1; }

  const Subspace& axis() const {
    require(axis_.has_value(), ErrorKind::undefined, "Cone: disjoint planes have no axis");
    return *axis_;
  }

  /// Cross-section directions of a four-half-plane cone.
  std::array<Vec, 4> directions() const {
    require(!is_pair(), ErrorKind::invalid_input, "Cone: directions need four half-planes");
    return {pieces_[0].side, pieces_[1].side, pieces_[2].side, pieces_[3].side};
  }

  double dist(const Vec& x) const {
    require_dim(x.size(), ambient_dim(), "dist_to_support");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : pieces_) best = std::min(best, p.dist(x));
    return best;
  }

  /// Nearest support point and the index of the piece attaining it.
  std::pair<Vec, int> nearest(const Vec& x) const {
    double best = std::numeric_limits<double>::infinity();
    Vec out;
    int which = 0;
    for (int i = 0; i < static_cast<int>(pieces_.size()); ++i) {
      const Vec q = pieces_[i].nearest(x);
      const double d = (x - q).squaredNorm();
      if (d < best) {
        best = d;
        out = q;
        which = i;
      }
    }
    return {out, which};
  }

  /// Distance to the axis.
  double axis_distance(const Vec& x) const { return axis().distance(x); }

  bool through_origin(double tol = 1e-9) const {
    for (const auto& p : pieces_)
      if (p.dist(Vec::Zero(ambient_dim())) > tol) return false;
    return true;
  }

  Cone mapped(const Eigen::MatrixXd& rot, const Vec& t) const {
    Cone c = *this;
    for (auto& p : c.pieces_) p = p.mapped(rot, t);
    if (axis_) c.axis_ = map_subspace(*axis_, rot, t);
    return c;
  }

  /// Image under X -> (X - center) / scale.
  Cone dilated(const Vec& center, double scale) const {
    Cone c = *this;
    for (auto& p : c.pieces_) p = p.dilated(center, scale);
    if (axis_) c.axis_ = dilate_subspace(*axis_, center, scale);
    return c;
  }

  /// Graph form of each piece over the first n coordinates; error if some
  /// piece is vertical.
  std::vector<PieceGraph> graphs() const {
    std::vector<PieceGraph> out;
    for (const auto& p : pieces_) {
      const Eigen::MatrixXd& b = p.plane.basis();
      const Eigen::MatrixXd top = b.topRows(n_);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(top);
      require(lu.rank() == n_ && std::abs(lu.determinant()) > 1e-8, ErrorKind::structure,
              "Cone: piece is not a graph over the base");
      PieceGraph g;
      const Eigen::MatrixXd top_inv = lu.inverse();
      g.slope = b.bottomRows(k_) * top_inv;
      const Eigen::VectorXd off = p.plane.offset();
      g.shift = off.tail(k_) - g.slope * off.head(n_);
      g.jacobian = std::sqrt(
          (Eigen::MatrixXd::Identity(n_, n_) + g.slope.transpose() * g.slope).determinant());
      if (p.is_half()) {
        g.half = true;
        const Eigen::VectorXd boff = p.boundary->offset();
        g.base_point = boff.head(n_);
        g.normal = top_inv.transpose() * (b.transpose() * Eigen::VectorXd(p.side));
      }
      out.push_back(g);
    }
    return out;
  }

 private:
  Kind kind_ = Kind::pair_of_planes;
  int n_ = 0, k_ = 0;
  std::vector<ConePiece> pieces_;
  std::optional<Subspace> axis_;
};

inline std::optional<Subspace> axis(const Cone& c) {
  if (!c.has_axis()) return std::nullopt;
  return c.axis();
}

inline double dist_to_support(const Cone& c, const Vec& x) { return c.dist(x); }

/// Points of maximal density: the axis for a cone through 0.
inline Subspace spine(const Cone& c) {
  require(c.through_origin(), ErrorKind::invalid_input, "spine: cone must pass through the origin");
  return c.axis();
}

/// A single plane (the multiplicity-two interpretation) is its own spine.
inline Subspace spine(const Subspace& plane) {
  require(plane.contains(Vec::Zero(plane.ambient_dim())), ErrorKind::invalid_input,
          "spine: plane must pass through the origin");
  return plane;
}

// ---------------------------------------------------------------------------
// Sampling of supports inside B_2(0) and the cone distance

namespace detail {

/// Quasi-random points of piece ∩ B_r(0): interior points plus points on the
/// rim sphere of the disk, where the sup-inf distance is typically attained.
inline void sample_piece(const ConePiece& p, double r, int count, const ShiftedHalton& interior,
                         std::uint64_t& counter, std::vector<Vec>& out) {
  const int dim = p.plane.dim();
  const int amb = p.plane.ambient_dim();
  const Vec c0 = p.plane.project(Vec::Zero(amb));
  const double disk2 = r * r - c0.squaredNorm();
  if (disk2 <= 0.0) return;
  const double disk = std::sqrt(disk2);
  const Eigen::MatrixXd& b = p.plane.basis();
  auto keep = [&](const Vec& x) {
    if (p.is_half() && p.side.dot(x - p.boundary->offset()) < 0.0) return;
    out.push_back(x);
  };
  const int rim = std::max(2, count / 4);
  int made = 0;
  std::vector<double> u(interior.dim());
  for (std::uint64_t tries = 0; made < count - rim && tries < 50ull * count; ++tries) {
    interior.point(counter++, u.data());
    Eigen::VectorXd c(dim);
    for (int d = 0; d < dim; ++d) c(d) = 2.0 * u[d] - 1.0;
    if (c.squaredNorm() > 1.0) continue;
    keep(Vec(c0 + b * (disk * c)));
    ++made;
  }
  if (dim == 1) {
    keep(Vec(c0 + b.col(0) * disk));
    keep(Vec(c0 - b.col(0) * disk));
  } else {
    int done = 0;
    for (std::uint64_t tries = 0; done < rim && tries < 50ull * count; ++tries) {
      interior.point(counter++, u.data());
      Eigen::VectorXd c(dim);
      for (int d = 0; d < dim; ++d) c(d) = 2.0 * u[d] - 1.0;
      const double len = c.norm();
      if (len > 1.0 || len < 1e-3) continue;
      keep(Vec(c0 + b * (disk * c / len)));
      ++done;
    }
  }
  if (p.is_half()) {
    // the flat edge of a half-disk
    const Vec e0 = p.boundary->project(Vec::Zero(amb));
    const double edge2 = r * r - e0.squaredNorm();
    if (edge2 > 0.0) {
      if (p.boundary->dim() == 0) {
        out.push_back(e0);
      } else {
        const Eigen::MatrixXd& eb = p.boundary->basis();
        const int ed = p.boundary->dim();
        for (int i = 0; i < rim; ++i) {
          interior.point(counter++, u.data());
          Eigen::VectorXd c(ed);
          for (int d = 0; d < ed; ++d) c(d) = 2.0 * u[d] - 1.0;
          if (c.squaredNorm() > 1.0) continue;
          out.push_back(Vec(e0 + eb * (std::sqrt(edge2) * c)));
        }
      }
    }
  }
}

inline double directed_nu(const Cone& from, const Cone& to, int samples, Rng& rng, double r) {
  const int dim = from.n();
  ShiftedHalton seq(std::max(dim, 1), rng);
  std::uint64_t counter = 0;
  std::vector<Vec> pts;
  const int per = std::max(8, samples / static_cast<int>(from.pieces().size()));
  for (const auto& p : from.pieces()) sample_piece(p, r, per, seq, counter, pts);
  require(!pts.empty(), ErrorKind::undefined, "nu: support misses B_2(0)");
  return parallel_reduce(
      pts.size(), 0.0,
      [&](std::size_t lo, std::size_t hi) {
        double m = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
          double best = std::numeric_limits<double>::infinity();
          for (const auto& q : to.pieces()) {
            const Vec c0 = q.plane.project(Vec::Zero(pts[i].size()));
            if (c0.squaredNorm() > r * r) continue;
            best = std::min(best, (pts[i] - q.nearest_in_ball(pts[i], r)).norm());
          }
          m = std::max(m, best);
        }
        return m;
      },
      max_combine);
}

}  // namespace detail

/// Hausdorff distance between the supports of C and D inside B_2(0),
/// evaluated on `samples` quasi-random points per cone against the exact
/// truncated support of the other cone.
inline double nu(const Cone& c, const Cone& d, int samples, Rng& rng) {
  require(samples >= 100, ErrorKind::invalid_input, "nu: at least 100 samples required");
  require_dim(c.ambient_dim(), d.ambient_dim(), "nu");
  const double a = detail::directed_nu(c, d, samples, rng, 2.0);
  const double b = detail::directed_nu(d, c, samples, rng, 2.0);
  return std::max(a, b);
}

inline double nu(const Cone& c, const Cone& d, int samples = 4000, std::uint64_t seed = 0) {
  Rng rng(seed);
  return nu(c, d, samples, rng);
}

// ---------------------------------------------------------------------------

/// Orthogonal frame placing the axis in the last m coordinates.
struct AlignmentFrame {
  Eigen::MatrixXd rotation;  // rows: new coordinates; X_aligned = rotation * (X - origin)
  Vec origin;
  int m = 0;
  int l = 0;
  std::vector<Vec> directions;  // cross-section directions, ambient coordinates

  Vec apply(const Vec& x) const { return rotation * (x - origin); }
};

inline AlignmentFrame align(const Cone& c) {
  require(c.has_axis(), ErrorKind::undefined, "align: cone has no axis");
  const Subspace& a = c.axis();
  const int amb = c.ambient_dim();
  AlignmentFrame f;
  f.m = a.dim();
  f.l = c.n() - f.m;
  f.origin = a.offset();
  Eigen::MatrixXd comp = complement_basis(a.basis(), amb);
  Eigen::MatrixXd q(amb, amb);
  // Keep identity when already aligned: reuse coordinate vectors where possible.
  bool aligned = true;
  for (int j = 0; j < f.m; ++j)
    if (std::abs(std::abs(a.basis()(amb - f.m + j, j)) - 1.0) > 1e-12) aligned = false;
  if (aligned) {
    q = Eigen::MatrixXd::Identity(amb, amb);
    for (int j = 0; j < f.m; ++j) q.col(amb - f.m + j) = a.basis().col(j);
  } else {
    q.leftCols(amb - f.m) = comp;
    if (f.m) q.rightCols(f.m) = a.basis();
  }
  f.rotation = q.transpose();
  if (!c.is_pair()) {
    for (const auto& p : c.pieces()) f.directions.push_back(p.side);
  } else {
    for (const auto& p : c.pieces()) {
      Eigen::MatrixXd cross = p.plane.basis() - a.basis() * (a.basis().transpose() * p.plane.basis());
      Eigen::MatrixXd o = span_basis(cross);
      for (Eigen::Index j = 0; j < o.cols(); ++j) f.directions.push_back(o.col(j));
    }
  }
  return f;
}

/// Principal angles between the axes of two cones of equal axis dimension.
inline double axis_rotation(const Cone& a, const Cone& b) {
  if (!a.has_axis() || !b.has_axis() || a.axis_dim() != b.axis_dim() || a.axis_dim() == 0)
    return 0.0;
  const Eigen::VectorXd ang = principal_angles(a.axis().basis(), b.axis().basis());
  return ang.size() ? ang.maxCoeff() : 0.0;
}

}  // namespace twograph
