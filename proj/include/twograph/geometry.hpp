#pragma once

#include "kdtree.hpp"
#include "linalg.hpp"

#include <variant>
#include <vector>

namespace twograph {

/// Affine subspace `offset + span(basis)` of R^ambient_dim with orthonormal basis
/// columns. The stored offset is the point of the subspace nearest to the origin.
class Subspace {
 public:
  Subspace() = default;

  /// Span of the given columns (orthonormalized), shifted by `offset`.
  static Subspace spanned_by(const Eigen::MatrixXd& vectors, const Vec& offset) {
    Subspace s;
    s.dim_ = static_cast<int>(offset.size());
    require_dim(vectors.rows(), s.dim_, "Subspace");
    s.basis_ = orthonormalize(vectors);
    // store the point of the subspace nearest to the origin
    s.offset_ = s.dim() ? Vec(offset - s.basis_ * (s.basis_.transpose() * offset)) : offset;
    return s;
  }

  static Subspace spanned_by(const Eigen::MatrixXd& vectors) {
    return spanned_by(vectors, Vec::Zero(vectors.rows()));
  }

  static Subspace point(const Vec& p) { return spanned_by(Eigen::MatrixXd(p.size(), 0), p); }

  static Subspace whole(int dim) {
    return spanned_by(Eigen::MatrixXd::Identity(dim, dim));
  }

  static Subspace coordinate(int ambient, std::initializer_list<int> axes) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(ambient, static_cast<Eigen::Index>(axes.size()));
    int c = 0;
    for (int a : axes) b(a, c++) = 1.0;
    return spanned_by(b);
  }

  int ambient_dim() const { return dim_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Eigen::MatrixXd& basis() const { return basis_; }
  const Vec& offset() const { return offset_; }
  bool is_linear(double tol = kDefaultTol) const { return perp(Vec::Zero(dim_)).norm() <= tol; }

  /// Orthogonal projection onto the subspace.
  Vec project(const Vec& p) const {
    require_dim(p.size(), dim_, "project");
    Vec rel = p - offset_;
    if (dim() == 0) return offset_;
    return offset_ + basis_ * (basis_.transpose() * rel);
  }

  /// p - project(p).
  Vec perp(const Vec& p) const { return p - project(p); }

  double distance(const Vec& p) const { return perp(p).norm(); }

  /// Coordinates of p - offset in the basis.
  Eigen::VectorXd coords(const Vec& p) const { return basis_.transpose() * (p - offset_); }

  /// Same subspace shifted by v.
  Subspace translated(const Vec& v) const { return spanned_by(basis_, Vec(offset_ + v)); }

  /// Linear subspace with the same directions.
  Subspace linear_part() const {
    Subspace s = *this;
    s.offset_ = Vec::Zero(dim_);
    return s;
  }

  /// Orthogonal complement of the linear part.
  Subspace orthogonal_complement() const {
    return spanned_by(complement_basis(basis_, dim_));
  }

  bool contains(const Vec& p, double tol = kDefaultTol) const { return distance(p) <= tol; }

  /// True when the two subspaces are the same set.
  bool same_as(const Subspace& o, double tol = kDefaultTol) const {
    if (o.dim_ != dim_ || o.dim() != dim()) return false;
    if (!contains(o.offset_, tol)) return false;
    for (int c = 0; c < o.dim(); ++c)
      if ((o.basis_.col(c) - basis_ * (basis_.transpose() * o.basis_.col(c))).norm() > tol)
        return false;
    return true;
  }

 private:
  int dim_ = 0;
  Eigen::MatrixXd basis_;
  Vec offset_;
};

/// Orthogonal projection of p onto S.
inline Vec project(const Vec& p, const Subspace& s) { return s.project(p); }

/// Intersection of two affine subspaces; nullopt-like flag through `empty`.
struct SubspaceIntersection {
  bool empty = true;
  Subspace value;
};

inline SubspaceIntersection intersect(const Subspace& a, const Subspace& b, double tol = 1e-9) {
  require_dim(a.ambient_dim(), b.ambient_dim(), "intersect");
  const int d = a.ambient_dim();
  SubspaceIntersection out;
  Eigen::MatrixXd lin = intersect_spans(a.basis(), b.basis());
  // Find x = oa + A s = ob + B t.
  Eigen::MatrixXd m(d, a.dim() + b.dim());
  m << a.basis(), -b.basis();
  Eigen::VectorXd rhs = b.offset() - a.offset();
  Eigen::VectorXd st = m.cols() ? Eigen::VectorXd(m.completeOrthogonalDecomposition().solve(rhs))
                                : Eigen::VectorXd(0);
  Eigen::VectorXd resid = rhs - (m.cols() ? Eigen::VectorXd(m * st) : Eigen::VectorXd::Zero(d));
  if (resid.norm() > tol * std::max(1.0, rhs.norm())) return out;
  Vec p = a.offset() + (a.dim() ? Vec(a.basis() * st.head(a.dim())) : Vec::Zero(d));
  Vec shift = lin.cols() ? Vec(lin * (lin.transpose() * p)) : Vec::Zero(d);
  out.empty = false;
  out.value = Subspace::spanned_by(lin, p - shift);
  return out;
}

// ---------------------------------------------------------------------------
// Regions

struct Ball {
  Vec center;
  double radius = 1.0;
};

/// Open toric region {(|x| - rho)^2 + |y - zeta|^2 < r^2}, x = perp to axis, y = along axis.
struct Torus {
  Subspace axis;
  double rho = 0.5;
  double r = 0.25;
  Vec zeta;
};

/// Union of toric profiles about a common axis: the revolution of the profile
/// disks {(rho_i, zeta_i, r_i)} about the axis.
struct Revolution {
  Subspace axis;
  struct Profile {
    double rho;
    Vec zeta;
    double r;
  };
  std::vector<Profile> generator;
};

/// Solid cylinder B^n_radius(0) x R^k over the first n coordinates.
struct Cylinder {
  int base_dim = 1;
  double radius = 1.0;
};

/// Open spherical shell r_inner < |X - center| < r_outer.
struct Shell {
  Vec center;
  double r_inner = 0.0;
  double r_outer = 1.0;
};

struct Everywhere {};

using Region = std::variant<Ball, Torus, Revolution, Cylinder, Shell, Everywhere>;

inline Torus make_torus(const Subspace& axis, double rho, double r, const Vec& zeta) {
  require(r > 0.0 && r < rho, ErrorKind::invalid_input, "Torus requires 0 < r < rho");
  require(axis.contains(zeta), ErrorKind::invalid_input, "Torus: zeta must lie on the axis");
  return Torus{axis, rho, r, zeta};
}

inline Ball unit_ball(int dim) { return Ball{Vec::Zero(dim), 1.0}; }

inline bool region_contains(const Region& region, const Vec& p) {
  return std::visit(
      [&](const auto& reg) -> bool {
        using T = std::decay_t<decltype(reg)>;
        if constexpr (std::is_same_v<T, Ball>) {
          require_dim(p.size(), reg.center.size(), "region_contains");
          return (p - reg.center).squaredNorm() < reg.radius * reg.radius;
        } else if constexpr (std::is_same_v<T, Torus>) {
          const Vec y = reg.axis.project(p);
          const double x = (p - y).norm();
          const double a = x - reg.rho;
          return a * a + (y - reg.zeta).squaredNorm() < reg.r * reg.r;
        } else if constexpr (std::is_same_v<T, Revolution>) {
          const Vec y = reg.axis.project(p);
          const double x = (p - y).norm();
          for (const auto& g : reg.generator) {
            const double a = x - g.rho;
            if (a * a + (y - g.zeta).squaredNorm() < g.r * g.r) return true;
          }
          return false;
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          require(p.size() >= reg.base_dim, ErrorKind::dimension_mismatch,
                  "region_contains: cylinder base exceeds ambient dimension");
          return p.head(reg.base_dim).squaredNorm() < reg.radius * reg.radius;
        } else if constexpr (std::is_same_v<T, Shell>) {
          require_dim(p.size(), reg.center.size(), "region_contains");
          const double r2 = (p - reg.center).squaredNorm();
          return r2 > reg.r_inner * reg.r_inner && r2 < reg.r_outer * reg.r_outer;
        } else {
          return true;
        }
      },
      region);
}

// ---------------------------------------------------------------------------
// Hausdorff distance between finite point sets

using PointSet = std::vector<Vec>;

inline KdTree build_tree(const PointSet& pts) {
  const int d = static_cast<int>(pts.front().size());
  std::vector<double> flat;
  flat.reserve(pts.size() * d);
  for (const auto& p : pts) {
    require_dim(p.size(), d, "build_tree");
    flat.insert(flat.end(), p.data(), p.data() + d);
  }
  return KdTree(std::move(flat), d);
}

/// sup_{a in A} inf_{b in B} |a - b| with B indexed by `tree_b`.
inline double directed_hausdorff(const PointSet& a, const KdTree& tree_b) {
  double worst = 0.0;
  for (const auto& p : a) worst = std::max(worst, tree_b.nearest(p).dist2);
  return std::sqrt(worst);
}

inline double hausdorff_distance(const PointSet& a, const PointSet& b) {
  require(!a.empty() && !b.empty(), ErrorKind::undefined,
          "hausdorff_distance: undefined for an empty set");
  require_dim(a.front().size(), b.front().size(), "hausdorff_distance");
  const KdTree ta = build_tree(a);
  const KdTree tb = build_tree(b);
  return std::max(directed_hausdorff(a, tb), directed_hausdorff(b, ta));
}

}  // namespace twograph
