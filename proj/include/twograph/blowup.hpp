#pragma once

#include "cone_field.hpp"

#include <string>
#include <vector>

namespace twograph {

/// One basis function of the degree-one linearized deformations of a cone.
struct HTerm {
  enum class Kind {
    axis_tilt,       // y_p · e^{⊥T}, e from a basis of the axis complement
    cross_rotation,  // r · b on one half-plane, b from a basis of its normal space
    linear,          // normal_a · (tangent_b · X) on one plane
    constant         // e^{⊥T}, e from a basis of the axis complement (pairs only)
  };
  Kind kind;
  int piece = -1;  // cross_rotation / linear
  int a = 0, b = 0;
};

/// Basis of the class for a cone with an axis, in a fixed order: for four
/// half-planes (n-1)(k+1) axis tilts then 4k cross-section rotations; for
/// pairs 2nk linear maps then dim(axis complement) constants.
class HBasis {
 public:
  HBasis() = default;
  explicit HBasis(const Cone& c) : cone_(c) {
    require(c.has_axis(), ErrorKind::undefined, "HBasis: cone needs an axis");
    const int amb = c.ambient_dim(), n = c.n(), k = c.k();
    const Subspace& axis = c.axis();
    origin_ = axis.offset();
    axis_basis_ = axis.basis();
    complement_ = complement_basis(axis_basis_, amb);
    for (const auto& p : c.pieces()) {
      tangent_.push_back(p.plane.basis());
      normal_.push_back(complement_basis(p.plane.basis(), amb));
    }
    if (!c.is_pair()) {
      for (int p = 0; p < axis.dim(); ++p)
        for (int j = 0; j < complement_.cols(); ++j) terms_.push_back({HTerm::Kind::axis_tilt, -1, p, j});
      for (int i = 0; i < 4; ++i)
        for (int l = 0; l < k; ++l) terms_.push_back({HTerm::Kind::cross_rotation, i, l, 0});
    } else {
      for (int i = 0; i < 2; ++i)
        for (int a = 0; a < k; ++a)
          for (int b = 0; b < n; ++b) terms_.push_back({HTerm::Kind::linear, i, a, b});
      for (int j = 0; j < complement_.cols(); ++j) terms_.push_back({HTerm::Kind::constant, -1, j, 0});
    }
  }

  const Cone& cone() const { return cone_; }
  int size() const { return static_cast<int>(terms_.size()); }
  const std::vector<HTerm>& terms() const { return terms_; }
  const Vec& origin() const { return origin_; }
  const Eigen::MatrixXd& axis_complement() const { return complement_; }
  const Eigen::MatrixXd& normal(int piece) const { return normal_[piece]; }
  const Eigen::MatrixXd& tangent(int piece) const { return tangent_[piece]; }

  Vec normal_part(int piece, const Vec& v) const {
    return normal_[piece] * (normal_[piece].transpose() * v);
  }

  /// Basis function t at a point X of the given piece, X relative to the axis origin.
  Vec eval(int t, const Vec& rel, int piece) const {
    const HTerm& term = terms_[t];
    const int amb = cone_.ambient_dim();
    switch (term.kind) {
      case HTerm::Kind::axis_tilt: {
        const double y = axis_basis_.col(term.a).dot(rel);
        return y * normal_part(piece, complement_.col(term.b));
      }
      case HTerm::Kind::cross_rotation: {
        if (piece != term.piece) return Vec::Zero(amb);
        const Vec cross = rel - axis_basis_ * (axis_basis_.transpose() * rel);
        return cross.norm() * Vec(normal_[piece].col(term.a));
      }
      case HTerm::Kind::linear:
        if (piece != term.piece) return Vec::Zero(amb);
        return tangent_[piece].col(term.b).dot(rel) * Vec(normal_[piece].col(term.a));
      case HTerm::Kind::constant:
        return normal_part(piece, complement_.col(term.a));
    }
    return Vec::Zero(amb);
  }

 private:
  Cone cone_;
  Vec origin_;
  Eigen::MatrixXd axis_basis_, complement_;
  std::vector<Eigen::MatrixXd> tangent_, normal_;
  std::vector<HTerm> terms_;
};

inline HBasis h_basis(const Cone& c) { return HBasis(c); }

/// An element of the class as coefficients on h_basis(cone).
struct HElement {
  HBasis basis;
  Eigen::VectorXd coefficients;

  HElement() = default;
  HElement(const HBasis& b, Eigen::VectorXd coef) : basis(b), coefficients(std::move(coef)) {
    require(coefficients.size() == b.size(), ErrorKind::dimension_mismatch,
            "HElement: coefficient count differs from the basis size");
  }

  static HElement zero(const Cone& c) {
    HBasis b(c);
    return HElement(b, Eigen::VectorXd::Zero(b.size()));
  }

  /// Axis vector c_p in the axis complement (four half-planes).
  Vec axis_vector(int p) const {
    Vec out = Vec::Zero(basis.cone().ambient_dim());
    for (int t = 0; t < basis.size(); ++t)
      if (basis.terms()[t].kind == HTerm::Kind::axis_tilt && basis.terms()[t].a == p)
        out += coefficients(t) * Vec(basis.axis_complement().col(basis.terms()[t].b));
    return out;
  }

  /// Cross-section value φ(ω_i), normal to half-plane i.
  Vec cross_value(int piece) const {
    Vec out = Vec::Zero(basis.cone().ambient_dim());
    for (int t = 0; t < basis.size(); ++t) {
      const HTerm& term = basis.terms()[t];
      if (term.kind == HTerm::Kind::cross_rotation && term.piece == piece)
        out += coefficients(t) * Vec(basis.normal(piece).col(term.a));
    }
    return out;
  }

  /// Linear map of plane i as an ambient matrix (normal ← tangent coordinates).
  Eigen::MatrixXd linear_map(int piece) const {
    const int amb = basis.cone().ambient_dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(amb, amb);
    for (int t = 0; t < basis.size(); ++t) {
      const HTerm& term = basis.terms()[t];
      if (term.kind == HTerm::Kind::linear && term.piece == piece)
        m += coefficients(t) * basis.normal(piece).col(term.a) * basis.tangent(piece).col(term.b).transpose();
    }
    return m;
  }

  /// Constant vector κ in the axis complement (pairs).
  Vec constant() const {
    Vec out = Vec::Zero(basis.cone().ambient_dim());
    for (int t = 0; t < basis.size(); ++t)
      if (basis.terms()[t].kind == HTerm::Kind::constant)
        out += coefficients(t) * Vec(basis.axis_complement().col(basis.terms()[t].a));
    return out;
  }
};

/// Value of the element at a point of piece `piece`, given relative to the axis origin.
inline Vec eval_H(const HElement& psi, const Vec& rel, int piece) {
  Vec out = Vec::Zero(psi.basis.cone().ambient_dim());
  for (int t = 0; t < psi.basis.size(); ++t)
    if (psi.coefficients(t) != 0.0) out += psi.coefficients(t) * psi.basis.eval(t, rel, piece);
  return out;
}

/// Value at a point X on the support of the cone, off the axis.
inline Vec eval_H(const HElement& psi, const Vec& x) {
  const Cone& c = psi.basis.cone();
  require_dim(x.size(), c.ambient_dim(), "eval_H");
  require(c.axis_distance(x) > 1e-12, ErrorKind::invalid_input, "eval_H: point lies on the axis");
  const int piece = c.nearest(x).second;
  return eval_H(psi, Vec(x - psi.basis.origin()), piece);
}

struct DehomogenizeResult {
  HElement element;
  ConeField residual;        // v - l(· - Z) inside the ball, zero elsewhere
  double field_norm = 0.0;   // L² norms over the ball
  double projection_norm = 0.0;
  double residual_norm = 0.0;
  double orthogonality = 0.0;  // max |<residual, basis_t>| / (|basis_t| |v|)
  std::size_t samples = 0;
  int rank = 0;
};

/// L²-orthogonal projection of v onto the class over B_rho(Z), with the
/// class translated so that its axis origin sits at Z. Least squares by
/// column-pivoted QR on the node samples (uniform cell weights).
inline DehomogenizeResult dehomogenize(const ConeField& v, const Vec& z, double rho,
                                       double orthogonality_tol = 1e-8) {
  const HBasis basis(v.cone());
  const int amb = v.ambient_dim(), dim = basis.size();
  require(v.cone().axis().contains(z, 1e-9), ErrorKind::invalid_input,
          "dehomogenize: center must lie on the axis");
  struct Node {
    int p;
    std::size_t i;
  };
  std::vector<Node> nodes;
  for (int p = 0; p < v.pieces(); ++p)
    for (std::size_t i = 0; i < v.nodes(p); ++i)
      if ((v.position(p, i) - z).norm() < rho) nodes.push_back({p, i});
  require(nodes.size() >= 10u * static_cast<std::size_t>(dim), ErrorKind::precondition,
          "dehomogenize: too few samples for the class dimension");
  const Eigen::Index rows = static_cast<Eigen::Index>(nodes.size()) * amb;
  Eigen::MatrixXd a(rows, dim);
  Eigen::VectorXd b(rows);
  for (std::size_t r = 0; r < nodes.size(); ++r) {
    const Vec rel = v.position(nodes[r].p, nodes[r].i) - z;
    for (int t = 0; t < dim; ++t) a.block(r * amb, t, amb, 1) = basis.eval(t, rel, nodes[r].p);
    b.segment(r * amb, amb) = v.value(nodes[r].p, nodes[r].i);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  DehomogenizeResult out;
  out.rank = static_cast<int>(qr.rank());
  require(out.rank == dim, ErrorKind::numerical, "dehomogenize: rank-deficient sampling of the class");
  const Eigen::VectorXd coef = qr.solve(b);
  const Eigen::VectorXd fit = a * coef;
  const Eigen::VectorXd res = b - fit;
  const double vol = v.cell_volume();
  out.element = HElement(basis, coef);
  out.samples = nodes.size();
  out.field_norm = std::sqrt(b.squaredNorm() * vol);
  out.projection_norm = std::sqrt(fit.squaredNorm() * vol);
  out.residual_norm = std::sqrt(res.squaredNorm() * vol);
  const double scale = std::max(b.norm(), 1e-300);
  for (int t = 0; t < dim; ++t)
    out.orthogonality = std::max(out.orthogonality, std::abs(a.col(t).dot(res)) / (a.col(t).norm() * scale));
  require(out.orthogonality <= orthogonality_tol, ErrorKind::numerical,
          "dehomogenize: residual fails the orthogonality check");
  out.residual = v.scaled(0.0);
  for (std::size_t r = 0; r < nodes.size(); ++r)
    out.residual.set(nodes[r].p, nodes[r].i, res.segment(r * amb, amb));
  return out;
}

/// Field obtained by sampling an element of the class on the chart nodes,
/// with the axis origin placed at Z.
inline ConeField sample_H(const HElement& psi, double h, double radius, const Vec& z) {
  return ConeField::sample(psi.basis.cone(), h, radius,
                           [&](const Vec& x, int p) { return eval_H(psi, Vec(x - z), p); });
}

/// max |Δ_h v| / ||v||_{L²} over chart nodes at least two cells away from the
/// axis and with a full two-cell neighborhood.
inline double harmonic_defect(const ConeField& v) {
  const double norm = v.norm_l2();
  if (norm == 0.0) return 0.0;
  const int n = v.n();
  const double h = v.h();
  double worst = 0.0;
  for (int p = 0; p < v.pieces(); ++p)
    for (std::size_t i = 0; i < v.nodes(p); ++i) {
      if (v.axis_distance(p, i) < 2.0 * h - 1e-12) continue;
      bool inner = true;
      for (int d = 0; d < n && inner; ++d)
        for (int dir : {-1, +1}) {
          const std::int64_t j = v.neighbor(p, i, d, dir);
          if (j < 0 || !v.has_all_neighbors(p, static_cast<std::size_t>(j))) inner = false;
        }
      if (!inner) continue;
      Vec lap = -2.0 * n * v.value(p, i);
      for (int d = 0; d < n; ++d)
        lap += v.value(p, v.neighbor(p, i, d, +1)) + v.value(p, v.neighbor(p, i, d, -1));
      worst = std::max(worst, lap.norm() / (h * h));
    }
  return worst / norm;
}

}  // namespace twograph
