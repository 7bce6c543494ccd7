#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace twograph {

/// Largest ambient dimension handled without heap allocation.
inline constexpr int kMaxDim = 16;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Default absolute tolerance for geometric predicates.
inline constexpr double kDefaultTol = 1e-9;

enum class ErrorKind {
  invalid_input,
  dimension_mismatch,
  undefined,
  resolution,
  numerical,
  precondition,
  structure,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::undefined: return "undefined";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::structure: return "structure";
  }
  return "unknown";
}

/// All library failures are reported through this exception.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) throw Error(kind, msg);
}

inline void require_dim(Eigen::Index a, Eigen::Index b, const char* where) {
  if (a != b)
    throw Error(ErrorKind::dimension_mismatch,
                std::string(where) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                    std::to_string(b) + ")");
}

inline Vec unit_vector(int dim, int i) {
  Vec e = Vec::Zero(dim);
  e(i) = 1.0;
  return e;
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Columns whose
/// residual norm falls below `drop_tol` (relative to their input norm) are
/// discarded, so the result spans the input and may have fewer columns.
template <class Derived>
Eigen::MatrixXd orthonormalize(const Eigen::MatrixBase<Derived>& in, double drop_tol = 1e-10) {
  const Eigen::Index rows = in.rows();
  Eigen::MatrixXd out(rows, in.cols());
  Eigen::Index kept = 0;
  for (Eigen::Index c = 0; c < in.cols(); ++c) {
    Eigen::VectorXd v = in.col(c);
    const double n0 = v.norm();
    if (n0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < kept; ++j) v -= out.col(j).dot(v) * out.col(j);
    const double n1 = v.norm();
    if (n1 <= drop_tol * n0) continue;
    out.col(kept++) = v / n1;
  }
  return out.leftCols(kept);
}

/// Orthonormal basis of the column span, dropping residuals of norm <= tol.
/// Unlike orthonormalize, the tolerance is absolute, so round-off columns of
/// unit-scale inputs never survive as spurious directions.
inline Eigen::MatrixXd span_basis(const Eigen::MatrixXd& in, double tol = 1e-8) {
  Eigen::MatrixXd out(in.rows(), in.cols());
  Eigen::Index kept = 0;
  for (Eigen::Index c = 0; c < in.cols(); ++c) {
    Eigen::VectorXd v = in.col(c);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < kept; ++j) v -= out.col(j).dot(v) * out.col(j);
    const double n1 = v.norm();
    if (n1 <= tol) continue;
    out.col(kept++) = v / n1;
  }
  return out.leftCols(kept);
}

/// Orthonormal basis of the orthogonal complement of span(basis) in R^dim.
inline Eigen::MatrixXd complement_basis(const Eigen::MatrixXd& basis, int dim) {
  Eigen::MatrixXd all(dim, basis.cols() + dim);
  if (basis.cols() > 0) all.leftCols(basis.cols()) = basis;
  all.rightCols(dim) = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::MatrixXd q = orthonormalize(all, 1e-8);
  return q.rightCols(q.cols() - basis.cols());
}

/// Orthonormal basis of span(a) ∩ span(b); both inputs orthonormal.
inline Eigen::MatrixXd intersect_spans(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                       double tol = 1e-9) {
  const Eigen::Index d = a.rows();
  if (a.cols() == 0 || b.cols() == 0) return Eigen::MatrixXd(d, 0);
  // v in both spans iff |P_b v| = |v| for v = a c; singular values of a^T b equal to 1.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.transpose() * b, Eigen::ComputeFullU);
  Eigen::MatrixXd out(d, 0);
  const auto& s = svd.singularValues();
  int count = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 1.0 - tol) ++count;
  out = a * svd.matrixU().leftCols(count);
  return orthonormalize(out);
}

/// Principal angles (radians, ascending) between two subspaces of equal dimension.
inline Eigen::VectorXd principal_angles(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.transpose() * b);
  Eigen::VectorXd s = svd.singularValues();
  Eigen::VectorXd ang(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) ang(i) = std::acos(std::clamp(s(i), -1.0, 1.0));
  return ang;
}

/// Cayley transform of a skew matrix: an exact rotation close to I + S.
inline Eigen::MatrixXd cayley(const Eigen::MatrixXd& skew) {
  const Eigen::Index d = skew.rows();
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  return (id - 0.5 * skew).partialPivLu().solve(id + 0.5 * skew);
}

inline constexpr double kPi = 3.14159265358979323846;

/// Volume of the unit n-ball.
inline double unit_ball_volume(int n) {
  return std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

}  // namespace twograph
