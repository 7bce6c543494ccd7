#pragma once

#include "varifold.hpp"

#include <limits>
#include <vector>

namespace twograph {

/// Smooth radial profile (1 - s^2)^4 on [0, 1), zero outside.
inline double bump_profile(double s) {
  if (s >= 1.0) return 0.0;
  const double u = 1.0 - s * s;
  return u * u * u * u;
}

/// sup_s |d/ds (1 - s^2)^4|, attained at s = 1/sqrt(7).
inline double bump_slope_bound() {
  const double s = 1.0 / std::sqrt(7.0);
  return 8.0 * s * std::pow(1.0 - s * s, 3);
}

// ---------------------------------------------------------------------------
// Single-valued sheets on a full box lattice

/// Single-valued map sampled on the box lattice lo + h*i, 0 <= i < count.
/// Missing nodes hold NaN.
class SheetGrid {
 public:
  using Function = std::function<Vec(const Vec&)>;

  SheetGrid() = default;
  SheetGrid(int n, int k, const Vec& lo, double h, std::vector<int> count)
      : n_(n), k_(k), lo_(lo), h_(h), count_(std::move(count)) {
    require(n >= 1 && k >= 1 && n + k <= kMaxDim, ErrorKind::invalid_input, "SheetGrid: bad dimensions");
    require(h > 0.0 && static_cast<int>(count_.size()) == n, ErrorKind::invalid_input,
            "SheetGrid: bad lattice");
    std::int64_t total = 1;
    for (int c : count_) {
      require(c >= 1, ErrorKind::invalid_input, "SheetGrid: empty axis");
      total *= c;
    }
    require(total < 60'000'000, ErrorKind::resolution, "SheetGrid: lattice too large");
    values_.assign(static_cast<std::size_t>(total) * k_, std::numeric_limits<double>::quiet_NaN());
  }

  /// Box lattice covering the cube [center - half_width, center + half_width]^n.
  static SheetGrid sample(int n, int k, const Vec& center, double half_width, double h,
                          const Function& f) {
    const int m = static_cast<int>(std::floor(half_width / h + 1e-9));
    SheetGrid g(n, k, Vec(center.array() - m * h), h, std::vector<int>(n, 2 * m + 1));
    parallel_for(g.size(), [&](std::size_t i) { g.set(i, f(g.position(i))); });
    return g;
  }

  int n() const { return n_; }
  int k() const { return k_; }
  double h() const { return h_; }
  const Vec& lo() const { return lo_; }
  const std::vector<int>& count() const { return count_; }
  std::size_t size() const { return values_.size() / k_; }

  MultiIndex index(std::size_t i) const {
    MultiIndex idx{};
    for (int d = n_ - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(i % count_[d]);
      i /= count_[d];
    }
    return idx;
  }

  std::int64_t flatten(const MultiIndex& idx) const {
    std::int64_t f = 0;
    for (int d = 0; d < n_; ++d) {
      if (idx[d] < 0 || idx[d] >= count_[d]) return -1;
      f = f * count_[d] + idx[d];
    }
    return f;
  }

  Vec position(const MultiIndex& idx) const {
    Vec x(n_);
    for (int d = 0; d < n_; ++d) x(d) = lo_(d) + h_ * idx[d];
    return x;
  }
  Vec position(std::size_t i) const { return position(index(i)); }

  const double* data(std::size_t i) const { return values_.data() + i * k_; }
  Vec value(std::size_t i) const { return Eigen::Map<const Eigen::VectorXd>(data(i), k_); }
  bool present(std::size_t i) const { return std::isfinite(values_[i * k_]); }

  void set(std::size_t i, const Vec& v) {
    require_dim(v.size(), k_, "SheetGrid::set");
    std::copy(v.data(), v.data() + k_, values_.data() + i * k_);
  }

  /// Adds a constant to every present value.
  SheetGrid shifted(const Vec& c) const {
    SheetGrid g = *this;
    for (std::size_t i = 0; i < size(); ++i)
      if (present(i)) g.set(i, Vec(value(i) + c));
    return g;
  }

 private:
  int n_ = 0, k_ = 0;
  Vec lo_;
  double h_ = 0.0;
  std::vector<int> count_;
  std::vector<double> values_;
};

/// Scalar test function bump_profile(|x - center| / radius) on the base.
struct ScalarBump {
  Vec center;
  double radius = 0.25;

  double operator()(const Vec& x) const { return bump_profile((x - center).norm() / radius); }
};

/// Weak-form residual of the minimal surface system for a single-valued
/// sheet: the maximum over the bumps φ and value directions κ of
///   |Σ_nodes sqrt(g) g^{ij} D_i f^κ D_j φ| h^n / (sup|Dφ| vol(B_r)),
/// with g_ij = δ_ij + D_i f · D_j f. Both f and φ are differenced centrally at
/// the nodes, so the sum vanishes identically for linear f.
inline double mss_residual(const SheetGrid& f, const std::vector<ScalarBump>& family) {
  require(!family.empty(), ErrorKind::invalid_input, "mss_residual: empty test family");
  const int n = f.n(), k = f.k();
  const double h = f.h();
  double worst = 0.0;
  for (const auto& phi : family) {
    require_dim(phi.center.size(), n, "mss_residual");
    const double reach = phi.radius + h * (1.0 + 1e-9);
    // nodes whose difference stencil sees the support of φ
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < f.size(); ++i)
      if ((f.position(i) - phi.center).norm() < reach) active.push_back(i);
    require(!active.empty(), ErrorKind::invalid_input, "mss_residual: bump outside the grid");
    const Eigen::VectorXd sums = parallel_reduce(
        active.size(), Eigen::VectorXd(Eigen::VectorXd::Zero(k)),
        [&](std::size_t lo, std::size_t hi) {
          Eigen::VectorXd acc = Eigen::VectorXd::Zero(k);
          Eigen::MatrixXd df(k, n);
          Eigen::VectorXd dphi(n);
          for (std::size_t a = lo; a < hi; ++a) {
            const std::size_t i = active[a];
            const MultiIndex idx = f.index(i);
            require(f.present(i), ErrorKind::invalid_input,
                    "mss_residual: test function support touches missing nodes");
            for (int d = 0; d < n; ++d) {
              MultiIndex up = idx, dn = idx;
              ++up[d];
              --dn[d];
              const std::int64_t iu = f.flatten(up), id = f.flatten(dn);
              require(iu >= 0 && id >= 0 && f.present(iu) && f.present(id), ErrorKind::invalid_input,
                      "mss_residual: test function support touches the grid boundary");
              df.col(d) = (f.value(iu) - f.value(id)) / (2.0 * h);
              dphi(d) = (phi(f.position(up)) - phi(f.position(dn))) / (2.0 * h);
            }
            if (dphi.squaredNorm() == 0.0) continue;
            const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n) + df.transpose() * df;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
            const double sqrt_det = std::sqrt(ldlt.vectorD().prod());
            // sqrt(g) g^{ij} D_j φ, then contract with D_i f^κ
            acc += sqrt_det * (df * ldlt.solve(dphi));
          }
          return acc;
        },
        [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return Eigen::VectorXd(a + b); });
    const double scale = bump_slope_bound() / phi.radius * unit_ball_volume(n) * std::pow(phi.radius, n);
    worst = std::max(worst, sums.cwiseAbs().maxCoeff() * std::pow(h, n) / scale);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// First variation of sampled varifolds

/// Compactly supported vector field on R^{n+k} with closed-form derivative.
struct TestField {
  enum class Kind { coordinate_bump, radial_bump };
  Kind kind = Kind::coordinate_bump;
  int direction = 0;  // coordinate bumps only
  Vec center;
  double radius = 0.5;
  double amplitude = 1.0;

  static TestField coordinate(const Vec& center, double radius, int direction) {
    return {Kind::coordinate_bump, direction, center, radius, 1.0};
  }
  static TestField radial(const Vec& center, double radius) {
    return {Kind::radial_bump, 0, center, radius, 1.0};
  }

  TestField scaled(double a) const {
    TestField f = *this;
    f.amplitude *= a;
    return f;
  }

  Vec value(const Vec& x) const {
    const Vec d = x - center;
    const double psi = amplitude * bump_profile(d.norm() / radius);
    if (kind == Kind::coordinate_bump) return psi * unit_vector(static_cast<int>(x.size()), direction);
    return psi * d / radius;
  }

  /// Bound on |DΦ|.
  double derivative_bound() const {
    const double slope = bump_slope_bound() / radius;
    return std::abs(amplitude) * (kind == Kind::coordinate_bump ? slope : slope + 1.0 / radius);
  }

  /// Trace of DΦ on the span of the orthonormal columns of t.
  double tangential_divergence(const Vec& x, const Eigen::MatrixXd& t) const {
    const Vec d = x - center;
    const double s2 = d.squaredNorm() / (radius * radius);
    if (s2 >= 1.0) return 0.0;
    const double u = 1.0 - s2;
    const double psi = u * u * u * u;
    const Vec grad = -8.0 * u * u * u * d / (radius * radius);  // ∇ψ
    const Eigen::VectorXd tg = t.transpose() * grad;
    double div = 0.0;
    if (kind == Kind::coordinate_bump) {
      div = t.row(direction).dot(tg);
    } else {
      div = (t.transpose() * d).dot(tg) / radius + psi * static_cast<double>(t.cols()) / radius;
    }
    return amplitude * div;
  }

  bool supports(const Vec& x) const { return (x - center).norm() < radius; }
};

/// Coordinate bumps in every ambient direction plus one radial bump.
inline std::vector<TestField> standard_fields(const Vec& center, double radius) {
  std::vector<TestField> out;
  for (int p = 0; p < center.size(); ++p) out.push_back(TestField::coordinate(center, radius, p));
  out.push_back(TestField::radial(center, radius));
  return out;
}

/// Share of in-support samples with unreliable tangents tolerated.
inline constexpr double kUnreliableShare = 0.05;

/// Per-field values |Σ weight div_T Φ| / radius^{n-1}, using the tangent
/// frames stored with the samples.
inline std::vector<double> first_variation_table(const SampledVarifold& v,
                                                 const std::vector<TestField>& fields) {
  require(!fields.empty(), ErrorKind::invalid_input, "first_variation_defect: no test fields");
  std::vector<double> out;
  for (const auto& fld : fields) {
    require_dim(fld.center.size(), v.ambient_dim(), "first_variation_defect");
    std::size_t inside = 0, bad = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (fld.supports(v.point(i))) {
        ++inside;
        if (!v.reliable(i)) ++bad;
      }
    require(double(bad) <= kUnreliableShare * double(inside), ErrorKind::precondition,
            "first_variation_defect: too many unreliable tangents in the field support");
    const double sum = parallel_sum(v.size(), [&](std::size_t i) {
      const Vec x = v.point(i);
      if (!fld.supports(x)) return 0.0;
      return v.weight(i) * fld.tangential_divergence(x, v.tangent(i));
    });
    out.push_back(std::abs(sum) / std::pow(fld.radius, v.n() - 1));
  }
  return out;
}

inline double first_variation_defect(const SampledVarifold& v, const std::vector<TestField>& fields) {
  const auto t = first_variation_table(v, fields);
  return *std::max_element(t.begin(), t.end());
}

}  // namespace twograph
