#pragma once

#include "cones.hpp"
#include "geometry.hpp"
#include "kdtree.hpp"
#include "parallel.hpp"
#include "two_valued.hpp"

#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace twograph {

/// Weighted point cloud on an n-dimensional graph in R^{n+k}. Each sample
/// carries the area of the patch it represents, an approximate tangent plane
/// (orthonormal n-frame), a sheet label and a tangent reliability flag.
class SampledVarifold {
 public:
  SampledVarifold() = default;
  SampledVarifold(int n, int k, double h, std::string provenance = "")
      : n_(n), k_(k), h_(h), provenance_(std::move(provenance)) {
    require(n >= 1 && k >= 1 && n + k <= kMaxDim, ErrorKind::invalid_input,
            "SampledVarifold: bad dimensions");
  }

  int n() const { return n_; }
  int k() const { return k_; }
  int ambient_dim() const { return n_ + k_; }
  double h() const { return h_; }
  const std::string& provenance() const { return provenance_; }
  std::size_t size() const { return weights_.size(); }

  void add(const Vec& x, double weight, const Eigen::MatrixXd& tangent, int sheet = -1,
           bool reliable = true) {
    require_dim(x.size(), ambient_dim(), "SampledVarifold::add");
    require(weight > 0.0 && std::isfinite(weight), ErrorKind::invalid_input,
            "SampledVarifold: weights must be positive");
    require(tangent.rows() == ambient_dim() && tangent.cols() == n_, ErrorKind::invalid_input,
            "SampledVarifold: tangent must be an n-frame");
    pts_.insert(pts_.end(), x.data(), x.data() + x.size());
    weights_.push_back(weight);
    for (int c = 0; c < n_; ++c)
      for (int r = 0; r < ambient_dim(); ++r) tangents_.push_back(tangent(r, c));
    sheet_.push_back(static_cast<std::int8_t>(sheet));
    reliable_.push_back(reliable ? 1 : 0);
    index_.reset();
  }

  const double* point_data(std::size_t i) const { return pts_.data() + i * ambient_dim(); }
  Vec point(std::size_t i) const {
    return Eigen::Map<const Eigen::VectorXd>(point_data(i), ambient_dim());
  }
  double weight(std::size_t i) const { return weights_[i]; }
  Eigen::MatrixXd tangent(std::size_t i) const {
    return Eigen::Map<const Eigen::MatrixXd>(tangents_.data() + i * ambient_dim() * n_,
                                             ambient_dim(), n_);
  }
  int sheet(std::size_t i) const { return sheet_[i]; }
  bool reliable(std::size_t i) const { return reliable_[i] != 0; }
  void set_sheet(std::size_t i, int s) { sheet_[i] = static_cast<std::int8_t>(s); }

  double total_mass() const {
    return parallel_sum(size(), [&](std::size_t i) { return weights_[i]; });
  }

  /// Spatial index over the sample points, built on first use.
  const KdTree& index() const {
    std::lock_guard<std::mutex> lock(*index_mu_);
    if (!index_) index_ = std::make_shared<KdTree>(pts_, ambient_dim());
    return *index_;
  }

  /// Image under X -> (X - center) / scale; weights scale by scale^{-n}.
  SampledVarifold dilated(const Vec& center, double scale) const {
    SampledVarifold out = copy_meta(h_ / scale);
    const double wscale = std::pow(scale, -n_);
    for (std::size_t i = 0; i < size(); ++i)
      out.add(Vec((point(i) - center) / scale), weights_[i] * wscale, tangent(i), sheet(i),
              reliable(i));
    return out;
  }

  /// Image under X -> R X + t.
  SampledVarifold mapped(const Eigen::MatrixXd& rot, const Vec& t) const {
    SampledVarifold out = copy_meta(h_);
    for (std::size_t i = 0; i < size(); ++i)
      out.add(Vec(rot * point(i) + t), weights_[i], rot * tangent(i), sheet(i), reliable(i));
    return out;
  }

  /// Samples inside the region.
  SampledVarifold restricted(const Region& r) const {
    SampledVarifold out = copy_meta(h_);
    for (std::size_t i = 0; i < size(); ++i)
      if (region_contains(r, point(i)))
        out.add(point(i), weights_[i], tangent(i), sheet(i), reliable(i));
    return out;
  }

 private:
  SampledVarifold copy_meta(double h) const { return SampledVarifold(n_, k_, h, provenance_); }

  int n_ = 0, k_ = 0;
  double h_ = 0.0;
  std::string provenance_;
  std::vector<double> pts_;
  std::vector<double> weights_;
  std::vector<double> tangents_;
  std::vector<std::int8_t> sheet_;
  std::vector<std::uint8_t> reliable_;
  mutable std::shared_ptr<KdTree> index_;
  mutable std::shared_ptr<std::mutex> index_mu_ = std::make_shared<std::mutex>();
};

/// Orthonormal tangent frame of the graph of a map with k x n Jacobian `jac`.
inline Eigen::MatrixXd graph_tangent(const Eigen::MatrixXd& jac) {
  const auto n = jac.cols(), k = jac.rows();
  Eigen::MatrixXd span(n + k, n);
  span.topRows(n) = Eigen::MatrixXd::Identity(n, n);
  span.bottomRows(k) = jac;
  return orthonormalize(span, 0.0);
}

inline double area_factor(const Eigen::MatrixXd& jac) {
  const auto n = jac.cols();
  return std::sqrt((Eigen::MatrixXd::Identity(n, n) + jac.transpose() * jac).determinant());
}

/// Area-formula discretization of the graph of a two-valued grid map: one
/// sample per sheet per lattice cell whose corners all lie in the grid. Corner
/// values are paired against the corner of largest sheet separation; the
/// sample sits at the cell center with the corner-averaged value, and its
/// Jacobian averages the edge differences. A sample is marked unreliable when
/// some corner's separation does not exceed its pairing cost, i.e. the
/// discrete pairing may differ from the continuous one.
inline SampledVarifold sample_graph(const TwoValuedGrid& f, const std::string& provenance = "") {
  const int n = f.n(), k = f.k();
  require(n <= 6, ErrorKind::invalid_input, "sample_graph: base dimension too large");
  const double h = f.h();
  const int corners = 1 << n;
  const std::size_t cells = f.size();

  // Per cell: valid flag, reliability, two sheet values and two Jacobians.
  const std::size_t stride = 2 * k + 2 * k * n;
  std::vector<double> data(cells * stride);
  std::vector<std::uint8_t> valid(cells, 0), reliable(cells, 1);

  parallel_for(cells, [&](std::size_t s) {
    const MultiIndex base = f.index(s);
    std::int64_t cs[64];
    for (int c = 0; c < corners; ++c) {
      MultiIndex idx = base;
      for (int d = 0; d < n; ++d) idx[d] += (c >> d) & 1;
      cs[c] = f.slot(idx);
      if (cs[c] < 0) return;
    }
    int ref = 0;
    double ref_sep = -1.0, scale = 0.0;
    for (int c = 0; c < corners; ++c) {
      const double sep = f.separation(cs[c]);
      if (sep > ref_sep) {
        ref_sep = sep;
        ref = c;
      }
      for (int i = 0; i < k; ++i)
        scale = std::max({scale, std::abs(f.a1(cs[c])[i]), std::abs(f.a2(cs[c])[i])});
    }
    const double tiny = 1e-12 * (1.0 + scale);
    const double* r1 = f.a1(cs[ref]);
    const double* r2 = f.a2(cs[ref]);
    const double* sheet[2][64];
    for (int c = 0; c < corners; ++c) {
      const double* b1 = f.a1(cs[c]);
      const double* b2 = f.a2(cs[c]);
      const PairingCost pc = pairing_cost(r1, r2, b1, b2, k);
      const bool crossed = pc.is_crossed();
      sheet[0][c] = crossed ? b2 : b1;
      sheet[1][c] = crossed ? b1 : b2;
      const double sep = f.separation(cs[c]);
      if (c != ref && sep > tiny && sep <= pc.best()) reliable[s] = 0;
    }
    double* out = data.data() + s * stride;
    for (int sh = 0; sh < 2; ++sh) {
      double* val = out + sh * k;
      double* jac = out + 2 * k + sh * k * n;  // column-major k x n
      for (int i = 0; i < k; ++i) {
        double m = 0.0;
        for (int c = 0; c < corners; ++c) m += sheet[sh][c][i];
        val[i] = m / corners;
      }
      for (int d = 0; d < n; ++d)
        for (int i = 0; i < k; ++i) {
          double m = 0.0;
          for (int c = 0; c < corners; ++c)
            if (!((c >> d) & 1)) m += sheet[sh][c | (1 << d)][i] - sheet[sh][c][i];
          jac[d * k + i] = m / ((corners / 2) * h);
        }
    }
    valid[s] = 1;
  });

  SampledVarifold v(n, k, h, provenance);
  const double vol = std::pow(h, n);
  Vec x(n + k);
  for (std::size_t s = 0; s < cells; ++s) {
    if (!valid[s]) continue;
    const double* rec = data.data() + s * stride;
    x.head(n) = f.position(s).array() + 0.5 * h;
    for (int sh = 0; sh < 2; ++sh) {
      x.tail(k) = Eigen::Map<const Eigen::VectorXd>(rec + sh * k, k);
      const Eigen::Map<const Eigen::MatrixXd> jac(rec + 2 * k + sh * k * n, k, n);
      v.add(x, vol * area_factor(jac), graph_tangent(jac), sh, reliable[s] != 0);
    }
  }
  return v;
}

/// Sum of weights of samples inside the region.
inline double mass_in(const SampledVarifold& v, const Region& r) {
  return parallel_sum(v.size(),
                      [&](std::size_t i) { return region_contains(r, v.point(i)) ? v.weight(i) : 0.0; });
}

/// Mass in the open ball B_rho(x) using the spatial index.
inline double ball_mass(const SampledVarifold& v, const Vec& x, double rho) {
  std::vector<std::size_t> hits;
  v.index().within(x, rho, hits);
  std::sort(hits.begin(), hits.end());
  double m = 0.0;
  for (auto i : hits) m += v.weight(i);
  return m;
}

/// Smallest radius, in grid spacings, at which ball counts are trusted.
inline constexpr double kDensityFloorCells = 4.0;

/// Threshold used to call a point singular: density >= 2 - kDensitySlack.
inline constexpr double kDensitySlack = 0.05;

inline double density_ratio(const SampledVarifold& v, const Vec& x, double rho) {
  require(rho >= kDensityFloorCells * v.h(), ErrorKind::resolution,
          "density_ratio: radius below the resolution floor");
  return ball_mass(v, x, rho) / (unit_ball_volume(v.n()) * std::pow(rho, v.n()));
}

struct DensityProfile {
  Vec center;
  std::vector<double> radii;
  std::vector<double> ratios;
  double smallest() const { return ratios.back(); }
};

/// Ratios at rho, rho/2, rho/4, rho/8, keeping only radii above the floor.
inline DensityProfile density_profile(const SampledVarifold& v, const Vec& x, double rho) {
  DensityProfile p;
  p.center = x;
  for (int j = 0; j < 4; ++j) {
    const double r = rho / std::pow(2.0, j);
    if (r < kDensityFloorCells * v.h()) break;
    p.radii.push_back(r);
    p.ratios.push_back(density_ratio(v, x, r));
  }
  require(!p.radii.empty(), ErrorKind::resolution, "density_profile: radius below floor");
  return p;
}

struct TangentEstimate {
  Subspace plane;
  double residual = 0.0;  // normal share of the local second moment
  bool reliable = true;
};

/// Principal n-plane through x of the weighted second moment of the samples
/// in B_rho(x), optionally restricted to one sheet label.
inline TangentEstimate tangent_estimate(const SampledVarifold& v, const Vec& x, double rho,
                                        int sheet = -1, double residual_tol = 1e-2) {
  const int dim = v.ambient_dim(), n = v.n();
  std::vector<std::size_t> hits;
  v.index().within(x, rho, hits);
  std::sort(hits.begin(), hits.end());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  int used = 0;
  for (auto i : hits) {
    if (sheet >= 0 && v.sheet(i) != sheet) continue;
    const Eigen::VectorXd d = v.point(i) - x;
    m += v.weight(i) * d * d.transpose();
    ++used;
  }
  require(used >= 3 * n, ErrorKind::resolution, "tangent_estimate: too few samples in the ball");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd ev = es.eigenvalues();  // ascending
  const double total = ev.sum();
  TangentEstimate t;
  t.plane = Subspace::spanned_by(es.eigenvectors().rightCols(n), x);
  t.residual = total > 0.0 ? ev.head(dim - n).sum() / total : 0.0;
  t.reliable = t.residual <= residual_tol;
  return t;
}

/// ∫_R |a|^2 d||V||, where |a(X)|^2 sums the squared normal parts of the axis
/// basis vectors relative to the sample tangent plane.
inline double axis_tilt(const SampledVarifold& v, const Cone& c, const Region& r) {
  require(c.has_axis(), ErrorKind::undefined, "axis_tilt: cone has no axis");
  require_dim(v.ambient_dim(), c.ambient_dim(), "axis_tilt");
  const Eigen::MatrixXd e = c.axis().basis();
  if (e.cols() == 0) return 0.0;
  return parallel_sum(v.size(), [&](std::size_t i) {
    if (!region_contains(r, v.point(i))) return 0.0;
    const Eigen::MatrixXd t = v.tangent(i);
    const Eigen::MatrixXd perp = e - t * (t.transpose() * e);
    return v.weight(i) * perp.squaredNorm();
  });
}

}  // namespace twograph
