#pragma once

#include "cones.hpp"
#include "two_valued.hpp"

#include <functional>
#include <vector>

namespace twograph {

/// A field on the support of a cone sampled on one Cartesian chart per piece.
/// Chart coordinates s = (cross-section part, axis part) map to the point
/// origin + basis * s; values are vectors of R^{n+k} normal to the piece.
class ConeField {
 public:
  struct Chart {
    Eigen::MatrixXd basis;   // (n+k) x n, cross-section columns first
    Eigen::MatrixXd normal;  // (n+k) x k
    int cross_dim = 0;
    bool half = false;
    std::vector<MultiIndex> nodes;
    std::vector<std::int32_t> slot_of_box;
    std::vector<double> values;  // (n+k) per node
  };

  using Function = std::function<Vec(const Vec& x, int piece)>;

  ConeField() = default;

  /// Nodes at spacing h inside B_radius(origin) with cross-section norm >= h/2.
  ConeField(const Cone& c, double h, double radius) : cone_(c), h_(h), radius_(radius) {
    require(c.has_axis(), ErrorKind::undefined, "ConeField: cone needs an axis");
    require(h > 0.0 && radius > h, ErrorKind::invalid_input, "ConeField: bad spacing");
    const Subspace& a = c.axis();
    origin_ = a.offset();
    const int n = c.n(), amb = c.ambient_dim();
    lat_ = Lattice(n, Vec::Zero(n), radius, h);
    for (const auto& p : c.pieces()) {
      Chart ch;
      ch.half = p.is_half();
      Eigen::MatrixXd cross;
      if (ch.half) {
        cross = Eigen::MatrixXd(p.side);
      } else {
        cross = span_basis(p.plane.basis() - a.basis() * (a.basis().transpose() * p.plane.basis()));
      }
      ch.cross_dim = static_cast<int>(cross.cols());
      ch.basis.resize(amb, n);
      ch.basis << cross, a.basis();
      ch.normal = complement_basis(ch.basis, amb);
      const double lim = (radius / h) * (radius / h) * (1.0 + 1e-12);
      ch.slot_of_box.assign(lat_.box_size(), -1);
      for (std::int64_t b = 0; b < lat_.box_size(); ++b) {
        const MultiIndex idx = lat_.unflatten(b);
        if (Lattice::index_norm2(idx, n) > lim) continue;
        double r2 = 0.0;
        for (int d = 0; d < ch.cross_dim; ++d) r2 += double(idx[d]) * idx[d];
        if (r2 < 0.25) continue;
        if (ch.half && idx[0] < 1) continue;
        ch.slot_of_box[b] = static_cast<std::int32_t>(ch.nodes.size());
        ch.nodes.push_back(idx);
      }
      ch.values.assign(ch.nodes.size() * amb, 0.0);
      charts_.push_back(std::move(ch));
    }
  }

  static ConeField sample(const Cone& c, double h, double radius, const Function& f) {
    ConeField v(c, h, radius);
    for (int p = 0; p < v.pieces(); ++p)
      for (std::size_t i = 0; i < v.charts_[p].nodes.size(); ++i)
        v.set(p, i, f(v.position(p, i), p));
    return v;
  }

  const Cone& cone() const { return cone_; }
  double h() const { return h_; }
  double radius() const { return radius_; }
  int n() const { return cone_.n(); }
  int ambient_dim() const { return cone_.ambient_dim(); }
  int pieces() const { return static_cast<int>(charts_.size()); }
  const Chart& chart(int p) const { return charts_[p]; }
  std::size_t nodes(int p) const { return charts_[p].nodes.size(); }

  Eigen::VectorXd coords(int p, std::size_t i) const {
    Eigen::VectorXd s(n());
    for (int d = 0; d < n(); ++d) s(d) = h_ * charts_[p].nodes[i][d];
    return s;
  }

  Vec position(int p, std::size_t i) const {
    return origin_ + charts_[p].basis * coords(p, i);
  }

  /// Distance to the axis.
  double axis_distance(int p, std::size_t i) const {
    return coords(p, i).head(charts_[p].cross_dim).norm();
  }

  Vec value(int p, std::size_t i) const {
    const int amb = ambient_dim();
    return Eigen::Map<const Eigen::VectorXd>(charts_[p].values.data() + i * amb, amb);
  }

  /// Stores the normal part of v.
  void set(int p, std::size_t i, const Vec& v) {
    const Chart& ch = charts_[p];
    const Eigen::VectorXd nv = ch.normal * (ch.normal.transpose() * v);
    std::copy(nv.data(), nv.data() + nv.size(), charts_[p].values.data() + i * ambient_dim());
  }

  /// Node index of the chart neighbor along d, or -1.
  std::int64_t neighbor(int p, std::size_t i, int d, int dir) const {
    MultiIndex idx = charts_[p].nodes[i];
    idx[d] += dir;
    const std::int64_t b = lat_.flatten(idx);
    return b < 0 ? -1 : charts_[p].slot_of_box[b];
  }

  bool has_all_neighbors(int p, std::size_t i) const {
    for (int d = 0; d < n(); ++d)
      if (neighbor(p, i, d, +1) < 0 || neighbor(p, i, d, -1) < 0) return false;
    return true;
  }

  double cell_volume() const { return std::pow(h_, n()); }

  double norm_l2() const {
    double s = 0.0;
    for (int p = 0; p < pieces(); ++p)
      for (std::size_t i = 0; i < nodes(p); ++i) s += value(p, i).squaredNorm();
    return std::sqrt(s * cell_volume());
  }

  ConeField scaled(double a) const {
    ConeField out = *this;
    for (auto& ch : out.charts_)
      for (auto& x : ch.values) x *= a;
    return out;
  }

  ConeField minus(const ConeField& o) const {
    ConeField out = *this;
    for (int p = 0; p < pieces(); ++p)
      for (std::size_t j = 0; j < out.charts_[p].values.size(); ++j)
        out.charts_[p].values[j] -= o.charts_[p].values[j];
    return out;
  }

 private:
  Cone cone_;
  double h_ = 0.0, radius_ = 0.0;
  Vec origin_;
  Lattice lat_;
  std::vector<Chart> charts_;
};

/// ∫ R^{2-n} |∂_R (v / R^degree)|^2 over nodes accepted by `keep`, with the
/// radial derivative from the Euler identity and central chart differences.
inline double homogeneity_defect(const ConeField& v, double degree,
                                 const std::function<bool(int, std::size_t)>& keep = {}) {
  const int n = v.n();
  double total = 0.0;
  for (int p = 0; p < v.pieces(); ++p)
    for (std::size_t i = 0; i < v.nodes(p); ++i) {
      if (!v.has_all_neighbors(p, i)) continue;
      if (keep && !keep(p, i)) continue;
      const Eigen::VectorXd s = v.coords(p, i);
      const double r = s.norm();
      Vec radial = Vec::Zero(v.ambient_dim());
      for (int d = 0; d < n; ++d) {
        const Vec dv = (v.value(p, v.neighbor(p, i, d, +1)) - v.value(p, v.neighbor(p, i, d, -1))) /
                       (2.0 * v.h());
        radial += s(d) * dv;
      }
      const Vec deriv = (radial - degree * v.value(p, i)) / std::pow(r, degree + 1.0);
      total += std::pow(r, 2.0 - n) * deriv.squaredNorm();
    }
  return total * v.cell_volume();
}

}  // namespace twograph
