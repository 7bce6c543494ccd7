#pragma once

#include "cone_field.hpp"
#include "cones.hpp"
#include "varifold.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace twograph {

/// Σ weight · dist²(X, spt C) over samples in the region.
inline double excess_E(const SampledVarifold& v, const Cone& c, const Region& r) {
  require_dim(v.ambient_dim(), c.ambient_dim(), "excess_E");
  return parallel_sum(v.size(), [&](std::size_t i) {
    const Vec x = v.point(i);
    if (!region_contains(r, x)) return 0.0;
    const double d = c.dist(x);
    return v.weight(i) * d * d;
  });
}

inline double excess_E(const SampledVarifold& v, const Cone& c) {
  return excess_E(v, c, unit_ball(c.ambient_dim()));
}

struct ExcessOptions {
  double outer_radius = 2.0;  // base radius of the cylinder B^n × R^k
  double collar = 0.125;      // reverse term skips {dist to axis < collar}
  double ball = std::numeric_limits<double>::infinity();  // reverse nodes also need |X| < ball
};

struct ExcessReport {
  double one_sided = 0.0;
  double reverse = 0.0;
  double collar = 0.125;
  double outer_radius = 2.0;
  std::size_t reverse_nodes = 0;
  double q() const { return std::sqrt(one_sided + reverse); }
};

namespace detail {

/// Distinct base points of the samples, in sorted order.
inline std::vector<Eigen::VectorXd> base_points(const SampledVarifold& v) {
  const int n = v.n();
  std::vector<std::vector<double>> raw;
  raw.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    raw.emplace_back(v.point_data(i), v.point_data(i) + n);
  std::sort(raw.begin(), raw.end());
  raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
  std::vector<Eigen::VectorXd> out;
  out.reserve(raw.size());
  for (const auto& r : raw) out.push_back(Eigen::Map<const Eigen::VectorXd>(r.data(), n));
  return out;
}

}  // namespace detail

/// Two-sided excess relative to C0. The one-sided part integrates dist² to
/// spt C0 over the cylinder; the reverse part integrates dist² to the sample
/// cloud over spt C0 outside the collar around the axis. The reverse
/// quadrature lifts the base points of the samples onto each (graphical)
/// piece of C0, weighted by the lattice cell volume times the piece's area
/// factor, so it covers exactly the base region that V itself covers.
inline ExcessReport excess_Q(const SampledVarifold& v, const Cone& c0,
                             const ExcessOptions& opt = {}) {
  require(c0.has_axis(), ErrorKind::undefined, "excess_Q: reference cone needs an axis");
  require_dim(v.ambient_dim(), c0.ambient_dim(), "excess_Q");
  const int n = v.n(), k = v.k();
  ExcessReport rep;
  rep.collar = opt.collar;
  rep.outer_radius = opt.outer_radius;
  const Region cyl = Cylinder{n, opt.outer_radius};
  std::size_t inside = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (region_contains(cyl, v.point(i))) ++inside;
  require(inside > 0, ErrorKind::undefined, "excess_Q: no samples in the outer region");
  rep.one_sided = excess_E(v, c0, cyl);

  const auto bases = detail::base_points(v);
  const auto graphs = c0.graphs();
  const KdTree& tree = v.index();
  const double vol = std::pow(v.h(), n);
  const Subspace& axis = c0.axis();
  std::vector<Vec> nodes;
  std::vector<double> weights;
  for (const auto& g : graphs)
    for (const auto& x : bases) {
      if (x.squaredNorm() >= opt.outer_radius * opt.outer_radius || !g.admits(x)) continue;
      Vec pt(n + k);
      pt << x, g.slope * x + g.shift;
      if (axis.distance(pt) < opt.collar || pt.norm() >= opt.ball) continue;
      nodes.push_back(pt);
      weights.push_back(vol * g.jacobian);
    }
  rep.reverse_nodes = nodes.size();
  rep.reverse = parallel_sum(nodes.size(), [&](std::size_t i) {
    return weights[i] * tree.nearest(nodes[i]).dist2;
  });
  return rep;
}

/// Measured constant of the single-plane comparison:
/// [∫_{B_1/2} dist²(X, P) d||V||] / [∫_{B_1} dist²(X, spt C) d||V||] with P the
/// chosen plane of the pair C; the numerator covers samples closer to P than to
/// the other plane. 0/0 is reported as 0 and x/0 as +infinity.
inline double single_plane_ratio(const SampledVarifold& v, const Cone& c, int plane = 0) {
  require(c.is_pair(), ErrorKind::invalid_input, "single_plane_ratio: needs a pair of planes");
  const Subspace& p = c.pieces().at(plane).plane;
  const Subspace& other = c.pieces().at(1 - plane).plane;
  const int amb = c.ambient_dim();
  const Region half = Ball{Vec::Zero(amb), 0.5};
  // only the part of V lying nearer this plane, the sheet the comparison is about
  const double num = parallel_sum(v.size(), [&](std::size_t i) {
    const Vec x = v.point(i);
    if (!region_contains(half, x)) return 0.0;
    const double d = p.distance(x);
    if (d > other.distance(x)) return 0.0;
    return v.weight(i) * d * d;
  });
  const double den = excess_E(v, c, unit_ball(amb));
  // sums at round-off level count as zero
  const double floor = 1e-24 * std::max(1.0, mass_in(v, unit_ball(amb)));
  if (den <= floor) return num <= floor ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

/// Normal displacement from each chart node of C0 to the nearest sample of V:
/// a discrete graph representation of V over the cone away from the axis.
inline ConeField graph_over_cone(const SampledVarifold& v, const Cone& c0, double h, double radius) {
  ConeField u(c0, h, radius);
  const KdTree& tree = v.index();
  for (int p = 0; p < u.pieces(); ++p)
    for (std::size_t i = 0; i < u.nodes(p); ++i) {
      const Vec x = u.position(p, i);
      const auto hit = tree.nearest(x);
      u.set(p, i, Vec(v.point(hit.index) - x));
    }
  return u;
}

/// ∫ R^{2-n} |∂_R((u+c)/R)|² over the field nodes inside `region`. The region
/// must stay at axis distance >= tau/2, where the graph representation holds.
inline double radial_homogeneity_deficit(const ConeField& uc, const Region& region, double tau) {
  for (int p = 0; p < uc.pieces(); ++p)
    for (std::size_t i = 0; i < uc.nodes(p); ++i)
      if (region_contains(region, uc.position(p, i)))
        require(uc.axis_distance(p, i) >= 0.5 * tau, ErrorKind::invalid_input,
                "radial_homogeneity_deficit: region reaches inside r < tau/2");
  return homogeneity_defect(uc, 1.0, [&](int p, std::size_t i) {
    return region_contains(region, uc.position(p, i));
  });
}

}  // namespace twograph
