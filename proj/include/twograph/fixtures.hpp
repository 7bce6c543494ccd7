#pragma once

#include "cones.hpp"
#include "two_valued.hpp"
#include "varifold.hpp"

#include <complex>
#include <map>
#include <optional>
#include <string>

namespace twograph {

using cplx = std::complex<double>;

/// The Hopf map (|z1|^2 - |z2|^2, 2 z1 conj(z2)) on the unit sphere of C^2;
/// inputs off the sphere are normalized first.
inline Eigen::Vector3d hopf(cplx z1, cplx z2) {
  const double len = std::sqrt(std::norm(z1) + std::norm(z2));
  require(len > 0.0, ErrorKind::invalid_input, "hopf: zero input");
  z1 /= len;
  z2 /= len;
  const cplx w = 2.0 * z1 * std::conj(z2);
  return {std::norm(z1) - std::norm(z2), w.real(), w.imag()};
}

/// Homogeneous degree-one extension (sqrt(5)/2) |x| hopf(x/|x|) on R^4, with
/// z1 = x1 + i x2 and z2 = x3 + i x4.
inline Vec lawson_osserman(const Vec& x) {
  const double r2 = x.squaredNorm();
  Vec out = Vec::Zero(3);
  if (r2 == 0.0) return out;
  const cplx z1(x(0), x(1)), z2(x(2), x(3));
  const cplx w = 2.0 * z1 * std::conj(z2);
  const double c = std::sqrt(5.0) / 2.0 / std::sqrt(r2);
  out << c * (std::norm(z1) - std::norm(z2)), c * w.real(), c * w.imag();
  return out;
}

inline Vec vec_of(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline Vec cvec(cplx z) { return vec_of({z.real(), z.imag()}); }

/// Real 2x2 matrix of multiplication by a complex number, flattened column-major.
inline Vec cmul_matrix(cplx a) { return vec_of({a.real(), a.imag(), -a.imag(), a.real()}); }

/// Named fixture parameters.
struct FixtureSpec {
  std::string id;
  std::map<std::string, double> params;
  double h = 1.0 / 64;
  double radius = 1.0;

  double param(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

/// An analytic two-valued map with optional exact cone and derivative.
struct Fixture {
  std::string id;
  int n = 0, k = 0;
  TwoValuedGrid::Evaluator eval;
  TwoValuedGrid::Evaluator derivative;  // k*n components, column-major, when known
  std::optional<Cone> cone;             // exact cone (the fixture itself, or its tangent cone)
  bool cone_is_exact = false;           // the graph coincides with `cone`
  bool minimal = true;
};

// ---------------------------------------------------------------------------

inline Subspace graph_plane(const Eigen::MatrixXd& slope, const Eigen::VectorXd& shift) {
  const auto k = slope.rows(), n = slope.cols();
  Eigen::MatrixXd b(n + k, n);
  b.topRows(n) = Eigen::MatrixXd::Identity(n, n);
  b.bottomRows(k) = slope;
  Vec off = Vec::Zero(n + k);
  off.tail(k) = shift;
  return Subspace::spanned_by(b, off);
}

/// {L1 x + b1, L2 x + b2}.
inline Fixture pair_planes(const Eigen::MatrixXd& l1, const Eigen::VectorXd& b1,
                           const Eigen::MatrixXd& l2, const Eigen::VectorXd& b2,
                           const std::string& id = "pair_planes") {
  Fixture f;
  f.id = id;
  f.n = static_cast<int>(l1.cols());
  f.k = static_cast<int>(l1.rows());
  f.eval = [=](const Vec& x) {
    return Pair2(Vec(l1 * x + b1), Vec(l2 * x + b2));
  };
  f.derivative = [=](const Vec&) {
    return Pair2(Eigen::Map<const Eigen::VectorXd>(l1.data(), l1.size()),
                 Eigen::Map<const Eigen::VectorXd>(l2.data(), l2.size()));
  };
  if ((l1 - l2).norm() > 0.0 || (b1 - b2).norm() > 0.0) {
    f.cone = Cone::pair(graph_plane(l1, b1), graph_plane(l2, b2), f.n, f.k);
    f.cone_is_exact = true;
  }
  return f;
}

/// {w = 0} ∪ {w = z} in C^2 = R^4: axis {0}.
inline Fixture transverse_pair() {
  Eigen::MatrixXd l1 = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd l2 = Eigen::MatrixXd::Identity(2, 2);
  return pair_planes(l1, Eigen::VectorXd::Zero(2), l2, Eigen::VectorXd::Zero(2), "transverse_pair");
}

/// {x3 = 0} ∪ {x3 = slope x1} in R^3: axis is the x2-line.
inline Fixture axis_line_pair(double slope = 1.0) {
  Eigen::MatrixXd l1 = Eigen::MatrixXd::Zero(1, 2);
  Eigen::MatrixXd l2(1, 2);
  l2 << slope, 0.0;
  return pair_planes(l1, Eigen::VectorXd::Zero(1), l2, Eigen::VectorXd::Zero(1), "axis_line");
}

/// {0, c}: two parallel sheets at constant separation.
inline Fixture parallel_planes(int n, int k, double gap) {
  Eigen::VectorXd b2 = Eigen::VectorXd::Zero(k);
  b2(0) = gap;
  return pair_planes(Eigen::MatrixXd::Zero(k, n), Eigen::VectorXd::Zero(k),
                     Eigen::MatrixXd::Zero(k, n), b2, "parallel_planes");
}

/// {s x1, s x1 + gap} over R^2 into R: one tilted plane with a distant copy.
inline Fixture tilted_plane(double slope, double gap = 1.0) {
  Eigen::MatrixXd l(1, 2);
  l << slope, 0.0;
  Eigen::VectorXd b2(1);
  b2 << gap;
  return pair_planes(l, Eigen::VectorXd::Zero(1), l, b2, "tilted_plane");
}

/// Four half-planes over R^{1+m} into R^2: for s <= 0 the values are
/// {(s,0), (-s,0)}, for s > 0 they are {(0,s), (0,-s)}, where
/// s = t - tan(tilt) y1 - shift_t. The whole graph is then translated by
/// `shift_w` in the value space.
inline Fixture four_half_planes(int m = 0, double tilt = 0.0, double shift_t = 0.0,
                                const Eigen::Vector2d& shift_w = Eigen::Vector2d::Zero()) {
  Fixture f;
  f.id = "four_half_planes";
  f.n = 1 + m;
  f.k = 2;
  const double slope = std::tan(tilt);
  auto coord = [=](const Vec& x) { return x(0) - (m > 0 ? slope * x(1) : 0.0) - shift_t; };
  f.eval = [=](const Vec& x) {
    const double s = coord(x);
    Vec a(2), b(2);
    if (s <= 0.0) {
      a << s, 0.0;
      b << -s, 0.0;
    } else {
      a << 0.0, s;
      b << 0.0, -s;
    }
    a += shift_w;
    b += shift_w;
    return Pair2(a, b);
  };
  const int n = f.n;
  f.derivative = [=](const Vec& x) {
    const double s = coord(x);
    Eigen::MatrixXd ds = Eigen::MatrixXd::Zero(1, n);
    ds(0, 0) = 1.0;
    if (m > 0) ds(0, 1) = -slope;
    Eigen::MatrixXd a(2, n), b(2, n);
    if (s <= 0.0) {
      a << ds, Eigen::MatrixXd::Zero(1, n);
      b << -ds, Eigen::MatrixXd::Zero(1, n);
    } else {
      a << Eigen::MatrixXd::Zero(1, n), ds;
      b << Eigen::MatrixXd::Zero(1, n), -ds;
    }
    return Pair2(Eigen::Map<const Eigen::VectorXd>(a.data(), a.size()),
                 Eigen::Map<const Eigen::VectorXd>(b.data(), b.size()));
  };
  const int amb = f.n + 2;
  // Boundary: s = 0, values = shift_w; spanned by the y-directions.
  Vec origin = Vec::Zero(amb);
  origin(0) = shift_t;
  origin.tail(2) = shift_w;
  Eigen::MatrixXd ab(amb, m);
  for (int j = 0; j < m; ++j) {
    Vec d = Vec::Zero(amb);
    d(1 + j) = 1.0;
    if (j == 0) d(0) = slope;
    ab.col(j) = d;
  }
  const Subspace axis = Subspace::spanned_by(ab, origin);
  auto dir = [&](double t, double w1, double w2) {
    Vec u = Vec::Zero(amb);
    u(0) = t;
    u(amb - 2) = w1;
    u(amb - 1) = w2;
    if (m > 0) u -= Vec(axis.basis() * (axis.basis().transpose() * u));
    return Vec(u.normalized());
  };
  f.cone = Cone::four_half_planes(
      axis, {dir(-1, -1, 0), dir(-1, 1, 0), dir(1, 0, 1), dir(1, 0, -1)}, f.n, 2);
  f.cone_is_exact = true;
  return f;
}

/// w -> {w^{3/2}, -w^{3/2}} over C = R^2 into C, principal square root (cut
/// along the negative real axis).
inline Fixture branched_w32() {
  Fixture f;
  f.id = "branched_w32";
  f.n = 2;
  f.k = 2;
  f.eval = [](const Vec& x) {
    const cplx w(x(0), x(1));
    const cplx g = w * std::sqrt(w);
    return Pair2(cvec(g), cvec(-g));
  };
  f.derivative = [](const Vec& x) {
    const cplx w(x(0), x(1));
    const cplx d = 1.5 * std::sqrt(w);
    return Pair2(cmul_matrix(d), cmul_matrix(-d));
  };
  return f;
}

/// {0, a z + b z^2} over C into C: two holomorphic sheets crossing
/// transversally at 0 with tangent cone {w = 0} ∪ {w = a z}.
inline Fixture holo_pair_curved(double a = 1.0, double b = 1.0) {
  Fixture f;
  f.id = "holo_pair_curved";
  f.n = 2;
  f.k = 2;
  f.eval = [=](const Vec& x) {
    const cplx z(x(0), x(1));
    return Pair2(Vec::Zero(2), cvec(a * z + b * z * z));
  };
  f.derivative = [=](const Vec& x) {
    const cplx z(x(0), x(1));
    return Pair2(Vec::Zero(4), cmul_matrix(a + 2.0 * b * z));
  };
  Eigen::MatrixXd l2(2, 2);
  l2 << a, 0.0, 0.0, a;
  f.cone = Cone::pair(graph_plane(Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(2)),
                      graph_plane(l2, Eigen::VectorXd::Zero(2)), 2, 2);
  f.cone_is_exact = (b == 0.0);
  return f;
}

/// x -> {F(x), F(x)}: the Lawson-Osserman cone counted twice.
inline Fixture hopf_lo_cone() {
  Fixture f;
  f.id = "hopf_lo_cone";
  f.n = 4;
  f.k = 3;
  f.eval = [](const Vec& x) { return Pair2::doubled(lawson_osserman(x)); };
  return f;
}

/// x -> {F(x), -F(x)}.
inline Fixture lo_two_valued() {
  Fixture f;
  f.id = "lo_two_valued";
  f.n = 4;
  f.k = 3;
  f.eval = [](const Vec& x) {
    const Vec v = lawson_osserman(x);
    return Pair2(v, Vec(-v));
  };
  return f;
}

/// Homogeneous cone over R^2 into R^2 whose link has a doubled arc:
/// {0, 0} for t <= 0 and {t u, t v} for t > 0. Not stationary.
inline Fixture doubled_arc_cone(const Eigen::Vector2d& u = Eigen::Vector2d(1.0, 0.5),
                                const Eigen::Vector2d& v = Eigen::Vector2d(-0.5, 1.0)) {
  Fixture f;
  f.id = "doubled_arc_cone";
  f.n = 2;
  f.k = 2;
  f.minimal = false;
  f.eval = [=](const Vec& x) {
    const double t = x(0);
    if (t <= 0.0) return Pair2::doubled(Vec::Zero(2));
    return Pair2(Vec(t * u), Vec(t * v));
  };
  return f;
}

/// Non-minimal single-valued sheet x -> (|x|^2, 0), doubled.
inline Fixture paraboloid_sheet(int n = 2) {
  Fixture f;
  f.id = "paraboloid";
  f.n = n;
  f.k = 2;
  f.minimal = false;
  f.eval = [](const Vec& x) { return Pair2::doubled(vec_of({x.squaredNorm(), 0.0})); };
  return f;
}

/// Registered fixture ids and their parameters.
inline Fixture make_fixture(const FixtureSpec& spec) {
  const std::string& id = spec.id;
  if (id == "pair_planes" || id == "transverse_pair") return transverse_pair();
  if (id == "axis_line") return axis_line_pair(spec.param("slope", 1.0));
  if (id == "parallel_planes")
    return parallel_planes(static_cast<int>(spec.param("n", 2)), static_cast<int>(spec.param("k", 1)),
                           spec.param("gap", 0.5));
  if (id == "four_half_planes")
    return four_half_planes(static_cast<int>(spec.param("m", 0)), spec.param("tilt", 0.0),
                            spec.param("shift", 0.0));
  if (id == "hopf_lo_cone") return hopf_lo_cone();
  if (id == "lo_two_valued") return lo_two_valued();
  if (id == "branched_w32") return branched_w32();
  if (id == "holo_pair_curved") return holo_pair_curved(spec.param("a", 1.0), spec.param("b", 1.0));
  if (id == "tilted_plane") return tilted_plane(spec.param("slope", 0.25), spec.param("gap", 1.0));
  if (id == "doubled_arc_cone") return doubled_arc_cone();
  throw Error(ErrorKind::invalid_input, "unknown fixture id: " + id);
}

inline TwoValuedGrid generate(const Fixture& f, double h, double radius) {
  return TwoValuedGrid::sample(f.n, f.k, radius, h, f.eval);
}

inline TwoValuedGrid generate(const FixtureSpec& spec) {
  return generate(make_fixture(spec), spec.h, spec.radius);
}

/// Grid of derivative samples {Df, -Df} (or the fixture's pair of Jacobians).
inline TwoValuedGrid generate_derivative(const Fixture& f, double h, double radius) {
  require(static_cast<bool>(f.derivative), ErrorKind::invalid_input,
          "fixture has no analytic derivative");
  return TwoValuedGrid::sample(f.n, f.k * f.n, radius, h, f.derivative);
}

/// Union of half-lines from the origin in R^{1+k}, sampled at spacing h up to
/// `radius` with one sample per segment midpoint. Used for junction tests,
/// e.g. three of the four rays of the four-half-plane cross-section.
inline SampledVarifold ray_fan(const std::vector<Vec>& directions, double h, double radius,
                               const std::string& provenance = "ray_fan") {
  const int amb = static_cast<int>(directions.front().size());
  SampledVarifold v(1, amb - 1, h, provenance);
  const int steps = static_cast<int>(std::floor(radius / h + 1e-9));
  int label = 0;
  for (const auto& d0 : directions) {
    const Vec d = d0.normalized();
    Eigen::MatrixXd t(amb, 1);
    t.col(0) = d;
    for (int j = 0; j < steps; ++j) v.add(Vec((j + 0.5) * h * d), h, t, label, true);
    ++label;
  }
  return v;
}

/// Directions of the four half-lines of the one-dimensional cross-section.
inline std::vector<Vec> four_ray_directions() {
  const double s = 1.0 / std::sqrt(2.0);
  return {vec_of({-s, -s, 0}), vec_of({-s, s, 0}), vec_of({s, 0, s}), vec_of({s, 0, -s})};
}

/// The deliberately unbalanced junction: three of the four rays.
inline SampledVarifold broken_three_rays(double h, double radius = 1.0) {
  auto d = four_ray_directions();
  d.pop_back();
  return ray_fan(d, h, radius, "broken_three_rays");
}

}  // namespace twograph
