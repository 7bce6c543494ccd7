#pragma once

#include "excess.hpp"
#include "quasi_random.hpp"
#include "varifold.hpp"

#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace twograph {

enum class ConeClass { pair, four_hp };

inline const char* to_string(ConeClass c) { return c == ConeClass::pair ? "pair" : "four_hp"; }

inline ConeClass class_of(const Cone& c) { return c.is_pair() ? ConeClass::pair : ConeClass::four_hp; }

// ---------------------------------------------------------------------------
// Flat geometry of a cone through the origin, for fast residual evaluation

namespace detail {

struct FlatPiece {
  int dim = 0;
  std::array<double, kMaxDim * kMaxDim> basis{};  // column-major, d x dim
  bool half = false;
  std::array<double, kMaxDim> side{};
};

struct FlatCone {
  int d = 0, m = 0;
  std::array<double, kMaxDim * kMaxDim> axis{};  // d x m
  std::vector<FlatPiece> pieces;

  static FlatCone from(const Cone& c) {
    FlatCone f;
    f.d = c.ambient_dim();
    f.m = c.has_axis() ? c.axis_dim() : 0;
    if (f.m > 0)
      for (int j = 0; j < f.m; ++j)
        for (int r = 0; r < f.d; ++r) f.axis[j * f.d + r] = c.axis().basis()(r, j);
    for (const auto& p : c.pieces()) {
      FlatPiece q;
      q.half = p.is_half();
      if (q.half) {
        q.dim = 1;
        for (int r = 0; r < f.d; ++r) q.side[r] = p.side(r);
      } else {
        q.dim = p.plane.dim();
        for (int j = 0; j < q.dim; ++j)
          for (int r = 0; r < f.d; ++r) q.basis[j * f.d + r] = p.plane.basis()(r, j);
      }
      f.pieces.push_back(q);
    }
    return f;
  }

  /// out = x - nearest point of the support.
  void residual(const double* x, double* out) const {
    double best = std::numeric_limits<double>::infinity();
    double proj[kMaxDim];
    for (const auto& p : pieces) {
      for (int r = 0; r < d; ++r) proj[r] = 0.0;
      if (p.half) {
        for (int j = 0; j < m; ++j) {
          double c = 0.0;
          for (int r = 0; r < d; ++r) c += axis[j * d + r] * x[r];
          for (int r = 0; r < d; ++r) proj[r] += c * axis[j * d + r];
        }
        double c = 0.0;
        for (int r = 0; r < d; ++r) c += p.side[r] * x[r];
        if (c > 0.0)
          for (int r = 0; r < d; ++r) proj[r] += c * p.side[r];
      } else {
        for (int j = 0; j < p.dim; ++j) {
          double c = 0.0;
          for (int r = 0; r < d; ++r) c += p.basis[j * d + r] * x[r];
          for (int r = 0; r < d; ++r) proj[r] += c * p.basis[j * d + r];
        }
      }
      double s = 0.0;
      for (int r = 0; r < d; ++r) s += (x[r] - proj[r]) * (x[r] - proj[r]);
      if (s < best) {
        best = s;
        for (int r = 0; r < d; ++r) out[r] = x[r] - proj[r];
      }
    }
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Parameterization

/// Chart of cones near a reference cone through the origin, in the frame
/// where the reference axis A occupies the last m coordinates. Parameters:
/// an optional rotation block (Cayley transform of generators mixing A with
/// its complement, m(d-m) entries), then per piece either a k x l matrix
/// tilting the cross-section of a plane (plane = A ⊕ graph over the reference
/// cross-section, l = n - m) or k coordinates moving a half-plane direction
/// along the tangent space of the unit sphere of the axis complement.
/// Every decoded cone contains the rotated reference axis.
class ConeChart {
 public:
  ConeChart() = default;
  ConeChart(const Cone& reference, bool allow_rotation = true)
      : ref_(reference), rotate_(allow_rotation) {
    require(reference.has_axis(), ErrorKind::undefined, "ConeChart: reference cone needs an axis");
    require(reference.through_origin(1e-9), ErrorKind::invalid_input,
            "ConeChart: reference cone must contain the origin in its axis");
    d_ = reference.ambient_dim();
    n_ = reference.n();
    k_ = reference.k();
    m_ = reference.axis_dim();
    const AlignmentFrame fr = align(reference);
    q_ = fr.rotation;  // aligned = q X
    const int c = d_ - m_;
    for (const auto& p : reference.pieces()) {
      if (reference.is_pair()) {
        const Eigen::MatrixXd aligned = q_ * p.plane.basis();
        const Eigen::MatrixXd cross = span_basis(aligned.topRows(c));
        require(cross.cols() == n_ - m_, ErrorKind::invalid_input,
                "ConeChart: plane cross-section has unexpected dimension");
        cross_.push_back(cross);
        normal_.push_back(complement_basis(cross, c));
      } else {
        const Eigen::VectorXd w = (q_ * p.side).head(c).normalized();
        cross_.push_back(w);
        normal_.push_back(complement_basis(w, c));
      }
    }
  }

  const Cone& reference() const { return ref_; }
  int rotation_size() const { return rotate_ ? m_ * (d_ - m_) : 0; }
  int piece_size() const { return ref_.is_pair() ? k_ * (n_ - m_) : k_; }
  int size() const { return rotation_size() + static_cast<int>(cross_.size()) * piece_size(); }

  /// Decoded cone, or nullopt when the parameters leave the valid region
  /// (coinciding planes, degenerate directions).
  std::optional<Cone> decode(const Eigen::VectorXd& theta) const {
    require(theta.size() == size(), ErrorKind::dimension_mismatch, "ConeChart: parameter count");
    const int c = d_ - m_;
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Identity(d_, d_);
    int at = 0;
    if (rotation_size() > 0) {
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d_, d_);
      for (int a = 0; a < m_; ++a)
        for (int b = 0; b < c; ++b) {
          s(c + a, b) = theta(at);
          s(b, c + a) = -theta(at);
          ++at;
        }
      gamma = cayley(s);
    }
    const Eigen::MatrixXd to_world = q_.transpose() * gamma;
    Eigen::MatrixXd axis_aligned = Eigen::MatrixXd::Zero(d_, m_);
    for (int a = 0; a < m_; ++a) axis_aligned(c + a, a) = 1.0;
    const Eigen::MatrixXd axis_world = to_world * axis_aligned;
    try {
      if (ref_.is_pair()) {
        const int l = n_ - m_;
        std::array<Subspace, 2> planes;
        for (int i = 0; i < 2; ++i) {
          Eigen::Map<const Eigen::MatrixXd> mi(theta.data() + at, k_, l);
          at += k_ * l;
          const Eigen::MatrixXd e = cross_[i] + normal_[i] * mi;
          Eigen::MatrixXd full = Eigen::MatrixXd::Zero(d_, n_);
          full.topLeftCorner(c, l) = e;
          full.rightCols(m_) = axis_aligned;
          const Eigen::MatrixXd world = to_world * full;
          if (orthonormalize(world, 1e-8).cols() != n_) return std::nullopt;
          planes[i] = Subspace::spanned_by(world);
        }
        const Eigen::VectorXd ang = principal_angles(planes[0].basis(), planes[1].basis());
        if (ang.size() == 0 || ang.maxCoeff() < 1e-7) return std::nullopt;
        return Cone::pair(planes[0], planes[1], n_, k_);
      }
      std::array<Vec, 4> dirs;
      for (int i = 0; i < 4; ++i) {
        Eigen::Map<const Eigen::VectorXd> ti(theta.data() + at, k_);
        at += k_;
        Eigen::VectorXd w = Eigen::VectorXd::Zero(d_);
        w.head(c) = (cross_[i] + normal_[i] * ti).normalized();
        dirs[i] = to_world * w;
      }
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < i; ++j)
          if ((dirs[i] - dirs[j]).norm() < 1e-7) return std::nullopt;
      const Subspace axis = m_ > 0 ? Subspace::spanned_by(axis_world, Vec::Zero(d_))
                                   : Subspace::point(Vec::Zero(d_));
      return Cone::four_half_planes(axis, dirs, n_, k_);
    } catch (const Error&) {
      return std::nullopt;
    }
  }

 private:
  Cone ref_;
  bool rotate_ = true;
  int d_ = 0, n_ = 0, k_ = 0, m_ = 0;
  Eigen::MatrixXd q_;
  std::vector<Eigen::MatrixXd> cross_, normal_;
};

/// A point of a chart: reference cone plus parameters.
struct ConeParams {
  ConeChart chart;
  Eigen::VectorXd values;
  std::optional<Cone> decode() const { return chart.decode(values); }
};

// ---------------------------------------------------------------------------
// Least-squares fit

struct FitOptions {
  int restarts = 4;
  std::uint64_t seed = 0;
  int max_iterations = 50;
  double perturbation = 0.3;  // std. dev. of random restart parameters
  double step = 1e-6;         // central-difference step
  bool allow_rotation = true;
  // When positive, sample weights are multiplied by (1 - |X|^2/taper^2)^4.
  // The smooth cutoff keeps lattice-point noise at the region boundary from
  // steering the fit; the reported excess stays the untapered one.
  double taper = 0.0;
};

struct FitResult {
  Cone cone;
  double excess = 0.0;
  double initial_excess = 0.0;  // excess_E of C0 over the region (same class only)
  int iterations = 0;
  int restarts = 0;
  int valid_restarts = 0;
};

namespace detail {

/// Samples of V inside a region, stored flat.
struct FitData {
  int d = 0;
  std::vector<double> pts;
  std::vector<double> sqrt_w;
  double mass = 0.0;
  std::size_t size() const { return sqrt_w.size(); }
};

inline FitData collect(const SampledVarifold& v, const Region& r, double taper = 0.0) {
  FitData f;
  f.d = v.ambient_dim();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec x = v.point(i);
    if (!region_contains(r, x)) continue;
    double w = v.weight(i);
    if (taper > 0.0) {
      const double u = std::max(0.0, 1.0 - x.squaredNorm() / (taper * taper));
      w *= u * u * u * u;
    }
    f.pts.insert(f.pts.end(), x.data(), x.data() + f.d);
    f.sqrt_w.push_back(std::sqrt(w));
    f.mass += v.weight(i);
  }
  return f;
}

inline double cost(const FitData& data, const FlatCone& c) {
  return parallel_sum(data.size(), [&](std::size_t i) {
    double r[kMaxDim];
    c.residual(data.pts.data() + i * data.d, r);
    double s = 0.0;
    for (int j = 0; j < data.d; ++j) s += r[j] * r[j];
    return data.sqrt_w[i] * data.sqrt_w[i] * s;
  });
}

struct NormalEq {
  Eigen::MatrixXd jtj;
  Eigen::VectorXd jtr;
  double cost = 0.0;
};

/// Normal equations of the residual vector sqrt(w)(X - nearest point) with a
/// central-difference Jacobian, accumulated sample by sample.
inline NormalEq normal_equations(const FitData& data, const FlatCone& center,
                                 const std::vector<FlatCone>& plus, const std::vector<FlatCone>& minus,
                                 double step) {
  const int p = static_cast<int>(plus.size()), d = data.d;
  NormalEq init{Eigen::MatrixXd::Zero(p, p), Eigen::VectorXd::Zero(p), 0.0};
  return parallel_reduce(
      data.size(), init,
      [&](std::size_t lo, std::size_t hi) {
        NormalEq acc{Eigen::MatrixXd::Zero(p, p), Eigen::VectorXd::Zero(p), 0.0};
        Eigen::MatrixXd jac(d, p);
        Eigen::VectorXd r0(d);
        double rp[kMaxDim], rm[kMaxDim];
        for (std::size_t i = lo; i < hi; ++i) {
          const double* x = data.pts.data() + i * d;
          const double sw = data.sqrt_w[i];
          center.residual(x, r0.data());
          r0 *= sw;
          for (int q = 0; q < p; ++q) {
            plus[q].residual(x, rp);
            minus[q].residual(x, rm);
            for (int j = 0; j < d; ++j) jac(j, q) = sw * (rp[j] - rm[j]) / (2.0 * step);
          }
          acc.jtj.noalias() += jac.transpose() * jac;
          acc.jtr.noalias() += jac.transpose() * r0;
          acc.cost += r0.squaredNorm();
        }
        return acc;
      },
      [](NormalEq a, const NormalEq& b) {
        a.jtj += b.jtj;
        a.jtr += b.jtr;
        a.cost += b.cost;
        return a;
      });
}

struct LmOutcome {
  Eigen::VectorXd theta;
  double cost = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

inline LmOutcome levenberg_marquardt(const FitData& data, const ConeChart& chart, Eigen::VectorXd theta,
                                     const FitOptions& opt) {
  LmOutcome out;
  auto flat = [&](const Eigen::VectorXd& t) -> std::optional<FlatCone> {
    auto c = chart.decode(t);
    if (!c) return std::nullopt;
    return FlatCone::from(*c);
  };
  auto start = flat(theta);
  if (!start) return out;
  double cur = cost(data, *start);
  out.theta = theta;
  out.cost = cur;
  const int p = chart.size();
  if (p == 0) return out;
  const double floor = 1e-30 * std::max(data.mass, 1.0);
  double lambda = 1e-3;
  for (int it = 0; it < opt.max_iterations && cur > floor; ++it) {
    out.iterations = it + 1;
    std::vector<FlatCone> plus, minus;
    bool ok = true;
    for (int q = 0; q < p && ok; ++q) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp(q) += opt.step;
      tm(q) -= opt.step;
      auto a = flat(tp), b = flat(tm);
      if (!a || !b) ok = false;
      else {
        plus.push_back(*a);
        minus.push_back(*b);
      }
    }
    if (!ok) break;
    const NormalEq ne = normal_equations(data, *flat(theta), plus, minus, opt.step);
    bool accepted = false;
    for (int tries = 0; tries < 12 && !accepted; ++tries) {
      Eigen::MatrixXd a = ne.jtj;
      for (int q = 0; q < p; ++q) a(q, q) += lambda * std::max(ne.jtj(q, q), 1e-12);
      const Eigen::VectorXd delta = a.ldlt().solve(-ne.jtr);
      if (!delta.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd cand = theta + delta;
      auto fc = flat(cand);
      const double c = fc ? cost(data, *fc) : std::numeric_limits<double>::infinity();
      if (c < cur) {
        const double gain = cur - c;
        theta = cand;
        cur = c;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (gain <= 1e-15 * cur || delta.norm() < 1e-14) it = opt.max_iterations;
      } else {
        lambda *= 4.0;
      }
    }
    if (!accepted) break;
  }
  out.theta = theta;
  out.cost = cur;
  return out;
}

/// Starting references for a requested class: the cone itself when the
/// classes match, otherwise pairs or four half-planes built from its pieces.
inline std::vector<Cone> fit_references(ConeClass cls, const Cone& c0) {
  if (class_of(c0) == cls) return {c0};
  std::vector<Cone> out;
  const int n = c0.n(), k = c0.k(), d = c0.ambient_dim();
  if (cls == ConeClass::pair) {
    // planes axis ⊕ span(ω_a) and axis ⊕ span(ω_b) for the six index pairs
    const auto dirs = c0.directions();
    const Eigen::MatrixXd ab = c0.axis().basis();
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        Eigen::MatrixXd pa(d, n), pb(d, n);
        if (n > 1) {
          pa.leftCols(n - 1) = ab;
          pb.leftCols(n - 1) = ab;
        }
        pa.col(n - 1) = dirs[a];
        pb.col(n - 1) = dirs[b];
        try {
          out.push_back(Cone::pair(Subspace::spanned_by(pa), Subspace::spanned_by(pb), n, k));
        } catch (const Error&) {
        }
      }
    return out;
  }
  // four half-planes from a pair whose axis has dimension n - 1
  require(c0.has_axis() && c0.axis_dim() == n - 1, ErrorKind::invalid_input,
          "fit_cone: a pair initializes four half-planes only when its axis is (n-1)-dimensional");
  const AlignmentFrame fr = align(c0);
  std::array<Vec, 4> dirs{fr.directions[0], Vec(-fr.directions[0]), fr.directions[1],
                          Vec(-fr.directions[1])};
  out.push_back(Cone::four_half_planes(Subspace::spanned_by(c0.axis().basis()), dirs, n, k));
  return out;
}

}  // namespace detail

/// Cone of the requested class minimizing excess_E(V, ·, region), by
/// Levenberg-Marquardt from the reference (and, for mismatched classes, the
/// references derived from it) plus seeded random restarts.
inline FitResult fit_cone(const SampledVarifold& v, ConeClass cls, const Cone& c0, const Region& region,
                          const FitOptions& opt = {}) {
  require(opt.restarts >= 1, ErrorKind::invalid_input, "fit_cone: need at least one restart");
  require_dim(v.ambient_dim(), c0.ambient_dim(), "fit_cone");
  const detail::FitData data = detail::collect(v, region, opt.taper);
  require(data.size() > 0, ErrorKind::invalid_input, "fit_cone: no samples in the region");
  std::vector<ConeChart> charts;
  for (const auto& ref : detail::fit_references(cls, c0)) charts.emplace_back(ref, opt.allow_rotation);
  require(!charts.empty(), ErrorKind::invalid_input, "fit_cone: no admissible starting cone");
  Rng rng(opt.seed);
  FitResult best;
  best.excess = std::numeric_limits<double>::infinity();
  const int total = std::max<int>(opt.restarts, static_cast<int>(charts.size()));
  for (int r = 0; r < total; ++r) {
    const ConeChart& chart = charts[r % charts.size()];
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(chart.size());
    if (r >= static_cast<int>(charts.size()))
      for (Eigen::Index q = 0; q < theta.size(); ++q) theta(q) = opt.perturbation * rng.normal();
    const auto lm = detail::levenberg_marquardt(data, chart, theta, opt);
    ++best.restarts;
    if (!std::isfinite(lm.cost)) continue;
    ++best.valid_restarts;
    best.iterations += lm.iterations;
    if (lm.cost < best.excess) {
      best.excess = lm.cost;
      best.cone = *chart.decode(lm.theta);
    }
  }
  require(best.valid_restarts > 0, ErrorKind::numerical, "fit_cone: every restart left the valid region");
  if (class_of(c0) == cls && detail::cost(data, detail::FlatCone::from(c0)) <= best.excess) best.cone = c0;
  const detail::FitData plain = opt.taper > 0.0 ? detail::collect(v, region) : data;
  best.excess = detail::cost(plain, detail::FlatCone::from(best.cone));
  if (class_of(c0) == cls) best.initial_excess = detail::cost(plain, detail::FlatCone::from(c0));
  return best;
}

// ---------------------------------------------------------------------------
// Coarser excess

struct CoarserResult {
  double excess = 0.0;
  Cone cone;
  Vec added_direction;
};

/// Minimum of excess_E(V, D, region) over pairs D whose axis strictly
/// contains A(C) and lies in A(C0): for each basis direction u of
/// A(C0) ⊖ A(C), pairs containing A(C) ⊕ span(u) are fitted with the axis held fixed.
inline CoarserResult coarser_excess(const SampledVarifold& v, const Cone& c, const Cone& c0,
                                    const Region& region, const FitOptions& opt = {}) {
  require(c.is_pair(), ErrorKind::invalid_input, "coarser_excess: C must be a pair of planes");
  require(c.has_axis() && c0.has_axis(), ErrorKind::undefined, "coarser_excess: cones need axes");
  const int d = c.ambient_dim(), n = c.n(), k = c.k();
  const Eigen::MatrixXd a = c.axis().basis(), a0 = c0.axis().basis();
  // directions of A(C0) orthogonal to A(C)
  Eigen::MatrixXd extra = a0 - a * (a.transpose() * a0);
  extra = span_basis(extra);
  require(extra.cols() > 0 && a.cols() < n, ErrorKind::invalid_input,
          "coarser_excess: no strictly larger admissible axis");
  CoarserResult best;
  best.excess = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < extra.cols(); ++j) {
    const Vec u = extra.col(j);
    Eigen::MatrixXd w(d, a.cols() + 1);
    w << a, u;
    std::array<Subspace, 2> planes;
    bool ok = true;
    for (int i = 0; i < 2 && ok; ++i) {
      // cross-section of plane i orthogonal to W, keeping its n - dim W main directions
      const Eigen::MatrixXd b = c.pieces()[i].plane.basis();
      const Eigen::MatrixXd rest = b - w * (w.transpose() * b);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(rest, Eigen::ComputeThinU);
      const int keep = n - static_cast<int>(w.cols());
      Eigen::MatrixXd span(d, n);
      span << w, svd.matrixU().leftCols(keep);
      if (orthonormalize(span, 1e-8).cols() != n) ok = false;
      else planes[i] = Subspace::spanned_by(span);
    }
    // the local fit only sees one basin; seed it also from the best pair of a
    // coarse random family of planes containing W
    std::vector<Subspace> family;
    if (ok) family = {planes[0], planes[1]};
    const Eigen::MatrixXd comp = complement_basis(w, d);
    const int keep = n - static_cast<int>(w.cols());
    Rng rng(opt.seed + 7919 * static_cast<std::uint64_t>(j));
    while (family.size() < 18) {
      Eigen::MatrixXd g(comp.cols(), keep);
      for (Eigen::Index r = 0; r < g.rows(); ++r)
        for (Eigen::Index q = 0; q < keep; ++q) g(r, q) = rng.normal();
      Eigen::MatrixXd span(d, n);
      span << w, comp * g;
      if (orthonormalize(span, 1e-8).cols() == n) family.push_back(Subspace::spanned_by(span));
    }
    std::vector<Cone> starts;
    if (ok && !planes[0].same_as(planes[1], 1e-9)) starts.push_back(Cone::pair(planes[0], planes[1], n, k));
    double seed_cost = std::numeric_limits<double>::infinity();
    std::optional<Cone> seed;
    for (std::size_t p = 0; p < family.size(); ++p)
      for (std::size_t q = p + 1; q < family.size(); ++q) {
        if (family[p].same_as(family[q], 1e-9)) continue;
        const Cone cand = Cone::pair(family[p], family[q], n, k);
        const double e = excess_E(v, cand, region);
        if (e < seed_cost) {
          seed_cost = e;
          seed = cand;
        }
      }
    if (seed) starts.push_back(*seed);
    FitOptions o = opt;
    o.allow_rotation = false;
    for (const Cone& start : starts) {
      const FitResult fit = fit_cone(v, ConeClass::pair, start, region, o);
      if (fit.excess < best.excess) {
        best.excess = fit.excess;
        best.cone = fit.cone;
        best.added_direction = u;
      }
    }
  }
  require(std::isfinite(best.excess), ErrorKind::numerical, "coarser_excess: no admissible pair found");
  return best;
}

// ---------------------------------------------------------------------------
// Singular set as a graph over the axis

struct SingularGraphFit {
  int m = 0;          // axis dimension
  int degree = 0;
  std::vector<std::vector<int>> monomials;
  Eigen::MatrixXd coefficients;  // monomials x (d - m), complement coordinates
  Eigen::MatrixXd axis_basis;    // d x m
  Eigen::MatrixXd complement;    // d x (d - m)
  Vec origin;
  std::size_t detected = 0;
  double residual_sup = 0.0;
  double holder_alpha = 1.0;
  double holder_seminorm = 0.0;  // of Dφ over the sampled axis ball

  /// φ(y) as an ambient vector in the axis complement.
  Vec eval(const Eigen::VectorXd& y) const {
    Eigen::VectorXd row(monomials.size());
    for (std::size_t t = 0; t < monomials.size(); ++t) {
      double v = 1.0;
      for (int a = 0; a < m; ++a) v *= std::pow(y(a), monomials[t][a]);
      row(t) = v;
    }
    return complement * (coefficients.transpose() * row);
  }

  /// Dφ(y) as a d x m matrix.
  Eigen::MatrixXd derivative(const Eigen::VectorXd& y) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(complement.rows(), m);
    for (int a = 0; a < m; ++a) {
      Eigen::VectorXd row(monomials.size());
      for (std::size_t t = 0; t < monomials.size(); ++t) {
        if (monomials[t][a] == 0) {
          row(t) = 0.0;
          continue;
        }
        double v = monomials[t][a] * std::pow(y(a), monomials[t][a] - 1);
        for (int b = 0; b < m; ++b)
          if (b != a) v *= std::pow(y(b), monomials[t][b]);
        row(t) = v;
      }
      out.col(a) = complement * (coefficients.transpose() * row);
    }
    return out;
  }
};

namespace detail {

inline std::vector<std::vector<int>> monomials_up_to(int m, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> e(m, 0);
  std::function<void(int, int)> rec = [&](int a, int left) {
    if (a == m) {
      out.push_back(e);
      return;
    }
    for (int p = 0; p <= left; ++p) {
      e[a] = p;
      rec(a + 1, left - p);
    }
    e[a] = 0;
  };
  rec(0, degree);
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    int sx = 0, sy = 0;
    for (int v : x) sx += v;
    for (int v : y) sy += v;
    return sx < sy;
  });
  return out;
}

}  // namespace detail

/// Samples whose density ratio at radius 16h reaches 2 - kDensitySlack.
/// Cell centres sit about h/2 off a crease, which at radius 4h already costs
/// more than the slack; at 16h only samples within about h of it pass.
inline std::vector<std::size_t> detect_singular_samples(const SampledVarifold& v, const Region& region) {
  const double rho = 4.0 * kDensityFloorCells * v.h();
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (region_contains(region, v.point(i))) cand.push_back(i);
  std::vector<char> hit(cand.size(), 0);
  parallel_for(cand.size(), [&](std::size_t j) {
    hit[j] = density_ratio(v, v.point(cand[j]), rho) >= 2.0 - kDensitySlack;
  });
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < cand.size(); ++j)
    if (hit[j]) out.push_back(cand[j]);
  return out;
}

/// Least-squares polynomial φ: A(C0) -> A(C0)^⊥ of degree at most 3 through
/// the detected high-density samples in the region.
inline SingularGraphFit singular_graph_fit(const SampledVarifold& v, const Cone& c0, const Region& region,
                                           double holder_alpha = 1.0) {
  require(c0.has_axis(), ErrorKind::undefined, "singular_graph_fit: cone needs an axis");
  const auto hits = detect_singular_samples(v, region);
  require(!hits.empty(), ErrorKind::precondition, "singular_graph_fit: no high-density points detected");
  SingularGraphFit fit;
  const Subspace& axis = c0.axis();
  fit.m = axis.dim();
  fit.axis_basis = axis.basis();
  fit.complement = complement_basis(fit.axis_basis, c0.ambient_dim());
  fit.origin = axis.offset();
  fit.detected = hits.size();
  fit.holder_alpha = holder_alpha;
  const int m = fit.m, c = static_cast<int>(fit.complement.cols());
  const std::size_t count = hits.size();
  Eigen::MatrixXd ys(count, std::max(m, 1)), zs(count, c);
  for (std::size_t j = 0; j < count; ++j) {
    const Vec rel = v.point(hits[j]) - fit.origin;
    if (m > 0) ys.row(j) = (fit.axis_basis.transpose() * rel).transpose();
    zs.row(j) = (fit.complement.transpose() * rel).transpose();
  }
  // one cluster per axis fiber: points chained at distance <= 3h form a
  // cluster, and a fiber (axis coordinates within h) must not meet two
  const double h = v.h();
  std::vector<double> all;
  all.reserve(count * v.ambient_dim());
  for (std::size_t j = 0; j < count; ++j) {
    const Vec x = v.point(hits[j]);
    all.insert(all.end(), x.data(), x.data() + x.size());
  }
  std::vector<std::size_t> parent(count);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> root = [&](std::size_t a) {
    return parent[a] == a ? a : parent[a] = root(parent[a]);
  };
  {
    KdTree tree(all, v.ambient_dim());
    std::vector<std::size_t> near;
    for (std::size_t a = 0; a < count; ++a) {
      near.clear();
      tree.within(Eigen::VectorXd(v.point(hits[a])), 3.0 * h, near);
      for (auto b : near) parent[root(b)] = root(a);
    }
  }
  if (m == 0) {
    for (std::size_t a = 1; a < count; ++a)
      require(root(a) == root(0), ErrorKind::structure, "singular_graph_fit: not graphical over axis");
  } else {
    std::vector<double> coords;
    coords.reserve(count * m);
    for (std::size_t j = 0; j < count; ++j)
      for (int a = 0; a < m; ++a) coords.push_back(ys(j, a));
    KdTree tree(coords, m);
    std::vector<std::size_t> near;
    for (std::size_t a = 0; a < count; ++a) {
      near.clear();
      tree.within(Eigen::VectorXd(ys.row(a).transpose()), h, near);
      for (auto b : near)
        require(root(a) == root(b), ErrorKind::structure, "singular_graph_fit: not graphical over axis");
    }
  }
  // highest degree <= 3 with a well-posed design
  for (int deg = (m == 0 ? 0 : 3); deg >= 0; --deg) {
    const auto mons = detail::monomials_up_to(m, deg);
    if (count < 2 * mons.size() && deg > 0) continue;
    Eigen::MatrixXd design(count, mons.size());
    for (std::size_t j = 0; j < count; ++j)
      for (std::size_t t = 0; t < mons.size(); ++t) {
        double val = 1.0;
        for (int a = 0; a < m; ++a) val *= std::pow(ys(j, a), mons[t][a]);
        design(j, t) = val;
      }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-9);
    if (qr.rank() < static_cast<Eigen::Index>(mons.size())) continue;
    fit.degree = deg;
    fit.monomials = mons;
    fit.coefficients = qr.solve(zs);
    fit.residual_sup = (design * fit.coefficients - zs).rowwise().norm().maxCoeff();
    break;
  }
  require(!fit.monomials.empty(), ErrorKind::numerical, "singular_graph_fit: degenerate detected set");
  if (m > 0 && fit.degree > 1) {
    // Hölder seminorm of Dφ over the spread of detected axis coordinates
    std::vector<Eigen::VectorXd> probe;
    const std::size_t stride = std::max<std::size_t>(1, count / 200);
    for (std::size_t j = 0; j < count; j += stride) probe.push_back(ys.row(j).transpose());
    for (std::size_t a = 0; a < probe.size(); ++a)
      for (std::size_t b = a + 1; b < probe.size(); ++b) {
        const double dist = (probe[a] - probe[b]).norm();
        if (dist < 1e-12) continue;
        const double diff = (fit.derivative(probe[a]) - fit.derivative(probe[b])).norm();
        fit.holder_seminorm = std::max(fit.holder_seminorm, diff / std::pow(dist, holder_alpha));
      }
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Excess decay pipeline

struct DecayOptions {
  double theta = 0.5;
  int steps = 5;
  Vec center;  // defaults to the origin
  double q_gate = 0.5;
  int first_restarts = 4;
  int restarts = 1;
  std::uint64_t seed = 0;
  int nu_samples = 4000;
  double taper = 1.0;  // smooth cutoff for the per-scale fits, 0 for the hard ball
  bool fit_singular_graph = false;
};

struct DecayRecord {
  int j = 0;
  double scale = 0.0;
  Cone cone;
  Eigen::MatrixXd axis;  // axis basis of the fitted cone
  double one_sided = 0.0;
  double reverse = 0.0;
  double nu_step = 0.0;
  double rotation_step = 0.0;
  double mass = 0.0;
  int iterations = 0;
};

struct DecayReport {
  double theta = 0.5;
  Vec center;
  double h = 0.0;
  double density = 0.0;
  double q = 0.0;
  double q_gate = 0.0;
  bool gate_passed = false;
  std::vector<DecayRecord> records;
  bool truncated = false;
  bool exact_cone = false;
  bool slope_available = false;
  double slope = std::numeric_limits<double>::quiet_NaN();
  int slope_scales = 0;
  double mean_nu_ratio = std::numeric_limits<double>::quiet_NaN();
  std::optional<SingularGraphFit> singular_graph;
};

/// Least-squares slope of log(values) against log(scales), positive values only.
inline std::optional<double> log_log_slope(const std::vector<double>& scales, const std::vector<double>& values,
                                           int min_points = 4) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < scales.size(); ++i)
    if (values[i] > 0.0 && scales[i] > 0.0) {
      xs.push_back(std::log(scales[i]));
      ys.push_back(std::log(values[i]));
    }
  if (static_cast<int>(xs.size()) < min_points) return std::nullopt;
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

/// Fits C^(j) on the dilated balls B_{θ^j}(center) for j = 1..J, each warm
/// started from the previous cone, and records the rescaled excesses.
inline DecayReport decay_pipeline(const SampledVarifold& v, const Cone& c0, const DecayOptions& opt) {
  require(opt.theta > 0.0 && opt.theta < 1.0, ErrorKind::invalid_input, "decay_pipeline: theta must lie in (0,1)");
  require(opt.steps >= 1, ErrorKind::invalid_input, "decay_pipeline: need at least one step");
  const int d = v.ambient_dim();
  DecayReport rep;
  rep.theta = opt.theta;
  rep.center = opt.center.size() ? opt.center : Vec(Vec::Zero(d));
  require_dim(rep.center.size(), d, "decay_pipeline");
  rep.h = v.h();
  rep.q_gate = opt.q_gate;
  const double rho0 = 8.0 * kDensityFloorCells * v.h();
  rep.density = density_ratio(v, rep.center, rho0);
  require(rep.density >= 2.0 - kDensitySlack, ErrorKind::precondition,
          "decay_pipeline: not a Θ ≥ 2 point");
  const Cone base = c0.dilated(rep.center, 1.0);
  if (rep.center.norm() == 0.0) {
    rep.q = excess_Q(v, base).q();
  } else {
    rep.q = excess_Q(v.mapped(Eigen::MatrixXd::Identity(d, d), Vec(-rep.center)), base).q();
  }
  rep.gate_passed = rep.q < opt.q_gate;

  Cone prev = base;
  const ConeClass cls = class_of(c0);
  const Region unit = unit_ball(d);
  for (int j = 1; j <= opt.steps; ++j) {
    const double rho = std::pow(opt.theta, j);
    if (rho < 8.0 * v.h()) {
      rep.truncated = true;
      break;
    }
    const SampledVarifold vj =
        v.restricted(Ball{rep.center, rho * (1.0 + 1e-9)}).dilated(rep.center, rho).restricted(unit);
    FitOptions fo;
    fo.restarts = j == 1 ? opt.first_restarts : opt.restarts;
    fo.seed = opt.seed + static_cast<std::uint64_t>(j);
    fo.taper = opt.taper;
    const FitResult fit = fit_cone(vj, cls, prev, unit, fo);
    DecayRecord rec;
    rec.j = j;
    rec.scale = rho;
    rec.cone = fit.cone;
    rec.axis = fit.cone.has_axis() ? fit.cone.axis().basis() : Eigen::MatrixXd();
    rec.one_sided = fit.excess;
    rec.mass = vj.total_mass();
    rec.iterations = fit.iterations;
    rec.reverse = fit.cone.has_axis()
                      ? excess_Q(vj, fit.cone, ExcessOptions{1.0, 0.125, 1.0}).reverse
                      : 0.0;
    rec.nu_step = nu(fit.cone, prev, opt.nu_samples, opt.seed);
    rec.rotation_step = axis_rotation(fit.cone, prev);
    rep.records.push_back(rec);
    prev = fit.cone;
  }
  require(rep.records.size() > 0, ErrorKind::resolution, "decay_pipeline: first scale already below 8h");

  rep.exact_cone = true;
  for (const auto& r : rep.records)
    if (r.one_sided >= 1e-8 * r.mass || r.reverse >= 1e-8 * r.mass) rep.exact_cone = false;
  std::vector<double> scales, values;
  for (const auto& r : rep.records) {
    scales.push_back(r.scale);
    values.push_back(r.one_sided);
  }
  if (!rep.exact_cone) {
    if (auto s = log_log_slope(scales, values)) {
      rep.slope = *s;
      rep.slope_available = true;
      for (double x : values)
        if (x > 0.0) ++rep.slope_scales;
    }
  }
  if (rep.records.size() >= 2) {
    double sum = 0.0;
    int cnt = 0;
    for (std::size_t i = 1; i < rep.records.size(); ++i)
      if (rep.records[i - 1].nu_step > 0.0) {
        sum += rep.records[i].nu_step / rep.records[i - 1].nu_step;
        ++cnt;
      }
    if (cnt > 0) rep.mean_nu_ratio = sum / cnt;
  }
  if (opt.fit_singular_graph) rep.singular_graph = singular_graph_fit(v, c0, Ball{rep.center, 0.5});
  return rep;
}

}  // namespace twograph
