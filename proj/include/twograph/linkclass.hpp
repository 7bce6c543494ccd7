#pragma once

#include "cones.hpp"
#include "two_valued.hpp"

#include <string>
#include <vector>

namespace twograph {

/// Intersection of a two-valued cone over R^2 with the unit sphere of R^{2+k},
/// sampled over M equally spaced angles of the base circle.
struct LinkSample {
  int k = 0;
  std::vector<double> angles;
  std::vector<std::array<Vec, 2>> fiber;  // unit vectors (x, a_i) / |(x, a_i)|
  std::vector<bool> coincident;
  double coincidence_tol = 1e-8;

  int size() const { return static_cast<int>(angles.size()); }
};

/// Two-valued evaluator of a cone over R^2 given by its pieces.
inline TwoValuedGrid::Evaluator cone_evaluator(const Cone& c) {
  require(c.n() == 2, ErrorKind::invalid_input, "cone_evaluator: link analysis needs a 2-dimensional base");
  const auto graphs = c.graphs();
  return [graphs](const Vec& x) {
    std::vector<Vec> vals;
    for (const auto& g : graphs)
      if (g.admits(x)) vals.push_back(g.slope * x + g.shift);
    require(vals.size() >= 2, ErrorKind::structure, "cone_evaluator: fewer than two sheets over a point");
    return Pair2(vals[0], vals[1]);
  };
}

/// Samples the link; the input must be homogeneous of degree one, checked as
/// G(f(x), 2 f(x/2)) <= 1% of (1 + |f(x)|) at every sampled angle.
inline LinkSample sample_link(const TwoValuedGrid::Evaluator& f, int k, int M,
                              double coincidence_tol = 1e-8) {
  require(M >= 8, ErrorKind::invalid_input, "sample_link: too few angles");
  LinkSample s;
  s.k = k;
  s.coincidence_tol = coincidence_tol;
  s.angles.resize(M);
  s.fiber.resize(M);
  s.coincident.resize(M);
  for (int j = 0; j < M; ++j) {
    const double th = 2.0 * kPi * j / M;
    Vec x(2);
    x << std::cos(th), std::sin(th);
    const Pair2 p = f(x);
    require_dim(p.k(), k, "sample_link");
    const Pair2 half = f(Vec(0.5 * x));
    const Pair2 back(Vec(2.0 * half.a1), Vec(2.0 * half.a2));
    const double scale = 1.0 + std::max(p.a1.norm(), p.a2.norm());
    require(metric_G(p, back) <= 0.01 * scale, ErrorKind::invalid_input,
            "sample_link: input is not homogeneous of degree one");
    s.angles[j] = th;
    for (int i = 0; i < 2; ++i) {
      Vec X(2 + k);
      X << x, (i == 0 ? p.a1 : p.a2);
      s.fiber[j][i] = X.normalized();
    }
    s.coincident[j] = p.separation() < coincidence_tol * scale;
  }
  return s;
}

inline LinkSample sample_link(const Cone& c, int M, double coincidence_tol = 1e-8) {
  return sample_link(cone_evaluator(c), c.k(), M, coincidence_tol);
}

enum class LinkVerdict { two_disjoint_great_circles, four_half_circles, inconsistent };

inline const char* to_string(LinkVerdict v) {
  switch (v) {
    case LinkVerdict::two_disjoint_great_circles: return "two_disjoint_great_circles";
    case LinkVerdict::four_half_circles: return "four_half_circles";
    default: return "inconsistent";
  }
}

struct LinkJunction {
  Vec point;
  double angle = 0.0;
  bool isolated = true;          // a single coincidence, not the end of a doubled arc
  std::vector<Vec> tangents;     // outgoing unit tangents, one per arc end
  std::vector<int> multiplicity;
  double balance = 0.0;          // |Σ multiplicity · tangent|
};

struct LinkClassification {
  LinkVerdict verdict = LinkVerdict::inconsistent;
  std::vector<LinkJunction> junctions;
  std::vector<double> balance_defects;
  std::vector<double> geodesy_residuals;  // per arc or closed curve
  int arcs = 0;
  int doubled_arcs = 0;
  double antipodal_error = 0.0;  // | |θ_0 - θ_1| - π | for two junctions
  std::string diagnostics;
};

struct LinkOptions {
  double geodesy_tol = 1e-3;   // σ_3 <= geodesy_tol · sqrt(samples)
  double balance_tol = 0.1;
  int max_junction_width = 3;  // longer coincidence runs are doubled arcs
};

namespace detail {

/// Third singular value of the samples: zero iff they span at most a 2-plane
/// through the origin, i.e. lie on a great circle.
inline double geodesy_residual(const std::vector<Vec>& pts) {
  if (pts.size() < 3) return 0.0;
  Eigen::MatrixXd m(pts.size(), pts.front().size());
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(i) = pts[i].transpose();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
  return sv.size() > 2 ? sv(2) : 0.0;
}

/// Unit tangent at p0 of the curve through p0, p1, p2 from the one-sided
/// three-point stencil in chord arclength, projected orthogonally to p0.
inline Vec start_tangent(const Vec& p0, const Vec& p1, const Vec& p2) {
  const double s1 = (p1 - p0).norm();
  const double s2 = s1 + (p2 - p1).norm();
  Vec d = -(s1 + s2) / (s1 * s2) * p0 + s2 / (s1 * (s2 - s1)) * p1 - s1 / (s2 * (s2 - s1)) * p2;
  d -= d.dot(p0) * p0;
  return d.normalized();
}

inline bool pair_crossed(const std::array<Vec, 2>& a, const std::array<Vec, 2>& b) {
  const double straight = (a[0] - b[0]).norm() + (a[1] - b[1]).norm();
  const double crossed = (a[0] - b[1]).norm() + (a[1] - b[0]).norm();
  return crossed < straight;
}

struct Arc {
  std::vector<Vec> pts;
  int multiplicity = 1;
  int from = -1, to = -1;  // junction ids
};

}  // namespace detail

/// Decision rules: no coincidences and two closed great circles give the pair
/// verdict; exactly two isolated antipodal junctions joined by four geodesic
/// arcs with balanced tangents give the four-half-circle verdict; anything
/// else is inconsistent.
inline LinkClassification classify_link(const LinkSample& s, const LinkOptions& opt = {}) {
  const int M = s.size();
  require(M >= 64, ErrorKind::invalid_input, "classify_link: need at least 64 angles");
  LinkClassification out;
  std::vector<int> flagged;
  for (int j = 0; j < M; ++j)
    if (s.coincident[j]) flagged.push_back(j);

  if (flagged.empty()) {
    std::array<std::vector<Vec>, 2> curve;
    int cur = 0;
    for (int j = 0; j < M; ++j) {
      if (j > 0 && detail::pair_crossed(s.fiber[j - 1], s.fiber[j])) cur ^= 1;
      curve[0].push_back(s.fiber[j][cur]);
      curve[1].push_back(s.fiber[j][cur ^ 1]);
    }
    if (detail::pair_crossed(s.fiber[M - 1], s.fiber[0])) cur ^= 1;
    out.arcs = 2;
    for (const auto& c : curve) out.geodesy_residuals.push_back(detail::geodesy_residual(c));
    bool geodesic = true;
    for (double r : out.geodesy_residuals) geodesic = geodesic && r <= opt.geodesy_tol * std::sqrt(double(M));
    if (cur != 0) {
      out.diagnostics = "the two fiber points are exchanged once around the circle";
    } else if (!geodesic) {
      out.diagnostics = "a closed curve of the link is not a great circle";
    } else {
      out.verdict = LinkVerdict::two_disjoint_great_circles;
      out.diagnostics = "two disjoint great circles";
    }
    return out;
  }
  if (static_cast<int>(flagged.size()) == M) {
    out.diagnostics = "the link is a doubled curve";
    return out;
  }

  // Runs of equal flag state in circular order, starting at an unflagged-to-flagged switch.
  int start = 0;
  while (!(s.coincident[start] && !s.coincident[(start + M - 1) % M])) ++start;
  struct Run {
    bool flagged;
    int first, len;
  };
  std::vector<Run> runs;
  for (int t = 0; t < M; ++t) {
    const int j = (start + t) % M;
    if (runs.empty() || runs.back().flagged != s.coincident[j]) runs.push_back({s.coincident[j], j, 0});
    ++runs.back().len;
  }
  auto at = [&](int j) { return ((j % M) + M) % M; };
  auto mean_point = [&](int j) { return Vec((s.fiber[j][0] + s.fiber[j][1]).normalized()); };

  // Junctions: one per isolated run, two (at both ends) per doubled arc.
  std::vector<detail::Arc> arcs;
  std::vector<int> entry(runs.size()), exit(runs.size());  // junction at start/end of a flagged run
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (!runs[r].flagged) continue;
    const Run& run = runs[r];
    if (run.len <= opt.max_junction_width) {
      const int c = at(run.first + run.len / 2);
      out.junctions.push_back({mean_point(c), s.angles[c], true, {}, {}, 0.0});
      entry[r] = exit[r] = static_cast<int>(out.junctions.size()) - 1;
    } else {
      const int a = run.first, b = at(run.first + run.len - 1);
      out.junctions.push_back({mean_point(a), s.angles[a], false, {}, {}, 0.0});
      entry[r] = static_cast<int>(out.junctions.size()) - 1;
      out.junctions.push_back({mean_point(b), s.angles[b], false, {}, {}, 0.0});
      exit[r] = static_cast<int>(out.junctions.size()) - 1;
      detail::Arc arc;
      arc.multiplicity = 2;
      for (int t = 0; t < run.len; ++t) arc.pts.push_back(mean_point(at(a + t)));
      arc.from = entry[r];
      arc.to = exit[r];
      arcs.push_back(std::move(arc));
      ++out.doubled_arcs;
    }
  }
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (runs[r].flagged) continue;
    const std::size_t prev = (r + runs.size() - 1) % runs.size(), next = (r + 1) % runs.size();
    std::array<detail::Arc, 2> pair;
    for (int i = 0; i < 2; ++i) {
      pair[i].from = exit[prev];
      pair[i].to = entry[next];
      pair[i].pts.push_back(out.junctions[exit[prev]].point);
    }
    int cur = 0;
    for (int t = 0; t < runs[r].len; ++t) {
      const int j = at(runs[r].first + t);
      if (t > 0 && detail::pair_crossed(s.fiber[at(j - 1)], s.fiber[j])) cur ^= 1;
      pair[0].pts.push_back(s.fiber[j][cur]);
      pair[1].pts.push_back(s.fiber[j][cur ^ 1]);
    }
    for (auto& arc : pair) {
      arc.pts.push_back(out.junctions[entry[next]].point);
      arcs.push_back(std::move(arc));
    }
  }
  out.arcs = static_cast<int>(arcs.size());

  bool geodesic = true;
  for (const auto& arc : arcs) {
    const double g = detail::geodesy_residual(arc.pts);
    out.geodesy_residuals.push_back(g);
    geodesic = geodesic && g <= opt.geodesy_tol * std::sqrt(double(arc.pts.size()));
    if (arc.pts.size() < 3) continue;
    const std::size_t e = arc.pts.size() - 1;
    auto& jf = out.junctions[arc.from];
    jf.tangents.push_back(detail::start_tangent(arc.pts[0], arc.pts[1], arc.pts[2]));
    jf.multiplicity.push_back(arc.multiplicity);
    auto& jt = out.junctions[arc.to];
    jt.tangents.push_back(detail::start_tangent(arc.pts[e], arc.pts[e - 1], arc.pts[e - 2]));
    jt.multiplicity.push_back(arc.multiplicity);
  }
  bool balanced = true;
  for (auto& j : out.junctions) {
    Vec sum = Vec::Zero(2 + s.k);
    for (std::size_t i = 0; i < j.tangents.size(); ++i) sum += j.multiplicity[i] * j.tangents[i];
    j.balance = sum.norm();
    out.balance_defects.push_back(j.balance);
    balanced = balanced && j.balance <= opt.balance_tol;
  }

  if (out.junctions.size() == 2) {
    const double gap = std::abs(out.junctions[0].angle - out.junctions[1].angle);
    out.antipodal_error = std::abs(std::min(gap, 2.0 * kPi - gap) - kPi);
  }
  const bool shape = out.junctions.size() == 2 && out.doubled_arcs == 0 && arcs.size() == 4 &&
                     out.junctions[0].tangents.size() == 4 && out.junctions[1].tangents.size() == 4;
  if (!shape) {
    out.diagnostics = "junction structure differs from two points joined by four arcs";
  } else if (out.antipodal_error > 2.0 / M + 2.0 * kPi / M) {
    out.diagnostics = "junctions are not antipodal";
  } else if (!geodesic) {
    out.diagnostics = "an arc is not a great-circle arc";
  } else if (!balanced) {
    out.diagnostics = "junction tangents are not balanced";
  } else {
    out.verdict = LinkVerdict::four_half_circles;
    out.diagnostics = "four half great circles with balanced antipodal junctions";
  }
  return out;
}

}  // namespace twograph
