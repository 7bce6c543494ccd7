#pragma once

#include "stationarity.hpp"
#include "two_valued.hpp"

#include <deque>
#include <optional>
#include <vector>

namespace twograph {

/// Nodes where the two values are closer than tol.
inline std::vector<std::size_t> detect_doubles(const TwoValuedGrid& f, double tol) {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < f.size(); ++s)
    if (f.separation(s) < tol) out.push_back(s);
  return out;
}

/// Separation below which adjacent pairings are not trusted: 2 L h.
inline double ambiguity_threshold(const TwoValuedGrid& f, double lipschitz) {
  return 2.0 * lipschitz * f.h();
}

/// Nodes outside the shell r_inner < |x - center| < r_outer (center defaults
/// to the grid center).
inline std::vector<std::size_t> annulus_exclusion(const TwoValuedGrid& f, double r_inner,
                                                  double r_outer,
                                                  std::optional<Vec> center = std::nullopt) {
  const Vec c = center.value_or(f.center());
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < f.size(); ++s) {
    const double r = (f.position(s) - c).norm();
    if (r <= r_inner || r >= r_outer) out.push_back(s);
  }
  return out;
}

struct SheetLabelling {
  static constexpr std::int8_t kDouble = -1;      // excluded: double point or outside the domain
  static constexpr std::int8_t kUnlabelled = -2;  // not reached

  // For labelled nodes, which stored component (0 = a1, 1 = a2) belongs to sheet 0.
  std::vector<std::int8_t> labels;
  std::vector<int> component;  // connected component id, -1 if excluded
  int components = 0;
  std::vector<std::pair<std::size_t, std::size_t>> conflicts;  // monodromy witnesses (edges)
  std::vector<int> conflicted_components;
  std::vector<std::size_t> branch_points;
  double lipschitz = 0.0;
  double threshold = 0.0;
  std::size_t excluded = 0;
  double exclusion_volume = 0.0;
  bool decomposed = false;
  bool split = false;  // more than one component

  bool labelled(std::size_t s) const { return labels[s] >= 0; }
};

enum class Monodromy { trivial, swap };

inline const char* to_string(Monodromy m) { return m == Monodromy::trivial ? "trivial" : "swap"; }

/// Sheet permutation after composing the best pairings along the closed loop.
inline Monodromy monodromy_test(const TwoValuedGrid& f, const std::vector<std::size_t>& loop,
                                std::optional<double> lipschitz = std::nullopt) {
  require(loop.size() >= 4, ErrorKind::invalid_input, "monodromy_test: loop too short");
  const double thr = ambiguity_threshold(f, lipschitz.value_or(lipschitz_estimate(f)));
  const int n = f.n(), k = f.k();
  bool crossed = false;
  for (std::size_t j = 0; j < loop.size(); ++j) {
    const std::size_t s = loop[j], t = loop[(j + 1) % loop.size()];
    require(s < f.size() && t < f.size(), ErrorKind::invalid_input, "monodromy_test: node outside grid");
    const MultiIndex a = f.index(s), b = f.index(t);
    double steps = 0.0;
    for (int d = 0; d < n; ++d) steps += std::abs(a[d] - b[d]);
    require(steps == 1.0, ErrorKind::invalid_input, "monodromy_test: loop nodes must be adjacent");
    require(f.separation(s) > thr && f.separation(t) > thr, ErrorKind::precondition,
            "monodromy_test: ambiguous matching, loop passes too close to a double point");
    crossed ^= pairing_cost(f.a1(s), f.a2(s), f.a1(t), f.a2(t), k).is_crossed();
  }
  return crossed ? Monodromy::swap : Monodromy::trivial;
}

/// Closed 4-connected loop of grid nodes tracing the circle of the given
/// radius around `center` in the first two base coordinates.
inline std::vector<std::size_t> lattice_circle_loop(const TwoValuedGrid& f, const Vec& center,
                                                    double radius) {
  require(f.n() >= 2, ErrorKind::invalid_input, "lattice_circle_loop: base must be at least 2-d");
  require_dim(center.size(), f.n(), "lattice_circle_loop");
  const double h = f.h();
  const Vec& c0 = f.center();
  auto to_index = [&](const Vec& x) {
    MultiIndex idx{};
    for (int d = 0; d < f.n(); ++d) idx[d] = static_cast<int>(std::lround((x(d) - c0(d)) / h));
    return idx;
  };
  auto lookup = [&](const MultiIndex& idx) {
    const std::int64_t s = f.slot(idx);
    require(s >= 0, ErrorKind::invalid_input, "lattice_circle_loop: loop leaves the grid");
    return static_cast<std::size_t>(s);
  };
  const int steps = std::max(64, static_cast<int>(16.0 * radius / h));
  std::vector<MultiIndex> path;
  for (int j = 0; j <= steps; ++j) {
    const double t = 2.0 * kPi * j / steps;
    Vec x = center;
    x(0) += radius * std::cos(t);
    x(1) += radius * std::sin(t);
    const MultiIndex idx = to_index(x);
    if (!path.empty() && path.back() == idx) continue;
    if (!path.empty()) {
      const MultiIndex& p = path.back();
      if (p[0] != idx[0] && p[1] != idx[1]) {
        // diagonal step: go through the corner closer to the circle
        MultiIndex a = p, b = p;
        a[0] = idx[0];
        b[1] = idx[1];
        auto off = [&](const MultiIndex& m) {
          const double dx = c0(0) + h * m[0] - center(0), dy = c0(1) + h * m[1] - center(1);
          return std::abs(std::hypot(dx, dy) - radius);
        };
        path.push_back(off(a) <= off(b) ? a : b);
      }
    }
    path.push_back(idx);
  }
  if (path.size() > 1 && path.front() == path.back()) path.pop_back();
  std::vector<std::size_t> out;
  for (const auto& m : path) out.push_back(lookup(m));
  return out;
}

namespace detail {

/// Axis-aligned rectangle of nodes around a cluster in the first two base
/// coordinates, widened by `margin` cells; empty if it leaves the grid.
inline std::vector<std::size_t> rectangle_loop(const TwoValuedGrid& f,
                                               const std::vector<std::size_t>& cluster, int margin) {
  MultiIndex lo = f.index(cluster.front()), hi = lo;
  for (auto s : cluster) {
    const MultiIndex m = f.index(s);
    for (int d = 0; d < 2; ++d) {
      lo[d] = std::min(lo[d], m[d]);
      hi[d] = std::max(hi[d], m[d]);
    }
  }
  for (int d = 0; d < 2; ++d) {
    lo[d] -= margin;
    hi[d] += margin;
  }
  std::vector<MultiIndex> path;
  MultiIndex m = lo;
  for (m[0] = lo[0]; m[0] < hi[0]; ++m[0]) path.push_back(m);
  for (m[1] = lo[1]; m[1] < hi[1]; ++m[1]) path.push_back(m);
  for (; m[0] > lo[0]; --m[0]) path.push_back(m);
  for (; m[1] > lo[1]; --m[1]) path.push_back(m);
  std::vector<std::size_t> out;
  for (const auto& p : path) {
    const std::int64_t s = f.slot(p);
    if (s < 0) return {};
    out.push_back(static_cast<std::size_t>(s));
  }
  return out;
}

}  // namespace detail

/// Breadth-first sheet labelling on the complement of the exclusion set and of
/// the nodes whose separation is at most 2 L h. Adjacent nodes are matched by
/// the cheaper pairing; an edge whose pairing contradicts the labels already
/// assigned is a monodromy witness.
inline SheetLabelling propagate_labels(const TwoValuedGrid& f,
                                       const std::vector<std::size_t>& exclusion = {},
                                       std::size_t seed = 0,
                                       std::optional<double> lipschitz = std::nullopt) {
  const int n = f.n(), k = f.k();
  SheetLabelling lab;
  lab.lipschitz = lipschitz.value_or(lipschitz_estimate(f));
  lab.threshold = ambiguity_threshold(f, lab.lipschitz);
  lab.labels.assign(f.size(), SheetLabelling::kUnlabelled);
  lab.component.assign(f.size(), -1);
  for (auto s : exclusion) {
    require(s < f.size(), ErrorKind::invalid_input, "propagate_labels: exclusion node outside grid");
    lab.labels[s] = SheetLabelling::kDouble;
  }
  for (std::size_t s = 0; s < f.size(); ++s)
    if (f.separation(s) <= lab.threshold) lab.labels[s] = SheetLabelling::kDouble;
  for (auto l : lab.labels)
    if (l == SheetLabelling::kDouble) ++lab.excluded;
  lab.exclusion_volume = double(lab.excluded) * std::pow(f.h(), n);

  auto visit_from = [&](std::size_t start) {
    const int comp = lab.components++;
    lab.labels[start] = 0;
    lab.component[start] = comp;
    std::deque<std::size_t> queue{start};
    while (!queue.empty()) {
      const std::size_t s = queue.front();
      queue.pop_front();
      for (int d = 0; d < n; ++d)
        for (int dir : {-1, +1}) {
          const std::int64_t t = f.neighbor(s, d, dir);
          if (t < 0 || lab.labels[t] == SheetLabelling::kDouble) continue;
          if (lab.labels[t] != SheetLabelling::kUnlabelled) continue;
          const bool crossed = pairing_cost(f.a1(s), f.a2(s), f.a1(t), f.a2(t), k).is_crossed();
          lab.labels[t] = static_cast<std::int8_t>(lab.labels[s] ^ (crossed ? 1 : 0));
          lab.component[t] = comp;
          queue.push_back(static_cast<std::size_t>(t));
        }
    }
  };
  if (seed < f.size() && lab.labels[seed] == SheetLabelling::kUnlabelled) visit_from(seed);
  for (std::size_t s = 0; s < f.size(); ++s)
    if (lab.labels[s] == SheetLabelling::kUnlabelled) visit_from(s);

  // every labelled edge must agree with its pairing
  for (std::size_t s = 0; s < f.size(); ++s) {
    if (lab.labels[s] < 0) continue;
    for (int d = 0; d < n; ++d) {
      const std::int64_t t = f.neighbor(s, d, +1);
      if (t < 0 || lab.labels[t] < 0) continue;
      const bool crossed = pairing_cost(f.a1(s), f.a2(s), f.a1(t), f.a2(t), k).is_crossed();
      if (lab.labels[t] != (lab.labels[s] ^ (crossed ? 1 : 0)))
        lab.conflicts.emplace_back(s, static_cast<std::size_t>(t));
    }
  }

  for (const auto& e : lab.conflicts) {
    const int c = lab.component[e.first];
    if (std::find(lab.conflicted_components.begin(), lab.conflicted_components.end(), c) ==
        lab.conflicted_components.end())
      lab.conflicted_components.push_back(c);
  }
  std::sort(lab.conflicted_components.begin(), lab.conflicted_components.end());
  lab.decomposed = lab.conflicts.empty();
  lab.split = lab.components > 1;

  // Branch points (planar bases): the closest double in each excluded cluster
  // whose surrounding rectangle carries swap monodromy.
  if (n == 2 && !lab.decomposed) {
    std::vector<int> cluster_of(f.size(), -1);
    for (std::size_t s = 0; s < f.size(); ++s) {
      if (lab.labels[s] != SheetLabelling::kDouble || cluster_of[s] >= 0) continue;
      std::vector<std::size_t> cluster{s};
      cluster_of[s] = 1;
      for (std::size_t q = 0; q < cluster.size(); ++q)
        for (int d = 0; d < n; ++d)
          for (int dir : {-1, +1}) {
            const std::int64_t t = f.neighbor(cluster[q], d, dir);
            if (t < 0 || lab.labels[t] != SheetLabelling::kDouble || cluster_of[t] >= 0) continue;
            cluster_of[t] = 1;
            cluster.push_back(static_cast<std::size_t>(t));
          }
      const auto loop = detail::rectangle_loop(f, cluster, 2);
      if (loop.empty()) continue;
      bool clean = true;
      for (auto q : loop)
        if (lab.labels[q] < 0) clean = false;
      if (!clean) continue;
      if (monodromy_test(f, loop, lab.lipschitz) != Monodromy::swap) continue;
      std::size_t best = cluster.front();
      for (auto q : cluster)
        if (f.separation(q) < f.separation(best)) best = q;
      lab.branch_points.push_back(best);
    }
  }
  return lab;
}

/// True when two labellings agree on every component up to one global swap
/// per component.
inline bool labellings_agree(const SheetLabelling& a, const SheetLabelling& b) {
  if (a.labels.size() != b.labels.size()) return false;
  std::vector<int> flip(std::max(a.components, 1), -1);
  for (std::size_t s = 0; s < a.labels.size(); ++s) {
    if ((a.labels[s] < 0) != (b.labels[s] < 0)) return false;
    if (a.labels[s] < 0) continue;
    const int rel = a.labels[s] ^ b.labels[s];
    int& f = flip[a.component[s]];
    if (f < 0) f = rel;
    else if (f != rel) return false;
  }
  return true;
}

/// One single-valued selection of a labelled grid on the full bounding box of
/// the lattice; unlabelled nodes are left missing.
inline SheetGrid extract_sheet(const TwoValuedGrid& f, const SheetLabelling& lab, int sheet) {
  require(sheet == 0 || sheet == 1, ErrorKind::invalid_input, "extract_sheet: sheet must be 0 or 1");
  require(lab.labels.size() == f.size(), ErrorKind::dimension_mismatch, "extract_sheet: labelling size");
  const Lattice& lat = f.lattice();
  const int n = f.n();
  SheetGrid g(n, f.k(), Vec(lat.center().array() - lat.half() * f.h()), f.h(),
              std::vector<int>(n, lat.side()));
  for (std::size_t s = 0; s < f.size(); ++s) {
    if (!lab.labelled(s)) continue;
    MultiIndex idx = f.index(s);
    for (int d = 0; d < n; ++d) idx[d] += lat.half();
    const int comp = lab.labels[s] ^ sheet;
    g.set(static_cast<std::size_t>(g.flatten(idx)),
          Eigen::Map<const Eigen::VectorXd>(f.component(s, comp), f.k()));
  }
  return g;
}

}  // namespace twograph
