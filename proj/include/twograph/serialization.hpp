#pragma once

// JSON and CSV forms of grids, cones and pipeline reports. Keys keep their
// insertion order so that a report body is a pure function of its inputs.

#include "blowup.hpp"
#include "conefit.hpp"
#include "decompose.hpp"
#include "excess.hpp"
#include "linkclass.hpp"
#include "stationarity.hpp"

#include <json.hpp>

#include <iomanip>
#include <sstream>
#include <string>

namespace twograph {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Linear algebra

template <class Derived>
Json json_vector(const Eigen::MatrixBase<Derived>& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

/// Row-major nested arrays.
inline Json json_matrix(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

inline Vec vec_from_json(const Json& j) {
  require(j.is_array(), ErrorKind::invalid_input, "json: expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

/// Matrix with `rows` rows; columns are inferred (an empty array gives zero columns).
inline Eigen::MatrixXd matrix_from_json(const Json& j, Eigen::Index rows) {
  require(j.is_array() && static_cast<Eigen::Index>(j.size()) == rows, ErrorKind::invalid_input,
          "json: matrix row count");
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    require(static_cast<Eigen::Index>(j[r].size()) == cols, ErrorKind::invalid_input, "json: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

// ---------------------------------------------------------------------------
// Geometry

inline Json to_json(const Subspace& s) {
  return Json{{"dim", s.dim()}, {"basis", json_matrix(s.basis())}, {"offset", json_vector(s.offset())}};
}

inline Subspace subspace_from_json(const Json& j) {
  const Vec off = vec_from_json(j.at("offset"));
  return Subspace::spanned_by(matrix_from_json(j.at("basis"), off.size()), off);
}

inline Json to_json(const Cone& c) {
  Json j{{"class", c.is_pair() ? "pair" : "four_hp"}, {"n", c.n()}, {"k", c.k()}};
  if (c.is_pair()) {
    Json planes = Json::array();
    for (const auto& p : c.pieces()) planes.push_back(to_json(p.plane));
    j["planes"] = planes;
  } else {
    j["boundary"] = to_json(c.axis());
    Json dirs = Json::array();
    for (const auto& d : c.directions()) dirs.push_back(json_vector(d));
    j["directions"] = dirs;
  }
  j["axis_dim"] = c.axis_dim();
  return j;
}

inline Cone cone_from_json(const Json& j) {
  const int n = j.at("n").get<int>(), k = j.at("k").get<int>();
  const std::string cls = j.at("class").get<std::string>();
  if (cls == "pair") {
    const Json& p = j.at("planes");
    require(p.size() == 2, ErrorKind::invalid_input, "json: a pair needs two planes");
    return Cone::pair(subspace_from_json(p[0]), subspace_from_json(p[1]), n, k);
  }
  require(cls == "four_hp", ErrorKind::invalid_input, "json: unknown cone class " + cls);
  const Json& d = j.at("directions");
  require(d.size() == 4, ErrorKind::invalid_input, "json: four half-planes need four directions");
  std::array<Vec, 4> dirs;
  for (int i = 0; i < 4; ++i) dirs[i] = vec_from_json(d[i]);
  return Cone::four_half_planes(subspace_from_json(j.at("boundary")), dirs, n, k);
}

// ---------------------------------------------------------------------------
// Grids

/// Node values in slot order; slots enumerate the ball nodes of the lattice.
inline Json to_json(const TwoValuedGrid& g) {
  Json a1 = Json::array(), a2 = Json::array();
  for (std::size_t s = 0; s < g.size(); ++s)
    for (int i = 0; i < g.k(); ++i) {
      a1.push_back(g.a1(s)[i]);
      a2.push_back(g.a2(s)[i]);
    }
  return Json{{"n", g.n()},      {"k", g.k()},  {"h", g.h()},   {"radius", g.radius()},
              {"center", json_vector(g.center())}, {"nodes", g.size()},
              {"a1", std::move(a1)}, {"a2", std::move(a2)}};
}

inline TwoValuedGrid grid_from_json(const Json& j) {
  const int n = j.at("n").get<int>(), k = j.at("k").get<int>();
  TwoValuedGrid g(n, k, vec_from_json(j.at("center")), j.at("radius").get<double>(), j.at("h").get<double>());
  const Json &a1 = j.at("a1"), &a2 = j.at("a2");
  require(j.at("nodes").get<std::size_t>() == g.size() && a1.size() == g.size() * k && a2.size() == a1.size(),
          ErrorKind::invalid_input, "json: grid node count does not match its lattice");
  Vec x(k), y(k);
  for (std::size_t s = 0; s < g.size(); ++s) {
    for (int i = 0; i < k; ++i) {
      x(i) = a1[s * k + i].get<double>();
      y(i) = a2[s * k + i].get<double>();
    }
    g.set(s, Pair2(x, y));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Reports

inline Json to_json(const ExcessReport& r) {
  return Json{{"one_sided", r.one_sided}, {"reverse", r.reverse},        {"q", r.q()},
              {"collar", r.collar},       {"outer_radius", r.outer_radius}, {"reverse_nodes", r.reverse_nodes}};
}

inline Json to_json(const FitResult& r) {
  return Json{{"cone", to_json(r.cone)},        {"excess", r.excess},
              {"initial_excess", r.initial_excess}, {"iterations", r.iterations},
              {"restarts", r.restarts},         {"valid_restarts", r.valid_restarts}};
}

inline Json to_json(const SingularGraphFit& s) {
  return Json{{"axis_dim", s.m},
              {"degree", s.degree},
              {"monomials", s.monomials},
              {"coefficients", json_matrix(s.coefficients)},
              {"axis_basis", json_matrix(s.axis_basis)},
              {"origin", json_vector(s.origin)},
              {"detected", s.detected},
              {"residual_sup", s.residual_sup},
              {"holder_alpha", s.holder_alpha},
              {"holder_seminorm", s.holder_seminorm}};
}

inline Json to_json(const DecayReport& r) {
  Json recs = Json::array();
  for (const auto& x : r.records)
    recs.push_back(Json{{"j", x.j},
                        {"scale", x.scale},
                        {"one_sided", x.one_sided},
                        {"reverse", x.reverse},
                        {"nu_step", x.nu_step},
                        {"rotation_step", x.rotation_step},
                        {"mass", x.mass},
                        {"iterations", x.iterations},
                        {"cone", to_json(x.cone)}});
  Json j{{"theta", r.theta},
         {"center", json_vector(r.center)},
         {"h", r.h},
         {"density", r.density},
         {"q", r.q},
         {"q_gate", r.q_gate},
         {"gate_passed", r.gate_passed},
         {"truncated", r.truncated},
         {"exact_cone", r.exact_cone},
         {"slope_available", r.slope_available},
         {"slope", r.slope_available ? Json(r.slope) : Json()},
         {"slope_scales", r.slope_scales},
         {"mean_nu_ratio", std::isfinite(r.mean_nu_ratio) ? Json(r.mean_nu_ratio) : Json()},
         {"records", recs}};
  j["singular_graph"] = r.singular_graph ? to_json(*r.singular_graph) : Json();
  return j;
}

/// Scale series of a decay report, one row per record; the fitted slope is
/// repeated on every row and left empty when unavailable.
inline std::string decay_csv(const DecayReport& r) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "j,scale,one_sided,reverse,nu_step,rotation_step,mass,iterations,slope\n";
  for (const auto& x : r.records) {
    out << x.j << ',' << x.scale << ',' << x.one_sided << ',' << x.reverse << ',' << x.nu_step << ','
        << x.rotation_step << ',' << x.mass << ',' << x.iterations << ',';
    if (r.slope_available) out << r.slope;
    out << '\n';
  }
  return out.str();
}

inline Json to_json(const SheetLabelling& l) {
  std::size_t labelled = 0;
  for (auto v : l.labels)
    if (v >= 0) ++labelled;
  Json conflicts = Json::array();
  for (const auto& e : l.conflicts) conflicts.push_back(Json::array({e.first, e.second}));
  return Json{{"nodes", l.labels.size()},
              {"labelled", labelled},
              {"excluded", l.excluded},
              {"exclusion_volume", l.exclusion_volume},
              {"lipschitz", l.lipschitz},
              {"threshold", l.threshold},
              {"components", l.components},
              {"decomposed", l.decomposed},
              {"split", l.split},
              {"conflict_count", l.conflicts.size()},
              {"conflicts", conflicts},
              {"conflicted_components", l.conflicted_components},
              {"branch_points", l.branch_points}};
}

inline Json to_json(const LinkClassification& c) {
  Json js = Json::array();
  for (const auto& j : c.junctions) {
    Json t = Json::array();
    for (const auto& v : j.tangents) t.push_back(json_vector(v));
    js.push_back(Json{{"point", json_vector(j.point)},
                      {"angle", j.angle},
                      {"isolated", j.isolated},
                      {"tangents", t},
                      {"multiplicity", j.multiplicity},
                      {"balance", j.balance}});
  }
  return Json{{"verdict", to_string(c.verdict)},
              {"junctions", js},
              {"balance_defects", c.balance_defects},
              {"geodesy_residuals", c.geodesy_residuals},
              {"arcs", c.arcs},
              {"doubled_arcs", c.doubled_arcs},
              {"antipodal_error", c.antipodal_error},
              {"diagnostics", c.diagnostics}};
}

inline Json to_json(const DehomogenizeResult& r) {
  Json terms = Json::array();
  for (const auto& t : r.element.basis.terms()) {
    const char* kind = t.kind == HTerm::Kind::axis_tilt        ? "axis_tilt"
                       : t.kind == HTerm::Kind::cross_rotation ? "cross_rotation"
                       : t.kind == HTerm::Kind::linear         ? "linear"
                                                               : "constant";
    terms.push_back(Json{{"kind", kind}, {"piece", t.piece}, {"a", t.a}, {"b", t.b}});
  }
  return Json{{"terms", terms},
              {"coefficients", json_vector(r.element.coefficients)},
              {"field_norm", r.field_norm},
              {"projection_norm", r.projection_norm},
              {"residual_norm", r.residual_norm},
              {"orthogonality", r.orthogonality},
              {"samples", r.samples},
              {"rank", r.rank}};
}

// ---------------------------------------------------------------------------
// Envelopes

/// Standard report: type tag, library version, the full run configuration and
/// the result body.
inline Json make_report(const std::string& type, const Json& config, Json result) {
  return Json{{"report", type}, {"version", kVersion}, {"config", config}, {"result", std::move(result)}};
}

inline Json make_error_report(const std::string& command, const Json& config, const std::string& kind,
                              const std::string& message) {
  return Json{{"report", "error"},
              {"version", kVersion},
              {"config", config},
              {"error", Json{{"command", command}, {"kind", kind}, {"message", message}}}};
}

/// Canonical text of a report: two-space indentation and a trailing newline.
inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace twograph
