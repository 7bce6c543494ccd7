// Command-line front end: fixtures in, JSON/CSV reports out.

#include "twograph/twograph.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace twograph;

namespace {

struct Common {
  std::string fixture = "four_half_planes";
  std::vector<std::string> params;
  double h = 1.0 / 64;
  double radius = 1.0;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out;
  std::string grid_file;
  std::string cone_file;
  std::string tolerance_file;
};

// Named tolerances; a JSON file may override any of them.
std::map<std::string, double> default_tolerances() {
  return {{"coincidence", 1e-8},   {"geodesy", 1e-3},      {"balance", 0.1},
          {"orthogonality", 1e-8}, {"double_point", 1e-12}};
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::map<std::string, double> load_tolerances(const std::string& flag_path) {
  auto tol = default_tolerances();
  std::string path = flag_path;
  if (path.empty())
    if (const char* env = std::getenv("TWOGRAPH_TOLERANCES")) path = env;
  if (path.empty()) return tol;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read tolerance file " + path);
  const Json j = Json::parse(in);
  for (const auto& [key, value] : j.items()) {
    if (!tol.count(key)) throw UsageError("unknown tolerance '" + key + "'");
    tol[key] = value.get<double>();
  }
  return tol;
}

FixtureSpec fixture_spec(const Common& c) {
  FixtureSpec spec;
  spec.id = c.fixture;
  spec.h = c.h;
  spec.radius = c.radius;
  for (const auto& p : c.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw UsageError("--param expects key=value, got '" + p + "'");
    try {
      spec.params[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("--param value is not a number: '" + p + "'");
    }
  }
  return spec;
}

Vec parse_point(const std::vector<double>& xs, int dim, const char* what) {
  if (xs.empty()) return Vec::Zero(dim);
  if (xs.size() == 1 && xs[0] == 0.0) return Vec::Zero(dim);
  if (static_cast<int>(xs.size()) != dim)
    throw Error(ErrorKind::dimension_mismatch, std::string(what) + ": expected " + std::to_string(dim) + " coordinates");
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = xs[i];
  return v;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::invalid_input, "cannot read " + path);
  return Json::parse(in);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::invalid_input, "cannot write " + path);
  out << text;
}

// The input of a run: a fixture (always, for ids and cones) and its grid,
// unless a grid file replaces the sampled one.
struct Input {
  Fixture fixture;
  TwoValuedGrid grid;
};

Input load_input(const Common& c, const FixtureSpec& spec) {
  Input in{make_fixture(spec), {}};
  in.grid = c.grid_file.empty() ? generate(in.fixture, spec.h, spec.radius)
                                : grid_from_json(read_json(c.grid_file).at("result").at("grid"));
  return in;
}

Cone input_cone(const Common& c, const Fixture& f) {
  if (!c.cone_file.empty()) {
    const Json j = read_json(c.cone_file);
    return cone_from_json(j.contains("result") ? j.at("result").at("cone") : j);
  }
  require(f.cone.has_value(), ErrorKind::invalid_input, "fixture " + f.id + " has no reference cone; pass --cone");
  return *f.cone;
}

Json base_config(const std::string& command, const Common& c, const FixtureSpec& spec,
                 const std::map<std::string, double>& tol) {
  Json params = Json::object();
  for (const auto& [k, v] : spec.params) params[k] = v;
  Json tj = Json::object();
  for (const auto& [k, v] : tol) tj[k] = v;
  return Json{{"command", command}, {"fixture", spec.id}, {"params", params},     {"h", spec.h},
              {"radius", spec.radius}, {"seed", c.seed},  {"workers", c.workers}, {"grid_file", c.grid_file},
              {"cone_file", c.cone_file}, {"tolerances", tj}, {"out", c.out}};
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--fixture", c.fixture, "fixture id");
  sub->add_option("--param", c.params, "fixture parameter key=value (repeatable)");
  sub->add_option("--h", c.h, "lattice spacing")->check(CLI::PositiveNumber);
  sub->add_option("--radius", c.radius, "sampling radius")->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "seed for every stochastic step");
  sub->add_option("--workers", c.workers, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  sub->add_option("--out", c.out, "report path (stdout by default)");
  sub->add_option("--grid", c.grid_file, "grid report from `gen` replacing the sampled fixture");
  sub->add_option("--cone", c.cone_file, "cone JSON replacing the fixture's reference cone");
  sub->add_option("--tolerances", c.tolerance_file, "JSON map of tolerance overrides");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-valued graph varifold toolkit"};
  app.set_version_flag("--version", kVersion);
  app.set_help_flag("--help", "print help and exit");  // -h would shadow the spacing option --h
  app.require_subcommand(1);

  Common common;
  std::map<std::string, CLI::App*> subs;
  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    add_common(s, common);
    subs[name] = s;
    return s;
  };

  sub("gen", "sample a fixture on the lattice ball and write the grid");

  double collar = 0.125, outer = 2.0, region_radius = 1.0;
  auto* excess = sub("excess", "one-sided excess, reverse term and Q against a cone");
  excess->add_option("--collar", collar)->check(CLI::PositiveNumber);
  excess->add_option("--outer-radius", outer)->check(CLI::PositiveNumber);
  excess->add_option("--region-radius", region_radius)->check(CLI::PositiveNumber);

  std::string cone_class = "same";
  int restarts = 4;
  auto* fit = sub("fit", "best cone of a class over the unit ball");
  fit->add_option("--class", cone_class)->check(CLI::IsMember({"same", "pair", "four_hp"}));
  fit->add_option("--restarts", restarts)->check(CLI::PositiveNumber);

  double theta = 0.5;
  int steps = 5;
  std::vector<double> center;
  std::string csv_path;
  bool singular = false;
  auto* decay = sub("decay", "excess decay over dyadic scales");
  decay->add_option("--theta", theta)->check(CLI::Range(1e-6, 1.0 - 1e-6));
  decay->add_option("--J", steps)->check(CLI::PositiveNumber);
  decay->add_option("--center", center, "center point (0 for the origin)")->delimiter(',');
  decay->add_option("--csv", csv_path, "write the scale series as CSV ('-' for stdout)");
  decay->add_flag("--singular-graph", singular, "fit the singular set as a graph over the axis");

  double r_inner = 0.25, r_outer = 0.75;
  int loops = 8;
  std::size_t bfs_seed = 0;
  auto* decomp = sub("decompose", "sheet labelling and loop monodromy on an annulus");
  decomp->add_option("--r-inner", r_inner)->check(CLI::NonNegativeNumber);
  decomp->add_option("--r-outer", r_outer)->check(CLI::PositiveNumber);
  decomp->add_option("--loops", loops)->check(CLI::NonNegativeNumber);
  decomp->add_option("--bfs-seed", bfs_seed, "slot where the labelling starts");

  int angles = 256;
  auto* link = sub("classify-link", "sample and classify the link of a two-dimensional cone");
  link->add_option("--M", angles)->check(CLI::Range(8, 1 << 20));

  double field_radius = 0.5;
  auto* stat = sub("verify-stationary", "first variation against standard test fields");
  stat->add_option("--center", center, "field center (0 for the origin)")->delimiter(',');
  stat->add_option("--field-radius", field_radius)->check(CLI::PositiveNumber);

  double rho = 1.0, chart_h = 1.0 / 16;
  std::string source = "graph";
  auto* dehom = sub("dehomogenize", "project a field over the reference cone onto the linear class");
  dehom->add_option("--rho", rho)->check(CLI::PositiveNumber);
  dehom->add_option("--chart-h", chart_h, "chart spacing of the field")->check(CLI::PositiveNumber);
  dehom->add_option("--source", source)->check(CLI::IsMember({"graph", "planted"}));

  double density_rho = 0.25;
  auto* dens = sub("density", "density ratio at a point");
  dens->add_option("--center", center, "point (0 for the origin)")->delimiter(',');
  dens->add_option("--rho", density_rho)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::string command;
  for (const auto& [name, s] : subs)
    if (s->parsed()) command = name;

  FixtureSpec spec;
  std::map<std::string, double> tol;
  try {
    spec = fixture_spec(common);
    tol = load_tolerances(common.tolerance_file);
  } catch (const UsageError& e) {
    std::cerr << e.what() << "\n" << subs[command]->help();
    return 2;
  }
  // a link needs a planar base; the four half-plane fixture is then the m = 1 case
  if (command == "classify-link" && spec.id == "four_half_planes" && !spec.params.count("m")) spec.params["m"] = 1;
  set_worker_count(common.workers);
  Json config = base_config(command, common, spec, tol);

  try {
    Json result;
    std::string type = command;
    if (command == "gen") {
      const TwoValuedGrid g = generate(make_fixture(spec), spec.h, spec.radius);
      result = Json{{"fixture", spec.id}, {"grid", to_json(g)}};
      type = "grid";
    } else if (command == "excess") {
      config["collar"] = collar;
      config["outer_radius"] = outer;
      config["region_radius"] = region_radius;
      const Input in = load_input(common, spec);
      const Cone c = input_cone(common, in.fixture);
      const SampledVarifold v = sample_graph(in.grid, spec.id);
      const int d = c.ambient_dim();
      result = Json{{"cone", to_json(c)},
                    {"mass", v.total_mass()},
                    {"excess_E", excess_E(v, c, Ball{Vec::Zero(d), region_radius})}};
      if (c.has_axis()) {
        result["Q"] = to_json(excess_Q(v, c, ExcessOptions{outer, collar}));
        result["axis_tilt"] = axis_tilt(v, c, Ball{Vec::Zero(d), region_radius});
      }
      if (c.is_pair()) result["single_plane_ratio"] = single_plane_ratio(v, c);
    } else if (command == "fit") {
      config["class"] = cone_class;
      config["restarts"] = restarts;
      const Input in = load_input(common, spec);
      const Cone c0 = input_cone(common, in.fixture);
      const SampledVarifold v = sample_graph(in.grid, spec.id);
      FitOptions fo;
      fo.restarts = restarts;
      fo.seed = common.seed;
      const ConeClass cls = cone_class == "same"   ? class_of(c0)
                            : cone_class == "pair" ? ConeClass::pair
                                                   : ConeClass::four_hp;
      result = Json{{"class", to_string(cls)}, {"fit", to_json(fit_cone(v, cls, c0, unit_ball(c0.ambient_dim()), fo))}};
    } else if (command == "decay") {
      config["theta"] = theta;
      config["J"] = steps;
      config["center"] = center;
      config["csv"] = csv_path;
      config["singular_graph"] = singular;
      const Input in = load_input(common, spec);
      const Cone c0 = input_cone(common, in.fixture);
      const SampledVarifold v = sample_graph(in.grid, spec.id);
      DecayOptions o;
      o.theta = theta;
      o.steps = steps;
      o.seed = common.seed;
      o.center = parse_point(center, c0.ambient_dim(), "--center");
      o.fit_singular_graph = singular;
      const DecayReport rep = decay_pipeline(v, c0, o);
      if (!csv_path.empty()) write_text(csv_path, decay_csv(rep));
      result = to_json(rep);
    } else if (command == "decompose") {
      config["r_inner"] = r_inner;
      config["r_outer"] = r_outer;
      config["loops"] = loops;
      config["bfs_seed"] = bfs_seed;
      const Input in = load_input(common, spec);
      const TwoValuedGrid& g = in.grid;
      const SheetLabelling lab = propagate_labels(g, annulus_exclusion(g, r_inner, r_outer), bfs_seed);
      Json tested = Json::array();
      int swaps = 0;
      if (g.n() >= 2)
        for (int i = 0; i < loops; ++i) {
          const double r = r_inner + (r_outer - r_inner) * (i + 0.5) / loops;
          Json row{{"radius", r}};
          try {
            const Monodromy m = monodromy_test(g, lattice_circle_loop(g, Vec::Zero(g.n()), r), lab.lipschitz);
            row["monodromy"] = to_string(m);
            if (m == Monodromy::swap) ++swaps;
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::precondition) throw;
            row["monodromy"] = "ambiguous";
          }
          tested.push_back(row);
        }
      result = Json{{"labelling", to_json(lab)}, {"loops", tested}, {"swap_loops", swaps}};
    } else if (command == "classify-link") {
      config["params"]["m"] = spec.params.count("m") ? Json(spec.params.at("m")) : Json();
      config["M"] = angles;
      const Fixture f = make_fixture(spec);
      const LinkSample s = sample_link(f.eval, f.k, angles, tol.at("coincidence"));
      LinkOptions lo;
      lo.geodesy_tol = tol.at("geodesy");
      lo.balance_tol = tol.at("balance");
      result = to_json(classify_link(s, lo));
    } else if (command == "verify-stationary") {
      config["center"] = center;
      config["field_radius"] = field_radius;
      const Input in = load_input(common, spec);
      const SampledVarifold v = sample_graph(in.grid, spec.id);
      const Vec c = parse_point(center, v.ambient_dim(), "--center");
      const auto fields = standard_fields(c, field_radius);
      const auto table = first_variation_table(v, fields);
      Json rows = Json::array();
      for (std::size_t i = 0; i < fields.size(); ++i)
        rows.push_back(Json{{"field", fields[i].kind == TestField::Kind::radial_bump ? "radial" : "coordinate"},
                            {"direction", fields[i].direction},
                            {"value", table[i]}});
      result = Json{{"fields", rows}, {"defect", *std::max_element(table.begin(), table.end())}};
    } else if (command == "dehomogenize") {
      config["rho"] = rho;
      config["chart_h"] = chart_h;
      config["source"] = source;
      const Input in = load_input(common, spec);
      const Cone c0 = input_cone(common, in.fixture);
      const Vec z = c0.axis().project(Vec::Zero(c0.ambient_dim()));
      ConeField field;
      Json planted;
      if (source == "planted") {
        HBasis basis(c0);
        Rng rng(common.seed);
        Eigen::VectorXd coef(basis.size());
        for (int i = 0; i < basis.size(); ++i) coef(i) = rng.normal();
        field = sample_H(HElement(basis, coef), chart_h, spec.radius, z);
        planted = json_vector(coef);
      } else {
        field = graph_over_cone(sample_graph(in.grid, spec.id), c0, chart_h, spec.radius);
      }
      const DehomogenizeResult r = dehomogenize(field, z, rho, tol.at("orthogonality"));
      result = to_json(r);
      result["planted"] = planted;
      result["harmonic_defect_residual"] = harmonic_defect(r.residual);
    } else if (command == "density") {
      config["center"] = center;
      config["rho"] = density_rho;
      const Input in = load_input(common, spec);
      const SampledVarifold v = sample_graph(in.grid, spec.id);
      const Vec x = parse_point(center, v.ambient_dim(), "--center");
      const DensityProfile p = density_profile(v, x, density_rho);
      result = Json{{"center", json_vector(x)},
                    {"rho", density_rho},
                    {"ratio", p.ratios.front()},
                    {"profile", Json{{"radii", p.radii}, {"ratios", p.ratios}}}};
    }
    write_text(common.out, dump(make_report(type, config, result)));
    return 0;
  } catch (const Error& e) {
    std::cout << dump(make_error_report(command, config, to_string(e.kind()), e.what()));
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cout << dump(make_error_report(command, config, "invalid_input", e.what()));
    return 1;
  }
}
