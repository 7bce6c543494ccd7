#include "helpers.hpp"

using namespace twograph;
using namespace twograph::testing;

namespace {

Eigen::MatrixXd small_rotation(Rng& rng, int d, double size) {
  Eigen::MatrixXd skew = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      skew(i, j) = size * rng.normal();
      skew(j, i) = -skew(i, j);
    }
  return cayley(skew);
}

Subspace line3(const Vec& u) { return Subspace::spanned_by(Eigen::MatrixXd(u.normalized())); }

}  // namespace

TEST(FitCone, RecoversPlantedPair) {
  Rng rng(3);
  const Fixture f = axis_line_pair(0.8);
  const auto var = sample_graph(generate(f, 1.0 / 32, 1.0));
  // a nearby start with the same axis
  Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(3, 3);
  const double a = 0.05;
  rot(0, 0) = rot(2, 2) = std::cos(a);
  rot(0, 2) = -std::sin(a);
  rot(2, 0) = std::sin(a);
  const Cone start = f.cone->mapped(rot, Vec::Zero(3));
  const FitResult r = fit_cone(var, ConeClass::pair, start, unit_ball(3));
  EXPECT_LT(r.excess, 1e-10 * var.total_mass());
  EXPECT_LT(nu(r.cone, *f.cone), 1e-6);
  EXPECT_GT(r.initial_excess, r.excess);
}

TEST(FitCone, RecoversPlantedFourHalfPlanes) {
  Rng rng(5);
  const Fixture f = four_half_planes(1);
  const auto var = sample_graph(generate(f, 1.0 / 32, 1.0));
  const Cone start = f.cone->mapped(small_rotation(rng, 4, 0.03), Vec::Zero(4));
  const FitResult r = fit_cone(var, ConeClass::four_hp, start, unit_ball(4));
  EXPECT_LT(r.excess, 1e-10 * var.total_mass());
  EXPECT_LT(nu(r.cone, *f.cone), 1e-6);
  EXPECT_TRUE(r.cone.axis().same_as(f.cone->axis(), 1e-6));
}

TEST(FitCone, CurvedPairNearTangentCone) {
  const Fixture f = holo_pair_curved(1, 1);
  const auto var = sample_graph(generate(f, 1.0 / 256, 0.3));
  Rng rng(9);
  const Cone start = f.cone->mapped(small_rotation(rng, 4, 0.05), Vec::Zero(4));
  const FitResult r = fit_cone(var, ConeClass::pair, start, Ball{Vec::Zero(4), 0.25});
  EXPECT_LT(nu(r.cone, *f.cone), 0.02);
  EXPECT_GT(nu(start, *f.cone), nu(r.cone, *f.cone));
}

TEST(FitCone, PairCannotFitFourHalfLines) {
  // four rays in R^3 against pairs of lines through 0: a positive floor, and
  // the fit lands within the brute-force minimum over a direction grid
  const Fixture f = four_half_planes(0);
  const auto var = sample_graph(generate(f, 1.0 / 64, 1.0));
  const FitResult r = fit_cone(var, ConeClass::pair, *f.cone, unit_ball(3));
  EXPECT_GT(r.excess, 0.01 * var.total_mass());
  std::vector<Subspace> lines;
  constexpr int kSteps = 24;
  for (int i = 0; i < kSteps; ++i)
    for (int j = 0; j < kSteps; ++j) {
      const double th = kPi * (i + 0.5) / kSteps, ph = kPi * j / kSteps;
      lines.push_back(line3(v({std::cos(th), std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph)})));
    }
  double grid_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      if (lines[i].same_as(lines[j], 1e-9)) continue;
      grid_min = std::min(grid_min, excess_E(var, Cone::pair(lines[i], lines[j], 1, 2)));
    }
  EXPECT_LE(r.excess, grid_min * (1 + 1e-6));
  EXPECT_GE(r.excess, 0.8 * grid_min);
}

TEST(FitCone, NeverWorseThanTheStart) {
  Rng rng(12);
  const auto var = sample_graph(generate(holo_pair_curved(0.7, 0.5), 1.0 / 32, 1.0));
  for (int t = 0; t < 4; ++t) {
    const Cone start = transverse_pair().cone->mapped(small_rotation(rng, 4, 0.3), Vec::Zero(4));
    FitOptions o;
    o.seed = t;
    o.restarts = 2;
    const FitResult r = fit_cone(var, ConeClass::pair, start, unit_ball(4), o);
    EXPECT_LE(r.excess, excess_E(var, start) * (1 + 1e-12));
    EXPECT_NEAR(r.initial_excess, excess_E(var, start), 1e-12 * (1 + r.initial_excess));
    EXPECT_GE(r.valid_restarts, 1);
  }
}

TEST(FitCone, SeedDeterminism) {
  const auto var = sample_graph(generate(holo_pair_curved(1, 1), 1.0 / 32, 1.0));
  FitOptions o;
  o.seed = 77;
  const FitResult a = fit_cone(var, ConeClass::pair, *transverse_pair().cone, unit_ball(4), o);
  const FitResult b = fit_cone(var, ConeClass::pair, *transverse_pair().cone, unit_ball(4), o);
  EXPECT_EQ(a.excess, b.excess);
  EXPECT_LT(nu(a.cone, b.cone), 1e-12);
}

TEST(FitCone, RejectsEmptyRegionAndZeroRestarts) {
  const auto var = sample_graph(generate(transverse_pair(), 1.0 / 8, 1.0));
  EXPECT_THROW(fit_cone(var, ConeClass::pair, *transverse_pair().cone, Ball{Vec::Constant(4, 9.0), 0.1}), Error);
  FitOptions o;
  o.restarts = 0;
  EXPECT_THROW(fit_cone(var, ConeClass::pair, *transverse_pair().cone, unit_ball(4), o), Error);
}

TEST(LogLogSlope, PowerLawAndTooFewPoints) {
  const std::vector<double> s = {0.5, 0.25, 0.125, 0.0625};
  std::vector<double> y;
  for (double x : s) y.push_back(3 * std::pow(x, 2.5));
  EXPECT_NEAR(*log_log_slope(s, y), 2.5, 1e-12);
  y[1] = 0.0;  // zeros are dropped, leaving three points
  EXPECT_FALSE(log_log_slope(s, y).has_value());
}

TEST(Decay, ExactConesGiveZero) {
  for (const Fixture& f : {transverse_pair(), four_half_planes(1)}) {
    const auto var = sample_graph(generate(f, 1.0 / 64, 1.0));
    DecayOptions o;
    o.steps = 3;
    const DecayReport rep = decay_pipeline(var, *f.cone, o);
    EXPECT_TRUE(rep.exact_cone) << f.id;
    EXPECT_FALSE(rep.slope_available);
    ASSERT_EQ(rep.records.size(), 3u);
    for (const auto& r : rep.records) {
      EXPECT_LT(r.one_sided, 1e-8 * r.mass);
      EXPECT_LT(r.nu_step, 1e-6);
    }
  }
}

TEST(Decay, FourHalfPlanesOffOriginOnTheAxis) {
  const Fixture f = four_half_planes(1);
  const auto var = sample_graph(generate(f, 1.0 / 64, 1.0));
  DecayOptions o;
  o.steps = 3;
  o.center = v({0, 0.3, 0, 0});
  const DecayReport rep = decay_pipeline(var, *f.cone, o);
  EXPECT_TRUE(rep.exact_cone);
  for (const auto& r : rep.records) EXPECT_LT(r.one_sided, 1e-8 * r.mass);
}

TEST(Decay, RejectsLowDensityCenter) {
  const auto var = sample_graph(generate(transverse_pair(), 1.0 / 64, 1.0));
  DecayOptions o;
  o.center = v({0.5, 0, 0, 0});
  try {
    decay_pipeline(var, *transverse_pair().cone, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
  }
}

TEST(Decay, TruncatesAtResolution) {
  const auto var = sample_graph(generate(transverse_pair(), 1.0 / 32, 1.0));
  DecayOptions o;
  o.steps = 6;
  const DecayReport rep = decay_pipeline(var, *transverse_pair().cone, o);
  EXPECT_TRUE(rep.truncated);
  EXPECT_LT(rep.records.size(), 6u);
  for (const auto& r : rep.records) EXPECT_GE(r.scale, 8 * var.h());
}

TEST(Decay, RotationEquivariance) {
  Rng rng(40);
  const Fixture f = holo_pair_curved(1, 1);
  const auto var = sample_graph(generate(f, 1.0 / 128, 1.0));
  const Eigen::MatrixXd q = random_rotation(rng, 4);
  DecayOptions o;
  o.steps = 3;
  const DecayReport a = decay_pipeline(var, *f.cone, o);
  const DecayReport b = decay_pipeline(var.mapped(q, Vec::Zero(4)), f.cone->mapped(q, Vec::Zero(4)), o);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t j = 0; j < a.records.size(); ++j)
    EXPECT_NEAR(a.records[j].one_sided, b.records[j].one_sided, 1e-9 * (1 + a.records[j].one_sided));
}

TEST(SingularGraph, ExactConeGivesZero) {
  const Fixture f = four_half_planes(1);
  const auto var = sample_graph(generate(f, 1.0 / 64, 1.0));
  const SingularGraphFit fit = singular_graph_fit(var, *f.cone, Ball{Vec::Zero(4), 0.5});
  EXPECT_GT(fit.detected, 0u);
  EXPECT_EQ(fit.m, 1);
  for (double y : {-0.4, 0.0, 0.3}) EXPECT_LT(fit.eval(v({y})).norm(), 1.5 / 64);
}

TEST(SingularGraph, TranslationRecovered) {
  // the same cone shifted by 0.1 in t, fitted against the unshifted axis
  const Fixture f = four_half_planes(1, 0.0, 0.1);
  const auto var = sample_graph(generate(f, 1.0 / 64, 1.0));
  const SingularGraphFit fit = singular_graph_fit(var, *four_half_planes(1).cone, Ball{Vec::Zero(4), 0.5});
  for (double y : {-0.3, 0.0, 0.3}) EXPECT_LT((fit.eval(v({y})) - v({0.1, 0, 0, 0})).norm(), 1.5 / 64);
}

TEST(SingularGraph, TiltedAxisSlope) {
  const double psi = 0.2;
  const Fixture f = four_half_planes(1, psi);
  const auto var = sample_graph(generate(f, 1.0 / 64, 1.0));
  const SingularGraphFit fit = singular_graph_fit(var, *four_half_planes(1).cone, Ball{Vec::Zero(4), 0.5});
  const Eigen::MatrixXd d = fit.derivative(v({0.0}));
  EXPECT_NEAR(d(0, 0), std::tan(psi), 0.05);
  EXPECT_LT(std::abs(d(2, 0)) + std::abs(d(3, 0)), 0.05);
}

TEST(SingularGraph, NotGraphicalIsAStructureError) {
  // the transverse pair plus a copy shifted by more than the 16h detection radius
  const auto var = sample_graph(generate(transverse_pair(), 1.0 / 64, 1.0));
  SampledVarifold both = var;
  const auto moved = var.mapped(Eigen::MatrixXd::Identity(4, 4), v({0, 0, 0.5, 0}));
  for (std::size_t i = 0; i < moved.size(); ++i)
    both.add(moved.point(i), moved.weight(i), moved.tangent(i), moved.sheet(i), moved.reliable(i));
  try {
    singular_graph_fit(both, *transverse_pair().cone, Ball{Vec::Zero(4), 0.75});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::structure);
  }
  // a single copy is one cluster at the vertex
  const SingularGraphFit one = singular_graph_fit(var, *transverse_pair().cone, Ball{Vec::Zero(4), 0.5});
  EXPECT_EQ(one.m, 0);
  EXPECT_LT(one.eval(Eigen::VectorXd()).norm(), 1.0 / 64);
}
