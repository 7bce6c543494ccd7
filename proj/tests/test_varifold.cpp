#include "helpers.hpp"

using namespace twograph;
using namespace twograph::testing;

namespace {

TwoValuedGrid doubled_plane(double h) {
  return TwoValuedGrid::sample(2, 1, 1.0, h, [](const Vec&) { return Pair2::doubled(v({0})); });
}

}  // namespace

TEST(SampleGraph, DoubledPlaneMass) {
  double prev_err = 1.0;
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    const auto var = sample_graph(doubled_plane(h));
    const double err = std::abs(var.total_mass() - 2 * kPi) / (2 * kPi);
    EXPECT_LT(err, 4 * h);
    EXPECT_LT(err, 0.6 * prev_err);  // first order
    prev_err = err;
    for (std::size_t i = 0; i < var.size(); ++i) ASSERT_GT(var.weight(i), 0.0);
  }
}

TEST(SampleGraph, CrossingSegmentsMass) {
  // two segments of slope +-m over [-1, 1]
  const double m = 0.6;
  const auto g = TwoValuedGrid::sample(1, 1, 1.0, 1.0 / 64, [&](const Vec& x) {
    return Pair2(v({m * x(0)}), v({-m * x(0)}));
  });
  EXPECT_NEAR(sample_graph(g).total_mass(), 4 * std::sqrt(1 + m * m), 1e-12);
}

TEST(SampleGraph, BranchedMassIsFivePi) {
  std::vector<double> err;
  for (double h : {1.0 / 64, 1.0 / 128, 1.0 / 256}) {
    const double mass = sample_graph(generate(branched_w32(), h, 1.0)).total_mass();
    err.push_back(std::abs(mass - 5 * kPi) / (5 * kPi));
  }
  EXPECT_LT(err.back(), 0.01);
  EXPECT_LT(err[1], 0.6 * err[0]);
  EXPECT_LT(err[2], 0.6 * err[1]);
}

TEST(SampleGraph, TangentsAreNDimensionalAndOrthonormal) {
  const auto var = sample_graph(generate(holo_pair_curved(), 1.0 / 16, 1.0));
  for (std::size_t i = 0; i < var.size(); ++i) {
    const Eigen::MatrixXd t = var.tangent(i);
    ASSERT_EQ(t.cols(), 2);
    EXPECT_LT((t.transpose() * t - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-12);
  }
}

TEST(MassIn, EmptyAndFullRegions) {
  const auto var = sample_graph(generate(transverse_pair(), 1.0 / 16, 1.0));
  EXPECT_EQ(mass_in(var, Ball{Vec::Constant(4, 10.0), 0.5}), 0.0);
  EXPECT_DOUBLE_EQ(mass_in(var, Everywhere{}), var.total_mass());
  EXPECT_NEAR(mass_in(var, Ball{Vec::Zero(4), 100.0}), var.total_mass(), 1e-12);
}

TEST(MassIn, SymmetricHalves) {
  // two unit-radius discs left and right of the origin see equal halves of a plane
  const auto var = sample_graph(doubled_plane(1.0 / 64));
  const double left = mass_in(var, Ball{v({-0.5, 0, 0}), 0.4});
  const double right = mass_in(var, Ball{v({0.5, 0, 0}), 0.4});
  EXPECT_NEAR(left / right, 1.0, 0.02);
  EXPECT_NEAR(left, 2 * kPi * 0.16, 0.05);
}

TEST(Density, FlatAndVertex) {
  const auto plane = sample_graph(doubled_plane(1.0 / 128));
  // both sheets coincide: density of the doubled plane is 2
  EXPECT_NEAR(density_ratio(plane, Vec::Zero(3), 0.25), 2.0, 0.02);
  const auto single = sample_graph(generate(parallel_planes(2, 1, 5.0), 1.0 / 128, 1.0));
  EXPECT_NEAR(density_ratio(single, Vec::Zero(3), 0.25), 1.0, 0.02);
  const auto fhp = sample_graph(generate(four_half_planes(0), 1.0 / 256, 1.0));
  EXPECT_NEAR(density_ratio(fhp, Vec::Zero(3), 0.25), 2.0, 0.02);
  const auto pair = sample_graph(generate(transverse_pair(), 1.0 / 64, 1.0));
  EXPECT_NEAR(density_ratio(pair, v({0.5, 0, 0, 0}), 0.25), 1.0, 0.02);
}

TEST(Density, RadiusBelowFloorRejected) {
  const auto var = sample_graph(doubled_plane(1.0 / 16));
  try {
    density_ratio(var, Vec::Zero(3), 1.0 / 32);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::resolution);
  }
}

TEST(Density, MonotoneAtVertices) {
  struct Case {
    Fixture f;
    double h;
  };
  // lattice counting noise stays under the slack from 16 cells up
  for (const auto& c : {Case{transverse_pair(), 1.0 / 128}, Case{four_half_planes(0), 1.0 / 2048},
                        Case{four_half_planes(1), 1.0 / 256}, Case{parallel_planes(2, 1, 5.0), 1.0 / 256}}) {
    const auto var = sample_graph(generate(c.f, c.h, 1.0));
    const auto p = density_profile(var, Vec::Zero(var.ambient_dim()), 0.5);
    ASSERT_GE(p.radii.size(), 3u);
    for (std::size_t j = 1; j < p.radii.size(); ++j) {
      if (p.radii[j] < 16 * c.h) break;
      EXPECT_LT(p.radii[j], p.radii[j - 1]);
      EXPECT_LE(p.ratios[j], p.ratios[j - 1] * 1.02) << c.f.id << " radius " << p.radii[j];
    }
  }
}

TEST(Density, LoConeVertexExceedsOne) {
  const auto var = sample_graph(generate(lo_two_valued(), 1.0 / 12, 1.0));
  EXPECT_GT(density_ratio(var, Vec::Zero(7), 0.5), 1.5);
}

TEST(Tangent, ExactPlane) {
  const auto var = sample_graph(generate(parallel_planes(2, 1, 5.0), 1.0 / 64, 1.0));
  const auto t = tangent_estimate(var, var.point(var.size() / 2), 0.1);
  EXPECT_TRUE(t.reliable);
  EXPECT_LT(principal_angles(t.plane.basis(), Subspace::coordinate(3, {0, 1}).basis()).maxCoeff(), 1e-6);
}

TEST(Tangent, ParabolaDeviationShrinksWithRadius) {
  const double w0 = 0.3;
  const auto g = TwoValuedGrid::sample(1, 1, 1.0, 1.0 / 1024,
                                       [](const Vec& x) { return Pair2(v({x(0) * x(0)}), v({x(0) * x(0) + 5})); });
  const auto var = sample_graph(g);
  const Eigen::MatrixXd exact = mat(2, 1, {1, 2 * w0}).normalized();
  double prev = 1.0;
  for (double rho : {0.1, 0.05, 0.025}) {
    const auto t = tangent_estimate(var, v({w0, w0 * w0}), rho, 0);
    const double dev = principal_angles(t.plane.basis(), exact).maxCoeff();
    EXPECT_LT(dev, rho);
    EXPECT_LT(dev, 0.6 * prev);
    prev = dev;
  }
}

TEST(Tangent, FlagsMixedDoublePoint) {
  const auto var = sample_graph(generate(transverse_pair(), 1.0 / 32, 1.0));
  EXPECT_FALSE(tangent_estimate(var, Vec::Zero(4), 0.25).reliable);
  EXPECT_TRUE(tangent_estimate(var, v({0.5, 0, 0, 0}), 0.2).reliable);
}

TEST(AxisTilt, VanishesOnCylindricalCones) {
  for (const Fixture& f : {axis_line_pair(0.8), four_half_planes(2)}) {
    const auto var = sample_graph(generate(f, 1.0 / 16, 1.0));
    EXPECT_LT(axis_tilt(var, *f.cone, unit_ball(var.ambient_dim())), 1e-20 * var.total_mass());
  }
}

TEST(AxisTilt, TiltedPlaneGivesSineSquared) {
  // the x2-axis leaves the plane {x3 = tan(phi) x2} at angle phi
  const double phi = 0.3;
  const auto g = TwoValuedGrid::sample(2, 1, 1.0, 1.0 / 32, [&](const Vec& x) {
    return Pair2(v({std::tan(phi) * x(1)}), v({std::tan(phi) * x(1) + 5}));
  });
  const auto var = sample_graph(g);
  const double s = std::sin(phi);
  EXPECT_NEAR(axis_tilt(var, *axis_line_pair().cone, Everywhere{}), var.total_mass() * s * s, 1e-12);
}

TEST(Varifold, DilationScalesMassAndDensity) {
  const auto var = sample_graph(generate(holo_pair_curved(), 1.0 / 64, 1.0));
  const auto d = var.dilated(Vec::Zero(4), 0.5);
  EXPECT_NEAR(d.total_mass(), var.total_mass() * 4, 1e-9);
  EXPECT_NEAR(density_ratio(d, Vec::Zero(4), 0.5), density_ratio(var, Vec::Zero(4), 0.25), 1e-12);
}

TEST(Varifold, RotationPreservesMassAndTilt) {
  Rng rng(4);
  const Fixture f = four_half_planes(1);
  const auto var = sample_graph(generate(f, 1.0 / 32, 1.0));
  const Eigen::MatrixXd q = random_rotation(rng, 4);
  const auto r = var.mapped(q, Vec::Zero(4));
  EXPECT_NEAR(r.total_mass(), var.total_mass(), 1e-12);
  const Cone rc = f.cone->mapped(q, Vec::Zero(4));
  EXPECT_NEAR(axis_tilt(r, rc, Everywhere{}), axis_tilt(var, *f.cone, Everywhere{}), 1e-12);
}
