#include "helpers.hpp"

using namespace twograph;
using namespace twograph::testing;

namespace {

double worst(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, x);
  return m;
}

// four half-planes whose right-hand rays point along u and w instead of ±e2
TwoValuedGrid::Evaluator skewed_half_planes(const Eigen::Vector2d& u, const Eigen::Vector2d& w) {
  return [=](const Vec& x) {
    const double s = x(0);
    if (s <= 0.0) return Pair2(v({s, 0}), v({-s, 0}));
    return Pair2(Vec(s * u), Vec(s * w));
  };
}

// precompose with a base rotation and postcompose with a value rotation
TwoValuedGrid::Evaluator rotated(const TwoValuedGrid::Evaluator& f, double base, const Eigen::Matrix2d& q) {
  const Eigen::Matrix2d r = Eigen::Rotation2Dd(base).toRotationMatrix();
  return [=](const Vec& x) {
    const Pair2 p = f(Vec(r * x));
    return Pair2(Vec(q * p.a1), Vec(q * p.a2));
  };
}

}  // namespace

TEST(Link, TransversePairIsTwoGreatCircles) {
  const auto c = classify_link(sample_link(transverse_pair().eval, 2, 128));
  EXPECT_EQ(c.verdict, LinkVerdict::two_disjoint_great_circles) << c.diagnostics;
  EXPECT_TRUE(c.junctions.empty());
  EXPECT_EQ(c.arcs, 2);
  EXPECT_LT(worst(c.geodesy_residuals), 1e-12);
}

TEST(Link, ConeAndEvaluatorAgree) {
  const Fixture f = transverse_pair();
  const LinkSample a = sample_link(*f.cone, 64), b = sample_link(f.eval, 2, 64);
  ASSERT_EQ(a.size(), b.size());
  for (int j = 0; j < a.size(); ++j) {
    // the two sheets may come out in either order
    const double straight = (a.fiber[j][0] - b.fiber[j][0]).norm() + (a.fiber[j][1] - b.fiber[j][1]).norm();
    const double crossed = (a.fiber[j][0] - b.fiber[j][1]).norm() + (a.fiber[j][1] - b.fiber[j][0]).norm();
    EXPECT_LT(std::min(straight, crossed), 1e-14);
  }
}

TEST(Link, FourHalfPlanesAreFourHalfCircles) {
  constexpr int M = 256;
  const auto c = classify_link(sample_link(four_half_planes(1).eval, 2, M));
  EXPECT_EQ(c.verdict, LinkVerdict::four_half_circles) << c.diagnostics;
  ASSERT_EQ(c.junctions.size(), 2u);
  EXPECT_EQ(c.arcs, 4);
  EXPECT_EQ(c.doubled_arcs, 0);
  EXPECT_LT(c.antipodal_error, 2.0 / M);
  EXPECT_LT(worst(c.balance_defects), 0.02);
  for (const auto& j : c.junctions) {
    EXPECT_TRUE(j.isolated);
    EXPECT_EQ(j.tangents.size(), 4u);
    // the junction sits on the base circle where s = 0
    EXPECT_NEAR(std::abs(j.point(1)), 1.0, 1e-12);
  }
}

TEST(Link, BalanceHoldsAtEveryResolution) {
  // a tilted copy so the arcs are not coordinate-aligned; the one-sided tangent
  // stencil is exact on great-circle arcs, so only round-off remains
  const auto f = rotated(four_half_planes(1).eval, 0.0, Eigen::Matrix2d(Eigen::Rotation2Dd(0.3)));
  for (int M : {64, 128, 256, 512}) {
    const auto c = classify_link(sample_link(f, 2, M));
    ASSERT_EQ(c.verdict, LinkVerdict::four_half_circles) << M;
    EXPECT_LT(worst(c.balance_defects), 1e-10) << M;
    EXPECT_LT(c.antipodal_error, 1e-12) << M;
  }
}

TEST(Link, RotationInvariant) {
  constexpr int M = 128;
  const auto base = classify_link(sample_link(four_half_planes(1).eval, 2, M));
  Rng rng(5);
  for (int j : {3, 17, 40}) {
    const Eigen::Matrix2d q = random_rotation(rng, 2);
    const auto c = classify_link(sample_link(rotated(four_half_planes(1).eval, 2 * kPi * j / M, q), 2, M));
    ASSERT_EQ(c.verdict, base.verdict) << j;
    ASSERT_EQ(c.balance_defects.size(), base.balance_defects.size());
    EXPECT_NEAR(worst(c.balance_defects), worst(base.balance_defects), 1e-10) << j;
    EXPECT_NEAR(c.antipodal_error, base.antipodal_error, 1e-12);
  }
}

TEST(Link, UnbalancedJunctionIsInconsistent) {
  // geodesic arcs and antipodal junctions, but the right-hand rays do not oppose
  const auto c = classify_link(sample_link(skewed_half_planes({0, 1}, {0.8, -0.6}), 2, 256));
  EXPECT_EQ(c.verdict, LinkVerdict::inconsistent);
  EXPECT_EQ(c.arcs, 4);
  EXPECT_GT(worst(c.balance_defects), 0.5);
  EXPECT_EQ(c.diagnostics, "junction tangents are not balanced");
}

TEST(Link, DoubledArcIsInconsistent) {
  const auto c = classify_link(sample_link(doubled_arc_cone().eval, 2, 256));
  EXPECT_EQ(c.verdict, LinkVerdict::inconsistent);
  EXPECT_EQ(c.doubled_arcs, 1);
}

TEST(Link, DoubledPlaneIsInconsistent) {
  const auto c = classify_link(
      sample_link([](const Vec& x) { return Pair2::doubled(v({x(0) - x(1), 2 * x(1)})); }, 2, 64));
  EXPECT_EQ(c.verdict, LinkVerdict::inconsistent);
  EXPECT_EQ(c.diagnostics, "the link is a doubled curve");
}

TEST(Link, ExchangedSheetsAreInconsistent) {
  // z -> ±z^{1/2} |z|^{1/2} is homogeneous of degree one and swaps once around
  const auto f = [](const Vec& x) {
    const cplx z(x(0), x(1));
    const cplx r = std::sqrt(std::abs(z)) * std::sqrt(z);
    return Pair2(cvec(r), cvec(-r));
  };
  const auto c = classify_link(sample_link(f, 2, 128));
  EXPECT_EQ(c.verdict, LinkVerdict::inconsistent);
  EXPECT_EQ(c.diagnostics, "the two fiber points are exchanged once around the circle");
}

TEST(Link, Preconditions) {
  auto kind_of = [](auto&& call) {
    try {
      call();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::undefined;
  };
  // not homogeneous
  EXPECT_EQ(kind_of([] { sample_link(holo_pair_curved(1, 1).eval, 2, 64); }), ErrorKind::invalid_input);
  // cones over R^3 have no circle link
  EXPECT_EQ(kind_of([] { sample_link(*four_half_planes(2).cone, 64); }), ErrorKind::invalid_input);
  EXPECT_EQ(kind_of([] { classify_link(sample_link(transverse_pair().eval, 2, 32)); }), ErrorKind::invalid_input);
  EXPECT_EQ(kind_of([] { sample_link(transverse_pair().eval, 2, 4); }), ErrorKind::invalid_input);
  EXPECT_EQ(kind_of([] { sample_link(transverse_pair().eval, 3, 64); }), ErrorKind::dimension_mismatch);
}
