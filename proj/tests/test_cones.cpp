#include "helpers.hpp"

using namespace twograph;
using namespace twograph::testing;

namespace {

Subspace line2(double angle) { return Subspace::spanned_by(mat(2, 1, {std::cos(angle), std::sin(angle)})); }

Cone line_pair(double a, double b) { return Cone::pair(line2(a), line2(b), 1, 1); }

}  // namespace

TEST(Axis, TransverseComplexLines) {
  const Cone c = *transverse_pair().cone;
  ASSERT_TRUE(c.has_axis());
  EXPECT_EQ(c.axis_dim(), 0);
  EXPECT_EQ(c.axis_dim(), c.n() - 2);
  EXPECT_LT(c.axis().offset().norm(), 1e-14);
}

TEST(Axis, FourHalfLines) {
  const Cone c = *four_half_planes(0).cone;
  EXPECT_EQ(c.n(), 1);
  EXPECT_EQ(c.axis_dim(), 0);
  EXPECT_EQ(c.axis_dim(), c.n() - 1);
}

TEST(Axis, ParallelPlanesHaveNone) {
  const Cone c = *parallel_planes(2, 1, 0.5).cone;
  EXPECT_FALSE(c.has_axis());
  EXPECT_FALSE(axis(c).has_value());
  EXPECT_THROW(align(c), Error);
}

TEST(Cone, RejectsCoincidingPlanes) {
  EXPECT_THROW(line_pair(0.3, 0.3), Error);
  const auto d = Subspace::coordinate(3, {2});
  const std::array<Vec, 4> dup = {v({1, 0, 0}), v({1, 0, 0}), v({0, 1, 0}), v({-1, 0, 0})};
  EXPECT_THROW(Cone::four_half_planes(d, dup, 2, 1), Error);
}

TEST(Dist, Examples) {
  const Cone c = line_pair(kPi / 4, -kPi / 4);
  EXPECT_NEAR(c.dist(v({1, 0})), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(c.dist(v({2, 2})), 0.0, 1e-15);
  // the half-line {x >= 0, y = 0}: nearest point is its end
  const ConePiece half{Subspace::coordinate(2, {0}), Subspace::point(Vec::Zero(2)), v({1, 0})};
  EXPECT_DOUBLE_EQ(half.dist(v({-3, 4})), 5.0);
  EXPECT_DOUBLE_EQ(half.dist(v({3, 4})), 4.0);
}

TEST(Dist, IsOneLipschitz) {
  Rng rng(3);
  for (const Fixture& f : {transverse_pair(), four_half_planes(1), axis_line_pair(0.4)}) {
    const Cone& c = *f.cone;
    for (int i = 0; i < 500; ++i) {
      const Vec x = random_vec(rng, c.ambient_dim(), 2.0), y = random_vec(rng, c.ambient_dim(), 2.0);
      EXPECT_LE(std::abs(c.dist(x) - c.dist(y)), (x - y).norm() + 1e-12);
    }
  }
}

TEST(Dist, InvariantAlongTheAxis) {
  Rng rng(6);
  for (const Fixture& f : {four_half_planes(2), axis_line_pair(2.0)}) {
    const Cone& c = *f.cone;
    for (int i = 0; i < 300; ++i) {
      const Vec x = random_vec(rng, c.ambient_dim(), 2.0);
      const Vec shift = c.axis().basis() * Eigen::VectorXd::NullaryExpr(c.axis_dim(), [&] { return rng.normal(); });
      EXPECT_NEAR(c.dist(x), c.dist(Vec(x + shift)), 1e-12);
    }
  }
}

TEST(Spine, EqualsAxis) {
  const Cone pair = *transverse_pair().cone;
  EXPECT_TRUE(spine(pair).same_as(pair.axis()));
  const Cone fhp = *four_half_planes(2).cone;
  EXPECT_EQ(spine(fhp).dim(), fhp.n() - 1);
  const auto plane = Subspace::coordinate(3, {0, 1});
  EXPECT_TRUE(spine(plane).same_as(plane));
}

TEST(Spine, RejectsConesMissingTheOrigin) {
  const Cone shifted = transverse_pair().cone->mapped(Eigen::MatrixXd::Identity(4, 4), v({0, 0, 1, 0}));
  EXPECT_THROW(spine(shifted), Error);
}

TEST(Nu, SelfDistanceIsZero) {
  for (const Fixture& f : {transverse_pair(), four_half_planes(1)}) EXPECT_LT(nu(*f.cone, *f.cone), 1e-12);
}

TEST(Nu, LinesAtAngle) {
  // the endpoint of one segment at radius 2 is 2 sin(theta) away from the other line
  for (double theta : {0.1, 0.4, 0.7}) {  // below pi/4 the same line stays nearest
    const Cone c = line_pair(0.0, kPi / 2);
    const Cone d = line_pair(theta, kPi / 2 + theta);
    EXPECT_NEAR(nu(c, d), 2 * std::sin(theta), 1e-9);
  }
}

TEST(Nu, RejectsTooFewSamples) { EXPECT_THROW(nu(*transverse_pair().cone, *transverse_pair().cone, 50), Error); }

TEST(Nu, SymmetricAndTriangle) {
  Rng rng(10);
  const Cone base = *axis_line_pair(1.0).cone;
  std::vector<Cone> cones;
  for (int i = 0; i < 4; ++i) {
    Eigen::MatrixXd skew = Eigen::MatrixXd::Zero(3, 3);
    skew(0, 2) = 0.2 * rng.normal();
    skew(2, 0) = -skew(0, 2);
    skew(1, 2) = 0.2 * rng.normal();
    skew(2, 1) = -skew(1, 2);
    cones.push_back(base.mapped(cayley(skew), Vec::Zero(3)));
  }
  for (std::size_t a = 0; a < cones.size(); ++a)
    for (std::size_t b = 0; b < cones.size(); ++b) {
      EXPECT_NEAR(nu(cones[a], cones[b]), nu(cones[b], cones[a]), 1e-3);  // sampling error
      for (std::size_t c = 0; c < cones.size(); ++c)
        EXPECT_LE(nu(cones[a], cones[c]), nu(cones[a], cones[b]) + nu(cones[b], cones[c]) + 1e-3);
    }
}

TEST(Align, AlreadyAlignedIsIdentity) {
  const AlignmentFrame f = align(*four_half_planes(0).cone);
  EXPECT_LT((f.rotation - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-14);
}

TEST(Align, DiagonalAxis) {
  // four half-planes in R^3 with boundary span{(1,1,0)/sqrt 2}
  const Vec a = v({1, 1, 0}) / std::sqrt(2.0);
  const auto axis = Subspace::spanned_by(mat(3, 1, {a(0), a(1), a(2)}));
  const Vec u = v({1, -1, 0}) / std::sqrt(2.0), w = v({0, 0, 1});
  const Cone c = Cone::four_half_planes(axis, {u, Vec(-u), w, Vec(-w)}, 2, 1);
  const AlignmentFrame f = align(c);
  EXPECT_LT((f.rotation * f.rotation.transpose() - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-12);
  EXPECT_LT((f.apply(a) - v({0, 0, 1})).norm(), 1e-12);
  for (const auto& d : f.directions) EXPECT_LT(std::abs(d.dot(a)), 1e-12);
  // r_C(X) is the norm of the non-axis coordinates in the aligned frame
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vec x = random_vec(rng, 3, 2.0);
    EXPECT_NEAR(c.axis_distance(x), f.apply(x).head(2).norm(), 1e-10);
  }
}

TEST(Cone, MappedAndDilatedPreserveDistanceStructure) {
  Rng rng(21);
  const Cone c = *four_half_planes(1).cone;
  const Eigen::MatrixXd q = random_rotation(rng, 4);
  const Vec t = random_vec(rng, 4);
  const Cone m = c.mapped(q, t);
  const Cone d = c.dilated(Vec::Zero(4), 0.5);
  for (int i = 0; i < 200; ++i) {
    const Vec x = random_vec(rng, 4, 2.0);
    EXPECT_NEAR(m.dist(Vec(q * x + t)), c.dist(x), 1e-12);
    EXPECT_NEAR(d.dist(Vec(x / 0.5)), c.dist(x) / 0.5, 1e-12);
  }
}

TEST(Cone, GraphsReproduceTheFixture) {
  const Fixture f = four_half_planes(0);
  const auto graphs = f.cone->graphs();
  ASSERT_EQ(graphs.size(), 4u);
  for (double t : {-0.7, -0.2, 0.3, 0.9}) {
    Eigen::VectorXd x(1);
    x << t;
    std::vector<Vec> vals;
    for (const auto& g : graphs)
      if (g.admits(x)) vals.push_back(g.slope * x + g.shift);
    ASSERT_EQ(vals.size(), 2u);
    EXPECT_EQ(Pair2(vals[0], vals[1]), f.eval(v({t})));
  }
}
