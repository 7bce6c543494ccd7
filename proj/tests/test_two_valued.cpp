#include "helpers.hpp"

using namespace twograph;
using namespace twograph::testing;

namespace {

Pair2 p1(double a, double b) { return Pair2(v({a}), v({b})); }

Pair2 random_pair(Rng& rng, int k) { return Pair2(random_vec(rng, k), random_vec(rng, k)); }

}  // namespace

TEST(Pair2, EqualityIgnoresOrder) {
  EXPECT_EQ(p1(3, 1), p1(1, 3));
  EXPECT_EQ(Pair2(v({0, 1}), v({0, -1})), Pair2(v({0, -1}), v({0, 1})));
  EXPECT_NE(p1(1, 3), p1(1, 2));
}

TEST(Pair2, CanonicalizeIsIdempotent) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    Pair2 p = random_pair(rng, 3);
    const Pair2 once = p;
    p.canonicalize();
    EXPECT_EQ(p, once);
    EXPECT_TRUE(std::lexicographical_compare(p.a1.data(), p.a1.data() + 3, p.a2.data(), p.a2.data() + 3) ||
                p.a1 == p.a2);
  }
}

TEST(MetricG, Examples) {
  EXPECT_EQ(metric_G(p1(1, 3), p1(1, 3)), 0.0);
  EXPECT_DOUBLE_EQ(metric_G(p1(1, 3), p1(2, 5)), 3.0);
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const Vec a = random_vec(rng, 2), b = random_vec(rng, 2);
    const double expect = 2 * std::min((a - b).norm(), (a + b).norm());
    EXPECT_NEAR(metric_G(Pair2(a, Vec(-a)), Pair2(b, Vec(-b))), expect, 1e-14);
  }
}

TEST(MetricG, Axioms) {
  Rng rng(9);
  for (int k = 1; k <= 3; ++k)
    for (int i = 0; i < 2000; ++i) {
      const Pair2 a = random_pair(rng, k), b = random_pair(rng, k), c = random_pair(rng, k);
      EXPECT_EQ(metric_G(a, a), 0.0);
      EXPECT_GT(metric_G(a, b), 0.0);
      EXPECT_EQ(metric_G(a, b), metric_G(b, a));
      EXPECT_LE(metric_G(a, c), metric_G(a, b) + metric_G(b, c) + 1e-12);
    }
}

TEST(MetricG, InvariantUnderIsometries) {
  Rng rng(12);
  for (int i = 0; i < 300; ++i) {
    const int k = 2 + i % 3;
    const Eigen::MatrixXd q = random_rotation(rng, k);
    const Vec t = random_vec(rng, k, 5.0);
    const Pair2 a = random_pair(rng, k), b = random_pair(rng, k);
    auto map = [&](const Pair2& p) { return Pair2(Vec(q * p.a1 + t), Vec(q * p.a2 + t)); };
    EXPECT_NEAR(metric_G(map(a), map(b)), metric_G(a, b), 1e-12);
  }
}

TEST(Grid, CoversTheBall) {
  const auto g = TwoValuedGrid::sample(2, 1, 1.0, 0.25, [](const Vec&) { return p1(0, 1); });
  // lattice points of (1/4) Z^2 in the closed unit disc
  EXPECT_EQ(g.size(), 49u);
  for (std::size_t s = 0; s < g.size(); ++s) EXPECT_LE(g.position(s).norm(), 1.0 + 1e-12);
}

TEST(Grid, RejectsNonFiniteValues) {
  EXPECT_THROW(TwoValuedGrid::sample(1, 1, 1.0, 0.5, [](const Vec&) { return p1(0, std::nan("")); }), Error);
}

TEST(Lipschitz, ConstantIsZero) {
  const auto g = TwoValuedGrid::sample(2, 2, 1.0, 0.1, [](const Vec&) { return Pair2(v({1, 2}), v({3, 4})); });
  EXPECT_EQ(lipschitz_estimate(g), 0.0);
}

TEST(Lipschitz, CrossingLinesGiveTwiceTheSlope) {
  const double m = 0.7;
  const auto g = TwoValuedGrid::sample(1, 1, 1.0, 1.0 / 16, [&](const Vec& x) { return p1(m * x(0), -m * x(0)); });
  EXPECT_NEAR(lipschitz_estimate(g), 2 * m, 1e-12);
}

TEST(Lipschitz, SingleNodeRejected) {
  const auto g = TwoValuedGrid::sample(1, 1, 0.1, 1.0, [](const Vec&) { return p1(0, 0); });
  ASSERT_EQ(g.size(), 1u);
  EXPECT_THROW(lipschitz_estimate(g), Error);
}

TEST(Lipschitz, BranchedFixtureBoundedAndMonotone) {
  double prev = 0.0;
  for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    const double l = lipschitz_estimate(generate(branched_w32(), h, 1.0));
    EXPECT_TRUE(std::isfinite(l));
    EXPECT_LE(l, 3.1);
    EXPECT_GE(l, prev - 1e-12);
    prev = l;
  }
}

TEST(Holder, ConstantAndLinearAreZero) {
  const auto c = TwoValuedGrid::sample(2, 1, 1.0, 0.125, [](const Vec&) { return p1(1, -1); });
  EXPECT_EQ(holder_seminorm(c, 0.5), 0.0);
  const auto lin = generate_derivative(transverse_pair(), 0.125, 1.0);
  EXPECT_LT(holder_seminorm(lin, 0.3), 1e-12);
}

TEST(Holder, RejectsBadExponent) {
  const auto c = TwoValuedGrid::sample(1, 1, 1.0, 0.5, [](const Vec&) { return p1(0, 0); });
  EXPECT_THROW(holder_seminorm(c, 0.0), Error);
  EXPECT_THROW(holder_seminorm(c, 1.5), Error);
}

TEST(Holder, BranchedDerivativeIsExactlyHalfHolder) {
  std::vector<double> half, more;
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256}) {
    const auto df = generate_derivative(branched_w32(), h, 0.5);
    half.push_back(holder_seminorm(df, 0.5, 4 * h));
    more.push_back(holder_seminorm(df, 0.6, 4 * h));
  }
  for (std::size_t i = 1; i < half.size(); ++i) {
    EXPECT_LT(half[i], 1.02 * half[i - 1]);  // stays bounded
    EXPECT_GT(more[i], 1.05 * more[i - 1]);  // grows like h^(-0.1)
  }
}
