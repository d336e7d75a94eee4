#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "colvar/asymptotics.hpp"
#include "colvar/mollify.hpp"

using namespace colvar;

namespace {
EpsGrid grid() { return make_eps_grid(1e-4, 1e-1, 7); }
GenNumber power(double c, double s) {
  return gen_number(grid(), [=](double e) { return c * std::pow(e, s); });
}
}  // namespace

TEST(Classify, PowerLaws) {
  auto r = classify(power(1.0, 2.0));
  EXPECT_EQ(r.cls, NetClass::Moderate);
  EXPECT_EQ(r.order_n, 0);
  EXPECT_NEAR(r.slope, 2.0, 0.05);
  auto q = classify(power(3.0, -1.5));
  EXPECT_EQ(q.cls, NetClass::Moderate);
  EXPECT_EQ(q.order_n, 2);
  EXPECT_NEAR(q.slope, -1.5, 0.05);
  EXPECT_GT(q.r2, 0.999);
}

TEST(Classify, ExpNegInvIsNegligible) {
  auto x = gen_number(grid(), [](double e) { return std::exp(-1.0 / e); });
  EXPECT_EQ(classify(x).cls, NetClass::Negligible);
  auto y = gen_number(make_eps_grid(1e-2, 1.0, 9), [](double e) { return std::exp(-1.0 / e); });
  EXPECT_EQ(classify(y).cls, NetClass::Negligible);
}

TEST(Classify, NonModerate) {
  auto x = gen_number(make_eps_grid(1e-2, 1.0, 9), [](double e) { return std::exp(1.0 / e); });
  EXPECT_EQ(classify(x).cls, NetClass::NonModerate);
  EXPECT_EQ(classify(power(1.0, -13.5)).cls, NetClass::NonModerate);
}

TEST(Classify, PowerEightIsNotNegligible) {
  // eps^8 fits slope 8 but is a single power; eps^9 beats every eps^m, m<=8.
  EXPECT_EQ(classify(power(1.0, 9.0)).cls, NetClass::Negligible);
  EXPECT_EQ(classify(power(1.0, 7.0)).cls, NetClass::Moderate);
}

TEST(Classify, RandomPowerLawProperty) {
  std::mt19937_64 rng(0x5EED);
  std::uniform_real_distribution<double> S(-4.0, 4.0), C(-3.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    double s = S(rng), c = std::pow(10.0, C(rng));
    auto r = classify(power(c, s));
    EXPECT_NEAR(r.slope, s, 0.1);
    EXPECT_EQ(r.cls, NetClass::Moderate);
    EXPECT_EQ(r.order_n, static_cast<int>(std::ceil(std::max(0.0, -s)))) << "s=" << s;
  }
}

TEST(Classify, ProductRuleOfOrders) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> S(-3.0, 3.0);
  for (int k = 0; k < 50; ++k) {
    double s1 = S(rng), s2 = S(rng);
    auto a = power(2.0, s1), b = power(0.5, s2);
    EXPECT_NEAR(classify(a * b).slope, classify(a).slope + classify(b).slope, 0.2);
  }
}

TEST(Classify, GridTooShortTail) {
  // Four values give a two-sample tail, which is enough; the grid type
  // rejects anything shorter.
  auto g = make_eps_grid(1e-4, 1e-1, 4);
  EXPECT_NO_THROW(classify(GenNumber::constant(g, 1.0)));
}

TEST(Classify, GridNetIncludesDerivatives) {
  auto g = make_eps_grid(1e-3, 1e-1, 5);
  // eps * sin(x / eps): small values, but the second derivative grows like 1/eps.
  auto u = GridNet::sample(
      g, [](double e) { return SpatialGrid::resolving(0.0, 1.0, e); },
      [](double e, double x) { return e * std::sin(x / e); });
  auto r = classify(u);
  EXPECT_EQ(r.cls, NetClass::Moderate);
  EXPECT_EQ(r.order_n, 1);
  EXPECT_NEAR(r.slope, 1.0, 0.05);
  ASSERT_EQ(r.per_order.size(), 3u);
  auto K = classify(u, Interval{0.25, 0.75});
  EXPECT_EQ(K.order_n, 1);
  EXPECT_THROW(classify(u, Interval{-1.0, 0.5}), DomainError);
}

TEST(Invertible, Examples) {
  auto e = is_invertible(power(1.0, 1.0));
  EXPECT_TRUE(e.invertible);
  EXPECT_NEAR(*e.exponent_a, 1.0, 1e-12);
  auto one = is_invertible(power(1.0, 0.0));
  EXPECT_TRUE(one.invertible);
  EXPECT_NEAR(*one.exponent_a, 0.0, 1e-12);
  auto x = gen_number(grid(), [](double e) { return std::exp(-1.0 / e); });
  EXPECT_EQ(is_invertible(x).relation, Relation::Indeterminate);
}

TEST(StrictlyPositive, Examples) {
  auto e = is_strictly_positive(power(1.0, 1.0));
  EXPECT_EQ(e.relation, Relation::StrictlyPositive);
  EXPECT_TRUE(e.invertible && e.nonnegative);
  auto m = is_strictly_positive(power(-1.0, 1.0));
  EXPECT_FALSE(m.nonnegative);
  EXPECT_FALSE(m.strictly_positive);
  auto z = is_strictly_positive(GenNumber::constant(grid(), 0.0));
  EXPECT_TRUE(z.nonnegative);
  EXPECT_FALSE(z.strictly_positive);
  // -eps is still associated with 0.
  auto lim = scalar_association(power(-1.0, 1.0));
  ASSERT_TRUE(lim);
  EXPECT_NEAR(*lim, 0.0, 1e-6);
}

TEST(StrictlyPositive, ImpliesInvertibleAndNonNegative) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> S(-4.0, 10.0), C(-2.0, 2.0);
  for (int k = 0; k < 300; ++k) {
    double s = S(rng), c = C(rng);
    auto v = is_strictly_positive(power(c, s));
    if (v.strictly_positive) EXPECT_TRUE(v.invertible && v.nonnegative);
  }
}

TEST(LemmaX0, Examples) {
  auto one = GenNumber::constant(grid(), 1.0);
  auto x = gen_number(grid(), [](double e) { return std::exp(-1.0 / e); });
  EXPECT_TRUE(lemma_x0_check(x, one).verdict());
  auto c = lemma_x0_check(power(1.0, 3.0), one);
  EXPECT_FALSE(c.bound_holds);
  EXPECT_FALSE(c.verdict());
  EXPECT_TRUE(lemma_x0_check(GenNumber::constant(grid(), 0.0), power(5.0, -2.0)).verdict());
}

TEST(LemmaX0, ImplicationOnRandomNets) {
  std::mt19937_64 rng(0x5EED);
  std::uniform_real_distribution<double> A(0.2, 2.0), N(0.0, 4.0);
  for (int k = 0; k < 100; ++k) {
    double a = A(rng), n = N(rng);
    auto y = power(1.0, -n);
    auto x = gen_number(grid(), [=](double e) { return std::exp(-a / e) * std::pow(e, -n); });
    auto v = lemma_x0_check(x, y);
    if (v.bound_holds) EXPECT_TRUE(v.negligible) << "a=" << a << " n=" << n;
  }
}

TEST(ScalarAssociation, Examples) {
  auto a = scalar_association(gen_number(grid(), [](double e) { return 1.0 + e; }));
  ASSERT_TRUE(a);
  EXPECT_NEAR(*a, 1.0, 1e-9);
  EXPECT_FALSE(scalar_association(power(1.0, -1.0)));
  EXPECT_FALSE(scalar_association(gen_number(grid(), [](double e) { return std::log(e); })));
  auto b = scalar_association(gen_number(grid(), [](double e) { return 2.0 + 3.0 * std::sqrt(e); }));
  ASSERT_TRUE(b);
  EXPECT_NEAR(*b, 2.0, 1e-9);
}

TEST(WeakAssociation, ModelDeltaVsPointMass) {
  auto g = make_eps_grid(1e-3, 1e-1, 5);
  auto d = make_model_delta(g);
  auto u = d.realize({-1.0, 1.0});
  auto rep = weak_association(u, WeakTarget::point_mass(0.0), default_tests(-1.0, 1.0));
  EXPECT_TRUE(rep.pass) << rep.max_discrepancy;
  EXPECT_EQ(rep.entries.size(), 5u);
}

TEST(WeakAssociation, OscillationIsWeakNull) {
  auto g = make_eps_grid(1e-4, 1e-1, 5);
  auto u = GridNet::sample(
      g, [](double e) { return SpatialGrid::resolving(-1.0, 1.0, e); },
      [](double e, double x) { return std::sin(x / e); });
  auto rep = weak_association(u, WeakTarget::zero(), default_tests(-1.0, 1.0));
  EXPECT_TRUE(rep.pass) << rep.max_discrepancy;
}

TEST(WeakAssociation, MollifiedStepVsStep) {
  auto g = make_eps_grid(1e-3, 1e-1, 5);
  PiecewiseFunction step{[](double x) { return x < 0 ? -1.0 : 2.0; }, {0.0}};
  auto u = mollify_embed(step, Mollifier::bump(), g, {-1.0, 1.0});
  auto rep = weak_association(u, WeakTarget::function(step.f, {0.0}), default_tests(-1.0, 1.0));
  EXPECT_TRUE(rep.pass) << rep.max_discrepancy;
  auto wrong = weak_association(u, WeakTarget::zero(), default_tests(-1.0, 1.0));
  EXPECT_FALSE(wrong.pass);
}

TEST(WeakAssociation, RejectsUnresolvedAndOutsideSupport) {
  auto g = make_eps_grid(1e-3, 1e-1, 5);
  auto d = make_model_delta(g);
  auto u = d.realize({-1.0, 1.0});
  EXPECT_THROW(weak_association(u, WeakTarget::zero(), {bump_test(0.9, 0.3)}), DomainError);
  std::vector<std::vector<double>> coarse;
  std::vector<SpatialGrid> sp;
  for (std::size_t i = 0; i < g.size(); ++i) {
    sp.emplace_back(-1.0, 1.0, 101);
    coarse.emplace_back(101, 0.0);
  }
  GridNet bad(g, sp, coarse, std::vector<double>(g.values().begin(), g.values().end()));
  EXPECT_THROW(weak_association(bad, WeakTarget::zero(), default_tests(-1, 1)), Unresolved);
}

TEST(Definiteness, Examples) {
  auto g = grid();
  std::vector<Eigen::MatrixXd> a, b, z;
  auto [alpha, omega] = make_zero_divisor_pair(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
    m(0, 0) = g[i];
    m(1, 1) = 1.0;
    a.push_back(m);
    m(0, 0) = alpha[i];
    b.push_back(m);
    z.push_back(Eigen::MatrixXd::Zero(2, 2));
  }
  EXPECT_EQ(classify_definiteness(GenMatrix(g, a)).verdict, Definiteness::PositiveDefinite);
  EXPECT_EQ(classify_definiteness(GenMatrix(g, b)).verdict, Definiteness::PositiveSemidefinite);
  EXPECT_EQ(classify_definiteness(GenMatrix(g, z)).verdict, Definiteness::PositiveSemidefinite);
}

TEST(Definiteness, AgreesWithBruteForce) {
  std::mt19937_64 rng(0x5EED);
  std::normal_distribution<double> N(0.0, 1.0);
  auto g = make_eps_grid(1e-3, 1e-1, 4);
  for (int trial = 0; trial < 40; ++trial) {
    Eigen::Matrix3d B;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) B(r, c) = N(rng);
    Eigen::Matrix3d S = B * B.transpose();
    if (trial % 2) S -= 1.5 * Eigen::Matrix3d::Identity();
    std::vector<Eigen::MatrixXd> ms(g.size(), Eigen::MatrixXd(S));
    auto verdict = classify_definiteness(GenMatrix(g, ms)).verdict;
    bool brute_psd = true;
    for (int k = 0; k < 1000; ++k) {
      Eigen::Vector3d x(N(rng), N(rng), N(rng));
      x.normalize();
      if (x.dot(S * x) < 0) brute_psd = false;
    }
    bool psd = verdict == Definiteness::PositiveDefinite || verdict == Definiteness::PositiveSemidefinite;
    // Brute force can miss a thin negative cone, never a positive verdict.
    if (psd) EXPECT_TRUE(brute_psd);
    if (!brute_psd) EXPECT_FALSE(psd);
  }
}
