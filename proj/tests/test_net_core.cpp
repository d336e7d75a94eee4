#include <cmath>

#include <gtest/gtest.h>

#include "colvar/asymptotics.hpp"
#include "colvar/grid_net.hpp"
#include "colvar/mollify.hpp"

using namespace colvar;

TEST(EpsGrid, GeometricDecades) {
  auto g = make_eps_grid(1e-4, 1e-1, 4);
  ASSERT_EQ(g.size(), 4u);
  const double want[] = {1e-1, 1e-2, 1e-3, 1e-4};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(g[i], want[i], 1e-15);
  EXPECT_EQ(g.spacing(), Spacing::Geometric);
}

TEST(EpsGrid, ConstantRatio) {
  auto g = make_eps_grid(1e-3, 1.0, 7);
  double r = std::pow(1e-3, 1.0 / 6.0);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], r, 1e-13);
  EXPECT_NEAR(r, std::pow(10.0, -0.5), 1e-15);
}

TEST(EpsGrid, RejectsBadInput) {
  EXPECT_THROW(make_eps_grid(0.5, 0.5, 4), InvalidArgument);
  EXPECT_THROW(make_eps_grid(0.0, 0.5, 4), InvalidArgument);
  EXPECT_THROW(make_eps_grid(1e-3, 1e-1, 3), InvalidArgument);
  EXPECT_THROW(make_eps_grid(1e-3, 2.0, 5), InvalidArgument);
  EXPECT_THROW(EpsGrid::from_values({0.1, 0.2, 0.01, 0.001}), InvalidArgument);
  // Too narrow: a factor 10 is not enough.
  EXPECT_THROW(make_eps_grid(1e-2, 1e-1, 5), InvalidArgument);
  EXPECT_NO_THROW(EpsGrid::from_values({std::ldexp(1.0, -4), std::ldexp(1.0, -6), std::ldexp(1.0, -8),
                                        std::ldexp(1.0, -10)}));
}

TEST(GenNumber, SamplesRule) {
  auto g = make_eps_grid(1e-4, 1e-1, 4);
  auto x = gen_number(g, [](double e) { return e * e; });
  EXPECT_NEAR(x[0], 1e-2, 1e-17);
  auto one = gen_number(g, [](double) { return 1.0; });
  for (double v : one.samples()) EXPECT_EQ(v, 1.0);
}

TEST(GenNumber, UnderflowIsFinite) {
  auto g = make_eps_grid(1e-3, 1e-1, 5);
  auto x = gen_number(g, [](double e) { return std::exp(-1.0 / e); });
  EXPECT_EQ(x[4], std::exp(-1000.0));
}

TEST(GenNumber, NonFiniteNamesEpsilon) {
  auto g = make_eps_grid(1e-3, 1e-1, 5);
  try {
    gen_number(g, [](double e) { return e < 0.002 ? std::nan("") : 1.0; });
    FAIL();
  } catch (const NonFinite& e) {
    EXPECT_NE(std::string(e.what()).find("0.001"), std::string::npos);
  }
}

TEST(GenNumber, Arithmetic) {
  auto g = make_eps_grid(1e-4, 1e-1, 4);
  auto e = gen_number(g, [](double x) { return x; });
  auto inv = gen_number(g, [](double x) { return 1.0 / x; });
  auto one = e * inv;
  for (double v : one.samples()) EXPECT_NEAR(v, 1.0, 1e-15);
  auto e2 = e * e;
  auto z = e2 + (-e2);
  for (double v : z.samples()) EXPECT_EQ(v, 0.0);
  auto zero = GenNumber::constant(g, 0.0);
  EXPECT_THROW(e / zero, DomainError);
  auto other = GenNumber::constant(make_eps_grid(1e-3, 1e-1, 4), 1.0);
  EXPECT_THROW(e + other, GridMismatch);
}

TEST(GenNumber, RingLawsExact) {
  auto g = make_eps_grid(1e-4, 1e-1, 6);
  auto a = gen_number(g, [](double e) { return std::sin(1.0 / e); });
  auto b = gen_number(g, [](double e) { return e * 3.0; });
  auto c = gen_number(g, [](double e) { return 1.0 + e; });
  auto l = (a + b) + c, r = a + (b + c);
  auto m1 = a * (b + c), m2 = a * b + a * c;
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(l[i], r[i], 4e-16);
    EXPECT_NEAR(m1[i], m2[i], 4e-16);
  }
}

TEST(ZeroDivisor, PairIsOrthogonal) {
  auto g = EpsGrid::from_values({0.5, 0.1, 0.05, 0.005});
  auto [alpha, omega] = make_zero_divisor_pair(g);
  const double a[] = {1, 0, 1, 0}, w[] = {0, 1, 0, 1};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(alpha[i], a[i]);
    EXPECT_EQ(omega[i], w[i]);
  }
  auto prod = alpha * omega;
  for (double v : prod.samples()) EXPECT_EQ(v, 0.0);
  auto ra = classify(alpha), rw = classify(omega);
  EXPECT_EQ(ra.cls, NetClass::Moderate);
  EXPECT_EQ(rw.cls, NetClass::Moderate);
  EXPECT_EQ(ra.order_n, 0);
}

TEST(ZeroDivisor, LongerGrid) {
  auto g = make_eps_grid(1e-6, 1e-1, 9);
  auto [alpha, omega] = make_zero_divisor_pair(g);
  EXPECT_FALSE(classify(alpha).negligible());
  EXPECT_FALSE(classify(omega).negligible());
}

TEST(SpatialGrid, Basics) {
  SpatialGrid s(0.0, 1.0, 11);
  EXPECT_DOUBLE_EQ(s.h(), 0.1);
  EXPECT_EQ(s.node(10), 1.0);
  auto r = SpatialGrid::resolving(-1.0, 1.0, 1e-3);
  EXPECT_LE(r.h(), 1e-3 / 16.0);
  EXPECT_EQ(r.size() % 2, 1u);
  EXPECT_THROW(SpatialGrid::resolving(0.0, 1.0, 1e-6), Unresolved);
}

TEST(EvalAt, LinearAndPointKinds) {
  auto g = make_eps_grid(1e-4, 1e-1, 4);
  SpatialGrid s(0.0, 1.0, 101);
  auto u = GridNet::sample_on(g, s, [](double, double x) { return x; });
  auto half = eval_at(u, GenPoint::classical(g, 0.5));
  for (double v : half.samples()) EXPECT_NEAR(v, 0.5, 1e-15);
  auto pe = GenPoint::scalar(g, [](double e) { return e; }, 0.0);
  EXPECT_EQ(pe.kind(), PointKind::NearStandard);
  auto v = eval_at(u, pe);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(v[i], g[i], 1e-15);
  EXPECT_THROW(eval_at(u, GenPoint::classical(g, 1.5)), DomainError);
}

TEST(EvalAt, NodeHitReturnsNodeValue) {
  auto g = make_eps_grid(1e-4, 1e-1, 4);
  SpatialGrid s(0.0, 1.0, 11);
  auto u = GridNet::sample_on(g, s, [](double, double x) { return std::exp(x); });
  auto v = eval_at(u, GenPoint::classical(g, 0.3));
  EXPECT_EQ(v[0], u.values(0)[3]);
}

TEST(EvalAt, CubicExactOnCubics) {
  auto g = make_eps_grid(1e-4, 1e-1, 4);
  SpatialGrid s(-1.0, 2.0, 37);
  auto p = [](double x) { return 2.0 - x + 0.5 * x * x - 1.25 * x * x * x; };
  auto u = GridNet::sample_on(g, s, [&](double, double x) { return p(x); });
  for (double x : {-0.99, -0.3337, 0.0123, 1.5, 1.999}) {
    auto v = eval_at(u, GenPoint::classical(g, x));
    for (double y : v.samples()) EXPECT_NEAR(y, p(x), 1e-10);
  }
}

TEST(EvalAt, MollifiedStepMatchesConvolution) {
  auto g = make_eps_grid(1e-3, 1e-1, 4);
  auto m = Mollifier::bump();
  PiecewiseFunction step{[](double x) { return x < 0 ? 0.0 : 1.0; }, {0.0}};
  auto u = mollify_embed(step, m, g, {-1.0, 1.0});
  // At x = eps/3 the mollified step equals the mass of rho on (-1, 1/3).
  auto p = GenPoint::scalar(g, [](double e) { return e / 3.0; }, 0.0);
  auto v = eval_at(u, p);
  double oracle = quad::integral([&](double y) { return m(y); }, -1.0, 1.0 / 3.0);
  for (double y : v.samples()) EXPECT_NEAR(y, oracle, 1e-5);
}

TEST(GenPoint, NearStandardCheck) {
  auto g = make_eps_grid(1e-4, 1e-1, 4);
  EXPECT_THROW(GenPoint::scalar(g, [](double) { return 1.0; }, 0.0), InvariantViolation);
  auto q = GenPoint::infer(g, {{0.5}, {0.05}, {0.3}, {0.9}}, {0.0});
  EXPECT_EQ(q.kind(), PointKind::General);
}

TEST(GridNet, ArithmeticNeedsSameSpatialGrid) {
  auto g = make_eps_grid(1e-4, 1e-1, 4);
  auto a = GridNet::sample_on(g, SpatialGrid(0, 1, 11), [](double, double x) { return x; });
  auto b = GridNet::sample_on(g, SpatialGrid(0, 1, 21), [](double, double x) { return x; });
  EXPECT_THROW(a + b, GridMismatch);
  auto c = a * a - a;
  EXPECT_NEAR(c.values(0)[5], 0.25 - 0.5, 1e-15);
}
