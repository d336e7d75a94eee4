#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "colvar/asymptotics.hpp"
#include "colvar/calculus.hpp"
#include "colvar/mollify.hpp"

using namespace colvar;

namespace {
EpsGrid grid() { return make_eps_grid(1e-3, 1e-1, 4); }
}

TEST(Differentiate, ExactOnCubicsInterior) {
  auto u = GridNet::sample_on(grid(), SpatialGrid(0.0, 1.0, 21), [](double, double x) { return x * x * x; });
  auto d = differentiate(u, 1);
  for (std::size_t j = 0; j < 21; ++j) {
    double x = d.spatial(0).node(j);
    EXPECT_NEAR(d.values(0)[j], 3 * x * x, 1e-11);
  }
}

TEST(Differentiate, SineSecondDerivativeFourthOrder) {
  double err[2];
  int k = 0;
  for (std::size_t n : {41u, 81u}) {
    auto u = GridNet::sample_on(grid(), SpatialGrid(0.0, 2.0, n), [](double, double x) { return std::sin(x); });
    auto d = differentiate(u, 2);
    double e = 0;
    for (std::size_t j = 0; j < n; ++j) e = std::max(e, std::fabs(d.values(1)[j] + std::sin(d.spatial(1).node(j))));
    err[k++] = e;
  }
  EXPECT_LT(err[0], 1e-4);
  EXPECT_GT(err[0] / err[1], 12.0);  // fourth order: ~16
}

TEST(Differentiate, HigherOrdersAndCoarseGrid) {
  auto u = GridNet::sample_on(grid(), SpatialGrid(0.0, 1.0, 101), [](double, double x) { return std::exp(x); });
  for (int order = 1; order <= 4; ++order) {
    auto d = differentiate(u, order);
    for (std::size_t j = 0; j < 101; ++j)
      EXPECT_NEAR(d.values(2)[j], std::exp(d.spatial(2).node(j)), 2e-4) << order;
  }
  auto tiny = GridNet::sample_on(grid(), SpatialGrid(0.0, 1.0, 4), [](double, double x) { return x; });
  EXPECT_THROW(differentiate(tiny, 1), Unresolved);
  EXPECT_THROW(differentiate(u, 5), InvalidArgument);
}

TEST(Integrate, Basics) {
  auto one = GridNet::sample_on(grid(), SpatialGrid(0.0, 1.0, 11), [](double, double) { return 1.0; });
  for (double v : integrate(one).samples()) EXPECT_NEAR(v, 1.0, 1e-15);
  auto sq = GridNet::sample_on(grid(), SpatialGrid(0.0, 1.0, 101), [](double, double x) { return x * x; });
  for (double v : integrate(sq).samples()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-10);
  // Even node count uses the 3/8 panel.
  auto sq2 = GridNet::sample_on(grid(), SpatialGrid(0.0, 1.0, 100), [](double, double x) { return x * x; });
  for (double v : integrate(sq2).samples()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-10);
  for (double v : integrate(sq, Interval{0.1234, 0.777}).samples())
    EXPECT_NEAR(v, (std::pow(0.777, 3) - std::pow(0.1234, 3)) / 3.0, 1e-10);
  EXPECT_THROW(integrate(sq, Interval{-0.5, 0.5}), DomainError);
}

TEST(Integrate, ModelDeltaHasUnitMass) {
  auto g = make_eps_grid(1e-4, 1e-1, 4);
  auto d = make_model_delta(g);
  auto u = d.realize({-1.0, 1.0});
  for (double v : integrate(u).samples()) EXPECT_NEAR(v, 1.0, 1e-8);
  // Off-centre and at the coarsest admissible resolution the error stays small.
  auto v = d.realize({-1.0, 1.0}, 0.123, 201, 16.0);
  for (double m : integrate(v).samples()) EXPECT_NEAR(m, 1.0, 1e-5);
}

TEST(Calculus, FundamentalTheorem) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int k = 0; k < 10; ++k) {
    double a = U(rng), b = U(rng), c = U(rng);
    auto f = [=](double x) { return std::sin(a * x) + b * x * x + std::exp(c * x / 3.0); };
    auto u = GridNet::sample_on(grid(), SpatialGrid(0.0, 1.0, 401), [&](double, double x) { return f(x); });
    auto du = differentiate(u, 1);
    auto I = integrate(du);
    for (double v : I.samples()) EXPECT_NEAR(v, f(1.0) - f(0.0), 1e-9);
    // Running integral then differentiate recovers the integrand.
    auto back = differentiate(antiderivative(u), 1);
    for (std::size_t j = 0; j < 401; ++j) EXPECT_NEAR(back.values(0)[j], u.values(0)[j], 1e-7);
  }
}

TEST(Mollifier, BumpNormalized) {
  auto m = Mollifier::bump();
  EXPECT_NEAR(quad::integral([&](double y) { return m(y); }, -1.0, 1.0), 1.0, 1e-12);
  EXPECT_EQ(m(1.0), 0.0);
  EXPECT_EQ(m(-1.0), 0.0);
  EXPECT_GE(m(0.999), 0.0);
  EXPECT_NEAR(m.derivative(0.3), stencil::d1(m, 0.3, 1e-4), 1e-8);
  // Raw integral of exp(-1/(1-y^2)).
  EXPECT_NEAR(1.0 / m(0.0), std::exp(1.0) * 0.443993816168079437823, 1e-12);
}

TEST(MollifyEmbed, StepIsSmoothTransition) {
  PiecewiseFunction step{[](double x) { return x < 0 ? 0.0 : 1.0; }, {0.0}};
  auto g = grid();
  auto u = mollify_embed(step, Mollifier::bump(), g, {-1.0, 1.0});
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& s = u.spatial(i);
    for (std::size_t j = 0; j < s.size(); ++j) {
      double x = s.node(j);
      if (x <= -g[i]) EXPECT_NEAR(u.values(i)[j], 0.0, 1e-12);
      if (x >= g[i]) EXPECT_NEAR(u.values(i)[j], 1.0, 1e-12);
    }
  }
  auto du = differentiate(u, 1);
  auto rep = weak_association(du, WeakTarget::point_mass(0.0), default_tests(-1.0, 1.0));
  EXPECT_TRUE(rep.pass) << rep.max_discrepancy;
}

TEST(MollifyEmbed, SmoothFunctionSecondOrder) {
  auto g = grid();
  PiecewiseFunction f{[](double x) { return std::cos(x); }, {}};
  auto u = mollify_embed(f, Mollifier::bump(), g, {-1.0, 1.0});
  std::vector<double> err(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& s = u.spatial(i);
    for (std::size_t j = 0; j < s.size(); ++j)
      err[i] = std::max(err[i], std::fabs(u.values(i)[j] - std::cos(s.node(j))));
  }
  auto r = classify(GenNumber(g, err));
  EXPECT_NEAR(r.slope, 2.0, 0.05);
  auto rep = weak_association(u, WeakTarget::function(f.f), default_tests(-1.0, 1.0));
  EXPECT_TRUE(rep.pass);
}

TEST(MollifyEmbed, AbsoluteValueAtZero) {
  auto g = grid();
  PiecewiseFunction f{[](double x) { return std::fabs(x); }, {0.0}};
  auto u = mollify_embed(f, Mollifier::bump(), g, {-1.0, 1.0});
  auto v = eval_at(u, GenPoint::classical(g, 0.0));
  auto r = classify(v);
  EXPECT_NEAR(r.slope, 1.0, 0.02);
  auto m = Mollifier::bump();
  double moment = quad::integral([&](double y) { return std::fabs(y) * m(y); }, -1.0, 1.0, std::vector<double>{0.0});
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(v[i], g[i] * moment, 1e-10);
}

TEST(MollifyEmbed, NodeCap) {
  PiecewiseFunction step{[](double x) { return x < 0 ? 0.0 : 1.0; }, {0.0}};
  auto g = make_eps_grid(1e-7, 1e-1, 4);
  EXPECT_THROW(mollify_embed(step, Mollifier::bump(), g, {-1.0, 1.0}), Unresolved);
}

TEST(Delta, ModelChecksAndValues) {
  auto g = make_eps_grid(1e-4, 1e-1, 5);
  auto d = make_model_delta(g);
  EXPECT_TRUE(d.checks().all());
  auto m = Mollifier::bump();
  auto at0 = gen_number(g, [&](double e) { return d.value(e, 0.0); });
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(at0[i], m(0.0) / g[i]);
  auto r = classify(at0);
  EXPECT_EQ(r.cls, NetClass::Moderate);
  EXPECT_EQ(r.order_n, 1);
}

TEST(Delta, MomentsConverge) {
  auto g = make_eps_grid(1e-3, 1e-1, 5);
  auto d = make_model_delta(g);
  auto u = d.realize({-1.0, 1.0}, 0.0);
  auto mass = integrate(u);
  auto first = integrate(u.map([](double, double x, double v) { return x * v; }));
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(mass[i], 1.0, 1e-8);
    EXPECT_NEAR(first[i], 0.0, 1e-12);
  }
  // x^2-weighted mass decays like eps^2.
  auto second = integrate(u.map([](double, double x, double v) { return x * x * v; }));
  EXPECT_NEAR(classify(second).slope, 2.0, 0.05);
}

TEST(Delta, UnnormalizedShapeRejected) {
  auto g = make_eps_grid(1e-3, 1e-1, 4);
  auto raw = Mollifier::from_shape([](double y) { return std::fabs(y) < 1 ? 1.0 - y * y : 0.0; }, {}, false);
  EXPECT_THROW(make_model_delta(g, raw), InvariantViolation);
}

TEST(Delta, StrictSignedVariant) {
  auto g = make_eps_grid(1e-4, 1e-1, 5);
  auto m = Mollifier::bump();
  auto rho = [m](double e, double x) {
    double y = x / e;
    return (m(y) - 0.3 * m(y - 2.0)) / (0.7 * e);
  };
  auto d = make_strict_delta(g, rho, [](double e) { return 3.0 * e; });
  EXPECT_TRUE(d.checks().mass_bounded);
  for (double v : d.checks().abs_integral) EXPECT_NEAR(v, 1.3 / 0.7, 1e-8);
  // A family whose mass blows up fails check (iii).
  auto bad = [m](double e, double x) {
    double y = x / e;
    return (m(y) + (m(y - 1.5) - m(y + 1.5)) / e) / e;
  };
  EXPECT_THROW(make_strict_delta(g, bad, [](double e) { return 2.5 * e; }), InvariantViolation);
}
