#include <cmath>

#include <gtest/gtest.h>

#include "colvar/gen_opt.hpp"

using namespace colvar;

namespace {
EpsGrid grid() { return make_eps_grid(1e-4, 1e-1, 7); }
Eigen::VectorXd at(double x) { return Eigen::VectorXd::Constant(1, x); }
}  // namespace

TEST(CounterexampleBump, Shape) {
  for (double x : {-0.5, -0.2, 0.0, 0.1, 0.45}) EXPECT_DOUBLE_EQ(counterexample_bump(x), x * x);
  EXPECT_DOUBLE_EQ(counterexample_bump(1.0), -1.0);
  EXPECT_DOUBLE_EQ(counterexample_bump(-1.0), -1.0);
  EXPECT_EQ(counterexample_bump(1.95), 0.0);
  EXPECT_EQ(counterexample_bump(-2.5), 0.0);
  // phi'' changes sign on [-2, 2]: that is what defeats the sufficient test.
  bool negative = false;
  for (double y = -2; y <= 2; y += 0.01) negative = negative || stencil::d2(counterexample_bump, y, 1e-3) < -0.1;
  EXPECT_TRUE(negative);
}

TEST(CheckCritical, Parabola) {
  auto f = EpsFunctionFamily::scalar(grid(), -1, 1, [](double, double x) { return x * x; });
  auto r = check_critical(f, at(0.0));
  EXPECT_TRUE(r.gradient.negligible());
  EXPECT_EQ(r.hessian.verdict, Definiteness::PositiveDefinite);
  EXPECT_THROW(check_critical(f, at(1.0)), DomainError);
}

TEST(CheckCritical, BumpHasStrictlyPositiveCurvature) {
  auto f = bump_counterexample(grid());
  auto r = check_critical(f, at(0.0));
  EXPECT_TRUE(r.gradient.negligible());
  EXPECT_EQ(r.hessian.verdict, Definiteness::PositiveDefinite);
  const auto& e = r.hessian.eigenvalues[0];
  for (std::size_t i = 0; i < grid().size(); ++i) EXPECT_NEAR(e[i] * grid()[i] * grid()[i], 2.0, 1e-6);
}

TEST(CheckCritical, ZeroDivisorCoefficient) {
  auto [alpha, omega] = make_zero_divisor_pair(grid());
  std::vector<double> a(alpha.samples().begin(), alpha.samples().end());
  auto g = grid();
  auto f = EpsFunctionFamily::scalar(g, -1, 1, [a, g](double e, double x) {
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g[i] == e) return a[i] * x * x;
    return 0.0;
  });
  auto r = check_critical(f, at(0.0));
  EXPECT_TRUE(r.gradient.negligible());
  EXPECT_EQ(r.hessian.verdict, Definiteness::PositiveSemidefinite);
  EXPECT_EQ(sufficient_min_check(f, at(0.0), 0.5).verdict, MinVerdict::Minimum);
  EXPECT_TRUE(neighborhood_min_test(f, at(0.0), 0.5).is_minimum_on_probes);
}

TEST(NeighborhoodMin, ParabolaPasses) {
  auto f = EpsFunctionFamily::scalar(grid(), -1, 1, [](double, double x) { return x * x; });
  auto r = neighborhood_min_test(f, at(0.0), 0.5);
  EXPECT_TRUE(r.is_minimum_on_probes);
  EXPECT_EQ(r.probes, 240u);
  EXPECT_EQ(sufficient_min_check(f, at(0.0), 0.5).verdict, MinVerdict::UniqueMinimum);
}

TEST(NeighborhoodMin, BumpFailsAtEpsScale) {
  auto g = grid();
  auto f = bump_counterexample(g);
  auto r = neighborhood_min_test(f, at(0.0), 1.0);
  ASSERT_FALSE(r.is_minimum_on_probes);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_DOUBLE_EQ(r.witness->x(i), g[i]);
    EXPECT_NEAR((*r.witness_difference)[i], -1.0, 1e-9);
  }
  EXPECT_EQ(r.witness->kind(), PointKind::NearStandard);
  auto s = sufficient_min_check(f, at(0.0), 1.0);
  EXPECT_EQ(s.verdict, MinVerdict::Inconclusive);
  EXPECT_FALSE(s.hessian_psd_on_probes);
}

TEST(NeighborhoodMin, SeriesFailsAtClassicalPoint) {
  auto g = grid();
  auto f = series_counterexample(g);
  auto r = neighborhood_min_test(f, at(0.0), 1.0);
  ASSERT_FALSE(r.is_minimum_on_probes);
  EXPECT_EQ(r.witness->kind(), PointKind::Classical);
  double x = r.witness->x(0);
  int n0 = static_cast<int>(std::lround(1.0 / x));
  EXPECT_NEAR(x, 1.0 / n0, 1e-15);
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_NEAR((*r.witness_difference)[i], -std::pow(g[i], n0), 1e-12 * std::pow(g[i], n0));
}

TEST(NeighborhoodMin, ClassicalTheoryConsistency) {
  // A classical strict minimum of an eps-independent function in 2D.
  auto g = grid();
  Box b{Eigen::Vector2d(-2, -2), Eigen::Vector2d(2, 2)};
  EpsFunctionFamily f(g, b, [](double, const Eigen::VectorXd& x) {
    return std::cosh(x(0) - 0.2) + 0.5 * (x(1) + 0.1) * (x(1) + 0.1) + 0.3 * (x(0) - 0.2) * (x(1) + 0.1);
  });
  Eigen::Vector2d x0(0.2, -0.1);
  auto c = check_critical(f, x0);
  EXPECT_TRUE(c.gradient.negligible());
  EXPECT_EQ(c.hessian.verdict, Definiteness::PositiveDefinite);
  EXPECT_TRUE(neighborhood_min_test(f, x0, 0.5).is_minimum_on_probes);
  EXPECT_EQ(sufficient_min_check(f, x0, 0.5).verdict, MinVerdict::UniqueMinimum);
}

TEST(SufficientMin, RequiresCriticalPoint) {
  auto f = EpsFunctionFamily::scalar(grid(), -1, 1, [](double, double x) { return (x - 0.3) * (x - 0.3); });
  EXPECT_THROW(sufficient_min_check(f, at(0.0), 0.5), PreconditionViolated);
}

TEST(SufficientMin, NeverMinimumWhenProbesFail) {
  // A narrow deep well at a classical probe point inside the ball.
  auto g = grid();
  auto f = EpsFunctionFamily::scalar(g, -3, 3, [](double e, double x) {
    return x * x - 10.0 * std::exp(-(x - 0.8) * (x - 0.8) / (0.01 * 0.01)) * (e > 0 ? 1.0 : 0.0);
  });
  auto s = sufficient_min_check(f, at(0.0), 1.0);
  auto n = neighborhood_min_test(f, at(0.0), 1.0);
  ASSERT_FALSE(n.is_minimum_on_probes);
  EXPECT_EQ(n.witness->kind(), PointKind::Classical);
  EXPECT_EQ(s.verdict, MinVerdict::Inconclusive);
}
