#include <array>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "colvar/scenarios.hpp"

using namespace colvar;
using namespace colvar::scenarios;

// ---------------------------------------------------------------------------
// Particle

TEST(DeltaParticle, AtRestAwayFromTheBarrierStaysPut) {
  auto g = dyadic_grid(4, 10, 2);
  auto D = make_model_delta(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto r = integrate_delta_particle(D, g[i], 0.7, 0.0, 1.0, 50, 1e-10, 10.0);
    for (std::size_t f = 0; f < r.path.t.size(); ++f) {
      EXPECT_EQ(r.path.q[f][0], 0.7);
      EXPECT_EQ(r.path.qdot[f][0], 0.0);
    }
  }
}

TEST(DeltaParticle, FreeFlightBeforeImpact) {
  auto g = dyadic_grid(4, 10, 2);
  auto D = make_model_delta(g);
  auto r = integrate_delta_particle(D, g[1], 1.0, -2.0, 0.3, 31, 1e-10, 10.0);
  for (std::size_t f = 0; f < r.path.t.size(); ++f) EXPECT_NEAR(r.path.q[f][0], 1.0 - 2.0 * r.path.t[f], 1e-9);
}

TEST(DeltaParticle, ScenarioPassesAndEchoesDefaults) {
  auto r = run_scenario("delta_particle", json::object());
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.params.at("x0").get<double>(), 1.0);
  EXPECT_EQ(r.params.at("y0").get<double>(), -2.0);
  EXPECT_EQ(r.params.at("eps").at("values").size(), 7u);
  EXPECT_EQ(r.params.at("seed").get<std::uint64_t>(), 0x5EEDu);
}

TEST(DeltaParticle, RunsAreByteIdentical) {
  json cfg = {{"eps", {{"min", 1.0 / 1024}, {"max", 1.0 / 16}, {"count", 4}}}};
  EXPECT_EQ(run_scenario("delta_particle", cfg).to_json().dump(), run_scenario("delta_particle", cfg).to_json().dump());
}

// ---------------------------------------------------------------------------
// Configs and overrides

TEST(Config, UnknownKeyIsRejected) {
  EXPECT_THROW(run_scenario("delta_particle", json{{"x_0", 1.0}}), ConfigError);
  EXPECT_THROW(run_scenario("hard_rod", json{{"law", "cubic"}}), ConfigError);
  EXPECT_THROW(run_scenario("beam_with_joint", json{{"eps", {{"step", 2}}}}), ConfigError);
}

TEST(Config, UnknownScenarioAndBadValues) {
  EXPECT_THROW(run_scenario("pendulum", json::object()), ConfigError);
  EXPECT_THROW(run_scenario("delta_particle", json{{"x0", 0.0}}), ConfigError);
  EXPECT_THROW(run_scenario("delta_particle", json{{"T", -1.0}}), ConfigError);
  EXPECT_THROW(run_scenario("wave_delta_spring", json{{"spring", "quadratic"}}), ConfigError);
  EXPECT_THROW(run_scenario("delta_particle", json::array()), ConfigError);
  EXPECT_THROW(run_scenario("delta_particle", json{{"eps", {{"min", 0.1}, {"max", 0.01}, {"count", 4}}}}), ConfigError);
}

TEST(Config, ScenarioNames) {
  EXPECT_EQ(scenario_names().size(), 9u);
  for (const auto& n : scenario_names()) EXPECT_TRUE(is_scenario(n));
  EXPECT_FALSE(is_scenario("suite"));
}

TEST(Overrides, MergeIntoEpsSection) {
  RunOverrides o;
  o.eps_min = 1e-3;
  auto c = apply_overrides(json{{"eps", {{"max", 0.5}}}}, o);
  EXPECT_EQ(c["eps"]["min"].get<double>(), 1e-3);
  EXPECT_EQ(c["eps"]["max"].get<double>(), 0.5);
  EXPECT_FALSE(c["eps"].contains("count"));
  EXPECT_EQ(apply_overrides(json{{"x0", 2.0}}, RunOverrides{}), (json{{"x0", 2.0}}));
}

TEST(Overrides, ExplicitValuesNeedAllThreeFlags) {
  json cfg = {{"eps", {{"values", {0.1, 0.05, 0.02, 0.01}}}}};
  RunOverrides o;
  o.eps_count = 5;
  EXPECT_THROW(apply_overrides(cfg, o), ConfigError);
  o.eps_min = 1e-3;
  o.eps_max = 1e-1;
  auto c = apply_overrides(cfg, o);
  EXPECT_FALSE(c["eps"].contains("values"));
  EXPECT_EQ(c["eps"]["count"].get<int>(), 5);
}

TEST(Overrides, GridReachesTheScenario) {
  RunOverrides o;
  o.eps_min = 1.0 / 1024;
  o.eps_max = 1.0 / 8;
  o.eps_count = 4;
  o.seed = 7;
  auto r = run_scenario("delta_particle", json::object(), o);
  auto v = r.params.at("eps").at("values");
  ASSERT_EQ(v.size(), 4u);
  EXPECT_DOUBLE_EQ(v.front().get<double>(), 0.125);
  EXPECT_DOUBLE_EQ(v.back().get<double>(), 1.0 / 1024);
  EXPECT_EQ(r.params.at("seed").get<int>(), 7);
}

// ---------------------------------------------------------------------------
// Elastostatics

TEST(Polynomial, HornerAndAntiderivative) {
  Polynomial p{{1.0, -2.0, 3.0}};  // 1 - 2x + 3x^2
  EXPECT_DOUBLE_EQ(p(2.0), 9.0);
  auto P = p.antiderivative();    // x - x^2 + x^3
  EXPECT_DOUBLE_EQ(P(0.0), 0.0);
  EXPECT_DOUBLE_EQ(P(2.0), 6.0);
  EXPECT_DOUBLE_EQ(p.sup_abs(0.0, 1.0), 2.0);
}

TEST(JointPsi, PlateauAndSmoothEdges) {
  EXPECT_EQ(joint_psi(0.0), 1.0);
  EXPECT_EQ(joint_psi(0.5), 1.0);
  EXPECT_EQ(joint_psi(-0.5), 1.0);
  EXPECT_EQ(joint_psi(1.0), 0.0);
  EXPECT_EQ(joint_psi(-1.3), 0.0);
  EXPECT_NEAR(joint_psi(0.75), 0.5, 1e-15);
  for (double s = 0.5; s < 1.0; s += 0.01) EXPECT_GE(joint_psi(s), joint_psi(s + 0.01));
  // Quintic smoothstep: first and second derivatives vanish at both ends.
  double h = 1e-4;
  EXPECT_NEAR((joint_psi(0.5 + h) - 1.0) / h, 0.0, 1e-6);
  EXPECT_NEAR(joint_psi(1.0 - h) / h, 0.0, 1e-6);
}

TEST(Beam, BendingMomentOfUniformLoad) {
  BeamParams p;  // gamma = 1, l = 1, alpha = 1
  JointBeam b(p, 0.01, 0.01);
  for (double x : {0.0, 0.2, 0.5, 0.9, 1.0}) EXPECT_NEAR(b.M(x), 0.5 * x * (x - 1.0), 1e-13);
}

TEST(Beam, NoJointGivesClassicalDeflection) {
  // h = 1 removes the joint: alpha u'' = M, u(0) = u(1) = 0,
  // u = x^4/24 - x^3/12 + x/24.
  BeamParams p;
  JointBeam b(p, 0.01, 1.0);
  EXPECT_NEAR(b.D(), 0.02, 1e-14);
  for (double x : {0.1, 0.5, 0.8}) {
    double want = std::pow(x, 4) / 24.0 - std::pow(x, 3) / 12.0 + x / 24.0;
    EXPECT_NEAR(b.u(x), want, 1e-12);
    EXPECT_DOUBLE_EQ(b.alpha_eps(x), 1.0);
  }
}

TEST(Beam, SofterJointDeflectsMore) {
  BeamParams p;
  JointBeam stiff(p, 0.01, 0.5), soft(p, 0.01, 0.01);
  EXPECT_GT(soft.u(0.5), stiff.u(0.5));
  EXPECT_GT(soft.D(), stiff.D());
  EXPECT_NEAR(soft.alpha_eps(0.5), 0.01, 1e-15);
}

TEST(Beam, ZeroStiffnessIsDegenerate) {
  BeamParams p;
  EXPECT_THROW(JointBeam(p, 0.01, 0.0), Degenerate);
}

TEST(Beam, PoincareConstantOfFirstMode) {
  EXPECT_NEAR(poincare_constant(1.0, 5), 1.0 / std::pow(std::numbers::pi, 4), 1e-12);
}

TEST(Rod, ZeroLoadGivesZeroDisplacement) {
  RodParams p;
  p.f.c = {0.0};
  p.grid = make_eps_grid(1e-3, 1e-1, 4);
  auto s = solve_rod(p);
  for (std::size_t i = 0; i < p.grid.size(); ++i)
    for (double v : s.u.values(i)) EXPECT_EQ(v, 0.0);
}

TEST(Rod, HardLawClosedForm) {
  // y / eps = 1 - x, so u = eps (x - x^2/2).
  RodParams p;
  p.law = "hard";
  p.grid = make_eps_grid(1e-3, 1e-1, 4);
  auto s = solve_rod(p);
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    const auto& sp = s.u.spatial(i);
    auto u = s.u.values(i);
    for (std::size_t k = 0; k < sp.size(); k += 100) {
      double x = sp.node(k);
      EXPECT_NEAR(u[k], p.grid[i] * (x - 0.5 * x * x), 1e-10 * p.grid[i]);
    }
  }
}

TEST(Rod, NonMonotoneCubicLawRaises) {
  RodParams p;
  p.a = -1.0;  // y^3 - y turns back on (-1/sqrt 3, 1/sqrt 3)
  p.grid = make_eps_grid(1e-3, 1e-1, 4);
  EXPECT_THROW(solve_rod(p), NonMonotone);
}

TEST(Rod, InvertLaw) {
  auto g = [](double y) { return y * y * y + y; };
  EXPECT_NEAR(invert_law(g, 2.0), 1.0, 1e-14);
  EXPECT_NEAR(invert_law(g, -10.0), -2.0, 1e-13);
  EXPECT_NEAR(invert_law([](double y) { return 1e3 * y; }, 5e6), 5e3, 1e-9);
}

// ---------------------------------------------------------------------------
// Wave

TEST(Wave, NodesResolveEps) {
  EXPECT_EQ(wave_nodes(0.25), 256u);
  EXPECT_EQ(wave_nodes(1.0 / 64), 1024u);
  EXPECT_EQ(wave_nodes(0.01), 2048u);
}

TEST(Wave, CflAboveLimitIsRejected) {
  WaveParams p;
  p.cfl = 0.5;
  EXPECT_THROW(run_wave(p, nullptr, 0.25, 256, wave_initial(p, 256)), PreconditionViolated);
  ConfigReader c(json{{"cfl", 0.45}});
  auto q = WaveParams::from(c);
  EXPECT_THROW(wave_delta_spring(q), PreconditionViolated);
}

TEST(Wave, FreeStandingWave) {
  // No spring: u = A cos(2 pi x) cos(2 pi t).
  WaveParams p;
  p.T = 0.5;
  const std::size_t N = 128;
  auto r = run_wave(p, nullptr, 0.25, N, wave_initial(p, N));
  ASSERT_EQ(r.u_final.size(), N);
  double c = std::cos(2.0 * std::numbers::pi * p.T), err = 0.0;
  for (std::size_t j = 0; j < N; ++j)
    err = std::max(err, std::fabs(r.u_final[j] - c * std::cos(2.0 * std::numbers::pi * j / double(N))));
  EXPECT_LT(err, 1e-6);
  // D1 u squared is not the exactly conserved discrete energy; drift is O(h^4).
  EXPECT_LT(r.drift, 1e-6);
}

// ---------------------------------------------------------------------------
// Geodesics

TEST(MollifiedAbs, MatchesAbsOutsideTheWindow) {
  MollifiedAbs m(Mollifier::bump(), 0.5);
  for (double s : {-0.3, -0.011, 0.0101, 2.0}) EXPECT_DOUBLE_EQ(m(0.01, s), 0.5 * std::fabs(s));
}

TEST(MollifiedAbs, EvenConvexAndAboveAbs) {
  MollifiedAbs m(Mollifier::bump(), 1.0);
  double eps = 0.1;
  EXPECT_GT(m(eps, 0.0), 0.0);
  EXPECT_LT(m(eps, 0.0), eps);
  for (double s = -0.12; s <= 0.12; s += 0.01) {
    EXPECT_NEAR(m(eps, s), m(eps, -s), 1e-14);
    EXPECT_GE(m(eps, s), std::fabs(s) - 1e-14);
    EXPECT_GE(m(eps, s - 0.01) + m(eps, s + 0.01) - 2.0 * m(eps, s), -1e-13);
  }
  EXPECT_NEAR(m(eps, 0.1 - 1e-9), 0.1, 1e-8);
}

TEST(MollifiedAbs, ZeroAtOriginMatchesFirstAbsoluteMoment) {
  // (rho_eps * |.|)(0) = eps int |y| rho(y) dy.
  auto rho = Mollifier::bump();
  MollifiedAbs m(rho, 1.0);
  double moment = quad::integral([&](double y) { return std::fabs(y) * rho(y); }, -1.0, 1.0, std::array<double, 1>{0.0}, 1e-16, 1e-14);
  EXPECT_NEAR(m(0.01, 0.0), 0.01 * moment, 1e-14);
}

TEST(Christoffel, EuclideanVanishes) {
  auto M = euclidean_metric();
  auto G = christoffel(M, 0.1, {0.3, -0.7});
  for (int k = 0; k < 2; ++k) EXPECT_LT(G[k].cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Christoffel, Polar) {
  auto M = polar_metric();
  for (double r : {0.5, 1.0, 2.0}) {
    auto G = christoffel(M, 0.1, {r, 0.4});
    EXPECT_NEAR(G[0](1, 1), -r, 1e-9);
    EXPECT_NEAR(G[1](0, 1), 1.0 / r, 1e-9);
    EXPECT_NEAR(G[1](1, 0), 1.0 / r, 1e-9);
    EXPECT_NEAR(G[0](0, 0), 0.0, 1e-9);
    EXPECT_NEAR(G[0](0, 1), 0.0, 1e-9);
    EXPECT_NEAR(G[1](1, 1), 0.0, 1e-9);
  }
  EXPECT_THROW(christoffel(M, 0.1, {0.0, 0.4}), Degenerate);
}

TEST(Christoffel, ConformalMetricAwayFromTheKink) {
  // g = exp(2 kappa |x1|) I for |x1| > eps: Gamma^1_11 = kappa sign(x1),
  // Gamma^2_12 = kappa sign(x1), Gamma^1_22 = -kappa sign(x1).
  auto M = conformal_metric(0.5);
  for (double x1 : {-0.4, 0.3}) {
    auto G = christoffel(M, 0.01, {x1, 0.2});
    double s = x1 > 0 ? 0.5 : -0.5;
    EXPECT_NEAR(G[0](0, 0), s, 1e-7);
    EXPECT_NEAR(G[1](0, 1), s, 1e-7);
    EXPECT_NEAR(G[0](1, 1), -s, 1e-7);
    EXPECT_NEAR(G[1](1, 1), 0.0, 1e-7);
  }
}

// ---------------------------------------------------------------------------
// Serialization

TEST(GridNetCsv, RoundTripsAndClassifies) {
  auto g = make_eps_grid(1e-3, 1e-1, 5);
  std::ostringstream os;
  os << "eps,x,value\n";
  for (std::size_t i = 0; i < g.size(); ++i)
    for (int k = 0; k <= 10; ++k) {
      double x = k / 10.0;
      os << format_double(g[i]) << "," << format_double(x) << "," << format_double(g[i] * g[i] * (1.0 + x)) << "\n";
    }
  std::istringstream in(os.str());
  auto u = read_gridnet_csv(in);
  ASSERT_EQ(u.size(), 5u);
  EXPECT_EQ(u.values(0).size(), 11u);
  EXPECT_EQ(classify(u).cls, NetClass::Moderate);
}

TEST(GridNetCsv, MalformedInput) {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return read_gridnet_csv(in);
  };
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("e,x,v\n0.1,0,1\n"), ParseError);
  EXPECT_THROW(parse("eps,x,value\n0.1,0\n"), ParseError);
  EXPECT_THROW(parse("eps,x,value\n0.1,0,abc\n"), ParseError);
  EXPECT_THROW(parse("eps,x,value\n0.1,0,1\n0.1,0.5,nan\n"), ParseError);
}

TEST(Io, UnwritableDirectory) {
  auto file = std::filesystem::temp_directory_path() / "colvar_test_not_a_dir";
  write_text(file, "x");
  EXPECT_THROW(ensure_directory(file / "sub"), IoError);
  std::filesystem::remove(file);
  EXPECT_THROW(read_json_file("/nonexistent/colvar.json"), IoError);
}
