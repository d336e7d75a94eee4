#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "colvar/symmetry.hpp"

using namespace colvar;

namespace {

EpsGrid grid() { return make_eps_grid(1e-3, 1e-1, 5); }

// Rotation of the plane, -u1 d/du0 + u0 d/du1.
VectorField plane_rotation() {
  VectorField v;
  v.name = "rotation";
  v.psi.push_back([](double, double, const std::vector<double>& u) { return -u[1]; });
  v.psi.push_back([](double, double, const std::vector<double>& u) { return u[0]; });
  return v;
}

// Non-projectable-looking but admissible field with x and u dependence.
VectorField curved() {
  VectorField v;
  v.name = "curved";
  v.xi = [](double, double x) { return x * x + 0.5; };
  v.psi.push_back([](double, double x, const std::vector<double>& u) { return x * u[0] * u[0] + std::sin(x); });
  return v;
}

Lagrangian free_plane() {
  Lagrangian L;
  L.name = "free_plane";
  L.components = 2;
  L.density = [](double, const JetPoint& j) {
    return 0.5 * (j.u[1][0] * j.u[1][0] + j.u[1][1] * j.u[1][1]);
  };
  return L;
}

Lagrangian harmonic() {
  return lagrangians::particle([](double, double u) { return 0.5 * u * u; }, [](double, double u) { return u; },
                               "harmonic");
}

}  // namespace

TEST(Characteristics, Values) {
  auto j = JetPoint::scalar(0.4, {2.0, 3.0, 5.0});
  EXPECT_DOUBLE_EQ(characteristics(VectorField::translation_x(1), 1.0, j)[0], -3.0);
  EXPECT_DOUBLE_EQ(characteristics(VectorField::galilean(), 1.0, j)[0], 0.4);
  EXPECT_DOUBLE_EQ(characteristics(VectorField::scaling(), 1.0, j)[0], 2.0);
}

TEST(Prolong, KnownCoefficients) {
  auto j = JetPoint::scalar(0.4, {2.0, 3.0, 5.0, 7.0});
  auto g = prolong(VectorField::galilean(), 2);
  EXPECT_NEAR(g.coefficient(1, 0, 1.0, j), 1.0, 1e-9);
  EXPECT_NEAR(g.coefficient(2, 0, 1.0, j), 0.0, 1e-7);
  auto s = prolong(VectorField::scaling(), 2);
  EXPECT_NEAR(s.coefficient(1, 0, 1.0, j), 3.0, 1e-9);
  EXPECT_NEAR(s.coefficient(2, 0, 1.0, j), 5.0, 1e-7);
  // xi = x^2 + 1/2, psi = 0: psi^(1) = -2x u', psi^(2) = -2u' - 4x u''.
  VectorField v;
  v.xi = [](double, double x) { return x * x + 0.5; };
  v.psi.push_back([](double, double, const std::vector<double>&) { return 0.0; });
  auto p = prolong(v, 2);
  EXPECT_NEAR(p.coefficient(1, 0, 1.0, j), -2.4, 1e-9);
  EXPECT_NEAR(p.coefficient(2, 0, 1.0, j), -6.0 - 8.0, 1e-7);
}

TEST(Prolong, RecursionMatchesTaylorCurveOnRandomJets) {
  std::vector<std::pair<Lagrangian, VectorField>> cases{
      {lagrangians::dirichlet_energy(), curved()},
      {lagrangians::dirichlet_energy(), VectorField::scaling()},
      {free_plane(), plane_rotation()},
  };
  for (const auto& [L, v] : cases) {
    auto jets = random_jets(L, 200, 0x5EED, 2);
    auto pr = prolong(v, 2);
    double worst = 0.0;
    for (const auto& j : jets)
      for (int k = 1; k <= 2; ++k)
        for (int a = 0; a < v.components(); ++a) {
          double r = pr.coefficient(k, a, 1.0, j), d = pr.coefficient_direct(k, a, 1.0, j);
          worst = std::max(worst, std::fabs(r - d) / (1.0 + std::fabs(d)));
        }
    EXPECT_LT(worst, 1e-8) << v.name;
  }
}

TEST(Criterion, Symmetries) {
  auto g = grid();
  auto L = lagrangians::dirichlet_energy();
  auto jets = random_jets(L);
  EXPECT_TRUE(infinitesimal_criterion(L, VectorField::translation_x(1), g, jets).symmetry);
  EXPECT_TRUE(infinitesimal_criterion(L, VectorField::shift_u(1, 0), g, jets).symmetry);
  auto kep = lagrangians::kepler();
  auto kj = random_jets(kep);
  EXPECT_TRUE(infinitesimal_criterion(kep, VectorField::shift_u(2, 1), g, kj).symmetry);
  EXPECT_TRUE(infinitesimal_criterion(kep, VectorField::translation_x(2), g, kj).symmetry);
  EXPECT_TRUE(infinitesimal_criterion(free_plane(), plane_rotation(), g, random_jets(free_plane())).symmetry);
}

TEST(Criterion, NonSymmetries) {
  auto g = grid();
  auto L = lagrangians::dirichlet_energy();
  auto jets = random_jets(L);
  // pr v(L) = u'^2 and u' respectively.
  auto s = infinitesimal_criterion(L, VectorField::scaling(), g, jets);
  EXPECT_FALSE(s.symmetry);
  EXPECT_EQ(s.report.cls, NetClass::Moderate);
  EXPECT_FALSE(infinitesimal_criterion(L, VectorField::galilean(), g, jets).symmetry);
  // Radial shift of the Kepler problem.
  auto kep = lagrangians::kepler();
  EXPECT_FALSE(infinitesimal_criterion(kep, VectorField::shift_u(2, 0), g, random_jets(kep)).symmetry);
}

TEST(Noether, SignCalibration) { EXPECT_EQ(calibrate_noether_sign(), kNoetherSign); }

TEST(Noether, EnergyCurrentIsMinusEnergy) {
  auto L = harmonic();
  auto P = noether_current(L, VectorField::translation_x(1));
  auto j = JetPoint::scalar(0.0, {0.6, 0.8});
  EXPECT_NEAR(P(1.0, j), -(0.5 * 0.64 + 0.5 * 0.36), 1e-12);
}

TEST(Noether, IdentityHoldsForSymmetries) {
  auto g = grid();
  auto L = lagrangians::anharmonic();
  auto r = noether_identity_check(L, VectorField::translation_x(1), noether_current(L, VectorField::translation_x(1)),
                                  g, random_jets(L));
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.max_rel, 1e-8);

  auto kep = lagrangians::kepler();
  auto rot = VectorField::shift_u(2, 1);
  auto rk = noether_identity_check(kep, rot, noether_current(kep, rot), g, random_jets(kep));
  EXPECT_TRUE(rk.pass);
  EXPECT_LT(rk.max_rel, 1e-8);
  auto tk = noether_identity_check(kep, VectorField::translation_x(2),
                                   noether_current(kep, VectorField::translation_x(2)), g, random_jets(kep));
  EXPECT_TRUE(tk.pass);
}

TEST(Noether, WrongCurrentFails) {
  auto g = grid();
  auto L = lagrangians::anharmonic();
  auto v = VectorField::translation_x(1);
  auto P = noether_current(L, v);
  NoetherCurrent wrong = P;
  wrong.P = [P, L](double e, const JetPoint& j) { return P(e, j) - L(e, j); };  // xi L dropped
  EXPECT_FALSE(noether_identity_check(L, v, wrong, g, random_jets(L)).pass);
  NoetherCurrent flipped = P;
  flipped.sign = -kNoetherSign;
  EXPECT_FALSE(noether_identity_check(L, v, flipped, g, random_jets(L)).pass);
}

TEST(Drift, ExactOscillatorConservesEnergy) {
  auto g = grid();
  auto L = harmonic();
  auto P = noether_current(L, VectorField::translation_x(1));
  std::vector<Trajectory> paths(g.size());
  for (auto& tr : paths)
    for (int f = 0; f <= 200; ++f) {
      double t = 0.05 * f;
      tr.t.push_back(t);
      tr.q.push_back({std::cos(t)});
      tr.qdot.push_back({-std::sin(t)});
    }
  auto d = conservation_drift(P, g, paths);
  EXPECT_LT(d.max_drift, 1e-14);
  EXPECT_TRUE(d.within(1e-14));
  EXPECT_NEAR(d.initial[0], -0.5, 1e-15);
}

TEST(Drift, DampedOscillatorDrifts) {
  auto g = grid();
  auto P = noether_current(harmonic(), VectorField::translation_x(1));
  std::vector<Trajectory> paths(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    for (int f = 0; f <= 100; ++f) {
      double t = 0.05 * f, e = g[i];
      paths[i].t.push_back(t);
      // u = exp(-eps t) cos t loses energy at rate eps.
      paths[i].q.push_back({std::exp(-e * t) * std::cos(t)});
      paths[i].qdot.push_back({std::exp(-e * t) * (-e * std::cos(t) - std::sin(t))});
    }
  auto d = conservation_drift(P, g, paths);
  EXPECT_GT(d.max_drift, 1e-2);
  EXPECT_FALSE(d.within(1e-8));
  EXPECT_EQ(d.report.cls, NetClass::Moderate);
}

TEST(Drift, GridNetTrajectory) {
  auto g = grid();
  auto P = noether_current(harmonic(), VectorField::translation_x(1));
  auto x = GridNet::sample_on(g, SpatialGrid(0.0, 5.0, 2001), [](double, double t) { return std::sin(t); });
  auto d = conservation_drift(P, Field{x});
  EXPECT_LT(d.max_drift, 1e-9);
}
