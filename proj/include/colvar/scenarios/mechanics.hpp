#pragma once

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "colvar/mollify.hpp"
#include "colvar/ode.hpp"
#include "colvar/parallel.hpp"
#include "colvar/scenarios/result.hpp"
#include "colvar/symmetry.hpp"
#include "colvar/variational.hpp"

namespace colvar::scenarios {

// ---------------------------------------------------------------------------
// Particle in a delta potential: x'' + D_eps'(x) = 0.

struct DeltaParticleParams {
  double x0 = 1.0, y0 = -2.0, T = 2.0;
  int frames = 400;
  double tol = 1e-10;
  double box = 10.0;     // |x| beyond this is an error
  double window = 0.1;   // excluded around the reflection time
  double shadow_tol = 0.02;
  double drift_tol = 1e-8;
  EpsGrid grid = dyadic_grid(4, 10);

  static DeltaParticleParams from(ConfigReader& c) {
    DeltaParticleParams p;
    p.x0 = c.number("x0", p.x0);
    if (p.x0 == 0.0) throw ConfigError("x0 must be nonzero");
    p.y0 = c.number("y0", p.y0);
    p.T = c.positive("T", p.T);
    p.frames = c.integer("frames", p.frames, 10, 100000);
    p.tol = c.positive("tolerance", p.tol);
    p.box = c.positive("box", p.box);
    p.window = c.positive("impact_window", p.window);
    p.shadow_tol = c.positive("shadow_tol", p.shadow_tol);
    p.drift_tol = c.positive("drift_tol", p.drift_tol);
    c.choice("delta", "model", {"model"});
    p.grid = read_eps(c, p.grid);
    c.finish();
    return p;
  }
};

struct ParticleRun {
  Trajectory path;
  std::size_t steps = 0;
};

// One eps: adaptive Dormand-Prince with steps capped at eps/8 while |x| <= 2 radius.
inline ParticleRun integrate_delta_particle(const DeltaFamily& D, double eps, double x0, double y0, double T,
                                            int frames, double tol, double box) {
  ode::Options opt;
  opt.atol = opt.rtol = tol;
  opt.initial_step = std::min(1e-3, eps / 8.0);
  double R = D.support_radius(eps);
  // Outside the support the force vanishes and the error estimate is blind to
  // the barrier, so steps are also kept from carrying x across the 2R zone.
  opt.max_step = [eps, R](double, const ode::State& y) {
    double gap = std::fabs(y[0]) - 2.0 * R;
    if (gap <= 0.0) return eps / 8.0;
    double v = std::fabs(y[1]);
    return v > 0.0 ? eps / 8.0 + gap / v : std::numeric_limits<double>::infinity();
  };
  opt.stop = [box](double, const ode::State& y) { return std::fabs(y[0]) > box; };
  auto rhs = [&D, eps](const ode::State& y, ode::State& dy, double) {
    dy[0] = y[1];
    dy[1] = -D.derivative(eps, y[0]);
  };
  auto sol = ode::integrate(rhs, {x0, y0}, ode::linspace(0.0, T, static_cast<std::size_t>(frames)), opt);
  if (sol.truncated) {
    std::ostringstream os;
    os.precision(17);
    os << "trajectory left the box |x| <= " << box << " at t = " << sol.t.back() << " (eps = " << eps << ")";
    throw DomainError(os.str());
  }
  ParticleRun r;
  r.steps = sol.accepted;
  for (std::size_t f = 0; f < sol.t.size(); ++f) {
    r.path.t.push_back(sol.t[f]);
    r.path.q.push_back({sol.y[f][0]});
    r.path.qdot.push_back({sol.y[f][1]});
  }
  return r;
}

inline Lagrangian delta_particle_lagrangian(const DeltaFamily& D) {
  return lagrangians::particle([D](double e, double x) { return D.value(e, x); },
                               [D](double e, double x) { return D.derivative(e, x); }, "delta_particle");
}

inline ScenarioResult delta_particle(const DeltaParticleParams& p, const DeltaFamily& D) {
  require_same_grid(p.grid, D.grid());
  ScenarioResult res;
  res.name = "delta_particle";
  const auto& g = p.grid;
  auto runs = parallel_map<ParticleRun>(g.size(), [&](std::size_t i) {
    return integrate_delta_particle(D, g[i], p.x0, p.y0, p.T, p.frames, p.tol, p.box);
  });

  // Shadow t -> sign(x0)|x0 + t y0| outside the impact window.
  double sgn = p.x0 > 0 ? 1.0 : -1.0;
  std::optional<double> t_star;
  if (p.y0 != 0.0 && -p.x0 / p.y0 > 0.0 && -p.x0 / p.y0 < p.T) t_star = -p.x0 / p.y0;
  std::vector<double> dist(g.size());
  std::vector<std::size_t> steps;
  Table tab{"trajectory", {"eps", "t", "x", "xdot", "shadow"}, {}};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& tr = runs[i].path;
    double d = 0.0;
    for (std::size_t f = 0; f < tr.t.size(); ++f) {
      double s = sgn * std::fabs(p.x0 + tr.t[f] * p.y0);
      if (!t_star || std::fabs(tr.t[f] - *t_star) >= p.window) d = std::max(d, std::fabs(tr.q[f][0] - s));
      tab.rows.push_back({g[i], tr.t[f], tr.q[f][0], tr.qdot[f][0], s});
    }
    dist[i] = d;
    steps.push_back(runs[i].steps);
  }
  res.tables.push_back(std::move(tab));

  std::vector<Trajectory> paths;
  for (auto& r : runs) paths.push_back(std::move(r.path));
  auto L = delta_particle_lagrangian(D);
  auto P = noether_current(L, VectorField::translation_x(1));
  auto drift = conservation_drift(P, g, paths);

  const std::size_t n = g.size();
  res.check("shadow sup distance at smallest eps", dist[n - 1], "<=", p.shadow_tol, g[n - 1]);
  bool mono = true;
  for (std::size_t i = (n >= 4 ? n - 4 : 0) + 1; i < n; ++i) mono = mono && dist[i] < dist[i - 1];
  res.flag("shadow distance decreases over the last 4 eps", mono);
  for (std::size_t i = 0; i < n; ++i) res.check("energy drift", drift.drift[i], "<=", p.drift_tol, g[i]);
  for (std::size_t i = 0; i < n; ++i)
    res.check("energy drift within 10x integrator tolerance", drift.drift[i], "<=", 10.0 * p.tol, g[i]);

  res.data["eps"] = eps_json(g);
  res.data["shadow"] = {{"formula", "sign(x0)|x0 + t y0|"},
                        {"impact_time", t_star ? json(*t_star) : json(nullptr)},
                        {"window", p.window},
                        {"sup_distance", dist}};
  res.data["energy_drift"] = drift;
  res.data["energy_current_sign"] = P.sign;
  res.data["accepted_steps"] = steps;
  return res;
}

inline ScenarioResult delta_particle(const DeltaParticleParams& p) {
  return delta_particle(p, make_model_delta(p.grid));
}

// ---------------------------------------------------------------------------
// Planar motion in a central field, L = m/2 (r'^2 + r^2 phi'^2) - V(r).

struct CentralFieldParams {
  double m = 1.0, k = 1.0;
  std::string potential = "kepler";  // softened -k / sqrt(r^2 + eps^2), or "free"
  double r0 = 1.0;
  double phi0 = 0.0;
  double rdot0 = 0.0;
  double speed_factor = 1.2;  // eccentric orbit: phidot0 = factor * circular rate
  double T_eccentric = 15.0;
  int frames = 400;
  double tol = 1e-10;
  double drift_tol = 1e-8;
  double circular_tol = 1e-6;
  int jets = 200;
  std::uint64_t seed = 0x5EED;  // random jets for the Noether identity
  EpsGrid grid = make_eps_grid(1e-3, 1e-1, 5);

  static CentralFieldParams from(ConfigReader& c) {
    CentralFieldParams p;
    p.m = c.positive("m", p.m);
    p.k = c.number("k", p.k);
    p.potential = c.choice("potential", p.potential, {"kepler", "free"});
    p.r0 = c.positive("r0", p.r0);
    p.phi0 = c.number("phi0", p.phi0);
    p.rdot0 = c.number("rdot0", p.rdot0);
    p.speed_factor = c.positive("speed_factor", p.speed_factor);
    p.T_eccentric = c.positive("T_eccentric", p.T_eccentric);
    p.frames = c.integer("frames", p.frames, 10, 100000);
    p.tol = c.positive("tolerance", p.tol);
    p.drift_tol = c.positive("drift_tol", p.drift_tol);
    p.circular_tol = c.positive("circular_tol", p.circular_tol);
    p.jets = c.integer("jets", p.jets, 10, 100000);
    p.grid = read_eps(c, p.grid);
    c.finish();
    return p;
  }

  double V(double e, double r) const { return potential == "free" ? 0.0 : -k / std::sqrt(r * r + e * e); }
  double dV(double e, double r) const {
    return potential == "free" ? 0.0 : k * r / std::pow(r * r + e * e, 1.5);
  }
  Lagrangian lagrangian() const {
    auto self = *this;
    return lagrangians::central_field(
        m, [self](double e, double r) { return self.V(e, r); }, [self](double e, double r) { return self.dV(e, r); });
  }
};

struct OrbitRun {
  Trajectory path;  // q = (r, phi)
  bool collapsed = false;
};

inline OrbitRun integrate_orbit(const CentralFieldParams& p, double eps, ode::State y0, double T) {
  ode::Options opt;
  opt.atol = opt.rtol = p.tol;
  opt.stop = [](double, const ode::State& y) { return y[0] < 1e-6; };
  // State (r, phi, r', phi').
  auto rhs = [&p, eps](const ode::State& y, ode::State& dy, double) {
    double r = y[0], rd = y[2], pd = y[3];
    dy[0] = rd;
    dy[1] = pd;
    dy[2] = r * pd * pd - p.dV(eps, r) / p.m;
    dy[3] = -2.0 * rd * pd / r;
  };
  auto sol = ode::integrate(rhs, std::move(y0), ode::linspace(0.0, T, static_cast<std::size_t>(p.frames)), opt);
  OrbitRun o;
  o.collapsed = sol.truncated;
  for (std::size_t f = 0; f < sol.t.size(); ++f) {
    o.path.t.push_back(sol.t[f]);
    o.path.q.push_back({sol.y[f][0], sol.y[f][1]});
    o.path.qdot.push_back({sol.y[f][2], sol.y[f][3]});
  }
  return o;
}

inline ScenarioResult central_field(const CentralFieldParams& p) {
  ScenarioResult res;
  res.name = "central_field";
  const auto& g = p.grid;
  const std::size_t n = g.size();
  auto L = p.lagrangian();
  auto rot = VectorField::shift_u(2, 1);
  rot.name = "d/dphi";
  auto time = VectorField::translation_x(2);
  auto Pang = noether_current(L, rot), Pen = noether_current(L, time);

  // Circular orbit: m r phi'^2 = V'(r); with no force the initial rate is 1/r0.
  auto circ_rate = [&](double e) {
    double f = p.dV(e, p.r0);
    return f > 0.0 ? std::sqrt(f / (p.m * p.r0)) : 1.0 / p.r0;
  };
  struct PerEps {
    OrbitRun circ, ecc;
    double period;
  };
  auto runs = parallel_map<PerEps>(n, [&](std::size_t i) {
    double w = circ_rate(g[i]);
    double period = 2.0 * std::numbers::pi / w;
    PerEps o;
    o.period = period;
    o.circ = integrate_orbit(p, g[i], {p.r0, p.phi0, 0.0, w}, period);
    o.ecc = integrate_orbit(p, g[i], {p.r0, p.phi0, p.rdot0, p.speed_factor * w}, p.T_eccentric);
    return o;
  });

  std::vector<Trajectory> circ, ecc;
  std::vector<double> rdev(n), period(n), line_err;
  bool collapsed = false;
  Table tab{"orbit", {"eps", "orbit", "t", "r", "phi", "rdot", "phidot"}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = runs[i].circ.path;
    double d = 0.0;
    for (const auto& q : c.q) d = std::max(d, std::fabs(q[0] - p.r0));
    rdev[i] = d;
    period[i] = runs[i].period;
    collapsed = collapsed || runs[i].circ.collapsed || runs[i].ecc.collapsed;
    for (int which = 0; which < 2; ++which) {
      const auto& tr = which == 0 ? c : runs[i].ecc.path;
      for (std::size_t f = 0; f < tr.t.size(); ++f)
        tab.rows.push_back({g[i], static_cast<double>(which), tr.t[f], tr.q[f][0], tr.q[f][1], tr.qdot[f][0],
                            tr.qdot[f][1]});
    }
    circ.push_back(runs[i].circ.path);
    ecc.push_back(runs[i].ecc.path);
  }
  res.tables.push_back(std::move(tab));

  auto ang = conservation_drift(Pang, g, ecc);
  auto ang_c = conservation_drift(Pang, g, circ);
  auto en = conservation_drift(Pen, g, ecc);
  auto jets = random_jets(L, p.jets, p.seed, 1);
  auto ident = noether_identity_check(L, rot, Pang, g, jets);
  auto crit = infinitesimal_criterion(L, rot, g, jets);

  res.flag("no collapse r -> 0", !collapsed);
  for (std::size_t i = 0; i < n; ++i) {
    res.check("angular momentum drift (eccentric orbit)", ang.drift[i], "<=", p.drift_tol, g[i]);
    res.check("angular momentum drift (circular orbit)", ang_c.drift[i], "<=", p.drift_tol, g[i]);
    res.check("angular momentum drift within 10x integrator tolerance", ang.drift[i], "<=", 10.0 * p.tol, g[i]);
    res.check("energy drift (eccentric orbit)", en.drift[i], "<=", p.drift_tol, g[i]);
    if (p.potential == "kepler") res.check("circular orbit radius deviation", rdev[i], "<=", p.circular_tol, g[i]);
  }
  res.flag("rotation is a variational symmetry", crit.symmetry);
  res.flag("Noether identity D P = sign Q.E(L) on random jets", ident.pass);
  res.check("Noether identity max relative defect", ident.max_rel, "<=", kNumericZero);

  // With no force the motion is a straight line in the plane.
  if (p.potential == "free") {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& tr = ecc[i];
      double w = p.speed_factor * circ_rate(g[i]);
      double x0 = p.r0 * std::cos(p.phi0), y0 = p.r0 * std::sin(p.phi0);
      double vx = p.rdot0 * std::cos(p.phi0) - p.r0 * w * std::sin(p.phi0);
      double vy = p.rdot0 * std::sin(p.phi0) + p.r0 * w * std::cos(p.phi0);
      double err = 0.0;
      for (std::size_t f = 0; f < tr.t.size(); ++f) {
        double r = tr.q[f][0], ph = tr.q[f][1], t = tr.t[f];
        err = std::max({err, std::fabs(r * std::cos(ph) - (x0 + vx * t)), std::fabs(r * std::sin(ph) - (y0 + vy * t))});
      }
      line_err.push_back(err);
      res.check("straight-line motion error", err, "<=", 1e-8, g[i]);
    }
  }

  res.data["eps"] = eps_json(g);
  res.data["potential"] = p.potential == "free" ? "none" : "-k / sqrt(r^2 + eps^2)";
  res.data["circular_period"] = period;
  res.data["circular_radius_deviation"] = rdev;
  res.data["angular_momentum_drift"] = ang;
  res.data["angular_momentum_drift_circular"] = ang_c;
  res.data["energy_drift"] = en;
  res.data["noether_identity"] = ident;
  res.data["noether_sign"] = kNoetherSign;
  res.data["rotation_criterion"] = crit;
  if (!line_err.empty()) res.data["straight_line_error"] = line_err;
  return res;
}

}  // namespace colvar::scenarios
