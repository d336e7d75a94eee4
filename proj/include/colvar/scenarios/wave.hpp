#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "colvar/mollify.hpp"
#include "colvar/parallel.hpp"
#include "colvar/scenarios/result.hpp"

namespace colvar::scenarios {

// u_tt - u_xx + D_eps(x - x0) F(u) = 0 on the periodic unit interval, by the
// method of lines: fourth-order differences in x, classical RK4 in t.
struct WaveParams {
  std::string spring = "linear";  // F(u) = k u, k u^3, or none
  double k = 1.0;
  double x0 = 0.5;
  double amplitude = 1.0;  // u(x, 0) = A cos(2 pi x), u_t(x, 0) = 0
  double T = 2.0;
  double cfl = 0.4;
  int frames = 200;
  double drift_tol = -1.0;  // default depends on the spring: 1e-6 linear, 1e-5 cubic
  double refinement_ratio = 8.0;
  double dalembert_tol = 1e-6;
  double blowup = 1e8;
  EpsGrid grid = EpsGrid::from_values({0.25, 0.0625, 0.015625, 0.00390625});

  static WaveParams from(ConfigReader& c) {
    WaveParams p;
    p.spring = c.choice("spring", p.spring, {"linear", "cubic", "none"});
    p.k = c.number("k", p.k);
    p.x0 = c.number("x0", p.x0);
    if (!(p.x0 >= 0.0 && p.x0 < 1.0)) throw ConfigError("x0 must lie in [0, 1)");
    p.amplitude = c.number("amplitude", p.amplitude);
    p.T = c.positive("T", p.T);
    p.cfl = c.positive("cfl", p.cfl);
    p.frames = c.integer("frames", p.frames, 1, 100000);
    p.drift_tol = c.positive("drift_tol", p.default_drift_tol());
    p.refinement_ratio = c.positive("refinement_ratio", p.refinement_ratio);
    p.dalembert_tol = c.positive("dalembert_tol", p.dalembert_tol);
    p.blowup = c.positive("blowup", p.blowup);
    c.choice("delta", "model", {"model"});
    p.grid = read_eps(c, p.grid);
    c.finish();
    return p;
  }
  double default_drift_tol() const { return spring == "cubic" ? 1e-5 : 1e-6; }
  double tol() const { return drift_tol > 0.0 ? drift_tol : default_drift_tol(); }

  double F(double u) const {
    if (spring == "linear") return k * u;
    if (spring == "cubic") return k * u * u * u;
    return 0.0;
  }
  double W(double u) const {
    if (spring == "linear") return 0.5 * k * u * u;
    if (spring == "cubic") return 0.25 * k * u * u * u * u;
    return 0.0;
  }
};

// Nodes per unit length for a given eps: h <= min(eps/16, 1/256), a power of 2.
inline std::size_t wave_nodes(double eps) {
  std::size_t n = 256;
  while (1.0 / static_cast<double>(n) > eps / 16.0) n *= 2;
  if (n > SpatialGrid::kNodeCap) throw Unresolved("wave grid exceeds the node cap");
  return n;
}

struct WaveRun {
  std::size_t nodes = 0, steps = 0;
  double h = 0.0, dt = 0.0;
  std::vector<double> t, energy;
  std::vector<double> u_final;
  double max_abs_u = 0.0;
  double drift = 0.0;  // max |E(t) - E(0)| / (1 + |E(0)|)
};

// `delta` gives D_eps at a periodic offset; null means no spring at all.
inline WaveRun run_wave(const WaveParams& p, const DeltaFamily* delta, double eps, std::size_t nodes,
                        const std::vector<double>& u0) {
  if (p.cfl > 0.4) throw PreconditionViolated("CFL number above 0.4");
  const std::size_t N = nodes;
  const double h = 1.0 / static_cast<double>(N);
  std::vector<double> dw(N, 0.0);
  if (delta && p.spring != "none") {
    for (std::size_t j = 0; j < N; ++j) {
      double x = h * static_cast<double>(j);
      double d = x - p.x0;
      d -= std::round(d);  // periodic offset in [-1/2, 1/2]
      dw[j] = delta->value(eps, d);
    }
  }
  const double c2 = 1.0 / (12.0 * h * h), c1 = 1.0 / (12.0 * h);
  // Periodic neighbours j-2, j-1, j+1, j+2.
  std::vector<std::size_t> m2(N), m1(N), p1(N), p2(N);
  for (std::size_t j = 0; j < N; ++j) {
    m2[j] = (j + N - 2) % N;
    m1[j] = (j + N - 1) % N;
    p1[j] = (j + 1) % N;
    p2[j] = (j + 2) % N;
  }
  // The spring only acts where D_eps is nonzero.
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < N; ++j)
    if (dw[j] != 0.0) active.push_back(j);
  using State = std::vector<double>;
  auto rhs = [&](const State& y, State& dy, double) {
    for (std::size_t j = 0; j < N; ++j) {
      double lap = c2 * (-y[m2[j]] + 16.0 * y[m1[j]] - 30.0 * y[j] + 16.0 * y[p1[j]] - y[p2[j]]);
      dy[j] = y[N + j];
      dy[N + j] = lap;
    }
    for (std::size_t j : active) dy[N + j] -= dw[j] * p.F(y[j]);
  };
  auto energy = [&](const State& y) {
    double s = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      double ux = c1 * (y[m2[j]] - 8.0 * y[m1[j]] + 8.0 * y[p1[j]] - y[p2[j]]);
      s += 0.5 * y[N + j] * y[N + j] + 0.5 * ux * ux + (dw[j] != 0.0 ? dw[j] * p.W(y[j]) : 0.0);
    }
    return h * s;
  };

  WaveRun r;
  r.nodes = N;
  r.h = h;
  auto steps_total = static_cast<std::size_t>(std::ceil(p.T / (p.cfl * h) - 1e-9));
  steps_total = ((steps_total + p.frames - 1) / p.frames) * p.frames;
  r.steps = steps_total;
  r.dt = p.T / static_cast<double>(steps_total);
  const std::size_t per_frame = steps_total / p.frames;

  State y(2 * N, 0.0);
  std::copy(u0.begin(), u0.end(), y.begin());
  boost::numeric::odeint::runge_kutta4<State> rk;
  double E0 = energy(y);
  r.t.push_back(0.0);
  r.energy.push_back(E0);
  for (int f = 1; f <= p.frames; ++f) {
    for (std::size_t s = 0; s < per_frame; ++s) {
      double t = r.dt * static_cast<double>((f - 1) * per_frame + s);
      rk.do_step(rhs, y, t, r.dt);
    }
    for (std::size_t j = 0; j < N; ++j) {
      double a = std::fabs(y[j]);
      if (!std::isfinite(a) || a > p.blowup) {
        std::ostringstream os;
        os.precision(17);
        os << "wave solution blew up at t = " << r.dt * static_cast<double>(f * per_frame) << " (eps = " << eps << ")";
        throw IntegrationFailure(os.str());
      }
      r.max_abs_u = std::max(r.max_abs_u, a);
    }
    double E = energy(y);
    r.t.push_back(r.dt * static_cast<double>(f * per_frame));
    r.energy.push_back(E);
    r.drift = std::max(r.drift, std::fabs(E - E0) / (1.0 + std::fabs(E0)));
  }
  r.u_final.assign(y.begin(), y.begin() + static_cast<long>(N));
  return r;
}

inline std::vector<double> wave_initial(const WaveParams& p, std::size_t N) {
  std::vector<double> u(N);
  for (std::size_t j = 0; j < N; ++j) u[j] = p.amplitude * std::cos(2.0 * std::numbers::pi * j / static_cast<double>(N));
  return u;
}

inline ScenarioResult wave_delta_spring(const WaveParams& p) {
  ScenarioResult res;
  res.name = "wave_delta_spring";
  const auto& g = p.grid;
  const std::size_t n = g.size();
  auto D = make_model_delta(g);

  // Runs are independent; flatten (eps, resolution) into one job list.
  auto runs = parallel_map<WaveRun>(2 * n, [&](std::size_t k) {
    std::size_t i = k / 2;
    std::size_t N = wave_nodes(g[i]) * (k % 2 == 0 ? 1 : 2);
    return run_wave(p, &D, g[i], N, wave_initial(p, N));
  });

  // Solver check without the spring: u = A cos(2 pi x) cos(2 pi t).
  std::size_t N0 = wave_nodes(g[0]);
  WaveParams free = p;
  free.spring = "none";
  auto ref = run_wave(free, nullptr, g[0], N0, wave_initial(p, N0));
  double dal = 0.0;
  for (std::size_t j = 0; j < N0; ++j) {
    double x = static_cast<double>(j) / static_cast<double>(N0);
    dal = std::max(dal, std::fabs(ref.u_final[j] - p.amplitude * std::cos(2.0 * std::numbers::pi * x) *
                                                       std::cos(2.0 * std::numbers::pi * p.T)));
  }
  res.check("d'Alembert standing wave error with F = 0", dal, "<=", p.dalembert_tol);

  std::vector<double> drift(n), drift_fine(n), ratio(n), umax(n);
  std::vector<std::size_t> nodes(n);
  Table et{"energy", {"eps", "nodes", "t", "energy"}, {}};
  Table pt{"profile", {"eps", "x", "u"}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = runs[2 * i];
    const auto& f = runs[2 * i + 1];
    drift[i] = c.drift;
    drift_fine[i] = f.drift;
    ratio[i] = f.drift > 0.0 ? c.drift / f.drift : INFINITY;
    umax[i] = std::max(c.max_abs_u, f.max_abs_u);
    nodes[i] = c.nodes;
    res.check("energy drift", c.drift, "<=", p.tol(), g[i]);
    res.check("drift reduction under spatial refinement x2", ratio[i], ">=", p.refinement_ratio, g[i]);
    res.check("solution bounded: max |u|", umax[i], "<=", 10.0 * (1.0 + std::fabs(p.amplitude)), g[i]);
    for (const auto* r : {&c, &f})
      for (std::size_t k = 0; k < r->t.size(); ++k)
        et.rows.push_back({g[i], static_cast<double>(r->nodes), r->t[k], r->energy[k]});
    std::size_t stride = std::max<std::size_t>(1, c.nodes / 256);
    for (std::size_t j = 0; j < c.nodes; j += stride) pt.rows.push_back({g[i], j * c.h, c.u_final[j]});
  }
  res.tables.push_back(std::move(et));
  res.tables.push_back(std::move(pt));

  res.data["eps"] = eps_json(g);
  res.data["spring"] = p.spring == "linear" ? "F(u) = k u" : p.spring == "cubic" ? "F(u) = k u^3" : "none";
  res.data["nodes"] = nodes;
  res.data["energy_drift"] = drift;
  res.data["energy_drift_refined"] = drift_fine;
  res.data["refinement_ratio"] = ratio;
  res.data["max_abs_u"] = umax;
  res.data["initial_energy"] = [&] {
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(runs[2 * i].energy.front());
    return v;
  }();
  res.data["dalembert_error"] = dal;
  return res;
}

}  // namespace colvar::scenarios
