#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "colvar/asymptotics.hpp"
#include "colvar/mollify.hpp"
#include "colvar/ode.hpp"
#include "colvar/quadrature.hpp"
#include "colvar/scenarios/result.hpp"
#include "colvar/variational.hpp"

namespace colvar::scenarios {

using Vec2 = std::array<double, 2>;

// Per-eps metric g_ij(x) on a two-dimensional chart.
struct Metric {
  std::string name;
  std::function<Eigen::Matrix2d(double eps, const Vec2&)> g;
  std::vector<Vec2> samples;  // chart points for the definiteness check
};

// kappa |s| convolved with rho_eps: eps kappa A(s/eps), where
// A(t) = t (2 Phi(t) - 1) - 2 M(t), Phi(t) = int_{-1}^t rho, M(t) = int_{-1}^t y rho.
class MollifiedAbs {
 public:
  MollifiedAbs(Mollifier rho, double kappa) : rho_(std::move(rho)), kappa_(kappa) {}
  double operator()(double eps, double s) const {
    double t = s / eps;
    if (std::fabs(t) >= 1.0) return kappa_ * std::fabs(s);
    double Phi = quad::integral([&](double y) { return rho_(y); }, -1.0, t, {}, 1e-16, 1e-14);
    double M = quad::integral([&](double y) { return y * rho_(y); }, -1.0, t, {}, 1e-16, 1e-14);
    return eps * kappa_ * (t * (2.0 * Phi - 1.0) - 2.0 * M);
  }

 private:
  Mollifier rho_;
  double kappa_;
};

inline Metric euclidean_metric() {
  return {"euclidean", [](double, const Vec2&) { return Eigen::Matrix2d::Identity().eval(); },
          {{-1.0, -1.0}, {0.0, 0.0}, {0.5, -0.25}, {1.0, 1.0}}};
}

// Flat metric in polar coordinates (r, phi).
inline Metric polar_metric() {
  Metric m{"polar",
           [](double, const Vec2& x) {
             Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
             g(0, 0) = 1.0;
             g(1, 1) = x[0] * x[0];
             return g;
           },
           {}};
  for (double r : {0.5, 1.0, 2.0})
    for (double phi : {-2.0, 0.0, 1.0}) m.samples.push_back({r, phi});
  return m;
}

// exp(2 lambda_eps(x1)) I with lambda_eps = (kappa |.|) * rho_eps, a
// mollified kink across the line x1 = 0.
inline Metric conformal_metric(double kappa) {
  auto lam = std::make_shared<MollifiedAbs>(Mollifier::bump(), kappa);
  Metric m{"conformal",
           [lam](double eps, const Vec2& x) {
             return (std::exp(2.0 * (*lam)(eps, x[0])) * Eigen::Matrix2d::Identity()).eval();
           },
           {}};
  for (double x1 : {-1.0, -0.01, -0.001, 0.0, 0.0005, 0.005, 0.5})
    for (double x2 : {-0.5, 0.5}) m.samples.push_back({x1, x2});
  return m;
}

inline double metric_fd_step(double eps, double x) { return 1e-3 * std::min(1.0, eps) * (1.0 + std::fabs(x)); }

// d_m g at x, five-point differences.
inline std::array<Eigen::Matrix2d, 2> metric_gradient(const Metric& M, double eps, const Vec2& x) {
  std::array<Eigen::Matrix2d, 2> dg;
  for (int m = 0; m < 2; ++m) {
    double h = metric_fd_step(eps, x[m]);
    auto at = [&](double s) {
      Vec2 y = x;
      y[m] += s;
      return M.g(eps, y);
    };
    dg[m] = (at(-2 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2 * h)) / (12.0 * h);
  }
  return dg;
}

// Gamma[k](i, j) = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij).
using Christoffel = std::array<Eigen::Matrix2d, 2>;

inline Christoffel christoffel(const Metric& M, double eps, const Vec2& x) {
  Eigen::Matrix2d g = M.g(eps, x);
  if (!(std::fabs(g.determinant()) > 1e-14 * std::max(1.0, g.cwiseAbs().maxCoeff()))) {
    std::ostringstream os;
    os << "metric " << M.name << " not invertible at (" << x[0] << ", " << x[1] << "), eps = " << eps;
    throw Degenerate(os.str());
  }
  Eigen::Matrix2d gi = g.inverse();
  auto dg = metric_gradient(M, eps, x);
  Christoffel G;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double s = 0.0;
        for (int l = 0; l < 2; ++l) s += gi(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        G[k](i, j) = 0.5 * s;
      }
  return G;
}

// E = 1/2 g_ij(u) u'^i u'^j.
inline Lagrangian geodesic_energy_lagrangian(const Metric& M) {
  Lagrangian L;
  L.name = "geodesic_energy_" + M.name;
  L.components = 2;
  L.growth = Growth::General;
  L.density = [M](double eps, const JetPoint& j) {
    Eigen::Vector2d v(j.u[1][0], j.u[1][1]);
    return 0.5 * v.dot(M.g(eps, {j.u[0][0], j.u[0][1]}) * v);
  };
  L.partial_u = [M](double eps, const JetPoint& j, int k, int a) {
    Eigen::Vector2d v(j.u[1][0], j.u[1][1]);
    Vec2 x{j.u[0][0], j.u[0][1]};
    if (k == 1) return (M.g(eps, x) * v)(a);
    return 0.5 * v.dot(metric_gradient(M, eps, x)[a] * v);
  };
  L.partial_x = [](double, const JetPoint&) { return 0.0; };
  return L;
}

struct GeodesicParams {
  std::string metric = "conformal";
  double kappa = 0.5;
  Vec2 x0{-0.5, 0.3}, v0{1.0, 0.2};
  double T = 1.0;
  double tol = 1e-10;
  // Time nodes for the residual: nodes_per_eps per eps / |v| when the metric
  // depends on eps, else a fixed count.
  double nodes_per_eps = 256.0;
  int nodes = 2001;
  double christoffel_tol = 1e-8;
  double line_tol = 1e-8;
  double energy_tol = 1e-8;
  EpsGrid grid = make_eps_grid(1e-3, 1e-1, 5);

  static GeodesicParams from(ConfigReader& c) {
    GeodesicParams p;
    p.metric = c.choice("metric", p.metric, {"conformal", "polar", "euclidean"});
    if (p.metric == "polar") {
      p.x0 = {1.0, 0.0};
      p.v0 = {0.2, 1.0};
    }
    p.kappa = c.number("kappa", p.kappa);
    auto x0 = c.numbers("x0", {p.x0[0], p.x0[1]});
    auto v0 = c.numbers("v0", {p.v0[0], p.v0[1]});
    if (x0.size() != 2 || v0.size() != 2) throw ConfigError("x0 and v0 need two entries");
    p.x0 = {x0[0], x0[1]};
    p.v0 = {v0[0], v0[1]};
    if (p.metric == "polar" && !(p.x0[0] > 0.0)) throw ConfigError("polar chart needs r > 0");
    p.T = c.positive("T", p.T);
    p.tol = c.positive("tol", p.tol);
    p.nodes_per_eps = c.positive("nodes_per_eps", p.nodes_per_eps);
    p.nodes = c.integer("nodes", p.nodes, 101, 1'000'000);
    p.christoffel_tol = c.positive("christoffel_tol", p.christoffel_tol);
    p.line_tol = c.positive("line_tol", p.line_tol);
    p.energy_tol = c.positive("energy_tol", p.energy_tol);
    p.grid = read_eps(c, p.grid);
    c.finish();
    return p;
  }

  Metric make_metric() const {
    if (metric == "polar") return polar_metric();
    if (metric == "euclidean") return euclidean_metric();
    return conformal_metric(kappa);
  }
};

struct GeodesicRun {
  SpatialGrid times{0.0, 1.0, 2};
  std::vector<double> x1, x2, v1, v2;
  double energy_drift = 0.0;  // max |E(t) - E(0)| / (1 + |E(0)|) with E = g(v, v)
};

inline GeodesicRun integrate_geodesic(const GeodesicParams& p, const Metric& M, double eps) {
  double speed = std::hypot(p.v0[0], p.v0[1]);
  auto n = static_cast<std::size_t>(p.nodes);
  if (p.metric == "conformal") {
    n = static_cast<std::size_t>(std::ceil(p.T * p.nodes_per_eps * std::max(speed, 1e-12) / eps)) + 1;
    n = std::clamp<std::size_t>(n, static_cast<std::size_t>(p.nodes), SpatialGrid::kNodeCap);
  }
  GeodesicRun r;
  r.times = SpatialGrid(0.0, p.T, n);
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = r.times.node(j);

  auto rhs = [&](const ode::State& y, ode::State& dy, double) {
    auto G = christoffel(M, eps, {y[0], y[1]});
    Eigen::Vector2d v(y[2], y[3]);
    dy[0] = y[2];
    dy[1] = y[3];
    dy[2] = -v.dot(G[0] * v);
    dy[3] = -v.dot(G[1] * v);
  };
  ode::Options opt;
  opt.atol = opt.rtol = p.tol;
  if (p.metric == "conformal") {
    // The metric varies on the scale eps near x1 = 0: never step across that strip.
    opt.max_step = [eps](double, const ode::State& y) {
      double v = std::max(std::hypot(y[2], y[3]), 1e-12);
      double d = std::fabs(y[0]);
      return d > 2.0 * eps ? std::max(eps / (8.0 * v), 0.5 * (d - eps) / v) : eps / (8.0 * v);
    };
  }
  auto sol = ode::integrate(rhs, {p.x0[0], p.x0[1], p.v0[0], p.v0[1]}, out, opt);
  auto E = [&](const ode::State& y) {
    Eigen::Vector2d v(y[2], y[3]);
    return v.dot(M.g(eps, {y[0], y[1]}) * v);
  };
  double E0 = E(sol.y.front());
  for (const auto& y : sol.y) {
    r.x1.push_back(y[0]);
    r.x2.push_back(y[1]);
    r.v1.push_back(y[2]);
    r.v2.push_back(y[3]);
    r.energy_drift = std::max(r.energy_drift, std::fabs(E(y) - E0) / (1.0 + std::fabs(E0)));
  }
  return r;
}

inline ScenarioResult geodesic_energy(const GeodesicParams& p) {
  ScenarioResult res;
  res.name = "geodesic_energy";
  const auto& g = p.grid;
  const std::size_t n = g.size();
  const Metric M = p.make_metric();

  // Positive definiteness at the sample points, per eps.
  json defin = json::array();
  bool all_pd = true;
  for (const auto& x : M.samples) {
    std::vector<Eigen::MatrixXd> mats;
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::Matrix2d m = M.g(g[i], x);
      if (!(m.determinant() != 0.0) || !m.allFinite()) {
        std::ostringstream os;
        os << "metric " << M.name << " not invertible at (" << x[0] << ", " << x[1] << "), eps = " << g[i];
        throw Degenerate(os.str());
      }
      mats.emplace_back(m);
    }
    auto rep = classify_definiteness(GenMatrix(g, std::move(mats)));
    all_pd = all_pd && rep.verdict == Definiteness::PositiveDefinite;
    defin.push_back({{"x", {x[0], x[1]}}, {"verdict", to_string(rep.verdict)}});
  }
  res.flag("metric positive definite at every sample point", all_pd);

  if (p.metric == "polar") {
    double err = 0.0;
    for (const auto& x : M.samples)
      for (std::size_t i = 0; i < n; ++i) {
        auto G = christoffel(M, g[i], x);
        double r = x[0];
        err = std::max({err, std::fabs(G[0](1, 1) + r), std::fabs(G[1](0, 1) - 1.0 / r), std::fabs(G[1](1, 0) - 1.0 / r),
                        std::fabs(G[0](0, 0)), std::fabs(G[0](0, 1)), std::fabs(G[1](0, 0)), std::fabs(G[1](1, 1))});
      }
    res.check("polar Christoffel symbols vs Gamma^r_phiphi = -r, Gamma^phi_rphi = 1/r", err, "<=", p.christoffel_tol);
    res.data["christoffel_error"] = err;
  } else if (p.metric == "euclidean") {
    double err = 0.0;
    for (const auto& x : M.samples)
      for (std::size_t i = 0; i < n; ++i) {
        auto G = christoffel(M, g[i], x);
        err = std::max({err, G[0].cwiseAbs().maxCoeff(), G[1].cwiseAbs().maxCoeff()});
      }
    res.check("Euclidean Christoffel symbols vanish", err, "<=", p.christoffel_tol);
    res.data["christoffel_error"] = err;
  }

  auto runs = parallel_map<GeodesicRun>(n, [&](std::size_t i) { return integrate_geodesic(p, M, g[i]); });

  // Euler-Lagrange residual of the energy along the computed curves.
  std::vector<SpatialGrid> sp;
  std::vector<std::vector<double>> c1, c2;
  for (auto& r : runs) {
    sp.push_back(r.times);
    c1.push_back(r.x1);
    c2.push_back(r.x2);
  }
  Field curve{GridNet(g, sp, std::move(c1)), GridNet(g, sp, std::move(c2))};
  auto F = Functional::natural(geodesic_energy_lagrangian(M), {0.0, p.T});
  auto E = euler_residual(F, curve);
  // The residual takes two nested differences of the sampled curve, so its
  // rounding level grows like h^-2; that sets the floor. The momentum rate
  // |d/dt (g v)| = |g Gamma(v, v)| is reported as the physical scale.
  double gmax = 0.0;
  std::vector<double> scale(n), raw(n), rel(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = runs[i];
    double s = 0.0;
    for (std::size_t j = 0; j < r.x1.size(); ++j) {
      Vec2 x{r.x1[j], r.x2[j]};
      auto G = christoffel(M, g[i], x);
      Eigen::Vector2d v(r.v1[j], r.v2[j]), a(v.dot(G[0] * v), v.dot(G[1] * v));
      s = std::max(s, (M.g(g[i], x) * a).cwiseAbs().maxCoeff());
      gmax = std::max(gmax, M.g(g[i], x).cwiseAbs().maxCoeff());
    }
    scale[i] = s;
    raw[i] = std::max(detail::sup_abs(E[0], i), detail::sup_abs(E[1], i));
    rel[i] = raw[i] / (1.0 + s);
  }
  auto noise = fd_noise_scale(curve, 1, gmax);
  auto mag = residual_magnitude(E, noise);
  auto mag_rep = classify(mag);
  res.flag("Euler-Lagrange residual of the energy is Negligible along the solutions",
           mag_rep.cls == NetClass::Negligible);
  for (std::size_t i = 0; i < n; ++i) {
    res.check("energy g(v, v) drift along the solution", runs[i].energy_drift, "<=", p.energy_tol, g[i]);
  }

  if (p.metric == "euclidean" || p.metric == "polar") {
    // Straight line X(t) = X0 + t V0 in Cartesian coordinates.
    std::vector<double> err(n, 0.0);
    double X0 = p.x0[0], Y0 = 0.0, VX = p.v0[0], VY = 0.0;
    if (p.metric == "polar") {
      double r0 = p.x0[0], f0 = p.x0[1];
      X0 = r0 * std::cos(f0);
      Y0 = r0 * std::sin(f0);
      VX = p.v0[0] * std::cos(f0) - r0 * p.v0[1] * std::sin(f0);
      VY = p.v0[0] * std::sin(f0) + r0 * p.v0[1] * std::cos(f0);
    } else {
      Y0 = p.x0[1];
      VY = p.v0[1];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto& r = runs[i];
      for (std::size_t j = 0; j < r.x1.size(); ++j) {
        double t = r.times.node(j), X = X0 + t * VX, Y = Y0 + t * VY;
        double x = r.x1[j], y = r.x2[j];
        if (p.metric == "polar") {
          double rr = x, ff = y;
          x = rr * std::cos(ff);
          y = rr * std::sin(ff);
        }
        err[i] = std::max(err[i], std::hypot(x - X, y - Y));
      }
      res.check("deviation from the straight line", err[i], "<=", p.line_tol, g[i]);
    }
    res.data["line_error"] = err;
  } else {
    // Cauchy differences of the curves on a common time grid.
    SpatialGrid common(0.0, p.T, 201);
    std::vector<double> cauchy(n - 1, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t j = 0; j < common.size(); ++j) {
        double t = common.node(j);
        double dx = interpolate(runs[i].times, runs[i].x1, t) - interpolate(runs[i + 1].times, runs[i + 1].x1, t);
        double dy = interpolate(runs[i].times, runs[i].x2, t) - interpolate(runs[i + 1].times, runs[i + 1].x2, t);
        cauchy[i] = std::max(cauchy[i], std::hypot(dx, dy));
      }
    res.flag("curves settle: Cauchy difference decreases over the smallest eps", cauchy[n - 2] < cauchy[n - 3]);
    res.data["cauchy_sup_distance"] = cauchy;
  }

  Table tab{"trajectory", {"eps", "t", "x1", "x2", "v1", "v2"}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = runs[i];
    std::size_t stride = std::max<std::size_t>(1, r.x1.size() / 400);
    for (std::size_t j = 0; j < r.x1.size(); j += stride)
      tab.rows.push_back({g[i], r.times.node(j), r.x1[j], r.x2[j], r.v1[j], r.v2[j]});
  }
  res.tables.push_back(std::move(tab));

  res.data["eps"] = eps_json(g);
  res.data["metric"] = M.name;
  res.data["definiteness"] = defin;
  res.data["euler_residual_raw"] = raw;
  res.data["euler_residual_relative"] = rel;
  res.data["euler_residual_scale"] = scale;
  res.data["euler_residual_rounding_floor"] = [&] {
    std::vector<double> f;
    for (std::size_t i = 0; i < n; ++i) f.push_back(kNumericZero * (1.0 + noise[i]));
    return f;
  }();
  res.data["euler_residual_classification"] = mag_rep;
  std::vector<double> drift, endx, endy;
  for (const auto& r : runs) {
    drift.push_back(r.energy_drift);
    endx.push_back(r.x1.back());
    endy.push_back(r.x2.back());
  }
  res.data["energy_drift"] = drift;
  res.data["endpoint_x1"] = endx;
  res.data["endpoint_x2"] = endy;
  return res;
}

}  // namespace colvar::scenarios
