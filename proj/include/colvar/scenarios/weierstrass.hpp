#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "colvar/mollify.hpp"
#include "colvar/quadrature.hpp"
#include "colvar/scenarios/result.hpp"
#include "colvar/variational.hpp"

namespace colvar::scenarios {

// L(u) = int_{-1}^{1} x^2 u'^2 with u(-1) = c, u(1) = d, which has no
// classical minimizer; u_eps is the mollified step from c to d.
struct WeierstrassParams {
  double c = 0.0, d = 1.0;
  double slope_tol = 0.15;
  EpsGrid grid = make_eps_grid(1e-3, 1e-1, 6);

  static WeierstrassParams from(ConfigReader& cfg) {
    WeierstrassParams p;
    p.c = cfg.number("c", p.c);
    p.d = cfg.number("d", p.d);
    if (p.c == p.d) throw ConfigError("the Weierstrass example needs c != d");
    p.slope_tol = cfg.positive("slope_tol", p.slope_tol);
    cfg.choice("mollifier", "bump", {"bump"});
    p.grid = read_eps(cfg, p.grid);
    cfg.finish();
    if (p.grid.max() >= 1.0) throw ConfigError("eps must stay below 1 so the mollified step fits in (-1, 1)");
    return p;
  }
};

inline ScenarioResult weierstrass(const WeierstrassParams& p) {
  ScenarioResult res;
  res.name = "weierstrass";
  const auto& g = p.grid;
  const std::size_t n = g.size();
  auto rho = Mollifier::bump();
  PiecewiseFunction step{[&](double x) { return x < 0.0 ? p.c : p.d; }, {0.0}};
  auto u = mollify_embed(step, rho, g, {-1.0, 1.0});

  auto F = Functional::dirichlet(lagrangians::weierstrass(), {-1.0, 1.0}, {GenNumber::constant(g, p.c)},
                                 {GenNumber::constant(g, p.d)});
  auto L = evaluate(F, u);
  auto Lrep = classify(L);
  // Substituting x = eps y: L(u_eps) = eps (d - c)^2 int y^2 rho(y)^2 dy.
  double m2 = quad::integral([&](double y) { return y * y * rho(y) * rho(y); }, -1.0, 1.0, {}, 1e-16, 1e-13);
  std::vector<double> oracle(n), rel(n);
  for (std::size_t i = 0; i < n; ++i) {
    oracle[i] = g[i] * (p.d - p.c) * (p.d - p.c) * m2;
    rel[i] = std::fabs(L[i] - oracle[i]) / oracle[i];
  }

  auto tests = default_tests(-1.0, 1.0);
  auto assoc = assoc_minimizer_test(F, u, tests);
  auto E = euler_residual(F, u);
  auto el_shadow = weak_association(E, WeakTarget::zero(), tests);
  auto u_shadow =
      weak_association(u, WeakTarget::function([&](double x) { return x < 0.0 ? p.c : p.d; }, {0.0}), tests);

  res.check("L(u_eps) decay slope minus 1", std::fabs(Lrep.slope - 1.0), "<=", p.slope_tol);
  // The grid has h = eps/16 at every eps, so the difference-quotient error of
  // u_eps' is the same fraction (about 3e-4) of L at every eps.
  for (std::size_t i = 0; i < n; ++i) res.check("L(u_eps) vs scaling oracle (relative)", rel[i], "<=", 1e-3, g[i]);
  res.flag("L(u_eps) decreases over the two smallest eps", L[n - 1] < L[n - 2]);
  res.flag("assoc_minimizer_test passes", assoc.verdict == AssocVerdict::Pass);
  res.flag("Euler-Lagrange residual associated with 0", el_shadow.pass);
  res.flag("u_eps associated with the step", u_shadow.pass);

  Table tab{"profile", {"eps", "x", "u", "residual"}, {}};
  append_profile(tab, {&u, &E}, 400);
  res.tables.push_back(std::move(tab));

  res.data["eps"] = eps_json(g);
  res.data["L"] = as_vector(L);
  res.data["L_oracle"] = oracle;
  res.data["L_classification"] = Lrep;
  res.data["assoc_minimizer_test"] = assoc;
  res.data["euler_residual_shadow"] = el_shadow;
  res.data["u_shadow"] = u_shadow;
  return res;
}

}  // namespace colvar::scenarios
