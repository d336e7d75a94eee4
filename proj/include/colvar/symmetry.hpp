#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "colvar/asymptotics.hpp"
#include "colvar/error.hpp"
#include "colvar/gen_number.hpp"
#include "colvar/parallel.hpp"
#include "colvar/stencil.hpp"
#include "colvar/variational.hpp"

namespace colvar {

// Projectable vector field xi(x) d/dx + sum_a psi_a(x, u) d/du^a, one
// independent variable. Both parts may depend on eps.
struct VectorField {
  using Xi = std::function<double(double eps, double x)>;
  using Psi = std::function<double(double eps, double x, const std::vector<double>& u)>;

  std::string name;
  Xi xi;
  std::vector<Psi> psi;

  int components() const { return static_cast<int>(psi.size()); }
  double xi_at(double eps, double x) const { return xi ? xi(eps, x) : 0.0; }
  double dxi(double eps, double x) const {
    if (!xi) return 0.0;
    return stencil::d1([&](double t) { return xi(eps, t); }, x, 1e-3 * (1.0 + std::fabs(x)));
  }

  // d/dx (time translation when x is time).
  static VectorField translation_x(int q) {
    VectorField v;
    v.name = "d/dx";
    v.xi = [](double, double) { return 1.0; };
    for (int a = 0; a < q; ++a) v.psi.push_back([](double, double, const std::vector<double>&) { return 0.0; });
    return v;
  }
  // d/du^c: translation (or rotation, for an angle component) of one dependent variable.
  static VectorField shift_u(int q, int c) {
    VectorField v;
    v.name = "d/du" + std::to_string(c);
    for (int a = 0; a < q; ++a)
      v.psi.push_back([a, c](double, double, const std::vector<double>&) { return a == c ? 1.0 : 0.0; });
    return v;
  }
  // x d/du (p = q = 1).
  static VectorField galilean() {
    VectorField v;
    v.name = "x d/du";
    v.psi.push_back([](double, double x, const std::vector<double>&) { return x; });
    return v;
  }
  // u d/du (p = q = 1).
  static VectorField scaling() {
    VectorField v;
    v.name = "u d/du";
    v.psi.push_back([](double, double, const std::vector<double>& u) { return u[0]; });
    return v;
  }
};

// Function on jet space for fixed eps.
using JetFn = std::function<double(const JetPoint&)>;

namespace detail {

inline double jet_step(double eps, double c) { return 1e-3 * std::min(1.0, eps) * (1.0 + std::fabs(c)); }

// Total derivative D F = dF/dx + sum_{k <= order} sum_a u^(k+1)_a dF/du^(k)_a
// with central-difference partials. The jet must carry order + 1.
inline double total_derivative(const JetFn& F, const JetPoint& j, int order, double eps) {
  if (j.order() < order + 1) throw InvalidArgument("jet too short for the total derivative");
  JetPoint p = j;
  double acc = stencil::d1(
      [&](double t) {
        p.x = t;
        return F(p);
      },
      j.x, jet_step(eps, j.x));
  p.x = j.x;
  for (int k = 0; k <= order; ++k)
    for (int a = 0; a < j.components(); ++a) {
      double c = j.u[k][a];
      double dF = stencil::d1(
          [&](double t) {
            p.u[k][a] = t;
            return F(p);
          },
          c, jet_step(eps, c));
      p.u[k][a] = c;
      acc += j.u[k + 1][a] * dF;
    }
  return acc;
}

inline JetFn total_derivative_fn(JetFn F, int order, double eps) {
  return [F = std::move(F), order, eps](const JetPoint& j) { return total_derivative(F, j, order, eps); };
}

// Jet of the Taylor polynomial through j, evaluated at x = t. Orders up to
// the jet's own order are kept.
inline JetPoint taylor_jet(const JetPoint& j, double t) {
  const int n = j.order();
  double dt = t - j.x;
  JetPoint p = j;
  p.x = t;
  for (int k = 0; k <= n; ++k)
    for (int a = 0; a < j.components(); ++a) {
      double s = 0.0, f = 1.0;
      for (int m = 0; k + m <= n; ++m) {
        s += j.u[k + m][a] * f;
        f *= dt / (m + 1);
      }
      p.u[k][a] = s;
    }
  return p;
}

}  // namespace detail

// Q_a = psi_a - xi u'_a.
inline std::vector<double> characteristics(const VectorField& v, double eps, const JetPoint& j) {
  if (j.order() < 1) throw InvalidArgument("characteristics need first derivatives");
  std::vector<double> Q(v.components());
  double xi = v.xi_at(eps, j.x);
  for (int a = 0; a < v.components(); ++a) Q[a] = v.psi[a](eps, j.x, j.u[0]) - xi * j.u[1][a];
  return Q;
}

inline JetFn characteristic_fn(const VectorField& v, int a, double eps) {
  return [v, a, eps](const JetPoint& j) { return characteristics(v, eps, j)[a]; };
}

// pr^(n) v: psi^(k)_a = D^k Q_a + xi u^(k+1)_a.
class ProlongedField {
 public:
  ProlongedField(VectorField base, int order) : base_(std::move(base)), order_(order) {
    if (order < 0 || order > 2) throw InvalidArgument("prolongation is implemented up to order 2");
  }

  const VectorField& base() const { return base_; }
  int order() const { return order_; }

  // Coefficient psi^(k)_a by the recursion; the jet must carry order k + 1.
  double coefficient(int k, int a, double eps, const JetPoint& j) const {
    if (k == 0) return base_.psi[a](eps, j.x, j.u[0]);
    if (k > order_) throw InvalidArgument("coefficient order exceeds the prolongation order");
    JetFn F = characteristic_fn(base_, a, eps);
    for (int m = 1; m <= k; ++m) F = detail::total_derivative_fn(F, m, eps);
    return F(j) + base_.xi_at(eps, j.x) * j.u[k + 1][a];
  }

  // The same coefficient from derivatives of Q along the Taylor curve through j.
  double coefficient_direct(int k, int a, double eps, const JetPoint& j) const {
    if (k == 0) return base_.psi[a](eps, j.x, j.u[0]);
    auto g = [&](double t) { return characteristics(base_, eps, detail::taylor_jet(j, t))[a]; };
    double h = (k == 1 ? 1e-3 : 1e-2) * std::min(1.0, eps);
    double dq = k == 1 ? stencil::d1(g, j.x, h) : stencil::d2(g, j.x, h);
    return dq + base_.xi_at(eps, j.x) * j.u[k + 1][a];
  }

  // pr v (L) = xi dL/dx + sum psi^(k)_a dL/du^(k)_a.
  double apply(const Lagrangian& L, double eps, const JetPoint& j) const {
    double acc = base_.xi_at(eps, j.x) * L.dx(eps, j);
    for (int k = 0; k <= L.order; ++k)
      for (int a = 0; a < L.components; ++a) acc += coefficient(k, a, eps, j) * L.du(eps, j, k, a);
    return acc;
  }

 private:
  VectorField base_;
  int order_;
};

inline ProlongedField prolong(const VectorField& v, int n) { return ProlongedField(v, n); }

// Jets for L with `extra` additional random derivative orders (prolongation
// and total derivatives need them), drawn from L's sampler.
inline std::vector<JetPoint> random_jets(const Lagrangian& L, int count = 200, std::uint64_t seed = 0x5EED,
                                         int extra = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<JetPoint> out;
  for (int n = 0; n < count; ++n) {
    JetPoint j = L.sample(rng);
    for (int e = 0; e < extra; ++e) {
      std::vector<double> row(j.components());
      for (double& v : row) v = U(rng);
      j.u.push_back(std::move(row));
    }
    out.push_back(std::move(j));
  }
  return out;
}

struct CriterionReport {
  bool symmetry = false;
  GenNumber worst;  // max over jets of |pr v(L) + L Dxi| per eps, after the numeric-zero floor
  std::vector<double> raw;  // same, before flooring
  AsymptoticReport report;
};

// Left side of pr v(L) + L Div xi = 0 at each jet and eps.
inline CriterionReport infinitesimal_criterion(const Lagrangian& L, const VectorField& v, const EpsGrid& grid,
                                               const std::vector<JetPoint>& jets,
                                               const AsymptoticConfig& cfg = {}) {
  if (v.components() != L.components) throw InvalidArgument("vector field and Lagrangian differ in components");
  auto pr = prolong(v, L.order);
  struct Out {
    double raw, floored;
  };
  auto out = parallel_map<Out>(grid.size(), [&](std::size_t i) {
    double e = grid[i], worst = 0.0, floored = 0.0;
    for (const auto& j : jets) {
      double lv = L(e, j);
      double r = pr.apply(L, e, j) + lv * v.dxi(e, j.x);
      double scale = 1.0 + std::fabs(lv) + std::fabs(v.xi_at(e, j.x) * L.dx(e, j));
      worst = std::max(worst, std::fabs(r));
      if (std::fabs(r) > kNumericZero * scale) floored = std::max(floored, std::fabs(r));
    }
    return Out{worst, floored};
  });
  std::vector<double> raw, fl;
  for (const auto& o : out) {
    raw.push_back(o.raw);
    fl.push_back(o.floored);
  }
  CriterionReport rep{false, GenNumber(grid, fl), raw, {}};
  rep.report = classify(rep.worst, cfg);
  rep.symmetry = rep.report.negligible();
  return rep;
}

// Relative sign s in D P = s Q.E(L) for the explicit current below, with
// E(L) = dL/du - D dL/du'. Calibrated once on the free particle with time
// translation (P = -(energy), Q = -u', E = -u''); see calibrate_noether_sign.
inline constexpr double kNoetherSign = -1.0;

// Explicit current of a first-order Lagrangian:
// P = sum psi_a dL/du'_a + xi L - sum xi u'_a dL/du'_a.
struct NoetherCurrent {
  std::function<double(double eps, const JetPoint&)> P;
  double sign = kNoetherSign;
  std::string name;

  double operator()(double eps, const JetPoint& j) const { return P(eps, j); }
};

inline NoetherCurrent noether_current(const Lagrangian& L, const VectorField& v) {
  if (L.order != 1) throw InvalidArgument("Noether currents are implemented for first-order Lagrangians");
  if (v.components() != L.components) throw InvalidArgument("vector field and Lagrangian differ in components");
  NoetherCurrent c;
  c.name = L.name + "/" + v.name;
  c.P = [L, v](double e, const JetPoint& j) {
    double xi = v.xi_at(e, j.x);
    double acc = xi * L(e, j);
    for (int a = 0; a < L.components; ++a) {
      double pa = L.du(e, j, 1, a);
      acc += v.psi[a](e, j.x, j.u[0]) * pa - xi * j.u[1][a] * pa;
    }
    return acc;
  };
  return c;
}

// E_a(L) = dL/du_a - D dL/du'_a at a jet of order 2 (first-order L).
inline double euler_at(const Lagrangian& L, int a, double eps, const JetPoint& j) {
  JetFn G = [&L, a, eps](const JetPoint& p) { return L.du(eps, p, 1, a); };
  return L.du(eps, j, 0, a) - detail::total_derivative(G, j, 1, eps);
}

// D P / (Q.E) on the free particle with d/dx at a fixed jet.
inline double calibrate_noether_sign() {
  auto L = lagrangians::dirichlet_energy();
  auto v = VectorField::translation_x(1);
  auto P = noether_current(L, v);
  auto j = JetPoint::scalar(0.3, {0.7, 1.3, -0.9});
  JetFn Pf = [&](const JetPoint& p) { return P(1.0, p); };
  double dP = detail::total_derivative(Pf, j, 1, 1.0);
  double QE = characteristics(v, 1.0, j)[0] * euler_at(L, 0, 1.0, j);
  return dP / QE > 0.0 ? 1.0 : -1.0;
}

struct IdentityReport {
  bool pass = false;
  double max_abs = 0.0;  // max |D P - sign Q.E| over jets and eps
  double max_rel = 0.0;  // relative to 1 + |D P| + |Q.E|
  GenNumber worst;
  AsymptoticReport report;
};

// D P - sign Q.E(L) on sample jets (order 2); pass iff the floored worst net is
// Negligible.
inline IdentityReport noether_identity_check(const Lagrangian& L, const VectorField& v, const NoetherCurrent& P,
                                             const EpsGrid& grid, const std::vector<JetPoint>& jets,
                                             double tol = kNumericZero, const AsymptoticConfig& cfg = {}) {
  if (L.order != 1) throw InvalidArgument("the identity check handles first-order Lagrangians");
  struct Out {
    double abs, rel, floored;
  };
  auto out = parallel_map<Out>(grid.size(), [&](std::size_t i) {
    double e = grid[i];
    Out o{0.0, 0.0, 0.0};
    for (const auto& j : jets) {
      JetFn Pf = [&](const JetPoint& p) { return P(e, p); };
      double dP = detail::total_derivative(Pf, j, 1, e);
      auto Q = characteristics(v, e, j);
      double QE = 0.0;
      for (int a = 0; a < L.components; ++a) QE += Q[a] * euler_at(L, a, e, j);
      double r = std::fabs(dP - P.sign * QE);
      double rel = r / (1.0 + std::fabs(dP) + std::fabs(QE));
      o.abs = std::max(o.abs, r);
      o.rel = std::max(o.rel, rel);
      if (rel > tol) o.floored = std::max(o.floored, r);
    }
    return o;
  });
  IdentityReport rep{false, 0.0, 0.0, GenNumber::constant(grid, 0.0), {}};
  std::vector<double> fl;
  for (const auto& o : out) {
    rep.max_abs = std::max(rep.max_abs, o.abs);
    rep.max_rel = std::max(rep.max_rel, o.rel);
    fl.push_back(o.floored);
  }
  rep.worst = GenNumber(grid, fl);
  rep.report = classify(rep.worst, cfg);
  rep.pass = rep.report.negligible();
  return rep;
}

// Sampled solution of a first-order system for one eps: times with positions
// and velocities per component.
struct Trajectory {
  std::vector<double> t;
  std::vector<std::vector<double>> q, qdot;  // [frame][component]
};

struct DriftReport {
  std::vector<double> eps;
  std::vector<double> drift;  // max_t |P(t) - P(t0)| / (1 + |P(t0)|) per eps
  std::vector<double> initial;  // P(t0) per eps
  double max_drift = 0.0;
  AsymptoticReport report;

  bool within(double tol) const { return max_drift <= tol; }
};

// Current along per-eps trajectories; jets are (t, q, qdot).
inline DriftReport conservation_drift(const NoetherCurrent& P, const EpsGrid& grid,
                                      const std::vector<Trajectory>& paths, const AsymptoticConfig& cfg = {}) {
  if (paths.size() != grid.size()) throw InvalidArgument("one trajectory per eps is required");
  DriftReport rep;
  rep.eps.assign(grid.values().begin(), grid.values().end());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& tr = paths[i];
    if (tr.t.empty()) throw InvalidArgument("empty trajectory");
    auto jet = [&](std::size_t f) { return JetPoint(tr.t[f], {tr.q[f], tr.qdot[f]}); };
    double p0 = P(grid[i], jet(0)), d = 0.0;
    for (std::size_t f = 1; f < tr.t.size(); ++f) {
      double p = P(grid[i], jet(f));
      detail::require_finite(p, grid[i], "conserved current");
      d = std::max(d, std::fabs(p - p0));
    }
    rep.initial.push_back(p0);
    rep.drift.push_back(d / (1.0 + std::fabs(p0)));
    rep.max_drift = std::max(rep.max_drift, rep.drift.back());
  }
  rep.report = classify(GenNumber(grid, rep.drift), cfg);
  return rep;
}

// GridNet trajectories (one net per component over time); velocities by
// fourth-order differences.
inline DriftReport conservation_drift(const NoetherCurrent& P, const Field& x, const AsymptoticConfig& cfg = {}) {
  const auto& grid = x.at(0).grid();
  std::vector<Trajectory> paths(grid.size());
  Field xd;
  for (const auto& c : x) xd.push_back(differentiate(c, 1));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& g = x[0].spatial(i);
    auto& tr = paths[i];
    for (std::size_t f = 0; f < g.size(); ++f) {
      tr.t.push_back(g.node(f));
      std::vector<double> q, qd;
      for (std::size_t a = 0; a < x.size(); ++a) {
        q.push_back(x[a].values(i)[f]);
        qd.push_back(xd[a].values(i)[f]);
      }
      tr.q.push_back(std::move(q));
      tr.qdot.push_back(std::move(qd));
    }
  }
  return conservation_drift(P, grid, paths, cfg);
}

}  // namespace colvar
