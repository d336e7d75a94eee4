#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "colvar/asymptotics.hpp"
#include "colvar/calculus.hpp"
#include "colvar/error.hpp"
#include "colvar/gen_number.hpp"
#include "colvar/grid_net.hpp"
#include "colvar/mollify.hpp"
#include "colvar/parallel.hpp"
#include "colvar/quadrature.hpp"
#include "colvar/stencil.hpp"

namespace colvar {

// Point of jet space over one independent variable: u[k][a] is the k-th
// derivative of component a.
struct JetPoint {
  double x = 0.0;
  std::vector<std::vector<double>> u;

  JetPoint() = default;
  JetPoint(double x_, std::vector<std::vector<double>> u_) : x(x_), u(std::move(u_)) {
    if (u.empty() || u[0].empty()) throw InvalidArgument("jet needs at least one component");
    for (const auto& r : u)
      if (r.size() != u[0].size()) throw InvalidArgument("jet component count varies with order");
  }
  // (x, u, u', u'', ...) for one component.
  static JetPoint scalar(double x, const std::vector<double>& d) {
    std::vector<std::vector<double>> u;
    for (double v : d) u.push_back({v});
    return JetPoint(x, std::move(u));
  }
  int order() const { return static_cast<int>(u.size()) - 1; }
  int components() const { return static_cast<int>(u[0].size()); }
};

enum class Growth { Polynomial, General };

inline const char* to_string(Growth g) { return g == Growth::Polynomial ? "polynomial" : "general"; }

// Per-eps Lagrangian density L_eps(x, u, u', ...). Partials are analytic when
// supplied, otherwise five-point central differences of the density.
struct Lagrangian {
  using Density = std::function<double(double eps, const JetPoint&)>;
  using Partial = std::function<double(double eps, const JetPoint&, int k, int a)>;
  using Sampler = std::function<JetPoint(std::mt19937_64&)>;

  std::string name;
  int order = 1;
  int components = 1;
  Density density;
  Partial partial_u;
  Density partial_x;
  Growth growth = Growth::Polynomial;
  Sampler sampler;  // jets from the range where the density is evaluable

  double operator()(double eps, const JetPoint& j) const { return density(eps, j); }

  double du(double eps, const JetPoint& j, int k, int a) const {
    return partial_u ? partial_u(eps, j, k, a) : fd_du(eps, j, k, a);
  }
  double dx(double eps, const JetPoint& j) const { return partial_x ? partial_x(eps, j) : fd_dx(eps, j); }

  double fd_du(double eps, const JetPoint& j, int k, int a) const {
    JetPoint p = j;
    double c = j.u[k][a];
    auto f = [&](double t) {
      p.u[k][a] = t;
      return density(eps, p);
    };
    return stencil::d1(f, c, fd_step(eps, c));
  }
  double fd_dx(double eps, const JetPoint& j) const {
    JetPoint p = j;
    auto f = [&](double t) {
      p.x = t;
      return density(eps, p);
    };
    return stencil::d1(f, j.x, fd_step(eps, j.x));
  }
  // Densities may vary on the scale eps, so the step shrinks with it.
  static double fd_step(double eps, double c) { return 1e-3 * std::min(1.0, eps) * (1.0 + std::fabs(c)); }

  // Random jet: the sampler if set, else x in [0, 1] and entries in [-1, 1].
  JetPoint sample(std::mt19937_64& rng) const {
    if (sampler) return sampler(rng);
    std::uniform_real_distribution<double> U(-1.0, 1.0), X(0.0, 1.0);
    std::vector<std::vector<double>> u(order + 1, std::vector<double>(components));
    for (auto& r : u)
      for (double& v : r) v = U(rng);
    return JetPoint(X(rng), std::move(u));
  }
};

struct PartialsCheck {
  bool analytic = false;
  double max_rel = 0.0;
  bool pass = true;
};

// Analytic partials against central differences of the density at random
// jets, relative to max(|analytic|, |fd|, 1).
inline PartialsCheck check_partials(const Lagrangian& L, double eps, int count = 100,
                                    std::uint64_t seed = 0x5EED, double tol = 1e-6) {
  PartialsCheck r;
  r.analytic = static_cast<bool>(L.partial_u);
  std::mt19937_64 rng(seed);
  for (int n = 0; n < count; ++n) {
    JetPoint j = L.sample(rng);
    auto cmp = [&](double an, double fd) {
      double d = std::fabs(an - fd) / std::max({std::fabs(an), std::fabs(fd), 1.0});
      r.max_rel = std::max(r.max_rel, d);
    };
    for (int k = 0; k <= L.order; ++k)
      for (int a = 0; a < L.components; ++a) cmp(L.du(eps, j, k, a), L.fd_du(eps, j, k, a));
    if (L.partial_x) cmp(L.dx(eps, j), L.fd_dx(eps, j));
  }
  r.pass = r.max_rel <= tol;
  return r;
}

enum class BoundaryKind { Dirichlet, Natural };

struct Functional {
  Lagrangian lagrangian;
  Interval domain;
  BoundaryKind boundary = BoundaryKind::Natural;
  std::vector<GenNumber> left, right;  // Dirichlet values per component

  static Functional natural(Lagrangian L, Interval d) {
    check_domain(d);
    return {std::move(L), d, BoundaryKind::Natural, {}, {}};
  }
  static Functional dirichlet(Lagrangian L, Interval d, std::vector<GenNumber> left, std::vector<GenNumber> right) {
    check_domain(d);
    if (left.size() != static_cast<std::size_t>(L.components) || right.size() != left.size())
      throw InvalidArgument("Dirichlet data needs one value per component at each end");
    return {std::move(L), d, BoundaryKind::Dirichlet, std::move(left), std::move(right)};
  }

 private:
  static void check_domain(Interval d) {
    if (!(d.lo < d.hi) || !std::isfinite(d.lo) || !std::isfinite(d.hi))
      throw InvalidArgument("functional needs a nondegenerate finite domain");
  }
};

// One GridNet per dependent component.
using Field = std::vector<GridNet>;

namespace detail {

// d[k][a] = k-th derivative of component a on slice i.
using SliceJets = std::vector<std::vector<std::vector<double>>>;

inline SliceJets slice_jets(const Field& u, std::size_t i, int n) {
  SliceJets d(n + 1, std::vector<std::vector<double>>(u.size()));
  for (std::size_t a = 0; a < u.size(); ++a) {
    auto v = u[a].values(i);
    d[0][a].assign(v.begin(), v.end());
    for (int k = 1; k <= n; ++k) d[k][a] = stencil::derivative(v, u[a].spatial(i).h(), k);
  }
  return d;
}

// Jet of (u + s v) at node j, written into p.
inline void fill_jet(JetPoint& p, double x, const SliceJets& d, const SliceJets* v, double s, std::size_t j) {
  p.x = x;
  for (std::size_t k = 0; k < d.size(); ++k)
    for (std::size_t a = 0; a < d[k].size(); ++a) p.u[k][a] = d[k][a][j] + (v ? s * (*v)[k][a][j] : 0.0);
}

inline JetPoint blank_jet(const SliceJets& d) {
  return JetPoint(0.0, std::vector<std::vector<double>>(d.size(), std::vector<double>(d[0].size())));
}

struct SliceIntegral {
  double value = 0.0;
  double abs = 0.0;  // integral of |L|
};

inline SliceIntegral slice_value(const Lagrangian& L, double eps, const SpatialGrid& g, const SliceJets& d,
                                 const SliceJets* v = nullptr, double s = 0.0) {
  std::vector<double> f(g.size()), fa(g.size());
  JetPoint p = blank_jet(d);
  for (std::size_t j = 0; j < g.size(); ++j) {
    fill_jet(p, g.node(j), d, v, s, j);
    f[j] = L(eps, p);
    require_finite(f[j], eps, "Lagrangian density");
    fa[j] = std::fabs(f[j]);
  }
  return {stencil::newton_cotes(f, g.h(), 0, g.size() - 1), stencil::newton_cotes(fa, g.h(), 0, g.size() - 1)};
}

// Integral form of the first variation, sum over J of dL/du_J * D_J v, at
// the jet of w = u + s v.
inline SliceIntegral slice_variation(const Lagrangian& L, double eps, const SpatialGrid& g, const SliceJets& d,
                                     const SliceJets& v, double s = 0.0) {
  std::vector<double> f(g.size()), fa(g.size());
  JetPoint p = blank_jet(d);
  for (std::size_t j = 0; j < g.size(); ++j) {
    fill_jet(p, g.node(j), d, &v, s, j);
    double acc = 0.0, aacc = 0.0;
    for (int k = 0; k <= L.order; ++k)
      for (int a = 0; a < L.components; ++a) {
        double t = L.du(eps, p, k, a) * v[k][a][j];
        acc += t;
        aacc += std::fabs(t);
      }
    require_finite(acc, eps, "variation integrand");
    f[j] = acc;
    fa[j] = aacc;
  }
  return {stencil::newton_cotes(f, g.h(), 0, g.size() - 1), stencil::newton_cotes(fa, g.h(), 0, g.size() - 1)};
}

inline double sup_abs(const GridNet& u, std::size_t i) {
  double m = 0.0;
  for (double v : u.values(i)) m = std::max(m, std::fabs(v));
  return m;
}

// Variation step s* = 1e-4 (1 + ||u||_inf) for slice i.
inline double variation_step(const Field& u, std::size_t i) {
  double m = 0.0;
  for (const auto& c : u) m = std::max(m, sup_abs(c, i));
  return 1e-4 * (1.0 + m);
}

inline void check_field(const Functional& F, const Field& u, const char* what) {
  if (u.size() != static_cast<std::size_t>(F.lagrangian.components)) {
    std::ostringstream os;
    os << what << " has " << u.size() << " components, the Lagrangian expects " << F.lagrangian.components;
    throw InvalidArgument(os.str());
  }
  double tol = 1e-12 * (F.domain.hi - F.domain.lo);
  for (const auto& c : u) {
    require_same_grid(c.grid(), u[0].grid());
    for (std::size_t i = 0; i < c.size(); ++i)
      if (!(c.spatial(i) == u[0].spatial(i))) throw GridMismatch("field components use different spatial grids");
    if (std::fabs(c.a() - F.domain.lo) > tol || std::fabs(c.b() - F.domain.hi) > tol)
      throw DomainError(std::string(what) + " is not defined on the functional's domain");
  }
}

inline void check_pair(const Functional& F, const Field& u, const Field& v) {
  check_field(F, u, "u");
  check_field(F, v, "v");
  require_same_grid(u[0].grid(), v[0].grid());
  for (std::size_t i = 0; i < u[0].size(); ++i)
    if (!(u[0].spatial(i) == v[0].spatial(i))) throw GridMismatch("u and v use different spatial grids");
}

// Admissible variations vanish at both ends when the boundary is Dirichlet.
inline void check_variation(const Functional& F, const Field& v) {
  if (F.boundary != BoundaryKind::Dirichlet) return;
  for (const auto& c : v)
    for (std::size_t i = 0; i < c.size(); ++i) {
      auto s = c.values(i);
      double tol = 1e-12 * (1.0 + sup_abs(c, i));
      if (std::fabs(s.front()) > tol || std::fabs(s.back()) > tol) {
        std::ostringstream os;
        os.precision(17);
        os << "variation does not vanish on the boundary at eps = " << c.grid()[i];
        throw PreconditionViolated(os.str());
      }
    }
}

}  // namespace detail

inline GenNumber evaluate(const Functional& F, const Field& u) {
  detail::check_field(F, u, "u");
  const auto& grid = u[0].grid();
  auto vals = parallel_map<double>(grid.size(), [&](std::size_t i) {
    auto d = detail::slice_jets(u, i, F.lagrangian.order);
    return detail::slice_value(F.lagrangian, grid[i], u[0].spatial(i), d).value;
  });
  return GenNumber(grid, std::move(vals));
}
inline GenNumber evaluate(const Functional& F, const GridNet& u) { return evaluate(F, Field{u}); }

// Multiplies each component by ((x - a)(b - x) / ((b - a)/2)^2)^2, which
// vanishes to second order at both ends.
inline Field make_admissible(const Field& v) {
  Field out;
  for (const auto& c : v) {
    double a = c.a(), b = c.b(), m = 0.25 * (b - a) * (b - a);
    out.push_back(c.map([=](double, double x, double y) {
      double w = (x - a) * (b - x) / m;
      return y * w * w;
    }));
  }
  return out;
}

// Sets the end nodes of every component to the Dirichlet data.
inline Field enforce_dirichlet(const Functional& F, Field u) {
  if (F.boundary != BoundaryKind::Dirichlet) return u;
  detail::check_field(F, u, "u");
  for (std::size_t a = 0; a < u.size(); ++a) {
    std::vector<std::vector<double>> vals;
    for (std::size_t i = 0; i < u[a].size(); ++i) {
      auto s = u[a].values(i);
      std::vector<double> v(s.begin(), s.end());
      v.front() = F.left[a][i];
      v.back() = F.right[a][i];
      vals.push_back(std::move(v));
    }
    u[a] = u[a].with_values(std::move(vals));
  }
  return u;
}

struct VariationCheck {
  GenNumber integral_form;  // sum_J int dL/du_J D_J v
  GenNumber quotient;       // central difference in s of evaluate(u + s v)
  std::vector<double> step;
  std::vector<double> gap;  // per-eps relative disagreement
  double max_gap = 0.0;
  bool pass = true;
};

// Both routes to the first variation. The relative gap is measured against
// max(|a|, |b|, 1e-6 (1 + int |terms| + int |L|)) so that exact cancellation
// does not turn rounding into a failure.
inline VariationCheck first_variation_check(const Functional& F, const Field& u, const Field& v,
                                            double tol = 1e-4) {
  detail::check_pair(F, u, v);
  detail::check_variation(F, v);
  const auto& grid = u[0].grid();
  struct Out {
    double b, q, s, gap;
  };
  auto out = parallel_map<Out>(grid.size(), [&](std::size_t i) {
    const auto& L = F.lagrangian;
    const auto& g = u[0].spatial(i);
    auto du = detail::slice_jets(u, i, L.order);
    auto dv = detail::slice_jets(v, i, L.order);
    double s = detail::variation_step(u, i);
    auto ip = detail::slice_value(L, grid[i], g, du, &dv, s);
    auto im = detail::slice_value(L, grid[i], g, du, &dv, -s);
    auto b = detail::slice_variation(L, grid[i], g, du, dv);
    double q = (ip.value - im.value) / (2.0 * s);
    double den = std::max({std::fabs(q), std::fabs(b.value), 1e-6 * (1.0 + b.abs + ip.abs)});
    return Out{b.value, q, s, std::fabs(q - b.value) / den};
  });
  VariationCheck r{GenNumber::constant(grid, 0.0), GenNumber::constant(grid, 0.0), {}, {}, 0.0, true};
  std::vector<double> bv, qv;
  for (const auto& o : out) {
    bv.push_back(o.b);
    qv.push_back(o.q);
    r.step.push_back(o.s);
    r.gap.push_back(o.gap);
    r.max_gap = std::max(r.max_gap, o.gap);
  }
  r.integral_form = GenNumber(grid, std::move(bv));
  r.quotient = GenNumber(grid, std::move(qv));
  r.pass = r.max_gap <= tol;
  return r;
}

inline GenNumber first_variation(const Functional& F, const Field& u, const Field& v) {
  auto r = first_variation_check(F, u, v);
  if (!r.pass) {
    std::size_t k = std::max_element(r.gap.begin(), r.gap.end()) - r.gap.begin();
    std::ostringstream os;
    os.precision(17);
    os << "first variation routes disagree by " << r.max_gap << " (relative) at eps = " << u[0].grid()[k]
       << "; the partials of " << F.lagrangian.name << " are suspect";
    throw CrossCheckFailure(os.str());
  }
  return r.integral_form;
}
inline GenNumber first_variation(const Functional& F, const GridNet& u, const GridNet& v) {
  return first_variation(F, Field{u}, Field{v});
}

class QuadraticForm;

struct SecondVariationCheck {
  GenNumber value;  // central difference in s of the integral-form first variation
  GenNumber plain;  // second difference of evaluate
  std::optional<GenNumber> form;  // a(v, v) when a quadratic form is supplied
  double plain_gap = 0.0;  // |value - plain| in units of its rounding allowance
  double form_gap = 0.0;   // relative |value - a(v, v)|
  bool pass = true;
};

inline SecondVariationCheck second_variation_check(const Functional& F, const Field& u, const Field& v,
                                                   const QuadraticForm* q = nullptr);

inline GenNumber second_variation(const Functional& F, const Field& u, const Field& v,
                                  const QuadraticForm* q = nullptr) {
  auto r = second_variation_check(F, u, v, q);
  if (!r.pass) {
    std::ostringstream os;
    os.precision(17);
    os << "second variation cross-check failed for " << F.lagrangian.name << " (plain gap " << r.plain_gap
       << ", form gap " << r.form_gap << ")";
    throw CrossCheckFailure(os.str());
  }
  return r.value;
}

// Euler-Lagrange expression E_a = dL/du - D(dL/du') + D^2(dL/du'') per
// component, with total derivatives taken on the composed grid functions.
inline Field euler_residual(const Functional& F, const Field& u) {
  const auto& L = F.lagrangian;
  if (L.order < 1 || L.order > 2) throw InvalidArgument("Euler residual is implemented for orders 1 and 2");
  detail::check_field(F, u, "u");
  const auto& grid = u[0].grid();
  auto slices = parallel_map<std::vector<std::vector<double>>>(grid.size(), [&](std::size_t i) {
    const auto& g = u[0].spatial(i);
    auto d = detail::slice_jets(u, i, L.order);
    JetPoint p = detail::blank_jet(d);
    std::vector<std::vector<std::vector<double>>> P(L.order + 1,
                                                    std::vector<std::vector<double>>(u.size(), std::vector<double>(g.size())));
    for (std::size_t j = 0; j < g.size(); ++j) {
      detail::fill_jet(p, g.node(j), d, nullptr, 0.0, j);
      for (int k = 0; k <= L.order; ++k)
        for (std::size_t a = 0; a < u.size(); ++a) P[k][a][j] = L.du(grid[i], p, k, static_cast<int>(a));
    }
    std::vector<std::vector<double>> E(u.size());
    for (std::size_t a = 0; a < u.size(); ++a) {
      E[a] = P[0][a];
      auto d1 = stencil::derivative(P[1][a], g.h(), 1);
      for (std::size_t j = 0; j < g.size(); ++j) E[a][j] -= d1[j];
      if (L.order == 2) {
        auto d2 = stencil::derivative(P[2][a], g.h(), 2);
        for (std::size_t j = 0; j < g.size(); ++j) E[a][j] += d2[j];
      }
    }
    return E;
  });
  Field out;
  for (std::size_t a = 0; a < u.size(); ++a) {
    std::vector<std::vector<double>> vals;
    for (auto& s : slices) vals.push_back(std::move(s[a]));
    out.push_back(u[a].with_values(std::move(vals)));
  }
  return out;
}
inline GridNet euler_residual(const Functional& F, const GridNet& u) { return euler_residual(F, Field{u})[0]; }

// Boundary term of the first variation, [sum_a (P1 - D P2) v + P2 v'] from a
// to b, where Pk = dL/du^(k). Natural boundary conditions make it vanish.
inline GenNumber boundary_term(const Functional& F, const Field& u, const Field& v) {
  const auto& L = F.lagrangian;
  if (L.order < 1 || L.order > 2) throw InvalidArgument("boundary term is implemented for orders 1 and 2");
  detail::check_pair(F, u, v);
  const auto& grid = u[0].grid();
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& g = u[0].spatial(i);
    auto d = detail::slice_jets(u, i, L.order);
    auto dv = detail::slice_jets(v, i, L.order);
    JetPoint p = detail::blank_jet(d);
    double total = 0.0;
    for (std::size_t a = 0; a < u.size(); ++a) {
      std::vector<double> P1(g.size()), P2(g.size());
      for (std::size_t j = 0; j < g.size(); ++j) {
        detail::fill_jet(p, g.node(j), d, nullptr, 0.0, j);
        P1[j] = L.du(grid[i], p, 1, static_cast<int>(a));
        if (L.order == 2) P2[j] = L.du(grid[i], p, 2, static_cast<int>(a));
      }
      std::vector<double> dP2(g.size(), 0.0);
      if (L.order == 2) dP2 = stencil::derivative(P2, g.h(), 1);
      auto at = [&](std::size_t j) {
        double t = (P1[j] - dP2[j]) * dv[0][a][j];
        if (L.order == 2) t += P2[j] * dv[1][a][j];
        return t;
      };
      total += at(g.size() - 1) - at(0);
    }
    out[i] = total;
  }
  return GenNumber(grid, std::move(out));
}

// Residuals below this fraction of the problem scale are rounding noise of
// the finite-difference evaluation and count as zero.
inline constexpr double kNumericZero = 1e-8;

// Sup over K of |r| per eps, with values below kNumericZero (1 + scale)
// replaced by zero.
inline GenNumber residual_magnitude(const Field& r, const GenNumber& scale, std::optional<Interval> K = std::nullopt) {
  const auto& grid = r.at(0).grid();
  std::vector<double> m(grid.size(), 0.0);
  for (const auto& c : r)
    for (std::size_t i = 0; i < grid.size(); ++i) m[i] = std::max(m[i], detail::sup_abs(c.spatial(i), c.values(i), K));
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i] <= kNumericZero * (1.0 + std::fabs(scale[i]))) m[i] = 0.0;
  return GenNumber(grid, std::move(m));
}

// Rounding level of an order-n Euler residual: the density partials carry
// relative rounding of about 1e-16 and the n total derivatives applied after
// n derivatives of u amplify it by roughly h^-2n. `coeff` bounds the
// coefficient of the highest-order term.
inline GenNumber fd_noise_scale(const Field& u, int order, double coeff = 1.0) {
  const auto& grid = u.at(0).grid();
  std::vector<double> s(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double m = 0.0;
    for (const auto& c : u) m = std::max(m, detail::sup_abs(c, i));
    s[i] = 1e-6 * coeff * (1.0 + m) * std::pow(u[0].spatial(i).h(), -2.0 * order);
  }
  return GenNumber(grid, std::move(s));
}

// ---------------------------------------------------------------------------
// Fundamental lemma witness.

// phi_0 in C_c(B_1/2), phi_0 = 1 on B_1/4, 0 <= phi_0 <= 1.
inline double witness_profile(double y) {
  double r = std::fabs(y);
  if (r >= 0.5) return 0.0;
  return 1.0 - smooth_step((r - 0.25) / 0.25);
}

struct Witness {
  std::vector<double> eps;
  std::vector<double> centers, widths, signs;
  double l_bound = 0.0;   // max over the tail of ln|u(x_eps)| / ln eps, at least 0
  double l_fit = 0.0;     // fitted exponent of |u(x_eps)|
  double N = 0.0;         // sup |Du| <= eps^-N on the tail
  double expected_slope = 0.0;  // p(l + N) - N with p = 1 and l = l_fit
  double bound_ratio = 0.0;     // min over the tail of pairing / eps^l_bound
  std::vector<double> pairing;  // <u_eps, phi_eps> per eps
  AsymptoticReport report;
  bool non_negligible = false;

  // phi_eps(x) = w^-1 phi_0((x - x_eps) / w) sign(u_eps(x_eps)), w = eps^(l+N).
  double phi(std::size_t i, double x) const {
    return signs[i] / widths[i] * witness_profile((x - centers[i]) / widths[i]);
  }
};

inline Witness fundamental_witness(const GridNet& u, std::optional<Interval> K = std::nullopt,
                                   const AsymptoticConfig& cfg = {}) {
  double len = u.b() - u.a();
  Interval Kd = K ? *K : Interval{u.a() + 0.1 * len, u.b() - 0.1 * len};
  if (!(Kd.lo < Kd.hi) || Kd.lo < u.a() || Kd.hi > u.b()) throw DomainError("compact set K must lie inside the domain");
  auto full = classify(u, Kd, cfg);
  if (full.negligible())
    throw PreconditionViolated("net is negligible on K; by the fundamental lemma no test function separates it from 0");
  const auto& grid = u.grid();
  const std::size_t n = grid.size();
  auto du = differentiate(u, 1);
  Witness w{};
  w.eps.assign(grid.values().begin(), grid.values().end());
  std::vector<double> mag(n), dsup(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = u.spatial(i);
    auto v = u.values(i);
    double best = -1.0, xb = 0.0, sb = 1.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      double x = g.node(j);
      if (x < Kd.lo || x > Kd.hi) continue;
      if (std::fabs(v[j]) > best) {
        best = std::fabs(v[j]);
        xb = x;
        sb = v[j] < 0.0 ? -1.0 : 1.0;
      }
    }
    mag[i] = best;
    w.centers.push_back(xb);
    w.signs.push_back(sb);
    dsup[i] = detail::sup_abs(du.spatial(i), du.values(i), Kd);
  }
  double lmax = 0.0, nmax = 0.0;
  std::vector<double> le, lv;
  for (std::size_t i = grid.tail_begin(); i < n; ++i) {
    if (!(mag[i] > 0.0)) {
      std::ostringstream os;
      os.precision(17);
      os << "net vanishes identically on K at eps = " << grid[i];
      throw PreconditionViolated(os.str());
    }
    double lne = std::log(grid[i]);
    lmax = std::max(lmax, std::log(mag[i]) / lne);
    if (dsup[i] > 0.0) nmax = std::max(nmax, std::log(dsup[i]) / -lne);
    le.push_back(lne);
    lv.push_back(std::log(mag[i]));
  }
  w.l_bound = lmax;
  w.N = nmax;
  w.l_fit = detail::fit_loglog(le, lv).slope;
  w.expected_slope = (w.l_fit + w.N) - w.N;
  std::vector<double> pair(n);
  for (std::size_t i = 0; i < n; ++i) {
    double dist = std::min(w.centers[i] - u.a(), u.b() - w.centers[i]);
    double width = std::min(std::pow(grid[i], w.l_bound + w.N), 2.0 * dist);
    width = std::max(width, 1e-300);
    w.widths.push_back(width);
    const auto& g = u.spatial(i);
    auto v = u.values(i);
    double c = w.centers[i];
    // Substituting x = c + width * y keeps the pairing well conditioned for
    // any width.
    auto f = [&](double y) { return stencil::cubic_at(v, (c + width * y - g.a()) / g.h()) * witness_profile(y); };
    std::vector<double> br{-0.25, 0.25};
    auto res = quad::piecewise(f, -0.5, 0.5, br, 1e-14 * std::max(mag[i], 1e-300), 1e-10);
    pair[i] = w.signs[i] * res.value;
  }
  w.pairing = pair;
  w.report = classify(GenNumber(grid, pair), cfg);
  w.non_negligible = !w.report.negligible();
  double ratio = INFINITY;
  for (std::size_t i = grid.tail_begin(); i < n; ++i) ratio = std::min(ratio, pair[i] / std::pow(grid[i], w.l_bound));
  w.bound_ratio = ratio;
  return w;
}

// ---------------------------------------------------------------------------
// Minimizers in the sense of association.

enum class AssocVerdict { Pass, Fail, Indeterminate };

inline const char* to_string(AssocVerdict v) {
  switch (v) {
    case AssocVerdict::Pass: return "Pass";
    case AssocVerdict::Fail: return "Fail";
    case AssocVerdict::Indeterminate: return "Indeterminate";
  }
  return "?";
}

struct AssocEntry {
  std::string test;
  double tau = 0.0;
  std::vector<double> difference;  // L_eps(u + tau phi) - L_eps(u) per eps
  std::optional<double> limit;
};

struct AssocReport {
  AssocVerdict verdict = AssocVerdict::Pass;
  double min_limit = INFINITY;
  std::vector<double> eps;
  std::vector<AssocEntry> entries;
};

inline const std::vector<double>& default_taus() {
  static const std::vector<double> t{1.0, -1.0, 0.1, -0.1, 0.01, -0.01};
  return t;
}

// Samples a test function on the spatial grids of u.
inline GridNet sample_test(const GridNet& u, const TestFunction& t) {
  return u.map([&](double, double x, double) { return (x > t.lo && x < t.hi) ? t.phi(x) : 0.0; });
}

inline AssocReport assoc_minimizer_test(const Functional& F, const GridNet& u, const std::vector<TestFunction>& tests,
                                        const std::vector<double>& taus = default_taus(),
                                        const AsymptoticConfig& cfg = {}) {
  Field uf{u};
  detail::check_field(F, uf, "u");
  const auto& grid = u.grid();
  AssocReport rep;
  rep.eps.assign(grid.values().begin(), grid.values().end());
  bool missing = false;
  auto base = evaluate(F, uf);
  for (const auto& t : tests) {
    if (!(t.lo > u.a() && t.hi < u.b()))
      throw PreconditionViolated("test function " + t.name + " is not supported in the open domain");
    Field pf{sample_test(u, t)};
    for (double tau : taus) {
      auto diff = parallel_map<double>(grid.size(), [&](std::size_t i) {
        auto d = detail::slice_jets(uf, i, F.lagrangian.order);
        auto dp = detail::slice_jets(pf, i, F.lagrangian.order);
        return detail::slice_value(F.lagrangian, grid[i], u.spatial(i), d, &dp, tau).value - base[i];
      });
      AssocEntry e{t.name, tau, diff, std::nullopt};
      e.limit = scalar_association(GenNumber(grid, diff), cfg);
      if (e.limit) rep.min_limit = std::min(rep.min_limit, *e.limit);
      else missing = true;
      rep.entries.push_back(std::move(e));
    }
  }
  if (rep.min_limit < -cfg.tol_weak) rep.verdict = AssocVerdict::Fail;
  else if (missing) rep.verdict = AssocVerdict::Indeterminate;
  else rep.verdict = AssocVerdict::Pass;
  return rep;
}

// ---------------------------------------------------------------------------
// Quadratic forms L(u) = 1/2 a(u, u) + f(u).
//
// Membrane: a(u, v) = int alpha u' v' + beta u v.
// Beam:     a(u, v) = int alpha u'' v'' - beta u' v'.
// In both cases f(v) = -int gamma v.

enum class FormKind { Membrane, Beam };

// Coefficient net evaluated at (eps, x); eps must be one of the net's grid values.
class CoefficientLookup {
 public:
  explicit CoefficientLookup(GridNet net) : net_(std::move(net)) {}
  double operator()(double eps, double x) const {
    const auto& g = net_.grid();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g[i] == eps) return interpolate(net_.spatial(i), net_.values(i), x);
    std::ostringstream os;
    os.precision(17);
    os << "coefficient has no slice at eps = " << eps;
    throw GridMismatch(os.str());
  }

 private:
  GridNet net_;
};

class QuadraticForm {
 public:
  static QuadraticForm membrane(GridNet alpha, GridNet beta, GridNet gamma) {
    return QuadraticForm(FormKind::Membrane, std::move(alpha), std::move(beta), std::move(gamma));
  }
  static QuadraticForm beam(GridNet alpha, GridNet beta, GridNet gamma) {
    return QuadraticForm(FormKind::Beam, std::move(alpha), std::move(beta), std::move(gamma));
  }

  FormKind kind() const { return kind_; }
  int order() const { return kind_ == FormKind::Membrane ? 1 : 2; }
  const GridNet& alpha() const { return alpha_; }
  const GridNet& beta() const { return beta_; }
  const GridNet& gamma() const { return gamma_; }
  const EpsGrid& grid() const { return alpha_.grid(); }

  GenNumber a(const GridNet& u, const GridNet& v) const {
    check(u);
    check(v);
    auto vals = parallel_map<double>(grid().size(), [&](std::size_t i) { return a_slice(i, u.values(i), v.values(i)); });
    return GenNumber(grid(), std::move(vals));
  }
  GenNumber f(const GridNet& v) const {
    check(v);
    std::vector<double> out(grid().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f_slice(i, v.values(i));
    return GenNumber(grid(), std::move(out));
  }
  GenNumber value(const GridNet& u) const {
    auto aa = a(u, u), ff = f(u);
    return 0.5 * aa + ff;
  }

  // max over eps of |a(u,v) - a(v,u)| / (1 + |a(u,u)| + |a(v,v)|)
  double symmetry_defect(const GridNet& u, const GridNet& v) const {
    auto uv = a(u, v), vu = a(v, u), uu = a(u, u), vv = a(v, v);
    double m = 0.0;
    for (std::size_t i = 0; i < uv.size(); ++i)
      m = std::max(m, std::fabs(uv[i] - vu[i]) / (1.0 + std::fabs(uu[i]) + std::fabs(vv[i])));
    return m;
  }

  // alpha >= 0 and the lower-order term nonnegative on every node.
  bool positive_semidefinite() const {
    for (std::size_t i = 0; i < grid().size(); ++i) {
      for (double x : alpha_.values(i))
        if (x < 0.0) return false;
      for (double x : beta_.values(i))
        if (kind_ == FormKind::Membrane ? x < 0.0 : x > 0.0) return false;
    }
    return true;
  }

  // The same functional as a Lagrangian density, for the generic machinery.
  Lagrangian lagrangian() const {
    Lagrangian L;
    CoefficientLookup al(alpha_), be(beta_), ga(gamma_);
    L.components = 1;
    L.order = order();
    if (kind_ == FormKind::Membrane) {
      L.name = "membrane_form";
      L.density = [=](double e, const JetPoint& j) {
        double u = j.u[0][0], p = j.u[1][0];
        return 0.5 * al(e, j.x) * p * p + 0.5 * be(e, j.x) * u * u - ga(e, j.x) * u;
      };
      L.partial_u = [=](double e, const JetPoint& j, int k, int) {
        if (k == 0) return be(e, j.x) * j.u[0][0] - ga(e, j.x);
        return al(e, j.x) * j.u[1][0];
      };
    } else {
      L.name = "beam_form";
      L.density = [=](double e, const JetPoint& j) {
        double u = j.u[0][0], p = j.u[1][0], q = j.u[2][0];
        return 0.5 * al(e, j.x) * q * q - 0.5 * be(e, j.x) * p * p - ga(e, j.x) * u;
      };
      L.partial_u = [=](double e, const JetPoint& j, int k, int) {
        if (k == 0) return -ga(e, j.x);
        if (k == 1) return -be(e, j.x) * j.u[1][0];
        return al(e, j.x) * j.u[2][0];
      };
    }
    return L;
  }

  Functional functional(BoundaryKind b = BoundaryKind::Natural, std::vector<GenNumber> left = {},
                        std::vector<GenNumber> right = {}) const {
    Interval d{alpha_.a(), alpha_.b()};
    if (b == BoundaryKind::Natural) return Functional::natural(lagrangian(), d);
    return Functional::dirichlet(lagrangian(), d, std::move(left), std::move(right));
  }

 private:
  QuadraticForm(FormKind k, GridNet al, GridNet be, GridNet ga)
      : kind_(k), alpha_(std::move(al)), beta_(std::move(be)), gamma_(std::move(ga)) {
    check(beta_);
    check(gamma_);
  }

  void check(const GridNet& u) const {
    require_same_grid(u.grid(), alpha_.grid());
    for (std::size_t i = 0; i < u.size(); ++i)
      if (!(u.spatial(i) == alpha_.spatial(i)))
        throw GridMismatch("quadratic form operands must share the coefficients' spatial grids");
  }

  double a_slice(std::size_t i, std::span<const double> u, std::span<const double> v) const {
    double h = alpha_.spatial(i).h();
    auto al = alpha_.values(i), be = beta_.values(i);
    std::vector<double> g(u.size());
    if (kind_ == FormKind::Membrane) {
      auto du = stencil::derivative(u, h, 1), dv = stencil::derivative(v, h, 1);
      for (std::size_t j = 0; j < g.size(); ++j) g[j] = al[j] * du[j] * dv[j] + be[j] * u[j] * v[j];
    } else {
      auto du = stencil::derivative(u, h, 1), dv = stencil::derivative(v, h, 1);
      auto ddu = stencil::derivative(u, h, 2), ddv = stencil::derivative(v, h, 2);
      for (std::size_t j = 0; j < g.size(); ++j) g[j] = al[j] * ddu[j] * ddv[j] - be[j] * du[j] * dv[j];
    }
    return stencil::newton_cotes(g, h, 0, g.size() - 1);
  }
  double f_slice(std::size_t i, std::span<const double> v) const {
    auto ga = gamma_.values(i);
    std::vector<double> g(v.size());
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = -ga[j] * v[j];
    return stencil::newton_cotes(g, alpha_.spatial(i).h(), 0, g.size() - 1);
  }

  FormKind kind_;
  GridNet alpha_, beta_, gamma_;
};

inline SecondVariationCheck second_variation_check(const Functional& F, const Field& u, const Field& v,
                                                   const QuadraticForm* q) {
  detail::check_pair(F, u, v);
  detail::check_variation(F, v);
  const auto& grid = u[0].grid();
  struct Out {
    double value, plain, gap;
  };
  auto out = parallel_map<Out>(grid.size(), [&](std::size_t i) {
    const auto& L = F.lagrangian;
    const auto& g = u[0].spatial(i);
    auto du = detail::slice_jets(u, i, L.order);
    auto dv = detail::slice_jets(v, i, L.order);
    double s = detail::variation_step(u, i);
    auto bp = detail::slice_variation(L, grid[i], g, du, dv, s);
    auto bm = detail::slice_variation(L, grid[i], g, du, dv, -s);
    double value = (bp.value - bm.value) / (2.0 * s);
    auto fp = detail::slice_value(L, grid[i], g, du, &dv, s);
    auto f0 = detail::slice_value(L, grid[i], g, du);
    auto fm = detail::slice_value(L, grid[i], g, du, &dv, -s);
    double plain = (fp.value - 2.0 * f0.value + fm.value) / (s * s);
    // Truncation of either route is O(s^2); rounding in the plain second
    // difference is about 1e-14 int|L| / s^2.
    double allow = 1e-4 * std::max(std::fabs(value), std::fabs(plain)) + 1e-12 * f0.abs / (s * s) +
                   1e-8 * (1.0 + bp.abs) / s;
    return Out{value, plain, std::fabs(value - plain) / allow};
  });
  SecondVariationCheck r{GenNumber::constant(grid, 0.0), GenNumber::constant(grid, 0.0), std::nullopt, 0.0, 0.0, true};
  std::vector<double> vv, pv;
  for (const auto& o : out) {
    vv.push_back(o.value);
    pv.push_back(o.plain);
    r.plain_gap = std::max(r.plain_gap, o.gap);
  }
  r.value = GenNumber(grid, vv);
  r.plain = GenNumber(grid, pv);
  r.pass = r.plain_gap <= 1.0;
  if (q) {
    if (u.size() != 1) throw InvalidArgument("quadratic forms act on one component");
    auto avv = q->a(v[0], v[0]);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double den = std::max({std::fabs(avv[i]), std::fabs(vv[i]), 1e-12});
      r.form_gap = std::max(r.form_gap, std::fabs(avv[i] - vv[i]) / den);
    }
    if (r.form_gap > 1e-6) r.pass = false;
    r.form = avv;
  }
  return r;
}

struct StationarityEntry {
  std::string test;
  std::vector<double> value;  // a(u, phi) + f(phi) per eps
  double limit = 0.0;
  bool extrapolated = false;
};

struct StationarityReport {
  bool pass = true;
  double max_abs_limit = 0.0;
  bool psd = false;
  std::optional<AssocVerdict> assoc;  // only when a is positive semidefinite
  bool equivalent = true;              // stationarity pass <=> assoc Pass
  std::vector<StationarityEntry> entries;
};

// Condition lim (a(u, phi) + f(phi)) = 0 for each test function; when a is
// positive semidefinite the association-minimizer test is run alongside and
// the two verdicts must agree.
inline StationarityReport quadratic_stationarity(const QuadraticForm& Q, const GridNet& u,
                                                 const std::vector<TestFunction>& tests,
                                                 const AsymptoticConfig& cfg = {}) {
  StationarityReport rep;
  for (const auto& t : tests) {
    auto phi = sample_test(u, t);
    auto a = Q.a(u, phi), f = Q.f(phi);
    auto val = a + f;
    StationarityEntry e;
    e.test = t.name;
    e.value.assign(val.samples().begin(), val.samples().end());
    auto lim = scalar_association(val, cfg);
    e.extrapolated = lim.has_value();
    e.limit = lim ? *lim : val[val.size() - 1];
    double scale = std::max(1.0, std::fabs(f[f.size() - 1]));
    rep.max_abs_limit = std::max(rep.max_abs_limit, std::fabs(e.limit));
    if (std::fabs(e.limit) > cfg.tol_weak * scale) rep.pass = false;
    rep.entries.push_back(std::move(e));
  }
  rep.psd = Q.positive_semidefinite();
  if (rep.psd) {
    auto ar = assoc_minimizer_test(Q.functional(), u, tests, default_taus(), cfg);
    rep.assoc = ar.verdict;
    rep.equivalent = rep.pass == (ar.verdict == AssocVerdict::Pass);
  }
  return rep;
}

struct BvpSolution {
  GridNet u;
  GridNet residual;  // conservative discrete operator applied to u, minus gamma
  GenNumber residual_sup;
  AsymptoticReport residual_report;
};

// Solves -(alpha u')' + beta u = gamma with u = left, right at the ends, per
// eps, by the conservative three-point scheme with harmonic-mean face
// coefficients and a Thomas sweep.
inline BvpSolution solve_quadratic_bvp(const QuadraticForm& Q, const GenNumber& left, const GenNumber& right,
                                       const AsymptoticConfig& cfg = {}) {
  if (Q.kind() != FormKind::Membrane) throw InvalidArgument("the BVP solver handles membrane forms");
  const auto& grid = Q.grid();
  require_same_grid(grid, left.grid());
  require_same_grid(grid, right.grid());
  constexpr double kAlphaFloor = 1e-14;
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (double a : Q.alpha().values(i))
      if (!(a >= kAlphaFloor)) {
        std::ostringstream os;
        os.precision(17);
        os << "alpha drops to " << a << " (below " << kAlphaFloor << ") at eps = " << grid[i];
        throw Degenerate(os.str());
      }
  struct Out {
    std::vector<double> u, r;
    double scale;
  };
  auto out = parallel_map<Out>(grid.size(), [&](std::size_t i) {
    const auto& g = Q.alpha().spatial(i);
    auto al = Q.alpha().values(i), be = Q.beta().values(i), ga = Q.gamma().values(i);
    const std::size_t n = g.size();
    const double h2 = g.h() * g.h();
    auto face = [&](std::size_t j) {  // between j and j + 1
      double s = al[j] + al[j + 1];
      return s > 0.0 ? 2.0 * al[j] * al[j + 1] / s : 0.0;
    };
    std::vector<double> u(n, 0.0);
    u[0] = left[i];
    u[n - 1] = right[i];
    const std::size_t m = n - 2;
    std::vector<double> lo(m), di(m), up(m), rhs(m);
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t j = k + 1;
      double wl = face(j - 1) / h2, wr = face(j) / h2;
      lo[k] = -wl;
      up[k] = -wr;
      di[k] = wl + wr + be[j];
      rhs[k] = ga[j];
    }
    rhs[0] += face(0) / h2 * u[0];
    rhs[m - 1] += face(n - 2) / h2 * u[n - 1];
    for (std::size_t k = 0; k < m; ++k) {
      if (k > 0) {
        double w = lo[k] / di[k - 1];
        di[k] -= w * up[k - 1];
        rhs[k] -= w * rhs[k - 1];
      }
      if (!(std::fabs(di[k]) > 1e-300) || !std::isfinite(di[k])) {
        std::ostringstream os;
        os.precision(17);
        os << "tridiagonal system is singular at eps = " << grid[i];
        throw Degenerate(os.str());
      }
    }
    for (std::size_t k = m; k-- > 0;) u[k + 1] = (rhs[k] - (k + 1 < m ? up[k] * u[k + 2] : 0.0)) / di[k];
    std::vector<double> r(n, 0.0);
    double umax = 0.0, amax = 0.0, gmax = 0.0, bu = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      umax = std::max(umax, std::fabs(u[j]));
      amax = std::max(amax, std::fabs(al[j]));
      gmax = std::max(gmax, std::fabs(ga[j]));
      bu = std::max(bu, std::fabs(be[j] * u[j]));
    }
    for (std::size_t j = 1; j + 1 < n; ++j)
      r[j] = -(face(j) * (u[j + 1] - u[j]) - face(j - 1) * (u[j] - u[j - 1])) / h2 + be[j] * u[j] - ga[j];
    for (double v : u) detail::require_finite(v, grid[i], "BVP solution");
    return Out{std::move(u), std::move(r), gmax + bu + 4.0 * amax * umax / h2};
  });
  std::vector<std::vector<double>> uv, rv;
  std::vector<double> sc;
  for (auto& o : out) {
    uv.push_back(std::move(o.u));
    rv.push_back(std::move(o.r));
    sc.push_back(o.scale);
  }
  GridNet u = Q.alpha().with_values(std::move(uv));
  GridNet r = Q.alpha().with_values(std::move(rv));
  auto mag = residual_magnitude(Field{r}, GenNumber(grid, sc));
  return {u, r, mag, classify(mag, cfg)};
}

// ---------------------------------------------------------------------------
// Library Lagrangians.

namespace lagrangians {

inline Lagrangian dirichlet_energy() {
  Lagrangian L;
  L.name = "dirichlet_energy";
  L.density = [](double, const JetPoint& j) { return 0.5 * j.u[1][0] * j.u[1][0]; };
  L.partial_u = [](double, const JetPoint& j, int k, int) { return k == 1 ? j.u[1][0] : 0.0; };
  L.partial_x = [](double, const JetPoint&) { return 0.0; };
  return L;
}

inline Lagrangian mass() {
  Lagrangian L;
  L.name = "mass";
  L.density = [](double, const JetPoint& j) { return 0.5 * j.u[0][0] * j.u[0][0]; };
  L.partial_u = [](double, const JetPoint& j, int k, int) { return k == 0 ? j.u[0][0] : 0.0; };
  L.partial_x = [](double, const JetPoint&) { return 0.0; };
  return L;
}

// x^2 u'^2
inline Lagrangian weierstrass() {
  Lagrangian L;
  L.name = "weierstrass";
  L.density = [](double, const JetPoint& j) { return j.x * j.x * j.u[1][0] * j.u[1][0]; };
  L.partial_u = [](double, const JetPoint& j, int k, int) { return k == 1 ? 2.0 * j.x * j.x * j.u[1][0] : 0.0; };
  L.partial_x = [](double, const JetPoint& j) { return 2.0 * j.x * j.u[1][0] * j.u[1][0]; };
  return L;
}

// 1/2 alpha u'^2 + 1/2 beta u^2 - gamma u with constant coefficients.
inline Lagrangian elastic(double alpha, double beta, double gamma) {
  Lagrangian L;
  L.name = "elastic";
  L.density = [=](double, const JetPoint& j) {
    double u = j.u[0][0], p = j.u[1][0];
    return 0.5 * alpha * p * p + 0.5 * beta * u * u - gamma * u;
  };
  L.partial_u = [=](double, const JetPoint& j, int k, int) {
    return k == 0 ? beta * j.u[0][0] - gamma : alpha * j.u[1][0];
  };
  L.partial_x = [](double, const JetPoint&) { return 0.0; };
  return L;
}

inline Lagrangian arc_length() {
  Lagrangian L;
  L.name = "arc_length";
  L.growth = Growth::General;
  L.density = [](double, const JetPoint& j) { return std::sqrt(1.0 + j.u[1][0] * j.u[1][0]); };
  L.partial_u = [](double, const JetPoint& j, int k, int) {
    double p = j.u[1][0];
    return k == 1 ? p / std::sqrt(1.0 + p * p) : 0.0;
  };
  return L;
}

// Particle in a potential: 1/2 u'^2 - V(u).
inline Lagrangian particle(std::function<double(double, double)> V, std::function<double(double, double)> dV,
                           std::string name = "particle") {
  Lagrangian L;
  L.name = std::move(name);
  L.growth = Growth::General;
  L.density = [V](double e, const JetPoint& j) { return 0.5 * j.u[1][0] * j.u[1][0] - V(e, j.u[0][0]); };
  L.partial_u = [dV](double e, const JetPoint& j, int k, int) { return k == 1 ? j.u[1][0] : -dV(e, j.u[0][0]); };
  L.partial_x = [](double, const JetPoint&) { return 0.0; };
  return L;
}

inline Lagrangian anharmonic() {
  return particle([](double, double u) { return 0.5 * u * u + 0.25 * u * u * u * u; },
                  [](double, double u) { return u + u * u * u; }, "anharmonic");
}

// String with a point spring: 1/2 u'^2 + 1/2 D_eps(x - x0) u^2, D_eps the
// model delta built from the bump.
inline Lagrangian delta_spring(double x0 = 0.5) {
  auto m = std::make_shared<Mollifier>(Mollifier::bump());
  Lagrangian L;
  L.name = "delta_spring";
  L.growth = Growth::General;
  L.density = [=](double e, const JetPoint& j) {
    double u = j.u[0][0], p = j.u[1][0];
    return 0.5 * p * p + 0.5 * (*m)((j.x - x0) / e) / e * u * u;
  };
  L.partial_u = [=](double e, const JetPoint& j, int k, int) {
    return k == 0 ? (*m)((j.x - x0) / e) / e * j.u[0][0] : j.u[1][0];
  };
  L.partial_x = [=](double e, const JetPoint& j) {
    return 0.5 * m->derivative((j.x - x0) / e) / (e * e) * j.u[0][0] * j.u[0][0];
  };
  return L;
}

// Rod with stored energy G(u') = E/2 u'^2 + 1/4 u'^4 and load f.
inline Lagrangian rod(double E = 1.0, double f = 1.0) {
  Lagrangian L;
  L.name = "rod";
  L.density = [=](double, const JetPoint& j) {
    double p = j.u[1][0];
    return 0.5 * E * p * p + 0.25 * p * p * p * p - f * j.u[0][0];
  };
  L.partial_u = [=](double, const JetPoint& j, int k, int) {
    double p = j.u[1][0];
    return k == 0 ? -f : E * p + p * p * p;
  };
  return L;
}

// 1/2 alpha u''^2 - 1/2 beta u'^2 - gamma u with constant coefficients.
inline Lagrangian beam(double alpha, double beta, double gamma) {
  Lagrangian L;
  L.name = "beam";
  L.order = 2;
  L.density = [=](double, const JetPoint& j) {
    double p = j.u[1][0], q = j.u[2][0];
    return 0.5 * alpha * q * q - 0.5 * beta * p * p - gamma * j.u[0][0];
  };
  L.partial_u = [=](double, const JetPoint& j, int k, int) {
    if (k == 0) return -gamma;
    if (k == 1) return -beta * j.u[1][0];
    return alpha * j.u[2][0];
  };
  L.partial_x = [](double, const JetPoint&) { return 0.0; };
  return L;
}

// Planar motion in a central field, components (r, phi):
// 1/2 m (r'^2 + r^2 phi'^2) - V(r).
inline Lagrangian central_field(double m, std::function<double(double, double)> V,
                                std::function<double(double, double)> dV) {
  Lagrangian L;
  L.name = "central_field";
  L.components = 2;
  L.growth = Growth::General;
  L.density = [=](double e, const JetPoint& j) {
    double r = j.u[0][0], rd = j.u[1][0], pd = j.u[1][1];
    return 0.5 * m * (rd * rd + r * r * pd * pd) - V(e, r);
  };
  L.partial_u = [=](double e, const JetPoint& j, int k, int a) {
    double r = j.u[0][0], rd = j.u[1][0], pd = j.u[1][1];
    if (k == 0) return a == 0 ? m * r * pd * pd - dV(e, r) : 0.0;
    return a == 0 ? m * rd : m * r * r * pd;
  };
  L.partial_x = [](double, const JetPoint&) { return 0.0; };
  L.sampler = [](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0), R(0.5, 2.0), X(0.0, 1.0);
    std::vector<std::vector<double>> u(3, std::vector<double>(2));
    u[0] = {R(rng), U(rng)};
    u[1] = {U(rng), U(rng)};
    u[2] = {U(rng), U(rng)};
    return JetPoint(X(rng), std::move(u));
  };
  return L;
}

// Softened Kepler potential -k / sqrt(r^2 + eps^2).
inline Lagrangian kepler(double m = 1.0, double k = 1.0) {
  return central_field(
      m, [k](double e, double r) { return -k / std::sqrt(r * r + e * e); },
      [k](double e, double r) { return k * r / std::pow(r * r + e * e, 1.5); });
}

// Energy of a curve in the conformal metric exp(2 lambda(u)) I on R^2 with
// lambda = 0.3 sin(u1) cos(u2).
inline Lagrangian conformal_energy() {
  Lagrangian L;
  L.name = "conformal_energy";
  L.components = 2;
  L.growth = Growth::General;
  auto lam = [](double a, double b) { return 0.3 * std::sin(a) * std::cos(b); };
  L.density = [=](double, const JetPoint& j) {
    double s = j.u[1][0] * j.u[1][0] + j.u[1][1] * j.u[1][1];
    return 0.5 * std::exp(2.0 * lam(j.u[0][0], j.u[0][1])) * s;
  };
  L.partial_u = [=](double, const JetPoint& j, int k, int a) {
    double u1 = j.u[0][0], u2 = j.u[0][1];
    double w = std::exp(2.0 * lam(u1, u2));
    if (k == 1) return w * j.u[1][a];
    double s = j.u[1][0] * j.u[1][0] + j.u[1][1] * j.u[1][1];
    double dl = a == 0 ? 0.3 * std::cos(u1) * std::cos(u2) : -0.3 * std::sin(u1) * std::sin(u2);
    return w * dl * s;
  };
  L.partial_x = [](double, const JetPoint&) { return 0.0; };
  return L;
}

// The library used by the integration-by-parts cross-check.
inline std::vector<Lagrangian> all() {
  return {dirichlet_energy(), mass(), weierstrass(), elastic(1.5, 0.5, 1.0), arc_length(), anharmonic(),
          delta_spring(), rod(), beam(1.0, 0.3, 1.0), kepler(), conformal_energy()};
}

}  // namespace lagrangians

}  // namespace colvar
