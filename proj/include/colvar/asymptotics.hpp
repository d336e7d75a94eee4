#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "colvar/calculus.hpp"
#include "colvar/gen_number.hpp"
#include "colvar/grid_net.hpp"

namespace colvar {

// Thresholds used by every classification. The tail is the smallest half of
// the eps grid; statements "for eps small" are checked there.
struct AsymptoticConfig {
  int m_max = 8;             // negligibility must beat eps^m for m <= m_max
  int n_max = 12;            // largest moderate exponent tried
  double floor = 1e-300;     // magnitudes below this count as zero
  int alpha_max = 2;         // derivative orders checked for GridNets
  double tol_assoc = 1e-6;   // scalar association
  double tol_weak = 1e-3;    // weak association
  double slope_slack = 0.1;  // allowed shortfall of fitted slopes
  double bound_slack = 1e-3; // relative slack in |v| <= C eps^-N
};

enum class NetClass { Negligible, Moderate, NonModerate };

inline const char* to_string(NetClass c) {
  switch (c) {
    case NetClass::Negligible: return "Negligible";
    case NetClass::Moderate: return "Moderate";
    case NetClass::NonModerate: return "NonModerate";
  }
  return "?";
}

struct AsymptoticReport {
  NetClass cls = NetClass::Moderate;
  int order_n = 0;      // N of Moderate(N); the largest order checked otherwise
  double slope = 0.0;   // least-squares exponent of |v| on the tail
  double r2 = 1.0;
  double witness_eps = 0.0;
  std::vector<double> eps;        // whole grid
  std::vector<double> magnitude;  // |v| (or sup |v| over K) per eps
  std::vector<NetClass> per_order;  // GridNets: class of each derivative order

  bool negligible() const { return cls == NetClass::Negligible; }
  bool moderate() const { return cls != NetClass::NonModerate; }
};

namespace detail {

struct LineFit {
  double slope, r2;
};

inline LineFit fit_loglog(const std::vector<double>& le, const std::vector<double>& lv) {
  const double n = static_cast<double>(le.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < le.size(); ++k) mx += le[k], my += lv[k];
  mx /= n, my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < le.size(); ++k) {
    sxx += (le[k] - mx) * (le[k] - mx);
    sxy += (le[k] - mx) * (lv[k] - my);
    syy += (lv[k] - my) * (lv[k] - my);
  }
  double slope = sxx > 0 ? sxy / sxx : 0.0;
  double ssres = syy - slope * sxy;
  double r2 = syy > 0 ? std::clamp(1.0 - ssres / syy, 0.0, 1.0) : 1.0;
  return {slope, r2};
}

inline AsymptoticReport classify_magnitudes(const EpsGrid& grid, std::vector<double> mag,
                                            const AsymptoticConfig& cfg) {
  const std::size_t t0 = grid.tail_begin(), n = grid.size();
  if (grid.tail_size() < 2) throw InvalidArgument("eps grid tail too short to classify");
  AsymptoticReport rep;
  rep.eps.assign(grid.values().begin(), grid.values().end());
  for (double& m : mag) m = std::fabs(m);
  rep.magnitude = mag;

  std::vector<double> le, lv;
  for (std::size_t k = t0; k < n; ++k) {
    le.push_back(std::log(grid[k]));
    lv.push_back(std::log(std::max(mag[k], cfg.floor)));
  }
  auto fit = fit_loglog(le, lv);
  rep.slope = fit.slope;
  rep.r2 = fit.r2;

  auto below = [&](std::size_t k) { return mag[k] < cfg.floor; };
  bool all_below = true;
  for (std::size_t k = t0; k < n; ++k) all_below = all_below && below(k);
  if (all_below) {
    rep.cls = NetClass::Negligible;
    rep.slope = std::numeric_limits<double>::infinity();
    rep.witness_eps = grid[t0];
    return rep;
  }

  // Negligible: decay to the floor is never undone anywhere on the grid, and
  // the tail slopes between above-floor samples (pairwise and fitted) reach
  // m_max. Samples below the floor are consistent with any decay rate.
  bool monotone_floor = true;
  bool seen_below = false;
  for (std::size_t k = 0; k < n; ++k) {
    if (below(k)) seen_below = true;
    else if (seen_below) monotone_floor = false;
  }
  double min_pair = std::numeric_limits<double>::infinity();
  std::size_t worst = t0;
  std::vector<double> ae, av;
  for (std::size_t k = t0; k < n; ++k) {
    if (below(k)) break;
    ae.push_back(le[k - t0]);
    av.push_back(lv[k - t0]);
    if (k + 1 < n && !below(k + 1)) {
      double s = (lv[k + 1 - t0] - lv[k - t0]) / (le[k + 1 - t0] - le[k - t0]);
      if (s < min_pair) min_pair = s, worst = k;
    }
  }
  double above_slope = ae.size() >= 2 ? fit_loglog(ae, av).slope : std::numeric_limits<double>::infinity();
  const double need = cfg.m_max - cfg.slope_slack;
  if (monotone_floor && min_pair >= need && above_slope >= need) {
    rep.cls = NetClass::Negligible;
    rep.witness_eps = grid[worst];
    return rep;
  }

  // Moderate(N): smallest N with |v| eps^N bounded by its value at the start of
  // the tail.
  for (int N = 0; N <= cfg.n_max; ++N) {
    double first = -1.0, top = 0.0;
    std::size_t arg = t0;
    bool ok = true;
    for (std::size_t k = t0; k < n; ++k) {
      if (below(k)) continue;
      double r = mag[k] * std::pow(grid[k], N);
      if (first < 0) first = r;
      if (r > top) top = r, arg = k;
      if (r > first * (1.0 + cfg.bound_slack)) ok = false;
    }
    if (ok) {
      rep.cls = NetClass::Moderate;
      rep.order_n = N;
      rep.witness_eps = grid[arg];
      return rep;
    }
  }
  rep.cls = NetClass::NonModerate;
  rep.order_n = cfg.n_max;
  std::size_t arg = t0;
  for (std::size_t k = t0; k < n; ++k)
    if (mag[k] > mag[arg]) arg = k;
  rep.witness_eps = grid[arg];
  return rep;
}

inline double sup_abs(const SpatialGrid& g, std::span<const double> v, std::optional<Interval> K) {
  double s = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    double x = g.node(j);
    if (K && (x < K->lo - 1e-12 || x > K->hi + 1e-12)) continue;
    s = std::max(s, std::fabs(v[j]));
  }
  return s;
}

}  // namespace detail

inline AsymptoticReport classify(const GenNumber& v, const AsymptoticConfig& cfg = {}) {
  return detail::classify_magnitudes(v.grid(), {v.samples().begin(), v.samples().end()}, cfg);
}

// Per-epsilon sup over K of |d^a v| for a = 0..alpha_max. The reported slope
// and magnitudes are those of a = 0; the class combines all orders.
inline AsymptoticReport classify(const GridNet& v, std::optional<Interval> K = std::nullopt,
                                 const AsymptoticConfig& cfg = {}) {
  if (K && (K->lo < v.a() - 1e-12 || K->hi > v.b() + 1e-12 || K->lo > K->hi))
    throw DomainError("classification set K is not inside the spatial domain");
  AsymptoticReport combined;
  for (int a = 0; a <= cfg.alpha_max; ++a) {
    GridNet d = a == 0 ? v : differentiate(v, a);
    std::vector<double> mag(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) mag[i] = detail::sup_abs(d.spatial(i), d.values(i), K);
    auto r = detail::classify_magnitudes(v.grid(), std::move(mag), cfg);
    if (a == 0) {
      combined = r;
    } else {
      if (r.cls == NetClass::NonModerate || combined.cls == NetClass::NonModerate) {
        if (combined.cls != NetClass::NonModerate) combined.witness_eps = r.witness_eps;
        combined.cls = NetClass::NonModerate;
        combined.order_n = cfg.n_max;
      } else if (r.cls == NetClass::Moderate) {
        if (combined.cls == NetClass::Negligible) combined.order_n = 0;
        combined.cls = NetClass::Moderate;
        if (r.order_n > combined.order_n) combined.order_n = r.order_n, combined.witness_eps = r.witness_eps;
      }
    }
    combined.per_order.push_back(r.cls);
  }
  return combined;
}

enum class Relation { StrictlyPositive, Invertible, NonNegative, Indeterminate };

inline const char* to_string(Relation r) {
  switch (r) {
    case Relation::StrictlyPositive: return "StrictlyPositive";
    case Relation::Invertible: return "Invertible";
    case Relation::NonNegative: return "NonNegative";
    case Relation::Indeterminate: return "Indeterminate";
  }
  return "?";
}

// `relation` is the strongest statement that holds; the flags spell out each
// property separately.
struct OrderVerdict {
  Relation relation = Relation::Indeterminate;
  std::optional<double> exponent_a;
  bool invertible = false;
  bool nonnegative = false;
  bool strictly_positive = false;
};

// |x_eps| >= eps^a on the tail for the smallest such a, accepted when a <= m_max.
inline OrderVerdict is_invertible(const GenNumber& x, const AsymptoticConfig& cfg = {}) {
  OrderVerdict v;
  const auto& g = x.grid();
  double a = -std::numeric_limits<double>::infinity();
  for (std::size_t k = g.tail_begin(); k < g.size(); ++k) {
    double m = std::fabs(x[k]);
    if (m < cfg.floor) return v;
    a = std::max(a, std::log(m) / std::log(g[k]));
  }
  if (a <= cfg.m_max) {
    v.invertible = true;
    v.exponent_a = std::max(0.0, a);
    v.relation = Relation::Invertible;
  }
  return v;
}

inline OrderVerdict is_strictly_positive(const GenNumber& x, const AsymptoticConfig& cfg = {}) {
  OrderVerdict v = is_invertible(x, cfg);
  const auto& g = x.grid();
  bool positive = true, nonneg = true;
  for (std::size_t k = g.tail_begin(); k < g.size(); ++k) {
    positive = positive && x[k] > 0.0;
    nonneg = nonneg && x[k] >= -std::pow(g[k], cfg.m_max);
  }
  v.nonnegative = nonneg;
  v.strictly_positive = positive && v.invertible;
  if (v.strictly_positive) v.relation = Relation::StrictlyPositive;
  else if (v.invertible) v.relation = Relation::Invertible;
  else if (nonneg) v.relation = Relation::NonNegative;
  else v.relation = Relation::Indeterminate;
  return v;
}

struct LemmaVerdict {
  bool bound_holds = false;  // |x| <= eps^m |y| on the tail for all checked m
  bool negligible = false;   // classify(x)
  int m_checked = 0;
  bool verdict() const { return bound_holds && negligible; }
};

// Tests |x_eps| <= eps^m |y_eps| for m = 1 .. m_max + N_y, where N_y is the
// moderate exponent of y. With y of moderate growth this is the hypothesis of
// the x = 0 criterion; the classifier result is reported next to it.
inline LemmaVerdict lemma_x0_check(const GenNumber& x, const GenNumber& y, const AsymptoticConfig& cfg = {}) {
  require_same_grid(x.grid(), y.grid());
  LemmaVerdict v;
  auto ry = classify(y, cfg);
  int ny = ry.cls == NetClass::Negligible ? 0 : ry.order_n;
  v.m_checked = cfg.m_max + ny;
  const auto& g = x.grid();
  v.bound_holds = true;
  for (int m = 1; m <= v.m_checked && v.bound_holds; ++m)
    for (std::size_t k = g.tail_begin(); k < g.size(); ++k)
      if (std::fabs(x[k]) > std::pow(g[k], m) * std::fabs(y[k])) {
        v.bound_holds = false;
        break;
      }
  v.negligible = classify(x, cfg).negligible();
  return v;
}

// Limit of the net if its last samples converge: either they already agree
// within tol_assoc, or two consecutive Richardson extrapolations (geometric
// error model) agree within tol_assoc.
inline std::optional<double> scalar_association(const GenNumber& x, const AsymptoticConfig& cfg = {}) {
  const std::size_t n = x.size();
  auto scale = [](double v) { return std::max(1.0, std::fabs(v)); };
  double spread = 0.0;
  for (std::size_t k = x.grid().tail_begin(); k < n; ++k) spread = std::max(spread, std::fabs(x[k] - x[n - 1]));
  if (spread <= cfg.tol_assoc * scale(x[n - 1])) return x[n - 1];
  auto richardson = [&](std::size_t k) -> std::optional<double> {
    double d1 = x[k + 1] - x[k], d2 = x[k + 2] - x[k + 1];
    if (d1 == 0.0) return d2 == 0.0 ? std::optional<double>(x[k + 2]) : std::nullopt;
    double q = d2 / d1;
    if (!(q > 0.0 && q < 1.0)) return std::nullopt;
    return x[k + 2] + d2 * q / (1.0 - q);
  };
  auto la = richardson(n - 4), lb = richardson(n - 3);
  if (!la || !lb) return std::nullopt;
  if (std::fabs(*la - *lb) > cfg.tol_assoc * scale(*lb)) return std::nullopt;
  return *lb;
}

// A compactly supported test function.
struct TestFunction {
  std::function<double(double)> phi;
  double lo, hi;
  std::string name;
};

// Standard bump exp(-1/(1 - y^2)) rescaled to [c - r, c + r] (not normalized).
inline TestFunction bump_test(double c, double r, std::string name = "bump") {
  return {[c, r](double x) {
            double y = (x - c) / r;
            return std::fabs(y) < 1.0 ? std::exp(-1.0 / (1.0 - y * y)) : 0.0;
          },
          c - r, c + r, std::move(name)};
}

// Five overlapping bumps (some with polynomial weights) inside [a, b].
inline std::vector<TestFunction> default_tests(double a, double b) {
  double L = b - a, m = 0.5 * (a + b);
  std::vector<TestFunction> t;
  t.push_back(bump_test(m, 0.3 * L, "bump_centered"));
  t.push_back(bump_test(m - 0.1 * L, 0.25 * L, "bump_left"));
  t.push_back(bump_test(m + 0.15 * L, 0.2 * L, "bump_right"));
  auto b4 = bump_test(m + 0.05 * L, 0.35 * L, "bump_linear");
  auto f4 = b4.phi;
  b4.phi = [f4, m, L](double x) { return f4(x) * (1.0 + (x - m) / L); };
  t.push_back(b4);
  auto b5 = bump_test(m, 0.4 * L, "bump_cosine");
  auto f5 = b5.phi;
  b5.phi = [f5, m, L](double x) { return f5(x) * std::cos(3.0 * (x - m) / L); };
  t.push_back(b5);
  return t;
}

// Distribution to compare against: a locally integrable density (with its
// kinks/jumps listed for quadrature) plus finitely many point masses.
struct WeakTarget {
  std::function<double(double)> density;
  std::vector<double> breaks;
  std::vector<std::pair<double, double>> masses;  // (position, weight)

  static WeakTarget zero() { return {}; }
  static WeakTarget function(std::function<double(double)> f, std::vector<double> breaks = {}) {
    return {std::move(f), std::move(breaks), {}};
  }
  static WeakTarget point_mass(double x, double w = 1.0) { return {nullptr, {}, {{x, w}}}; }

  double pair(const TestFunction& t) const {
    double s = 0.0;
    if (density) {
      auto g = [&](double x) { return density(x) * t.phi(x); };
      s += quad::integral(g, t.lo, t.hi, breaks, 1e-13, 1e-12);
    }
    for (auto [x, w] : masses) s += w * t.phi(x);
    return s;
  }
};

struct WeakEntry {
  std::string test;
  std::vector<double> pairing;  // per eps
  double limit = 0.0;
  bool extrapolated = false;  // limit from scalar_association, else last sample
  double target = 0.0;
  double discrepancy = 0.0;
};

struct WeakReport {
  bool pass = false;
  double max_discrepancy = 0.0;
  std::vector<double> eps;
  std::vector<WeakEntry> entries;
};

// Per-epsilon pairing <u_eps, phi> by quadrature at the slice's resolution.
inline GenNumber pairing(const GridNet& u, const TestFunction& t) {
  if (t.lo < u.a() - 1e-12 || t.hi > u.b() + 1e-12)
    throw DomainError("test function support leaves the domain");
  if (const auto& fw = u.feature_width()) {
    for (std::size_t i = 0; i < u.size(); ++i)
      if (u.spatial(i).h() > (*fw)[i] / SpatialGrid::kRefine * (1.0 + 1e-9))
        throw Unresolved("net is not resolved at h <= eps/16; pairing would be unreliable");
  }
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto& g = u.spatial(i);
    auto v = u.values(i);
    std::vector<double> prod(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
      double x = g.node(j);
      prod[j] = (x > t.lo && x < t.hi) ? v[j] * t.phi(x) : 0.0;
    }
    out[i] = stencil::newton_cotes(prod, g.h(), 0, prod.size() - 1);
  }
  return GenNumber(u.grid(), std::move(out));
}

inline WeakReport weak_association(const GridNet& u, const WeakTarget& target,
                                   const std::vector<TestFunction>& tests, const AsymptoticConfig& cfg = {}) {
  WeakReport rep;
  rep.eps.assign(u.grid().values().begin(), u.grid().values().end());
  for (const auto& t : tests) {
    auto p = pairing(u, t);
    WeakEntry e;
    e.test = t.name;
    e.pairing.assign(p.samples().begin(), p.samples().end());
    auto lim = scalar_association(p, cfg);
    e.extrapolated = lim.has_value();
    e.limit = lim ? *lim : p[p.size() - 1];
    e.target = target.pair(t);
    e.discrepancy = std::fabs(e.limit - e.target);
    rep.max_discrepancy = std::max(rep.max_discrepancy, e.discrepancy);
    rep.entries.push_back(std::move(e));
  }
  rep.pass = rep.max_discrepancy < cfg.tol_weak;
  return rep;
}

enum class Definiteness { PositiveDefinite, PositiveSemidefinite, Indefinite, Indeterminate };

inline const char* to_string(Definiteness d) {
  switch (d) {
    case Definiteness::PositiveDefinite: return "PositiveDefinite";
    case Definiteness::PositiveSemidefinite: return "PositiveSemidefinite";
    case Definiteness::Indefinite: return "Indefinite";
    case Definiteness::Indeterminate: return "Indeterminate";
  }
  return "?";
}

struct DefinitenessReport {
  Definiteness verdict = Definiteness::Indeterminate;
  std::vector<GenNumber> eigenvalues;  // ascending families
};

inline DefinitenessReport classify_definiteness(const GenMatrix& A, const AsymptoticConfig& cfg = {}) {
  const auto& g = A.grid();
  const auto p = static_cast<std::size_t>(A.dim());
  std::vector<std::vector<double>> fam(p, std::vector<double>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A[i], Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("symmetric eigensolver did not converge");
    for (std::size_t j = 0; j < p; ++j) fam[j][i] = es.eigenvalues()(static_cast<Eigen::Index>(j));
  }
  DefinitenessReport rep;
  bool pd = true, psd = true, negative = false;
  for (auto& f : fam) {
    GenNumber e(g, std::move(f));
    auto v = is_strictly_positive(e, cfg);
    pd = pd && v.strictly_positive;
    psd = psd && v.nonnegative;
    negative = negative || is_strictly_positive(-e, cfg).strictly_positive;
    rep.eigenvalues.push_back(std::move(e));
  }
  rep.verdict = pd ? Definiteness::PositiveDefinite
                   : psd ? Definiteness::PositiveSemidefinite
                         : negative ? Definiteness::Indefinite : Definiteness::Indeterminate;
  return rep;
}

}  // namespace colvar
