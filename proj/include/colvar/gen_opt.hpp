#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "colvar/asymptotics.hpp"
#include "colvar/gen_number.hpp"
#include "colvar/grid_net.hpp"
#include "colvar/mollify.hpp"

namespace colvar {

// Axis-aligned box: the open set on which the family is defined.
struct Box {
  Eigen::VectorXd lo, hi;
};

// f_eps on a box in R^p, with optional analytic gradient/Hessian. Missing
// derivatives come from nested central differences with step max(1e-5, eps/64).
class EpsFunctionFamily {
 public:
  using Point = Eigen::VectorXd;
  using Fn = std::function<double(double, const Point&)>;
  using GradFn = std::function<Eigen::VectorXd(double, const Point&)>;
  using HessFn = std::function<Eigen::MatrixXd(double, const Point&)>;

  EpsFunctionFamily(EpsGrid grid, Box domain, Fn f, GradFn grad = {}, HessFn hess = {})
      : grid_(std::move(grid)), box_(std::move(domain)), f_(std::move(f)), grad_(std::move(grad)),
        hess_(std::move(hess)) {
    if (box_.lo.size() != box_.hi.size() || box_.lo.size() == 0)
      throw InvalidArgument("domain box has inconsistent dimension");
    for (Eigen::Index j = 0; j < box_.lo.size(); ++j)
      if (!(box_.lo(j) < box_.hi(j))) throw InvalidArgument("domain box is empty");
  }

  // Scalar convenience: f(eps, x) on the interval (lo, hi).
  static EpsFunctionFamily scalar(EpsGrid grid, double lo, double hi, std::function<double(double, double)> f) {
    Box b{Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi)};
    return EpsFunctionFamily(std::move(grid), b, [f](double e, const Point& x) { return f(e, x(0)); });
  }

  const EpsGrid& grid() const { return grid_; }
  const Box& domain() const { return box_; }
  Eigen::Index dim() const { return box_.lo.size(); }
  static double fd_step(double eps) { return std::max(1e-5, eps / 64.0); }

  double value(double eps, const Point& x) const {
    double v = f_(eps, x);
    detail::require_finite(v, eps, "function value");
    return v;
  }

  Eigen::VectorXd gradient(double eps, const Point& x) const {
    if (grad_) return grad_(eps, x);
    const double h = fd_step(eps);
    Eigen::VectorXd g(dim());
    for (Eigen::Index j = 0; j < dim(); ++j) {
      Point a = x, b = x;
      a(j) += h;
      b(j) -= h;
      g(j) = (value(eps, a) - value(eps, b)) / (2 * h);
    }
    return g;
  }

  // Central difference of the central-difference gradient; symmetric by
  // construction.
  Eigen::MatrixXd hessian(double eps, const Point& x) const {
    if (hess_) return hess_(eps, x);
    const double h = fd_step(eps);
    const Eigen::Index p = dim();
    Eigen::MatrixXd H(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
      for (Eigen::Index k = j; k < p; ++k) {
        auto at = [&](double sj, double sk) {
          Point y = x;
          y(j) += sj * h;
          y(k) += sk * h;
          return value(eps, y);
        };
        H(j, k) = H(k, j) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h * h);
      }
    }
    return H;
  }

  bool interior(const Point& x, double margin = 0.0) const {
    for (Eigen::Index j = 0; j < dim(); ++j)
      if (!(x(j) - margin > box_.lo(j) && x(j) + margin < box_.hi(j))) return false;
    return true;
  }

 private:
  EpsGrid grid_;
  Box box_;
  Fn f_;
  GradFn grad_;
  HessFn hess_;
};

struct CriticalReport {
  AsymptoticReport gradient;  // of the per-eps gradient norm
  DefinitenessReport hessian;
};

inline CriticalReport check_critical(const EpsFunctionFamily& f, const Eigen::VectorXd& x0,
                                     const AsymptoticConfig& cfg = {}) {
  if (x0.size() != f.dim()) throw InvalidArgument("point dimension mismatch");
  if (!f.interior(x0)) throw DomainError("base point is not interior to the domain");
  const auto& g = f.grid();
  std::vector<double> gn(g.size());
  std::vector<Eigen::MatrixXd> H(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    gn[i] = f.gradient(g[i], x0).norm();
    H[i] = f.hessian(g[i], x0);
  }
  return {classify(GenNumber(g, gn), cfg), classify_definiteness(GenMatrix(g, std::move(H)), cfg)};
}

struct Probe {
  GenPoint point;
  std::string label;
};

// Direction set: 8 unit-ish directions (scaled for p = 1, compass points for
// p = 2, signed axes and diagonals otherwise).
inline std::vector<Eigen::VectorXd> probe_directions(Eigen::Index p) {
  std::vector<Eigen::VectorXd> d;
  if (p == 1) {
    for (double s : {1.0, 0.8, 0.6, 0.3}) {
      d.push_back(Eigen::VectorXd::Constant(1, s));
      d.push_back(Eigen::VectorXd::Constant(1, -s));
    }
  } else if (p == 2) {
    for (int k = 0; k < 8; ++k) {
      double a = k * M_PI / 4.0;
      Eigen::VectorXd v(2);
      v << std::cos(a), std::sin(a);
      d.push_back(v);
    }
  } else {
    for (Eigen::Index j = 0; j < p && d.size() < 6; ++j) {
      d.push_back(Eigen::VectorXd::Unit(p, j));
      d.push_back(-Eigen::VectorXd::Unit(p, j));
    }
    Eigen::VectorXd one = Eigen::VectorXd::Ones(p) / std::sqrt(static_cast<double>(p));
    d.push_back(one);
    d.push_back(-one);
  }
  return d;
}

// Probe set around x0: 8 directions x 3 eps-exponents x 5 radii of
// near-standard points x0 + r eps^k d, the classical points x0 + r d, and
// interleaved points that follow one near-standard sequence on even grid
// indices and another on odd ones.
inline std::vector<Probe> make_probes(const EpsGrid& grid, const Eigen::VectorXd& x0, double radius) {
  const auto dirs = probe_directions(x0.size());
  const double ks[3] = {1.0, 0.5, 2.0};
  std::vector<double> radii;
  for (int j = 0; j < 5; ++j) radii.push_back(radius * std::pow(10.0, -0.75 * j));
  auto coords_of = [&](double r, double k, const Eigen::VectorXd& d) {
    std::vector<std::vector<double>> c(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      Eigen::VectorXd y = x0 + r * std::pow(grid[i], k) * d;
      c[i].assign(y.data(), y.data() + y.size());
    }
    return c;
  };
  std::vector<double> lim(x0.data(), x0.data() + x0.size());
  auto label = [](const char* kind, double r, double k, std::size_t di) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s r=%.3g k=%.2g dir=%zu", kind, r, k, di);
    return std::string(buf);
  };
  std::vector<Probe> out;
  for (double k : ks)
    for (double r : radii)
      for (std::size_t di = 0; di < dirs.size(); ++di)
        out.push_back({GenPoint::infer(grid, coords_of(r, k, dirs[di]), lim), label("near-standard", r, k, di)});
  for (double r : radii)
    for (std::size_t di = 0; di < dirs.size(); ++di) {
      Eigen::VectorXd y = x0 + r * dirs[di];
      out.push_back({GenPoint::classical(grid, std::vector<double>(y.data(), y.data() + y.size())),
                     label("classical", r, 0, di)});
    }
  for (double k2 : {0.5, 2.0})
    for (double r : radii)
      for (std::size_t di = 0; di < dirs.size(); ++di) {
        auto a = coords_of(r, 1.0, dirs[di]), b = coords_of(r, k2, dirs[di]);
        for (std::size_t i = 1; i < grid.size(); i += 2) a[i] = b[i];
        out.push_back({GenPoint::infer(grid, std::move(a), lim), label("interleaved", r, k2, di)});
      }
  return out;
}

struct MinProbeResult {
  bool is_minimum_on_probes = true;
  std::optional<GenPoint> witness;
  std::optional<GenNumber> witness_difference;  // f(witness) - f(x0) per eps
  std::string witness_label;
  std::size_t probes = 0;
};

inline GenNumber difference_at(const EpsFunctionFamily& f, const GenPoint& p, const Eigen::VectorXd& x0) {
  const auto& g = f.grid();
  std::vector<double> d(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    Eigen::Map<const Eigen::VectorXd> y(p.coords(i).data(), static_cast<Eigen::Index>(p.dim()));
    d[i] = f.value(g[i], y) - f.value(g[i], x0);
  }
  return GenNumber(g, std::move(d));
}

// First probe where f(x~) - f(x0) is not nonnegative and strictly negative on
// the whole tail.
inline MinProbeResult neighborhood_min_test(const EpsFunctionFamily& f, const Eigen::VectorXd& x0, double radius,
                                            const AsymptoticConfig& cfg = {}) {
  if (!(radius > 0)) throw InvalidArgument("probe radius must be positive");
  if (!f.interior(x0, radius)) throw DomainError("probe ball leaves the domain");
  auto probes = make_probes(f.grid(), x0, radius);
  MinProbeResult res;
  res.probes = probes.size();
  const auto& g = f.grid();
  for (auto& p : probes) {
    auto d = difference_at(f, p.point, x0);
    bool tail_negative = true;
    for (std::size_t i = g.tail_begin(); i < g.size(); ++i) tail_negative = tail_negative && d[i] < 0.0;
    if (tail_negative && !is_strictly_positive(d, cfg).nonnegative) {
      res.is_minimum_on_probes = false;
      res.witness = p.point;
      res.witness_difference = d;
      res.witness_label = p.label;
      break;
    }
  }
  return res;
}

enum class MinVerdict { Minimum, UniqueMinimum, Inconclusive };

inline const char* to_string(MinVerdict v) {
  switch (v) {
    case MinVerdict::Minimum: return "Minimum";
    case MinVerdict::UniqueMinimum: return "UniqueMinimum";
    case MinVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct SufficientResult {
  MinVerdict verdict = MinVerdict::Inconclusive;
  bool hessian_psd_on_probes = false;
  bool hessian_pd_on_probes = false;
  std::string first_bad_probe;
  bool vetoed_by_probe_test = false;  // Hessians looked fine but a probe beat x0
};

// Second-order sufficient test: D^2 f positive semidefinite at x0 and every
// probe point gives Minimum, definite everywhere gives UniqueMinimum. The
// direct probe test is run as well and overrides a positive answer.
inline SufficientResult sufficient_min_check(const EpsFunctionFamily& f, const Eigen::VectorXd& x0, double radius,
                                             const AsymptoticConfig& cfg = {}) {
  auto crit = check_critical(f, x0, cfg);
  if (!crit.gradient.negligible())
    throw PreconditionViolated("gradient at the base point is not negligible");
  if (!f.interior(x0, radius)) throw DomainError("probe ball leaves the domain");
  SufficientResult res;
  const auto& g = f.grid();
  auto check = [&](const std::vector<std::vector<double>>& coords, const std::string& label) {
    std::vector<Eigen::MatrixXd> H(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      Eigen::Map<const Eigen::VectorXd> y(coords[i].data(), static_cast<Eigen::Index>(coords[i].size()));
      H[i] = f.hessian(g[i], y);
    }
    auto d = classify_definiteness(GenMatrix(g, std::move(H)), cfg).verdict;
    bool psd = d == Definiteness::PositiveDefinite || d == Definiteness::PositiveSemidefinite;
    if (!psd && res.first_bad_probe.empty()) res.first_bad_probe = label;
    res.hessian_psd_on_probes = res.hessian_psd_on_probes && psd;
    res.hessian_pd_on_probes = res.hessian_pd_on_probes && d == Definiteness::PositiveDefinite;
  };
  res.hessian_psd_on_probes = res.hessian_pd_on_probes = true;
  std::vector<std::vector<double>> base(g.size(), std::vector<double>(x0.data(), x0.data() + x0.size()));
  check(base, "base point");
  for (auto& p : make_probes(g, x0, radius)) {
    std::vector<std::vector<double>> c(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) c[i] = p.point.coords(i);
    check(c, p.label);
  }
  if (res.hessian_pd_on_probes) res.verdict = MinVerdict::UniqueMinimum;
  else if (res.hessian_psd_on_probes) res.verdict = MinVerdict::Minimum;
  if (res.verdict != MinVerdict::Inconclusive && !neighborhood_min_test(f, x0, radius, cfg).is_minimum_on_probes) {
    res.verdict = MinVerdict::Inconclusive;
    res.vetoed_by_probe_test = true;
  }
  return res;
}

// Compactly supported phi with phi = x^2 near 0 and phi(+-1) = -1.
inline double counterexample_bump(double x) {
  double r = std::fabs(x);
  double well = x * x * (1.0 - smooth_step((r - 0.5) / 0.25));
  double dip = smooth_step((r - 0.6) / 0.3) * (1.0 - smooth_step((r - 1.1) / 0.8));
  return well - dip;
}

// f_eps(x) = phi(x / eps) on (-3, 3).
inline EpsFunctionFamily bump_counterexample(const EpsGrid& grid) {
  return EpsFunctionFamily::scalar(grid, -3.0, 3.0, [](double e, double x) { return counterexample_bump(x / e); });
}

// F_eps(x) = sum_n eps^n phi2((x - 1/n)/eps) with phi2 a negative plateau of
// height 1 on |y| <= 1/2; terms below 1e-300 are dropped.
inline EpsFunctionFamily series_counterexample(const EpsGrid& grid) {
  auto phi2 = [](double y) { return -(1.0 - smooth_step((std::fabs(y) - 0.5) / 0.4)); };
  return EpsFunctionFamily::scalar(grid, -2.0, 2.0, [phi2](double e, double x) {
    double s = 0.0, w = e;
    for (int n = 1; w >= 1e-300; ++n, w *= e) {
      double y = (x - 1.0 / n) / e;
      if (std::fabs(y) < 0.9) s += w * phi2(y);
    }
    return s;
  });
}

}  // namespace colvar
