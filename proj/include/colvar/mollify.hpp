#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "colvar/asymptotics.hpp"
#include "colvar/calculus.hpp"
#include "colvar/grid_net.hpp"
#include "colvar/quadrature.hpp"
#include "colvar/stencil.hpp"

namespace colvar {

// Smooth step: 0 for t <= 0, 1 for t >= 1.
inline double smooth_step(double t) {
  auto e = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double a = e(t), b = e(1.0 - t);
  return a / (a + b);
}

// Even bump supported in [-1, 1]. `scale` multiplies the raw shape; for a
// normalized mollifier it is 1 / (raw integral).
class Mollifier {
 public:
  using Fn = std::function<double(double)>;

  // exp(-1/(1-y^2)), normalized.
  static Mollifier bump() {
    Fn shape = [](double y) {
      double t = 1.0 - y * y;
      return t > 0.0 ? std::exp(-1.0 / t) : 0.0;
    };
    Fn deriv = [](double y) {
      double t = 1.0 - y * y;
      return t > 0.0 ? std::exp(-1.0 / t) * (-2.0 * y / (t * t)) : 0.0;
    };
    return from_shape(shape, deriv, true);
  }

  // Wraps a shape supported in [-1, 1]; with normalize = false the shape is
  // used as given (make_delta then checks its integral).
  static Mollifier from_shape(Fn shape, Fn deriv = {}, bool normalize = true) {
    if (std::fabs(shape(1.0)) > 1e-300 || std::fabs(shape(-1.0)) > 1e-300)
      throw InvariantViolation("mollifier must vanish at +-1");
    double raw = quad::integral(shape, -1.0, 1.0, {}, 1e-16, 1e-14);
    if (!(raw != 0.0)) throw InvariantViolation("mollifier has zero integral");
    Mollifier m;
    m.shape_ = std::move(shape);
    m.deriv_ = std::move(deriv);
    m.scale_ = normalize ? 1.0 / raw : 1.0;
    m.integral_ = raw * m.scale_;
    return m;
  }

  double operator()(double y) const { return std::fabs(y) < 1.0 ? scale_ * shape_(y) : 0.0; }
  double derivative(double y) const {
    if (std::fabs(y) >= 1.0) return 0.0;
    if (deriv_) return scale_ * deriv_(y);
    double h = 1e-4 * std::min(1.0, 1.0 - std::fabs(y));
    return stencil::d1(*this, y, h);
  }
  double integral() const { return integral_; }

 private:
  Fn shape_, deriv_;
  double scale_ = 1.0, integral_ = 1.0;
};

// Piecewise-smooth function with its jump locations declared.
struct PiecewiseFunction {
  std::function<double(double)> f;
  std::vector<double> jumps;
};

// u_eps(x) = int f(x - eps y) m(y) dy at the nodes of a grid with h <= eps/16,
// split at every declared jump that falls inside the window.
inline GridNet mollify_embed(const PiecewiseFunction& f, const Mollifier& m, const EpsGrid& grid,
                             Interval domain, std::size_t min_nodes = 201) {
  std::vector<double> width(grid.values().begin(), grid.values().end());
  return GridNet::sample(
      grid, [&](double eps) { return SpatialGrid::resolving(domain.lo, domain.hi, eps, min_nodes); },
      [&](double eps, double x) {
        std::vector<double> breaks;
        for (double d : f.jumps) {
          double y = (x - d) / eps;
          if (y > -1.0 && y < 1.0) breaks.push_back(y);
        }
        auto g = [&](double y) { return f.f(x - eps * y) * m(y); };
        return quad::integral(g, -1.0, 1.0, breaks, 1e-13, 1e-12);
      },
      width);
}

enum class DeltaKind { Model, Strict };

// Result of the three defining checks of a delta family.
struct DeltaChecks {
  bool support_shrinks = false;
  bool integral_to_one = false;
  bool mass_bounded = false;
  std::vector<double> support;       // per eps
  std::vector<double> integral;      // per eps
  std::vector<double> abs_integral;  // per eps
  bool all() const { return support_shrinks && integral_to_one && mass_bounded; }
};

class DeltaFamily {
 public:
  using Fn2 = std::function<double(double, double)>;  // (eps, x)

  DeltaKind kind() const { return kind_; }
  const EpsGrid& grid() const { return grid_; }
  const DeltaChecks& checks() const { return checks_; }

  double value(double eps, double x) const { return rho_(eps, x); }
  double derivative(double eps, double x) const {
    if (drho_) return drho_(eps, x);
    double h = support_radius(eps) * 1e-4;
    return stencil::d1([&](double s) { return rho_(eps, s); }, x, h);
  }
  double support_radius(double eps) const { return radius_(eps); }

  // Default refinement for realizations: the unit mass is then reproduced to
  // about 1e-10 by the grid quadrature (at h = eps/16 only to ~1e-5).
  static constexpr double kRealizeRefine = 64.0;

  // Realization centred at x0 on [domain.lo, domain.hi] with h <= eps/refine.
  GridNet realize(Interval domain, double x0 = 0.0, std::size_t min_nodes = 201,
                  double refine = kRealizeRefine) const {
    std::vector<double> width(grid_.values().begin(), grid_.values().end());
    return GridNet::sample(
        grid_, [&](double eps) { return SpatialGrid::resolving(domain.lo, domain.hi, eps, min_nodes, refine); },
        [&](double eps, double x) { return rho_(eps, x - x0); }, width);
  }

 private:
  friend DeltaFamily make_model_delta(const EpsGrid&, const Mollifier&, const AsymptoticConfig&);
  friend DeltaFamily make_strict_delta(const EpsGrid&, Fn2, std::function<double(double)>, Fn2,
                                       const AsymptoticConfig&);
  void run_checks(const AsymptoticConfig& cfg);

  DeltaKind kind_ = DeltaKind::Model;
  EpsGrid grid_ = EpsGrid::geometric(1e-3, 1e-1, 4);
  Fn2 rho_, drho_;
  std::function<double(double)> radius_;
  DeltaChecks checks_;
};

inline void DeltaFamily::run_checks(const AsymptoticConfig& cfg) {
  DeltaChecks c;
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    double eps = grid_[i], R = radius_(eps);
    double zero[] = {0.0};
    auto f = [&](double x) { return rho_(eps, x); };
    auto af = [&](double x) { return std::fabs(rho_(eps, x)); };
    c.support.push_back(R);
    // |rho| has kinks wherever rho changes sign; a stalled panel only costs
    // accuracy far below the check tolerances, so the flag is not fatal here.
    c.integral.push_back(quad::piecewise(f, -R, R, zero, 1e-13, 1e-12).value);
    c.abs_integral.push_back(quad::piecewise(af, -R, R, zero, 1e-13, 1e-12).value);
  }
  GenNumber support(grid_, c.support), integral(grid_, c.integral), mass(grid_, c.abs_integral);
  auto sl = scalar_association(support, cfg);
  bool decreasing = true;
  for (std::size_t i = 1; i < grid_.size(); ++i) decreasing = decreasing && c.support[i] < c.support[i - 1];
  c.support_shrinks = decreasing && sl && std::fabs(*sl) < cfg.tol_weak;
  if (kind_ == DeltaKind::Model) {
    c.integral_to_one = true;
    for (double v : c.integral) c.integral_to_one = c.integral_to_one && std::fabs(v - 1.0) <= 1e-8;
  } else {
    auto il = scalar_association(integral, cfg);
    c.integral_to_one = il && std::fabs(*il - 1.0) < cfg.tol_weak;
  }
  auto mr = classify(mass, cfg);
  c.mass_bounded = mr.negligible() || (mr.cls == NetClass::Moderate && mr.order_n == 0);
  checks_ = std::move(c);
  if (!checks_.all()) {
    std::string why = !checks_.support_shrinks ? "support does not shrink to a point"
                      : !checks_.integral_to_one ? "integral does not tend to 1"
                                                 : "total mass is not bounded";
    throw InvariantViolation("delta family check failed: " + why);
  }
}

// phi_eps(x) = phi(x/eps)/eps with phi the given shape; its integral must be 1.
inline DeltaFamily make_model_delta(const EpsGrid& grid, const Mollifier& shape = Mollifier::bump(),
                                    const AsymptoticConfig& cfg = {}) {
  if (std::fabs(shape.integral() - 1.0) > 1e-8)
    throw InvariantViolation("model delta shape must have unit integral");
  DeltaFamily d;
  d.kind_ = DeltaKind::Model;
  d.grid_ = grid;
  d.rho_ = [shape](double eps, double x) { return shape(x / eps) / eps; };
  d.drho_ = [shape](double eps, double x) { return shape.derivative(x / eps) / (eps * eps); };
  d.radius_ = [](double eps) { return eps; };
  d.run_checks(cfg);
  return d;
}

// Any net rho_eps with the given support radius per eps.
inline DeltaFamily make_strict_delta(const EpsGrid& grid, DeltaFamily::Fn2 rho,
                                     std::function<double(double)> radius, DeltaFamily::Fn2 drho = {},
                                     const AsymptoticConfig& cfg = {}) {
  DeltaFamily d;
  d.kind_ = DeltaKind::Strict;
  d.grid_ = grid;
  d.rho_ = std::move(rho);
  d.drho_ = std::move(drho);
  d.radius_ = std::move(radius);
  d.run_checks(cfg);
  return d;
}

}  // namespace colvar
