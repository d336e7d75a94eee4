#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "colvar/grid_net.hpp"
#include "colvar/quadrature.hpp"
#include "colvar/stencil.hpp"

namespace colvar {

struct Interval {
  double lo, hi;
};

// Per-epsilon derivative of the given order (1..4), fourth-order accurate.
inline GridNet differentiate(const GridNet& u, int order) {
  auto vals = parallel_map<std::vector<double>>(u.size(), [&](std::size_t i) {
    return stencil::derivative(u.values(i), u.spatial(i).h(), order);
  });
  return u.with_values(std::move(vals));
}

// Integral of one slice over the whole grid or over [sub.lo, sub.hi]. Whole
// panels use the composite rule at the slice's own resolution; the partial
// cells at either end use Gauss-Legendre on the cubic interpolant.
inline double integrate_slice(const SpatialGrid& g, std::span<const double> v,
                              std::optional<Interval> sub = std::nullopt) {
  if (!sub) return stencil::newton_cotes(v, g.h(), 0, g.size() - 1);
  double c = sub->lo, d = sub->hi;
  if (!(c <= d) || !g.contains(c) || !g.contains(d))
    throw DomainError("integration interval outside the spatial domain");
  c = std::max(c, g.a());
  d = std::min(d, g.b());
  auto f = [&](double x) { return stencil::cubic_at(v, (x - g.a()) / g.h()); };
  double tc = (c - g.a()) / g.h(), td = (d - g.a()) / g.h();
  auto i0 = static_cast<long>(std::ceil(tc - 1e-9));
  auto i1 = static_cast<long>(std::floor(td + 1e-9));
  if (i0 > i1) return quad::gauss4(f, c, d);
  double s = stencil::newton_cotes(v, g.h(), static_cast<std::size_t>(i0), static_cast<std::size_t>(i1));
  double x0 = g.node(static_cast<std::size_t>(i0)), x1 = g.node(static_cast<std::size_t>(i1));
  if (c < x0) s += quad::gauss4(f, c, x0);
  if (x1 < d) s += quad::gauss4(f, x1, d);
  return s;
}

inline GenNumber integrate(const GridNet& u, std::optional<Interval> sub = std::nullopt) {
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = integrate_slice(u.spatial(i), u.values(i), sub);
  return GenNumber(u.grid(), std::move(out));
}

// Per-epsilon running integral from the left end, fourth-order accurate.
inline GridNet antiderivative(const GridNet& u) {
  std::vector<std::vector<double>> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = stencil::cumulative(u.values(i), u.spatial(i).h());
  return u.with_values(std::move(out));
}

}  // namespace colvar
