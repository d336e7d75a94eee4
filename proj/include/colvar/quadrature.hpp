#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "colvar/error.hpp"

namespace colvar::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

namespace detail {
// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
inline constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                  0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                  0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                  0.207784955007898467600689403773245, 0.0};
inline constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                  0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                  0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                  0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                 0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
void gk15(F& f, double a, double b, double& value, double& err) {
  double c = 0.5 * (a + b), hl = 0.5 * (b - a);
  double fc = f(c);
  double rk = fc * wgk[7], rg = fc * wg[3];
  for (int j = 0; j < 7; ++j) {
    double dx = hl * xgk[j];
    double s = f(c - dx) + f(c + dx);
    rk += wgk[j] * s;
    if (j % 2 == 1) rg += wg[j / 2] * s;
  }
  value = rk * hl;
  err = std::fabs((rk - rg) * hl);
}
}  // namespace detail

// Adaptive Gauss-Kronrod on [a, b] by recursive bisection. Each panel must
// reach max(abs_tol, rel_tol * |panel value|) scaled by its share of [a, b].
template <class F>
Result adaptive(F&& f, double a, double b, double abs_tol = 1e-13, double rel_tol = 1e-12, int max_depth = 40) {
  Result out;
  if (a == b) return out;
  const double total = std::fabs(b - a);
  struct Panel { double a, b; int depth; };
  std::vector<Panel> stack{{a, b, 0}};
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    double v, e;
    detail::gk15(f, p.a, p.b, v, e);
    double share = std::fabs(p.b - p.a) / total;
    double tol = std::max(abs_tol * share, rel_tol * std::fabs(v));
    if (e <= tol || p.depth >= max_depth) {
      if (e > tol) out.converged = false;
      out.value += v;
      out.error += e;
      continue;
    }
    double m = 0.5 * (p.a + p.b);
    stack.push_back({m, p.b, p.depth + 1});
    stack.push_back({p.a, m, p.depth + 1});
  }
  return out;
}

// Integral over [a, b] split at the given interior breakpoints.
template <class F>
Result piecewise(F&& f, double a, double b, std::span<const double> breaks, double abs_tol = 1e-13,
                 double rel_tol = 1e-12) {
  std::vector<double> pts{a};
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  Result out;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    if (pts[k + 1] == pts[k]) continue;
    auto r = adaptive(f, pts[k], pts[k + 1], abs_tol / static_cast<double>(pts.size() - 1), rel_tol);
    out.value += r.value;
    out.error += r.error;
    out.converged = out.converged && r.converged;
  }
  return out;
}

// Throwing convenience wrapper.
template <class F>
double integral(F&& f, double a, double b, std::span<const double> breaks = {}, double abs_tol = 1e-13,
                double rel_tol = 1e-12) {
  auto r = piecewise(f, a, b, breaks, abs_tol, rel_tol);
  if (!r.converged) throw IntegrationFailure("adaptive quadrature did not converge");
  return r.value;
}

// Four-point Gauss-Legendre on [a, b]; exact for cubics.
template <class F>
double gauss4(F&& f, double a, double b) {
  constexpr double x0 = 0.3399810435848562648, x1 = 0.8611363115940525752;
  constexpr double w0 = 0.6521451548625461427, w1 = 0.3478548451374538573;
  double c = 0.5 * (a + b), hl = 0.5 * (b - a);
  return hl * (w0 * (f(c - hl * x0) + f(c + hl * x0)) + w1 * (f(c - hl * x1) + f(c + hl * x1)));
}

}  // namespace colvar::quad
