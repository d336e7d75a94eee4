#pragma once

// Uniform-grid numerics shared by the net types: finite-difference weights,
// composite Newton-Cotes sums and local cubic interpolation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "colvar/error.hpp"

namespace colvar::stencil {

// Fornberg's recursion: weights c[j][k] for the k-th derivative at z from
// values at nodes x[j], k = 0..m.
inline std::vector<std::vector<double>> fornberg(double z, std::span<const double> x, int m) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    int mn = std::min<int>(static_cast<int>(i), m);
    double c2 = 1.0, c5 = c4;
    c4 = x[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  return c;
}

// Central half-width and one-sided window size giving fourth-order accuracy.
inline int central_half_width(int order) { return order <= 2 ? 2 : 3; }
inline int one_sided_size(int order) { return order + 4; }
inline std::size_t min_nodes(int order) {
  return static_cast<std::size_t>(std::max(one_sided_size(order), 2 * central_half_width(order) + 1));
}

// Weights on unit spacing for a node at offset `at` inside a window of `size`
// consecutive nodes.
inline std::vector<double> unit_weights(int order, int size, int at) {
  std::vector<double> x(size);
  for (int j = 0; j < size; ++j) x[j] = j;
  auto c = fornberg(static_cast<double>(at), x, order);
  std::vector<double> w(size);
  for (int j = 0; j < size; ++j) w[j] = c[j][order];
  return w;
}

// Fourth-order derivative of the given order on a uniform grid: central in the
// interior, one-sided near the ends.
inline std::vector<double> derivative(std::span<const double> f, double h, int order) {
  if (order < 1 || order > 4) throw InvalidArgument("derivative order must be 1..4");
  const std::size_t n = f.size();
  if (n < min_nodes(order)) throw Unresolved("grid too coarse for the requested derivative");
  const int r = central_half_width(order);
  const int s = one_sided_size(order);
  const double scale = 1.0 / std::pow(h, order);
  std::vector<double> out(n);
  auto central = unit_weights(order, 2 * r + 1, r);
  for (std::size_t i = r; i + r < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < 2 * r + 1; ++j) acc += central[j] * f[i - r + j];
    out[i] = acc * scale;
  }
  for (int i = 0; i < r; ++i) {
    auto w = unit_weights(order, s, i);
    double acc = 0.0;
    for (int j = 0; j < s; ++j) acc += w[j] * f[j];
    out[i] = acc * scale;
    auto wr = unit_weights(order, s, s - 1 - i);
    double accr = 0.0;
    for (int j = 0; j < s; ++j) accr += wr[j] * f[n - s + j];
    out[n - 1 - i] = accr * scale;
  }
  return out;
}

// Fourth-order composite rule over nodes [i0, i1]. With at least 8 intervals
// this is the extended Simpson variant whose interior weights are all 1
// (end weights 17/48, 59/48, 43/48, 49/48). Unlike the alternating 4-2
// weights it does not alias smooth bumps a few dozen nodes wide, where the
// plain trapezoid sum is already spectrally accurate. Short ranges fall back
// to Simpson with a 3/8 panel.
inline double newton_cotes(std::span<const double> f, double h, std::size_t i0, std::size_t i1) {
  if (i1 <= i0) return 0.0;
  std::size_t m = i1 - i0;
  if (m == 1) return 0.5 * h * (f[i0] + f[i1]);
  if (m >= 8) {
    static constexpr double w[4] = {17.0 / 48, 59.0 / 48, 43.0 / 48, 49.0 / 48};
    double s = 0.0;
    for (std::size_t i = i0 + 4; i + 4 <= i1; ++i) s += f[i];
    for (std::size_t k = 0; k < 4; ++k) s += w[k] * (f[i0 + k] + f[i1 - k]);
    return s * h;
  }
  auto simpson = [&](std::size_t a, std::size_t b) {
    double s = f[a] + f[b];
    for (std::size_t i = a + 1; i < b; ++i) s += ((i - a) % 2 == 1 ? 4.0 : 2.0) * f[i];
    return s * h / 3.0;
  };
  auto three_eighths = [&](std::size_t a) {
    return 3.0 * h / 8.0 * (f[a] + 3.0 * f[a + 1] + 3.0 * f[a + 2] + f[a + 3]);
  };
  if (m % 2 == 0) return simpson(i0, i1);
  if (m == 3) return three_eighths(i0);
  return simpson(i0, i1 - 3) + three_eighths(i1 - 3);
}

// Running integral from node 0 using fourth-order cell rules (cubic through
// the four surrounding nodes, one-sided in the first and last cell).
inline std::vector<double> cumulative(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  if (n < 4) {
    for (std::size_t j = 1; j < n; ++j) out[j] = out[j - 1] + 0.5 * h * (f[j - 1] + f[j]);
    return out;
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    double cell;
    if (j == 0) cell = (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]) / 24.0;
    else if (j + 2 == n) cell = (9 * f[n - 1] + 19 * f[n - 2] - 5 * f[n - 3] + f[n - 4]) / 24.0;
    else cell = (-f[j - 1] + 13 * f[j] + 13 * f[j + 1] - f[j + 2]) / 24.0;
    out[j + 1] = out[j] + h * cell;
  }
  return out;
}

// Cubic Lagrange interpolation through the four nodes around t (in units of h
// from the first node). Exact node hits return the stored value.
inline double cubic_at(std::span<const double> f, double t) {
  const std::size_t n = f.size();
  double r = std::round(t);
  if (std::fabs(t - r) < 1e-12 && r >= 0 && r <= static_cast<double>(n - 1))
    return f[static_cast<std::size_t>(r)];
  if (n < 4) {
    // Linear fallback for tiny grids.
    std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(std::max(0.0, std::floor(t))), n - 2);
    double s = t - static_cast<double>(j);
    return (1 - s) * f[j] + s * f[j + 1];
  }
  long j = static_cast<long>(std::floor(t)) - 1;
  j = std::clamp<long>(j, 0, static_cast<long>(n) - 4);
  double s = t - static_cast<double>(j);
  double l0 = -(s - 1) * (s - 2) * (s - 3) / 6.0;
  double l1 = s * (s - 2) * (s - 3) / 2.0;
  double l2 = -s * (s - 1) * (s - 3) / 2.0;
  double l3 = s * (s - 1) * (s - 2) / 6.0;
  return l0 * f[j] + l1 * f[j + 1] + l2 * f[j + 2] + l3 * f[j + 3];
}

// Five-point central differences for callables.
template <class F>
double d1(F&& f, double x, double h) {
  return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}
template <class F>
double d2(F&& f, double x, double h) {
  return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h);
}

}  // namespace colvar::stencil
