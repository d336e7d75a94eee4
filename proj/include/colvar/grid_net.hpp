#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "colvar/eps_grid.hpp"
#include "colvar/error.hpp"
#include "colvar/gen_number.hpp"
#include "colvar/parallel.hpp"
#include "colvar/stencil.hpp"

namespace colvar {

// Uniform nodes on [a, b].
class SpatialGrid {
 public:
  // Per-epsilon node cap; beyond this a feature of width eps is unresolvable.
  static constexpr std::size_t kNodeCap = 2'000'000;
  // Required ratio between feature width and step.
  static constexpr double kRefine = 16.0;

  SpatialGrid(double a, double b, std::size_t n) : a_(a), b_(b), n_(n) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
      throw InvalidArgument("spatial grid needs a finite interval a < b");
    if (n < 2) throw InvalidArgument("spatial grid needs at least 2 nodes");
    if (n > kNodeCap) throw Unresolved("spatial grid exceeds the node cap");
    h_ = (b - a) / static_cast<double>(n - 1);
  }

  // Odd node count, at least min_nodes, with h <= width / refine.
  static SpatialGrid resolving(double a, double b, double width, std::size_t min_nodes = 201,
                               double refine = kRefine) {
    double need = std::ceil((b - a) * refine / width) + 1.0;
    if (!(need < static_cast<double>(kNodeCap))) {
      std::ostringstream os;
      os << "feature width " << width << " cannot be resolved on [" << a << ", " << b
         << "] under the node cap";
      throw Unresolved(os.str());
    }
    std::size_t n = std::max<std::size_t>(min_nodes, static_cast<std::size_t>(need));
    if (n % 2 == 0) ++n;
    return SpatialGrid(a, b, n);
  }

  double a() const { return a_; }
  double b() const { return b_; }
  std::size_t size() const { return n_; }
  double h() const { return h_; }
  double node(std::size_t i) const { return i + 1 == n_ ? b_ : a_ + h_ * static_cast<double>(i); }
  bool contains(double x) const { return x >= a_ - 1e-12 * h_ && x <= b_ + 1e-12 * h_; }
  bool operator==(const SpatialGrid& o) const { return a_ == o.a_ && b_ == o.b_ && n_ == o.n_; }

 private:
  double a_, b_;
  std::size_t n_;
  double h_;
};

// Per-epsilon grid functions: a representative (u_eps) of a generalized
// function. The spatial grid may differ between epsilons. `feature_width`
// records the narrowest feature each slice was built to resolve, if any.
class GridNet {
 public:
  GridNet(EpsGrid grid, std::vector<SpatialGrid> spatial, std::vector<std::vector<double>> values,
          std::optional<std::vector<double>> feature_width = std::nullopt)
      : grid_(std::move(grid)),
        spatial_(std::move(spatial)),
        values_(std::move(values)),
        feature_(std::move(feature_width)) {
    if (spatial_.size() != grid_.size() || values_.size() != grid_.size())
      throw InvalidArgument("GridNet slices do not match the eps grid");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (values_[i].size() != spatial_[i].size())
        throw InvalidArgument("GridNet slice length does not match its spatial grid");
      for (double v : values_[i]) detail::require_finite(v, grid_[i], "grid value");
    }
    if (feature_ && feature_->size() != grid_.size())
      throw InvalidArgument("feature widths do not match the eps grid");
  }

  // Samples f(eps, x) on spatial_for(eps).
  template <class SpatialRule, class F>
  static GridNet sample(const EpsGrid& grid, SpatialRule&& spatial_for, F&& f,
                        std::optional<std::vector<double>> feature_width = std::nullopt) {
    std::vector<SpatialGrid> sp;
    sp.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) sp.push_back(spatial_for(grid[i]));
    auto vals = parallel_map<std::vector<double>>(grid.size(), [&](std::size_t i) {
      std::vector<double> v(sp[i].size());
      for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(grid[i], sp[i].node(j));
      return v;
    });
    return GridNet(grid, std::move(sp), std::move(vals), std::move(feature_width));
  }

  // Same spatial grid for every epsilon.
  template <class F>
  static GridNet sample_on(const EpsGrid& grid, const SpatialGrid& spatial, F&& f) {
    return sample(grid, [&](double) { return spatial; }, std::forward<F>(f));
  }

  const EpsGrid& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }
  const SpatialGrid& spatial(std::size_t i) const { return spatial_[i]; }
  std::span<const double> values(std::size_t i) const { return values_[i]; }
  const std::optional<std::vector<double>>& feature_width() const { return feature_; }
  double a() const { return spatial_.front().a(); }
  double b() const { return spatial_.front().b(); }

  // Same structure, new values.
  GridNet with_values(std::vector<std::vector<double>> values) const {
    return GridNet(grid_, spatial_, std::move(values), feature_);
  }

  template <class F>
  GridNet map(F&& f) const {
    auto v = values_;
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v[i].size(); ++j) v[i][j] = f(grid_[i], spatial_[i].node(j), v[i][j]);
    return with_values(std::move(v));
  }

  friend GridNet operator+(const GridNet& a, const GridNet& b) {
    return zip(a, b, [](double x, double y) { return x + y; });
  }
  friend GridNet operator-(const GridNet& a, const GridNet& b) {
    return zip(a, b, [](double x, double y) { return x - y; });
  }
  friend GridNet operator*(const GridNet& a, const GridNet& b) {
    return zip(a, b, [](double x, double y) { return x * y; });
  }
  friend GridNet operator/(const GridNet& a, const GridNet& b) {
    for (std::size_t i = 0; i < b.size(); ++i)
      for (double v : b.values_[i])
        if (v == 0.0) {
          std::ostringstream os;
          os << "division by zero at eps = " << b.grid_[i];
          throw DomainError(os.str());
        }
    return zip(a, b, [](double x, double y) { return x / y; });
  }
  // Scales slice i by s[i].
  friend GridNet operator*(const GenNumber& s, const GridNet& u) {
    require_same_grid(s.grid(), u.grid_);
    auto v = u.values_;
    for (std::size_t i = 0; i < v.size(); ++i)
      for (double& x : v[i]) x *= s[i];
    return u.with_values(std::move(v));
  }

 private:
  template <class Op>
  static GridNet zip(const GridNet& a, const GridNet& b, Op op) {
    require_same_grid(a.grid_, b.grid_);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!(a.spatial_[i] == b.spatial_[i]))
        throw GridMismatch("GridNet operands use different spatial grids");
    auto v = a.values_;
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v[i].size(); ++j) v[i][j] = op(v[i][j], b.values_[i][j]);
    return GridNet(a.grid_, a.spatial_, std::move(v), a.feature_ ? a.feature_ : b.feature_);
  }

  EpsGrid grid_;
  std::vector<SpatialGrid> spatial_;
  std::vector<std::vector<double>> values_;
  std::optional<std::vector<double>> feature_;
};

enum class PointKind { Classical, NearStandard, General };

// One point of the domain per epsilon.
class GenPoint {
 public:
  static constexpr double kNearStandardTol = 0.1;

  GenPoint(EpsGrid grid, std::vector<std::vector<double>> coords, PointKind kind,
           std::optional<std::vector<double>> limit = std::nullopt)
      : grid_(std::move(grid)), coords_(std::move(coords)), kind_(kind), limit_(std::move(limit)) {
    if (coords_.size() != grid_.size()) throw InvalidArgument("coords do not match the eps grid");
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      if (coords_[i].size() != coords_[0].size()) throw InvalidArgument("point dimension varies");
      for (double c : coords_[i]) detail::require_finite(c, grid_[i], "coordinate");
    }
    if (kind_ == PointKind::Classical) {
      for (const auto& c : coords_)
        if (c != coords_[0]) throw InvalidArgument("classical point must be eps-independent");
      limit_ = coords_[0];
    }
    if (kind_ == PointKind::NearStandard) {
      if (!limit_ || limit_->size() != coords_[0].size())
        throw InvalidArgument("near-standard point needs a limit of matching dimension");
      if (!converges(coords_, *limit_))
        throw InvariantViolation("near-standard point does not approach its declared limit");
    }
  }

  static GenPoint classical(const EpsGrid& grid, std::vector<double> x) {
    return GenPoint(grid, std::vector<std::vector<double>>(grid.size(), std::move(x)), PointKind::Classical);
  }
  static GenPoint classical(const EpsGrid& grid, double x) { return classical(grid, std::vector<double>{x}); }

  // Scalar point from a rule; kind is NearStandard when a limit is given.
  template <class Rule>
  static GenPoint scalar(const EpsGrid& grid, Rule&& rule, std::optional<double> limit = std::nullopt) {
    std::vector<std::vector<double>> c(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) c[i] = {rule(grid[i])};
    if (limit) return GenPoint(grid, std::move(c), PointKind::NearStandard, std::vector<double>{*limit});
    return GenPoint(grid, std::move(c), PointKind::General);
  }

  // Near-standard if the coordinates pass the convergence check, else general.
  static GenPoint infer(const EpsGrid& grid, std::vector<std::vector<double>> coords,
                        std::vector<double> limit) {
    if (converges(coords, limit))
      return GenPoint(grid, std::move(coords), PointKind::NearStandard, std::move(limit));
    return GenPoint(grid, std::move(coords), PointKind::General);
  }

  const EpsGrid& grid() const { return grid_; }
  PointKind kind() const { return kind_; }
  const std::optional<std::vector<double>>& limit() const { return limit_; }
  std::size_t dim() const { return coords_.front().size(); }
  const std::vector<double>& coords(std::size_t i) const { return coords_[i]; }
  double x(std::size_t i) const { return coords_[i][0]; }

 private:
  // Deviation from the limit at the two smallest eps must be at most 10% of
  // max(1, |limit|).
  static bool converges(const std::vector<std::vector<double>>& c, const std::vector<double>& lim) {
    for (std::size_t k = c.size() >= 2 ? c.size() - 2 : 0; k < c.size(); ++k)
      for (std::size_t d = 0; d < lim.size(); ++d)
        if (std::fabs(c[k][d] - lim[d]) > kNearStandardTol * std::max(1.0, std::fabs(lim[d])))
          return false;
    return true;
  }

  EpsGrid grid_;
  std::vector<std::vector<double>> coords_;
  PointKind kind_;
  std::optional<std::vector<double>> limit_;
};

// Cubic interpolation of one slice at x.
inline double interpolate(const SpatialGrid& g, std::span<const double> v, double x) {
  if (!g.contains(x)) {
    std::ostringstream os;
    os.precision(17);
    os << "point " << x << " outside [" << g.a() << ", " << g.b() << "]";
    throw DomainError(os.str());
  }
  return stencil::cubic_at(v, (x - g.a()) / g.h());
}

inline GenNumber eval_at(const GridNet& net, const GenPoint& p) {
  require_same_grid(net.grid(), p.grid());
  std::vector<double> v(net.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = interpolate(net.spatial(i), net.values(i), p.x(i));
  return GenNumber(net.grid(), std::move(v));
}

}  // namespace colvar
