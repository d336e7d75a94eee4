#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "colvar/error.hpp"

namespace colvar {

enum class Spacing { Geometric, Explicit };

// Finite sample of the regularization index set (0, 1]. Values are strictly
// decreasing, so "the tail" (small epsilon) is always at the back.
class EpsGrid {
 public:
  // Smallest ratio e_max / e_min accepted. 2^6 is just under two decades; it
  // admits the dyadic grids used by the ODE scenarios.
  static constexpr double kMinSpan = 64.0;

  static EpsGrid geometric(double e_min, double e_max, std::size_t count) {
    if (!(e_min > 0.0) || !(e_max <= 1.0) || !(e_min < e_max))
      throw InvalidArgument("eps grid needs 0 < e_min < e_max <= 1");
    if (count < 4) throw InvalidArgument("eps grid needs at least 4 values");
    std::vector<double> v(count);
    double ratio = std::pow(e_min / e_max, 1.0 / static_cast<double>(count - 1));
    for (std::size_t k = 0; k < count; ++k)
      v[k] = e_max * std::pow(ratio, static_cast<double>(k));
    v.front() = e_max;
    v.back() = e_min;
    return EpsGrid(std::move(v), Spacing::Geometric);
  }

  static EpsGrid from_values(std::vector<double> values) {
    return EpsGrid(std::move(values), Spacing::Explicit);
  }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  Spacing spacing() const { return spacing_; }
  double min() const { return values_.back(); }
  double max() const { return values_.front(); }

  // The tail is the smallest ceil(n/2) values: indices [tail_begin(), size()).
  std::size_t tail_begin() const { return size() - (size() + 1) / 2; }
  std::size_t tail_size() const { return (size() + 1) / 2; }

  bool operator==(const EpsGrid& o) const { return values_ == o.values_; }

 private:
  EpsGrid(std::vector<double> v, Spacing s) : values_(std::move(v)), spacing_(s) {
    if (values_.size() < 4) throw InvalidArgument("eps grid needs at least 4 values");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      double e = values_[i];
      if (!(e > 0.0 && e <= 1.0)) {
        std::ostringstream os;
        os << "eps value " << e << " outside (0, 1]";
        throw InvalidArgument(os.str());
      }
      if (i > 0 && !(e < values_[i - 1]))
        throw InvalidArgument("eps grid must be strictly decreasing");
    }
    if (values_.front() / values_.back() < kMinSpan * (1.0 - 1e-12))
      throw InvalidArgument("eps grid spans too few decades");
  }

  std::vector<double> values_;
  Spacing spacing_;
};

inline EpsGrid make_eps_grid(double e_min, double e_max, int count) {
  if (count < 4) throw InvalidArgument("eps grid needs at least 4 values");
  return EpsGrid::geometric(e_min, e_max, static_cast<std::size_t>(count));
}

inline void require_same_grid(const EpsGrid& a, const EpsGrid& b) {
  if (!(a == b)) throw GridMismatch("operands live on different eps grids");
}

}  // namespace colvar
