#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "colvar/eps_grid.hpp"
#include "colvar/error.hpp"

namespace colvar {

namespace detail {
inline void require_finite(double v, double eps, const char* what) {
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os.precision(17);
    os << what << " is not finite at eps = " << eps;
    throw NonFinite(os.str());
  }
}
}  // namespace detail

// One real per epsilon: a representative (x_eps) of a generalized number.
class GenNumber {
 public:
  GenNumber(EpsGrid grid, std::vector<double> samples)
      : grid_(std::move(grid)), samples_(std::move(samples)) {
    if (samples_.size() != grid_.size())
      throw InvalidArgument("sample count does not match eps grid");
    for (std::size_t i = 0; i < samples_.size(); ++i)
      detail::require_finite(samples_[i], grid_[i], "sample");
  }

  static GenNumber constant(const EpsGrid& grid, double c) {
    return GenNumber(grid, std::vector<double>(grid.size(), c));
  }

  template <class Rule>
  static GenNumber sample(const EpsGrid& grid, Rule&& rule) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      v[i] = rule(grid[i]);
      detail::require_finite(v[i], grid[i], "rule value");
    }
    return GenNumber(grid, std::move(v));
  }

  const EpsGrid& grid() const { return grid_; }
  std::size_t size() const { return samples_.size(); }
  double operator[](std::size_t i) const { return samples_[i]; }
  std::span<const double> samples() const& { return samples_; }
  // Rvalue overload keeps `for (x : f().samples())` from dangling.
  std::vector<double> samples() && { return std::move(samples_); }
  double eps(std::size_t i) const { return grid_[i]; }

  GenNumber operator-() const {
    std::vector<double> v(samples_);
    for (double& x : v) x = -x;
    return GenNumber(grid_, std::move(v));
  }

  friend GenNumber operator+(const GenNumber& a, const GenNumber& b) {
    return zip(a, b, [](double x, double y) { return x + y; });
  }
  friend GenNumber operator-(const GenNumber& a, const GenNumber& b) {
    return zip(a, b, [](double x, double y) { return x - y; });
  }
  friend GenNumber operator*(const GenNumber& a, const GenNumber& b) {
    return zip(a, b, [](double x, double y) { return x * y; });
  }
  friend GenNumber operator/(const GenNumber& a, const GenNumber& b) {
    require_same_grid(a.grid_, b.grid_);
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (b.samples_[i] == 0.0) {
        std::ostringstream os;
        os.precision(17);
        os << "division by zero at eps = " << b.grid_[i];
        throw DomainError(os.str());
      }
    }
    return zip(a, b, [](double x, double y) { return x / y; });
  }
  friend GenNumber operator*(double c, const GenNumber& a) {
    return a.map([c](double x) { return c * x; });
  }

  template <class F>
  GenNumber map(F&& f) const {
    std::vector<double> v(samples_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(samples_[i]);
    return GenNumber(grid_, std::move(v));
  }

 private:
  template <class Op>
  static GenNumber zip(const GenNumber& a, const GenNumber& b, Op op) {
    require_same_grid(a.grid_, b.grid_);
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(a.samples_[i], b.samples_[i]);
    return GenNumber(a.grid_, std::move(v));
  }

  EpsGrid grid_;
  std::vector<double> samples_;
};

inline GenNumber gen_number(const EpsGrid& grid, const std::function<double(double)>& rule) {
  return GenNumber::sample(grid, rule);
}

inline GenNumber abs(const GenNumber& a) {
  return a.map([](double x) { return std::fabs(x); });
}

// alpha = 1 at even grid indices and 0 at odd ones, omega the complement.
// Their product is exactly zero while neither factor is negligible.
inline std::pair<GenNumber, GenNumber> make_zero_divisor_pair(const EpsGrid& grid) {
  std::vector<double> a(grid.size()), w(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    a[i] = (i % 2 == 0) ? 1.0 : 0.0;
    w[i] = 1.0 - a[i];
  }
  return {GenNumber(grid, std::move(a)), GenNumber(grid, std::move(w))};
}

// Fixed-dimension vector per epsilon.
class GenVector {
 public:
  GenVector(EpsGrid grid, std::vector<Eigen::VectorXd> samples)
      : grid_(std::move(grid)), samples_(std::move(samples)) {
    if (samples_.size() != grid_.size())
      throw InvalidArgument("sample count does not match eps grid");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (samples_[i].size() != samples_[0].size())
        throw InvalidArgument("GenVector dimension changes across eps");
      for (Eigen::Index j = 0; j < samples_[i].size(); ++j)
        detail::require_finite(samples_[i](j), grid_[i], "vector entry");
    }
  }
  const EpsGrid& grid() const { return grid_; }
  Eigen::Index dim() const { return samples_.front().size(); }
  const Eigen::VectorXd& operator[](std::size_t i) const { return samples_[i]; }

  GenNumber component(Eigen::Index j) const {
    std::vector<double> v(grid_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = samples_[i](j);
    return GenNumber(grid_, std::move(v));
  }
  // Per-epsilon Euclidean norm.
  GenNumber norm() const {
    std::vector<double> v(grid_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = samples_[i].norm();
    return GenNumber(grid_, std::move(v));
  }

 private:
  EpsGrid grid_;
  std::vector<Eigen::VectorXd> samples_;
};

// Symmetric matrix per epsilon.
class GenMatrix {
 public:
  static constexpr double kSymmetryTol = 1e-12;

  GenMatrix(EpsGrid grid, std::vector<Eigen::MatrixXd> samples)
      : grid_(std::move(grid)), samples_(std::move(samples)) {
    if (samples_.size() != grid_.size())
      throw InvalidArgument("sample count does not match eps grid");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const auto& m = samples_[i];
      if (m.rows() != m.cols() || m.rows() != samples_[0].rows())
        throw InvalidArgument("GenMatrix must be square with fixed size");
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
          detail::require_finite(m(r, c), grid_[i], "matrix entry");
      double scale = std::max(1e-300, m.cwiseAbs().maxCoeff());
      if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
        std::ostringstream os;
        os << "matrix not symmetric at eps = " << grid_[i];
        throw InvalidArgument(os.str());
      }
    }
  }
  const EpsGrid& grid() const { return grid_; }
  Eigen::Index dim() const { return samples_.front().rows(); }
  const Eigen::MatrixXd& operator[](std::size_t i) const { return samples_[i]; }

 private:
  EpsGrid grid_;
  std::vector<Eigen::MatrixXd> samples_;
};

}  // namespace colvar
