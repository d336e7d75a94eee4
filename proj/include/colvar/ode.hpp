#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "colvar/error.hpp"

namespace colvar::ode {

using State = std::vector<double>;
using Rhs = std::function<void(const State& y, State& dydt, double t)>;

struct Options {
  double atol = 1e-10;
  double rtol = 1e-10;
  double initial_step = 1e-3;
  // Upper bound on the step at (t, y); e.g. eps/8 while a delta force is felt.
  std::function<double(double t, const State& y)> max_step;
  // Returning true ends the run early (truncated = true) at the current step.
  std::function<bool(double t, const State& y)> stop;
  std::size_t max_steps = 50'000'000;
};

struct Solution {
  std::vector<double> t;
  std::vector<State> y;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  bool truncated = false;
};

// Adaptive Dormand-Prince 5(4) with states recorded at `outputs` (increasing,
// first entry is the initial time). Steps are clipped so every output time is
// hit exactly. Fehlberg 7(8) was dropped: its error estimate only weighs the
// end stages, so a step that jumps over a force supported strictly inside it
// is accepted with zero estimated error.
inline Solution integrate(const Rhs& f, State y, const std::vector<double>& outputs, const Options& opt = {}) {
  namespace oi = boost::numeric::odeint;
  if (outputs.empty()) throw InvalidArgument("no output times");
  auto stepper = oi::make_controlled(opt.atol, opt.rtol, oi::runge_kutta_dopri5<State>());
  auto sys = [&f](const State& x, State& dx, double t) { f(x, dx, t); };

  Solution s;
  double t = outputs.front(), dt = opt.initial_step;
  s.t.push_back(t);
  s.y.push_back(y);
  for (std::size_t k = 1; k < outputs.size(); ++k) {
    double target = outputs[k];
    if (!(target > t)) throw InvalidArgument("output times must increase");
    while (t < target) {
      double h = std::min(dt, target - t);
      if (opt.max_step) h = std::min(h, opt.max_step(t, y));
      if (!(h > 0.0)) throw IntegrationFailure("step size collapsed at t = " + std::to_string(t));
      bool clipped = h < dt;
      if (stepper.try_step(sys, y, t, h) == oi::success) {
        ++s.accepted;
        // A clipped step says little about the natural step size; keep the larger.
        dt = clipped ? std::max(dt, h) : h;
      } else {
        ++s.rejected;
        dt = h;
      }
      if (s.accepted + s.rejected > opt.max_steps) throw IntegrationFailure("step budget exhausted");
      for (double v : y)
        if (!std::isfinite(v)) throw IntegrationFailure("non-finite state at t = " + std::to_string(t));
      if (opt.stop && opt.stop(t, y)) {
        s.t.push_back(t);
        s.y.push_back(y);
        s.truncated = true;
        return s;
      }
    }
    t = target;
    s.t.push_back(t);
    s.y.push_back(y);
  }
  return s;
}

// n + 1 evenly spaced times on [t0, t1].
inline std::vector<double> linspace(double t0, double t1, std::size_t n) {
  std::vector<double> v(n + 1);
  for (std::size_t i = 0; i <= n; ++i) v[i] = i == n ? t1 : t0 + (t1 - t0) * static_cast<double>(i) / n;
  return v;
}

}  // namespace colvar::ode
