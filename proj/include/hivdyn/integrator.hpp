#pragma once

// Adaptive Runge-Kutta-Verner 5(6) integrator for small nonstiff systems.
//
// The fifth-order solution is propagated and the embedded sixth-order
// solution is used only for the local error estimate. Integration is
// restarted at every breakpoint so that no step straddles a discontinuity
// of the right-hand side. Right-hand sides may optionally take the current
// breakpoint Segment as a third argument; stages evaluated at a segment
// endpoint then still know which side of the discontinuity they belong to.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include "hivdyn/errors.hpp"

namespace hivdyn {

template <std::size_t N>
using OdeState = std::array<double, N>;

// Interval between two consecutive breakpoints; end may be +inf.
struct Segment {
  double begin = 0.0;
  double end = std::numeric_limits<double>::infinity();

  // A point strictly inside the segment, usable to look up piecewise
  // constant inputs without ambiguity at the endpoints.
  double probe() const {
    if (std::isfinite(end)) return 0.5 * (begin + end);
    return begin + 1.0;
  }
};

struct IntegratorConfig {
  double rel_tol = 1e-6;
  double abs_tol = 1e-8;
  long max_steps = 200000;
  std::vector<double> breakpoints;  // strictly increasing

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
      throw DomainError("integrator tolerances must be positive");
    if (max_steps <= 0) throw DomainError("integrator step budget must be positive");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
      if (!(breakpoints[i] > breakpoints[i - 1]))
        throw DomainError("integrator breakpoints must be strictly increasing");
  }
};

struct IntegratorStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

template <std::size_t N>
struct Trajectory {
  std::vector<double> times;
  std::vector<OdeState<N>> states;
  IntegratorStats stats;
};

namespace detail {

// Verner's 5(6) pair as used in DVERK.
struct VernerTableau {
  static constexpr int stages = 8;
  static constexpr std::array<double, 8> c = {0.0,       1.0 / 6.0, 4.0 / 15.0, 2.0 / 3.0,
                                              5.0 / 6.0, 1.0,       1.0 / 15.0, 1.0};
  static constexpr std::array<std::array<double, 7>, 8> a = {{
      {0, 0, 0, 0, 0, 0, 0},
      {1.0 / 6.0, 0, 0, 0, 0, 0, 0},
      {4.0 / 75.0, 16.0 / 75.0, 0, 0, 0, 0, 0},
      {5.0 / 6.0, -8.0 / 3.0, 5.0 / 2.0, 0, 0, 0, 0},
      {-165.0 / 64.0, 55.0 / 6.0, -425.0 / 64.0, 85.0 / 96.0, 0, 0, 0},
      {12.0 / 5.0, -8.0, 4015.0 / 612.0, -11.0 / 36.0, 88.0 / 255.0, 0, 0},
      {-8263.0 / 15000.0, 124.0 / 75.0, -643.0 / 680.0, -81.0 / 250.0, 2484.0 / 10625.0, 0, 0},
      {3501.0 / 1720.0, -300.0 / 43.0, 297275.0 / 52632.0, -319.0 / 2322.0, 24068.0 / 84065.0,
       0, 3850.0 / 26703.0},
  }};
  static constexpr std::array<double, 8> b5 = {
      13.0 / 160.0, 0, 2375.0 / 5984.0, 5.0 / 16.0, 12.0 / 85.0, 3.0 / 44.0, 0, 0};
  static constexpr std::array<double, 8> b6 = {
      3.0 / 40.0, 0, 875.0 / 2244.0, 23.0 / 72.0, 264.0 / 1955.0, 0, 125.0 / 11592.0, 43.0 / 616.0};
};

template <std::size_t N, class Rhs>
OdeState<N> call_rhs(Rhs& rhs, double t, const OdeState<N>& y, const Segment& seg) {
  if constexpr (std::is_invocable_v<Rhs&, double, const OdeState<N>&, const Segment&>) {
    return rhs(t, y, seg);
  } else {
    return rhs(t, y);
  }
}

template <std::size_t N>
bool all_finite(const OdeState<N>& y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

// One Verner step; writes the fifth- and sixth-order solutions.
template <std::size_t N, class Rhs>
void verner_step(Rhs& rhs, double t, double h, const OdeState<N>& y, const Segment& seg,
                 OdeState<N>& y5, OdeState<N>& y6) {
  using T = VernerTableau;
  std::array<OdeState<N>, T::stages> k;
  for (int s = 0; s < T::stages; ++s) {
    OdeState<N> ys = y;
    for (int j = 0; j < s; ++j) {
      const double aij = T::a[s][j];
      if (aij == 0.0) continue;
      for (std::size_t i = 0; i < N; ++i) ys[i] += h * aij * k[j][i];
    }
    k[s] = call_rhs<N>(rhs, t + T::c[s] * h, ys, seg);
  }
  y5 = y;
  y6 = y;
  for (int s = 0; s < T::stages; ++s) {
    for (std::size_t i = 0; i < N; ++i) {
      y5[i] += h * T::b5[s] * k[s][i];
      y6[i] += h * T::b6[s] * k[s][i];
    }
  }
}

inline Segment segment_containing(const std::vector<double>& breakpoints, double t0, double t) {
  Segment seg{t0, std::numeric_limits<double>::infinity()};
  for (double bp : breakpoints) {
    if (bp <= t) {
      seg.begin = std::max(seg.begin, bp);
    } else {
      seg.end = bp;
      break;
    }
  }
  return seg;
}

}  // namespace detail

// Integrates y' = rhs(t, y) from times.front() and reports the state at each
// requested time. `times` must be nondecreasing.
template <std::size_t N, class Rhs>
Trajectory<N> integrate(Rhs&& rhs, const OdeState<N>& y0, const std::vector<double>& times,
                        const IntegratorConfig& config) {
  config.validate();
  Trajectory<N> out;
  if (times.empty()) return out;
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] < times[i - 1]) throw DomainError("output times must be nondecreasing");
  if (!detail::all_finite<N>(y0)) throw NonFiniteInputError("initial state is not finite");

  const double t0 = times.front();
  const double t_end = times.back();

  std::vector<double> stops;
  stops.reserve(times.size() + config.breakpoints.size());
  for (double bp : config.breakpoints)
    if (bp > t0 && bp < t_end) stops.push_back(bp);
  stops.insert(stops.end(), times.begin(), times.end());
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  out.times = times;
  out.states.resize(times.size());

  double t = t0;
  OdeState<N> y = y0;
  std::size_t next_out = 0;
  while (next_out < times.size() && times[next_out] == t0) out.states[next_out++] = y;

  double h = std::min(0.05, std::max(t_end - t0, 1e-3));
  long steps = 0;
  OdeState<N> y5, y6;

  for (double stop : stops) {
    if (stop <= t) continue;
    const Segment seg = detail::segment_containing(config.breakpoints, t0, t);
    while (t < stop) {
      double h_try = std::min(h, stop - t);
      bool lands = h_try >= stop - t;
      if (!lands && stop - (t + h_try) < 1e-10 * std::max(1.0, std::abs(stop))) {
        h_try = stop - t;
        lands = true;
      }
      if (++steps > config.max_steps)
        throw ConvergenceError("integrator step budget exhausted at t=" + std::to_string(t));

      detail::verner_step<N>(rhs, t, h_try, y, seg, y5, y6);
      out.stats.rhs_evals += detail::VernerTableau::stages;

      double err = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double scale =
            config.abs_tol + config.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
        err = std::max(err, std::abs(y6[i] - y5[i]) / scale);
      }

      if (!std::isfinite(err)) {
        ++out.stats.rejected;
        h = 0.1 * h_try;
      } else if (err <= 1.0) {
        if (!detail::all_finite<N>(y5))
          throw DivergenceError("non-finite state at t=" + std::to_string(t + h_try));
        t = lands ? stop : t + h_try;
        y = y5;
        ++out.stats.accepted;
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -1.0 / 6.0), 0.2, 5.0);
        h = std::max(h, h_try * fac);
        if (!lands) h = h_try * fac;
      } else {
        ++out.stats.rejected;
        h = h_try * std::clamp(0.9 * std::pow(err, -1.0 / 6.0), 0.1, 0.9);
      }
      if (h < 1e-12 * std::max(1.0, std::abs(t)))
        throw ConvergenceError("step size underflow at t=" + std::to_string(t));
    }
    while (next_out < times.size() && times[next_out] == stop) out.states[next_out++] = y;
  }
  return out;
}

// Non-adaptive fifth-order Verner integration with `n_steps` equal steps.
// Reference variant used for order-of-convergence checks.
template <std::size_t N, class Rhs>
OdeState<N> integrate_fixed_step(Rhs&& rhs, const OdeState<N>& y0, double t0, double t1,
                                 long n_steps) {
  if (n_steps <= 0) throw DomainError("fixed-step integration needs at least one step");
  const double h = (t1 - t0) / static_cast<double>(n_steps);
  const Segment seg{t0, t1};
  OdeState<N> y = y0, y5, y6;
  for (long s = 0; s < n_steps; ++s) {
    detail::verner_step<N>(rhs, t0 + static_cast<double>(s) * h, h, y, seg, y5, y6);
    y = y5;
  }
  return y;
}

}  // namespace hivdyn
