#pragma once

// Adaptive Dormand-Prince 5(4) for Eigen dense states (vectors or matrices).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>

#include "wgqed/types.hpp"

namespace wgqed {

struct IntegratorSettings {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  // 0 picks a step from the initial derivative
  std::size_t max_steps = 20'000'000;
};

void validate(const IntegratorSettings& s);

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
  double last_step = 0.0;
};

namespace detail {

template <typename State>
double error_norm(const State& err, const State& y0, const State& y1, double atol, double rtol) {
  const auto scale = (atol + rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array());
  const double sq = (err.cwiseAbs().array() / scale).square().sum();
  return std::sqrt(sq / static_cast<double>(err.size()));
}

}  // namespace detail

// Integrates dy/dt = f(t, y) from t0 through the increasing times `stops`.
// `f(t, y, dydt)` writes the derivative. After each accepted step
// `on_step(t, y)` may inspect or touch up y and returns true if it modified
// it; `on_stop(k, t, y)` fires exactly at stops[k]. Steps never cross a stop.
template <typename State, typename Rhs, typename OnStep, typename OnStop>
IntegrationStats integrate_dopri5(Rhs&& f, State& y, double t0, std::span<const double> stops,
                                  const IntegratorSettings& settings, OnStep&& on_step,
                                  OnStop&& on_stop) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  validate(settings);
  IntegrationStats stats;
  if (stops.empty()) return stats;

  State k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, err;
  k1.resizeLike(y);
  f(t0, y, k1);
  ++stats.rhs_evals;

  double t = t0;
  double h = settings.initial_step;
  if (!(h > 0)) {
    const double d0 = y.norm();
    const double d1 = k1.norm();
    h = (d0 > 1e-5 && d1 > 1e-5) ? 0.01 * d0 / d1 : 1e-6 * std::max(1.0, std::abs(stops.back() - t0));
    h = std::max(h, 1e-300);
  }
  h = std::min(h, settings.max_step);

  for (std::size_t k = 0; k < stops.size(); ++k) {
    const double target = stops[k];
    if (target < t) throw ModelError("integration stops must be increasing");
    while (t < target) {
      if (stats.accepted + stats.rejected >= settings.max_steps) {
        throw NumericalError("integrator exceeded " + std::to_string(settings.max_steps) + " steps");
      }
      const double remaining = target - t;
      const bool clamped = h >= remaining;
      const double hs = clamped ? remaining : h;

      ytmp = y + hs * a21 * k1;
      f(t + c2 * hs, ytmp, k2);
      ytmp = y + hs * (a31 * k1 + a32 * k2);
      f(t + c3 * hs, ytmp, k3);
      ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
      f(t + c4 * hs, ytmp, k4);
      ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      f(t + c5 * hs, ytmp, k5);
      ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      f(t + hs, ytmp, k6);
      ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      f(t + hs, ynew, k7);
      stats.rhs_evals += 6;
      err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      const double en = detail::error_norm(err, y, ynew, settings.abs_tol, settings.rel_tol);
      if (!std::isfinite(en)) throw NumericalError("integrator produced non-finite values");
      const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      if (en <= 1.0) {
        t = clamped ? target : t + hs;
        y.swap(ynew);
        k1.swap(k7);
        ++stats.accepted;
        stats.last_step = hs;
        if (on_step(t, y)) {
          f(t, y, k1);
          ++stats.rhs_evals;
        }
        // A clamped step says nothing about the natural step size.
        h = clamped ? std::max(h, hs * factor) : hs * factor;
      } else {
        ++stats.rejected;
        h = hs * std::max(factor, 0.1);
      }
      h = std::min(h, settings.max_step);
      if (h < 1e-14 * std::max(std::abs(t), 1e-12) || h < 1e-300) {
        throw NumericalError("step size underflow at t = " + std::to_string(t));
      }
    }
    on_stop(k, t, y);
  }
  return stats;
}

}  // namespace wgqed
