#ifndef DAMC_NOISE_SCHEDULE_HPP
#define DAMC_NOISE_SCHEDULE_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "damc/vec.hpp"

namespace damc {

// Noising SDE schedule. VP: dX = -(b(t)/2) X dt + volatility * sqrt(b(t)) dW
// with the linear ramp b(t) = beta_min + (beta_max - beta_min) t / T.
// VE: dX = g(t) dW with the geometric g-schedule, so S(t) = 1.
struct NoiseSchedule {
  enum class Kind { VP, VE };
  Kind kind = Kind::VP;

  // VP parameters
  double beta_min = 0.1;
  double beta_max = 20.0;
  double horizon = 1.0;  // T
  double volatility = 1.0;

  // VE parameters (horizon is 1)
  double sigma_min_sched = 1e-2;
  double sigma_max_sched = 10.0;

  static NoiseSchedule vp(double beta_min = 0.1, double beta_max = 20.0,
                          double horizon = 1.0, double volatility = 1.0) {
    if (!(0.0 < beta_min && beta_min < beta_max) || !(horizon > 0.0) || !(volatility > 0.0))
      throw std::invalid_argument("NoiseSchedule::vp: invalid parameters");
    NoiseSchedule s;
    s.kind = Kind::VP;
    s.beta_min = beta_min;
    s.beta_max = beta_max;
    s.horizon = horizon;
    s.volatility = volatility;
    return s;
  }

  static NoiseSchedule ve(double sigma_min, double sigma_max) {
    if (!(0.0 < sigma_min && sigma_min < sigma_max))
      throw std::invalid_argument("NoiseSchedule::ve: need 0 < sigma_min < sigma_max");
    NoiseSchedule s;
    s.kind = Kind::VE;
    s.horizon = 1.0;
    s.sigma_min_sched = sigma_min;
    s.sigma_max_sched = sigma_max;
    return s;
  }
};

// Coefficients of the schedule at time t.
//   S     = exp(int_0^t f), the interpolant scale
//   sigma = total noise std of the marginal (the "noise level" the time
//           grid is geometric in); the interpolant sigma is sigma / S
//   f     = drift coefficient, g2 = squared diffusion coefficient
//   alpha = int_0^t b(u) du (VP; 0 for VE)
struct ScheduleCoeffs {
  double S = 1.0;
  double sigma = 0.0;
  double f = 0.0;
  double g2 = 0.0;
  double alpha = 0.0;
};

inline double vp_alpha(const NoiseSchedule& s, double t) {
  return s.beta_min * t + (s.beta_max - s.beta_min) * t * t / (2.0 * s.horizon);
}

inline ScheduleCoeffs schedule_coeffs(const NoiseSchedule& s, double t) {
  if (t < 0.0 || t > s.horizon + 1e-12)
    throw std::invalid_argument("schedule_coeffs: t outside [0, T]");
  ScheduleCoeffs c;
  if (s.kind == NoiseSchedule::Kind::VP) {
    const double b = s.beta_min + (s.beta_max - s.beta_min) * t / s.horizon;
    c.alpha = vp_alpha(s, t);
    c.S = std::exp(-0.5 * c.alpha);
    c.sigma = s.volatility * std::sqrt(std::max(0.0, 1.0 - std::exp(-c.alpha)));
    c.f = -0.5 * b;
    c.g2 = s.volatility * s.volatility * b;
  } else {
    const double ratio2 = std::pow(s.sigma_max_sched / s.sigma_min_sched, 2.0 * t);
    const double log_ratio2 = 2.0 * std::log(s.sigma_max_sched / s.sigma_min_sched);
    c.alpha = 0.0;
    c.S = 1.0;
    c.sigma = s.sigma_min_sched * std::sqrt(std::max(0.0, ratio2 - 1.0));
    c.f = 0.0;
    c.g2 = s.sigma_min_sched * s.sigma_min_sched * ratio2 * log_ratio2;
  }
  return c;
}

inline double noise_level(const NoiseSchedule& s, double t) {
  return schedule_coeffs(s, t).sigma;
}

// Signal-to-noise ratio of the marginal at time t is S^2 / sigma^2; the time
// grid below is uniform in its log, i.e. geometric in the interpolant noise
// level sigma(t) / S(t).
inline double interpolant_sigma(const NoiseSchedule& s, double t) {
  const ScheduleCoeffs c = schedule_coeffs(s, t);
  return c.sigma / c.S;
}

// Annealing time grid t_0 < ... < t_K, log-SNR uniform. The sigma bounds are
// given in total-noise-std units (the sigma returned by schedule_coeffs) and
// converted internally; for VE the two coincide.
struct TimeGrid {
  std::vector<double> times;
  int K = 0;
  double sigma_min_grid = 0.0;
  double sigma_max_grid = 0.0;
};

namespace detail {

// Invert the interpolant noise level by bisection on [0, T]; it is
// increasing in t.
inline double invert_interpolant_sigma_bisect(const NoiseSchedule& s, double target,
                                              double tol = 1e-12) {
  double lo = 0.0, hi = s.horizon;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (interpolant_sigma(s, mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline double to_interpolant_units(const NoiseSchedule& s, double sigma_total) {
  if (s.kind == NoiseSchedule::Kind::VE) return sigma_total;
  const double vol2 = s.volatility * s.volatility;
  const double r2 = sigma_total * sigma_total;
  return std::sqrt(r2 / (1.0 - r2 / vol2));
}

}  // namespace detail

inline TimeGrid make_time_grid(const NoiseSchedule& s, int K, double sigma_min_grid,
                               double sigma_max_grid) {
  if (K < 1) throw std::invalid_argument("make_time_grid: K < 1");
  if (!(0.0 < sigma_min_grid && sigma_min_grid < sigma_max_grid))
    throw std::invalid_argument("make_time_grid: need 0 < sigma_min < sigma_max");
  // VE's explicit inverse puts sigma_max_sched a hair above sigma(T); allow
  // that much slack and clamp the resulting time to the horizon instead.
  const double sigma_T = noise_level(s, s.horizon);
  if (sigma_max_grid > sigma_T * (1.0 + 1e-6))
    throw std::invalid_argument("make_time_grid: sigma_max exceeds sigma(T)");

  TimeGrid grid;
  grid.K = K;
  grid.sigma_min_grid = sigma_min_grid;
  grid.sigma_max_grid = sigma_max_grid;
  grid.times.resize(K + 1);
  const double log_lo = std::log(detail::to_interpolant_units(s, sigma_min_grid));
  const double log_hi = std::log(detail::to_interpolant_units(s, sigma_max_grid));
  for (int k = 0; k <= K; ++k) {
    const double sig = std::exp(log_lo + (log_hi - log_lo) * k / K);
    if (s.kind == NoiseSchedule::Kind::VE) {
      // sigma^{-1} is explicit for the geometric VE schedule.
      const double log_ratio = std::log(s.sigma_max_sched / s.sigma_min_sched);
      const double u = sig / s.sigma_min_sched;
      grid.times[k] = std::log(u * u + 1.0) / (2.0 * log_ratio);
    } else {
      grid.times[k] = detail::invert_interpolant_sigma_bisect(s, sig);
    }
  }
  grid.times[K] = std::min(grid.times[K], s.horizon);
  for (int k = 0; k < K; ++k)
    if (!(grid.times[k] < grid.times[k + 1]))
      throw std::runtime_error("make_time_grid: non-monotone time grid");
  return grid;
}

}  // namespace damc

#endif
