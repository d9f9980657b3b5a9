#ifndef DAMC_KERNELS_HPP
#define DAMC_KERNELS_HPP

#include <cmath>
#include <stdexcept>

#include "damc/noise_schedule.hpp"
#include "damc/rng.hpp"
#include "damc/vec.hpp"

namespace damc {

// Gaussian transition kernel N(mean_coeff * x + drift_shift, diag(variance)).
// drift_shift empty means zero; variance of size 1 is isotropic.
struct GaussianKernelParams {
  double mean_coeff = 1.0;
  Vec drift_shift;
  Vec variance{0.0};
};

inline double kernel_variance_at(const GaussianKernelParams& k, int j) {
  return k.variance.size() == 1 ? k.variance[0] : k.variance[j];
}

inline Vec kernel_mean(const GaussianKernelParams& k, const Vec& x) {
  Vec m(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    m[j] = k.mean_coeff * x[j];
    if (!k.drift_shift.empty()) m[j] += k.drift_shift[j];
  }
  return m;
}

inline Vec kernel_sample(const GaussianKernelParams& k, const Vec& x, Rng& rng) {
  Vec y = kernel_mean(k, x);
  for (std::size_t j = 0; j < y.size(); ++j)
    y[j] += std::sqrt(kernel_variance_at(k, static_cast<int>(j))) * rng.normal();
  return y;
}

// log density of y under the kernel conditioned on x.
inline double kernel_log_pdf(const GaussianKernelParams& k, const Vec& y, const Vec& x) {
  const Vec m = kernel_mean(k, x);
  double q = 0.0, ln = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double v = kernel_variance_at(k, static_cast<int>(j));
    const double d = y[j] - m[j];
    q += d * d / v;
    ln += std::log(v);
  }
  return -0.5 * (static_cast<double>(y.size()) * kLog2Pi + ln + q);
}

// Exact noising kernel q_{t|s}: N(alpha_{t|s} x_s, sigma2_{t|s} I) with
// alpha_{t|s} = S(t)/S(s) and sigma2_{t|s} = sigma(t)^2 - alpha^2 sigma(s)^2
// in total-noise-std terms.
inline GaussianKernelParams noising_kernel(const NoiseSchedule& sched, double s, double t) {
  if (!(s < t)) throw std::invalid_argument("noising_kernel: need s < t");
  const ScheduleCoeffs cs = schedule_coeffs(sched, s);
  const ScheduleCoeffs ct = schedule_coeffs(sched, t);
  GaussianKernelParams k;
  k.mean_coeff = ct.S / cs.S;
  k.variance = {ct.sigma * ct.sigma - k.mean_coeff * k.mean_coeff * cs.sigma * cs.sigma};
  return k;
}

// First-order EI denoising kernel, conditioned at x_t with the level score
// evaluated there. VP: N(sqrt(1+lam_b) x + 2 vol^2 (sqrt(1+lam_b)-1) score,
// vol^2 lam_b I) with lam_b = exp(alpha_t - alpha_s) - 1. VE: the drift is
// lam * score with variance lam, lam = sigma(t)^2 - sigma(s)^2.
inline GaussianKernelParams denoising_kernel_first_order(const NoiseSchedule& sched,
                                                         double s, double t, const Vec& x_t,
                                                         const Vec& score_value) {
  if (!(s < t)) throw std::invalid_argument("denoising_kernel_first_order: need s < t");
  GaussianKernelParams k;
  if (sched.kind == NoiseSchedule::Kind::VP) {
    const double a_s = vp_alpha(sched, s), a_t = vp_alpha(sched, t);
    const double vol2 = sched.volatility * sched.volatility;
    const double cb = std::exp(0.5 * (a_t - a_s));  // sqrt(1 + lam_b)
    k.mean_coeff = cb;
    k.drift_shift.resize(x_t.size());
    for (std::size_t j = 0; j < x_t.size(); ++j)
      k.drift_shift[j] = 2.0 * vol2 * (cb - 1.0) * score_value[j];
    k.variance = {vol2 * (cb * cb - 1.0)};
  } else {
    const ScheduleCoeffs cs = schedule_coeffs(sched, s);
    const ScheduleCoeffs ct = schedule_coeffs(sched, t);
    const double lam = ct.sigma * ct.sigma - cs.sigma * cs.sigma;
    k.mean_coeff = 1.0;
    k.drift_shift.resize(x_t.size());
    for (std::size_t j = 0; j < x_t.size(); ++j) k.drift_shift[j] = lam * score_value[j];
    k.variance = {lam};
  }
  return k;
}

// Skip-step DDPM kernel from the second-order Tweedie expansion:
//   mean = (x_t + sigma2_{t|s} score) / alpha_{t|s}
//   var  = sigma2_{t|s} (1 + sigma2_{t|s} hess_diag) / alpha_{t|s}^2.
// Throws if any variance entry is non-positive (step too large for the
// curvature at x_t).
inline GaussianKernelParams denoising_kernel_second_order(const NoiseSchedule& sched,
                                                          double s, double t, const Vec& x_t,
                                                          const Vec& score_value,
                                                          const Vec& hess_diag_value) {
  if (!(s < t)) throw std::invalid_argument("denoising_kernel_second_order: need s < t");
  const GaussianKernelParams fwd = noising_kernel(sched, s, t);
  const double a = fwd.mean_coeff, s2 = fwd.variance[0];
  GaussianKernelParams k;
  k.mean_coeff = 1.0 / a;
  k.drift_shift.resize(x_t.size());
  k.variance.resize(x_t.size());
  for (std::size_t j = 0; j < x_t.size(); ++j) {
    k.drift_shift[j] = s2 * score_value[j] / a;
    const double v = s2 * (1.0 + s2 * hess_diag_value[j]) / (a * a);
    if (!(v > 0.0))
      throw std::runtime_error("DDPM covariance not positive; reduce step size");
    k.variance[j] = v;
  }
  return k;
}

}  // namespace damc

#endif
