#ifndef DAMC_TRANSPORT_HPP
#define DAMC_TRANSPORT_HPP

#include <cmath>
#include <functional>
#include <stdexcept>

#include "damc/kernels.hpp"
#include "damc/noise_schedule.hpp"
#include "damc/oracle.hpp"
#include "damc/rng.hpp"
#include "damc/vec.hpp"

namespace damc {

enum class OdeDirection { Forward, Backward };

// EI integrates the linear drift exactly and freezes the score coefficient;
// Euler is kept for step-order comparisons.
enum class OdeScheme { ExponentialIntegrator, Euler };

struct MapResult {
  Vec point;
  int iterations_used = 0;
  bool converged = false;
};

namespace detail {

// Per-step multipliers of the one-step maps. EI/VP: the forward map is
// x -> cf x + vol^2 (cf - 1) score, cf = exp((alpha_s - alpha_t)/2); the
// backward map has cb = 1/cf. EI/VE: x -> x -/+ (lam/2) score.
struct StepForm {
  double lin_fwd = 1.0;     // multiplier of x in the forward map
  double lin_bwd = 1.0;     // multiplier of x in the backward map
  double score_fwd = 0.0;   // coefficient of the score term, forward
  double score_bwd = 0.0;   // coefficient of the score term, backward
};

inline StepForm step_form(const NoiseSchedule& sched, double s, double t) {
  StepForm w;
  if (sched.kind == NoiseSchedule::Kind::VP) {
    const double vol2 = sched.volatility * sched.volatility;
    const double cf = std::exp(0.5 * (vp_alpha(sched, s) - vp_alpha(sched, t)));
    w.lin_fwd = cf;
    w.lin_bwd = 1.0 / cf;
    w.score_fwd = vol2 * (cf - 1.0);
    w.score_bwd = vol2 * (1.0 / cf - 1.0);
  } else {
    const ScheduleCoeffs cs = schedule_coeffs(sched, s);
    const ScheduleCoeffs ct = schedule_coeffs(sched, t);
    const double lam = ct.sigma * ct.sigma - cs.sigma * cs.sigma;
    w.score_fwd = -0.5 * lam;
    w.score_bwd = 0.5 * lam;
  }
  return w;
}

}  // namespace detail

// One explicit integration step of the PF-ODE between times s < t. The score
// function must be the level score at the starting endpoint (time s when
// integrating forward, time t when integrating backward).
inline Vec explicit_ode_map(const NoiseSchedule& sched, double s, double t,
                            OdeDirection dir, const Vec& x,
                            const std::function<Vec(const Vec&)>& score_fn,
                            OdeScheme scheme = OdeScheme::ExponentialIntegrator) {
  if (!(s < t)) throw std::invalid_argument("explicit_ode_map: need s < t");
  const Vec sc = score_fn(x);
  Vec y(x.size());
  if (scheme == OdeScheme::Euler) {
    // Explicit Euler uses endpoint-time coefficients, not midpoint ones.
    const double delta = t - s;
    const ScheduleCoeffs c = schedule_coeffs(sched, dir == OdeDirection::Forward ? s : t);
    const double sgn = dir == OdeDirection::Forward ? 1.0 : -1.0;
    for (std::size_t j = 0; j < x.size(); ++j)
      y[j] = x[j] + sgn * delta * (c.f * x[j] - 0.5 * c.g2 * sc[j]);
    return y;
  }
  const detail::StepForm w = detail::step_form(sched, s, t);
  const double lin = dir == OdeDirection::Forward ? w.lin_fwd : w.lin_bwd;
  const double sco = dir == OdeDirection::Forward ? w.score_fwd : w.score_bwd;
  for (std::size_t j = 0; j < x.size(); ++j) y[j] = lin * x[j] + sco * sc[j];
  return y;
}

// Implicit-midpoint transport map solved by fixed-point iteration. The score
// function must be the level score at the midpoint time (s+t)/2; it is
// evaluated at the midpoint of the input and the current iterate.
// Non-convergence within M iterations is reported, not thrown.
inline MapResult implicit_midpoint_map(const NoiseSchedule& sched, double s, double t,
                                       OdeDirection dir, const Vec& x,
                                       const std::function<Vec(const Vec&)>& score_mid,
                                       int max_iters, double tol,
                                       OdeScheme scheme = OdeScheme::ExponentialIntegrator) {
  if (!(s < t)) throw std::invalid_argument("implicit_midpoint_map: need s < t");
  if (max_iters < 1 || !(tol > 0.0))
    throw std::invalid_argument("implicit_midpoint_map: need M >= 1 and tol > 0");
  double lin = 1.0, sco = 0.0;
  if (scheme == OdeScheme::ExponentialIntegrator) {
    const detail::StepForm w = detail::step_form(sched, s, t);
    lin = dir == OdeDirection::Forward ? w.lin_fwd : w.lin_bwd;
    sco = dir == OdeDirection::Forward ? w.score_fwd : w.score_bwd;
  }

  MapResult res;
  res.point = x;
  Vec mid(x.size()), next(x.size());
  for (int n = 1; n <= max_iters; ++n) {
    for (std::size_t j = 0; j < x.size(); ++j) mid[j] = 0.5 * (x[j] + res.point[j]);
    const Vec sc = score_mid(mid);
    if (scheme == OdeScheme::Euler) {
      // x +/- delta v(mid, .): fold f and g2 midpoint terms directly.
      const double delta = t - s;
      const ScheduleCoeffs cm = schedule_coeffs(sched, 0.5 * (s + t));
      const double sgn = dir == OdeDirection::Forward ? 1.0 : -1.0;
      for (std::size_t j = 0; j < x.size(); ++j)
        next[j] = x[j] + sgn * delta * (cm.f * mid[j] - 0.5 * cm.g2 * sc[j]);
    } else {
      for (std::size_t j = 0; j < x.size(); ++j) next[j] = lin * x[j] + sco * sc[j];
    }
    const double d = l2_dist(next, res.point);
    res.point = next;
    res.iterations_used = n;
    if (d <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// Numerical constants of the Jacobian factorization
//   J_fwd = c1 (I + c2 H)^{-1} (I - c3 H),  J_bwd = c1^{-1} (I - c3 H)^{-1} (I + c2 H),
// H the Hessian of the midpoint log-density at the midpoint argument.
struct JacobianConstants {
  double c1 = 1.0, c2 = 0.0, c3 = 0.0;
};

inline JacobianConstants jacobian_constants(const NoiseSchedule& sched, double s, double t,
                                            OdeScheme scheme = OdeScheme::ExponentialIntegrator) {
  JacobianConstants c;
  if (scheme == OdeScheme::ExponentialIntegrator) {
    if (sched.kind == NoiseSchedule::Kind::VP) {
      const double vol2 = sched.volatility * sched.volatility;
      const double cf = std::exp(0.5 * (vp_alpha(sched, s) - vp_alpha(sched, t)));
      c.c1 = cf;
      c.c2 = 0.5 * vol2 * (1.0 - cf);
      c.c3 = 0.5 * vol2 * (1.0 / cf - 1.0);
    } else {
      const ScheduleCoeffs cs = schedule_coeffs(sched, s);
      const ScheduleCoeffs ct = schedule_coeffs(sched, t);
      const double lam = ct.sigma * ct.sigma - cs.sigma * cs.sigma;
      c.c1 = 1.0;
      c.c2 = c.c3 = 0.25 * lam;
    }
  } else {
    const double delta = t - s;
    const ScheduleCoeffs cm = schedule_coeffs(sched, 0.5 * (s + t));
    const double den_m = 1.0 - 0.5 * delta * cm.f;
    const double den_p = 1.0 + 0.5 * delta * cm.f;
    c.c1 = den_p / den_m;
    c.c2 = 0.25 * delta * cm.g2 / den_m;
    c.c3 = 0.25 * delta * cm.g2 / den_p;
  }
  return c;
}

struct LogDetCoefficients {
  Vec a;  // forward series; a[0] is per unit dimension
  Vec b;  // backward series; b[i] = -a[i]
};

// Power-series coefficients of log|det J| in Tr(H^i), derived from the
// matrix-log expansion of the Jacobian factorization:
//   a_i = ((-1)^i c2^i - c3^i) / i  (i >= 1),  a_0 = log|c1| per dimension.
inline LogDetCoefficients logdet_coefficients(const NoiseSchedule& sched, double s, double t,
                                              int order,
                                              OdeScheme scheme = OdeScheme::ExponentialIntegrator) {
  if (order < 1) throw std::invalid_argument("logdet_coefficients: order < 1");
  const JacobianConstants c = s == t ? JacobianConstants{} : jacobian_constants(sched, s, t, scheme);
  LogDetCoefficients out;
  out.a.assign(order + 1, 0.0);
  out.b.assign(order + 1, 0.0);
  if (s == t) return out;
  out.a[0] = std::log(std::abs(c.c1));
  out.b[0] = -out.a[0];
  double p2 = 1.0, p3 = 1.0;
  for (int i = 1; i <= order; ++i) {
    p2 *= c.c2;
    p3 *= c.c3;
    const double sgn = (i % 2 == 0) ? 1.0 : -1.0;
    out.a[i] = (sgn * p2 - p3) / i;
    out.b[i] = -out.a[i];
  }
  return out;
}

// Trace estimation mode for the log-det series.
struct TraceMode {
  enum class Kind { ExactDiag, Hutchinson };
  Kind kind = Kind::ExactDiag;
  int n_probes = 32;

  static TraceMode exact_diag() { return TraceMode{}; }
  static TraceMode hutchinson(int n_probes = 32) {
    if (n_probes < 1) throw std::invalid_argument("TraceMode: n_probes < 1");
    return TraceMode{Kind::Hutchinson, n_probes};
  }
};

// Truncated power-series estimate of log|det J| for the implicit-midpoint
// map that produced map_result at input x. ExactDiag reads the diagonal of
// the midpoint Hessian (exact trace for i = 1, diagonal approximation for
// higher powers). Hutchinson estimates Tr(H^i) with Gaussian probes and
// nested Hessian-vector products on the same probe.
inline double logdet_estimate(const NoiseSchedule& sched, double s, double t,
                              OdeDirection dir, const Vec& x, const MapResult& map_result,
                              int order, const TraceMode& mode, const LevelOracle& mid_oracle,
                              Rng& rng, OdeScheme scheme = OdeScheme::ExponentialIntegrator) {
  const LogDetCoefficients coef = logdet_coefficients(sched, s, t, order, scheme);
  const Vec& cs = dir == OdeDirection::Forward ? coef.a : coef.b;
  const int d = static_cast<int>(x.size());
  Vec mid(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) mid[j] = 0.5 * (x[j] + map_result.point[j]);

  Vec traces(order + 1, 0.0);
  if (mode.kind == TraceMode::Kind::ExactDiag) {
    if (!mid_oracle.hessian_diag)
      throw std::runtime_error("logdet_estimate: ExactDiag requires a hessian_diag oracle");
    const Vec h = mid_oracle.hessian_diag(mid);
    Vec pw = h;
    for (int i = 1; i <= order; ++i) {
      double tr = 0.0;
      for (int j = 0; j < d; ++j) {
        tr += pw[j];
        pw[j] *= h[j];
      }
      traces[i] = tr;
    }
  } else {
    if (!mid_oracle.hessian_vp)
      throw std::runtime_error("logdet_estimate: Hutchinson requires a hessian_vp oracle");
    for (int p = 0; p < mode.n_probes; ++p) {
      Vec v(d);
      for (int j = 0; j < d; ++j) v[j] = rng.normal();
      Vec w = v;
      for (int i = 1; i <= order; ++i) {
        w = mid_oracle.hessian_vp(mid, w);
        traces[i] += dot(v, w);
      }
    }
    for (int i = 1; i <= order; ++i) traces[i] /= mode.n_probes;
  }

  double out = cs[0] * d;
  for (int i = 1; i <= order; ++i) out += cs[i] * traces[i];
  return out;
}

}  // namespace damc

#endif
