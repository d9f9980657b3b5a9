#ifndef DAMC_REPLICA_EXCHANGE_HPP
#define DAMC_REPLICA_EXCHANGE_HPP

#include <cmath>
#include <vector>

#include "damc/samplers.hpp"

namespace damc {

struct ReResult {
  std::vector<Vec> level0_samples;  // subsampled across all chains
  RunDiagnostics diag;
  std::vector<int> round_parity;  // parity of each communication round (non-reversible DEO)
};

namespace detail {

// log of the swap acceptance ratio for the pair (k, k+1); proposal states
// are written to y_lo / y_up. Returns -inf when the ratio is non-finite.
inline double swap_log_ratio(const DensityPath& path, int k, const TransitionSpec& spec,
                             const Vec& x_lo, const Vec& x_up, Vec& y_lo, Vec& y_up,
                             Rng& rng, RunDiagnostics& diag) {
  const LevelOracle& lower = path.levels[k].oracle;
  const LevelOracle& upper = path.levels[k + 1].oracle;
  switch (spec.kind) {
    case TransitionSpec::Kind::NoKernel: {
      y_lo = x_up;
      y_up = x_lo;
      return lower.log_density(x_up) + upper.log_density(x_lo) - lower.log_density(x_lo) -
             upper.log_density(x_up);
    }
    case TransitionSpec::Kind::Stoch1:
    case TransitionSpec::Kind::Stoch2: {
      const double s = path.times[k], t = path.times[k + 1];
      const GaussianKernelParams fwd = noising_kernel(path.schedule, s, t);
      GaussianKernelParams down_at_xup, down_at_yup;
      try {
        down_at_xup = spec.kind == TransitionSpec::Kind::Stoch1
                          ? denoising_kernel_first_order(path.schedule, s, t, x_up,
                                                         upper.score(x_up))
                          : denoising_kernel_second_order(path.schedule, s, t, x_up,
                                                          upper.score(x_up),
                                                          upper.hessian_diag(x_up));
        y_up = kernel_sample(fwd, x_lo, rng);
        y_lo = kernel_sample(down_at_xup, x_up, rng);
        down_at_yup = spec.kind == TransitionSpec::Kind::Stoch1
                          ? denoising_kernel_first_order(path.schedule, s, t, y_up,
                                                         upper.score(y_up))
                          : denoising_kernel_second_order(path.schedule, s, t, y_up,
                                                          upper.score(y_up),
                                                          upper.hessian_diag(y_up));
      } catch (const std::runtime_error&) {
        ++diag.ddpm_violations;
        return -std::numeric_limits<double>::infinity();
      }
      return lower.log_density(y_lo) + upper.log_density(y_up) +
             kernel_log_pdf(fwd, x_up, y_lo) + kernel_log_pdf(down_at_yup, x_lo, y_up) -
             lower.log_density(x_lo) - upper.log_density(x_up) -
             kernel_log_pdf(fwd, y_up, x_lo) - kernel_log_pdf(down_at_xup, y_lo, x_up);
    }
    case TransitionSpec::Kind::DetIM: {
      const double s = path.times[k], t = path.times[k + 1];
      const LevelOracle& mid = path.mid_oracles[k];
      const MapResult up_map =
          implicit_midpoint_map(path.schedule, s, t, OdeDirection::Forward, x_lo, mid.score,
                                spec.fixed_point_iters, spec.fixed_point_tol);
      const MapResult lo_map =
          implicit_midpoint_map(path.schedule, s, t, OdeDirection::Backward, x_up, mid.score,
                                spec.fixed_point_iters, spec.fixed_point_tol);
      diag.fp_calls += 2;
      diag.fp_iterations += up_map.iterations_used + lo_map.iterations_used;
      if (!up_map.converged) ++diag.fp_nonconverged;
      if (!lo_map.converged) ++diag.fp_nonconverged;
      // Fresh probes per proposal keep the pseudo-marginal correction valid.
      const double ld_f = logdet_estimate(path.schedule, s, t, OdeDirection::Forward, x_lo,
                                          up_map, spec.series_order, spec.trace, mid, rng);
      const double ld_b = logdet_estimate(path.schedule, s, t, OdeDirection::Backward, x_up,
                                          lo_map, spec.series_order, spec.trace, mid, rng);
      y_up = up_map.point;
      y_lo = lo_map.point;
      return lower.log_density(y_lo) + upper.log_density(y_up) + ld_f + ld_b -
             lower.log_density(x_lo) - upper.log_density(x_up);
    }
  }
  return -std::numeric_limits<double>::infinity();
}

}  // namespace detail

// Non-reversible replica exchange: one MALA step per level per global step,
// deterministic even/odd alternation of pairwise swap rounds every
// swap_period steps, and level-0 subsampling at the last local state before
// each swap, post warm-up.
inline ReResult re_run(const DensityPath& path, const TransitionSpec& spec,
                       const SamplerConfig& cfg, Rng& rng) {
  validate_transition(path, spec);
  cfg.validate();
  if (cfg.re_init == SamplerConfig::ReInit::ScoreInformed && !path.has_transition_kernels())
    throw std::invalid_argument("score_informed RE init requires a diffusion path");
  const int K = path.K;

  ReResult out;
  std::vector<ReResult> per_chain(cfg.re_chains);
  parallel_for(cfg.re_chains, [&](int c) {
    ReResult& chain_out = per_chain[c];
    chain_out.diag.per_level_swap_attempts.assign(K, 0);
    chain_out.diag.per_level_swap_accepts.assign(K, 0);
    Rng chain_rng = rng.child(0x4E, c);
    std::vector<Rng> level_rngs;
    level_rngs.reserve(K + 1);
    for (int k = 0; k <= K; ++k) level_rngs.push_back(chain_rng.child(2 * k + 1));
    Rng swap_rng = chain_rng.child(0x5A11);
    Rng init_rng = chain_rng.child(0x1A17);

    // Initialize every level, either from the base or by populating the
    // levels along one reverse-SDE pass.
    std::vector<Vec> x(K + 1);
    if (cfg.re_init == SamplerConfig::ReInit::Base) {
      for (int k = 0; k <= K; ++k) x[k] = path.base->sample(init_rng);
    } else {
      x[K] = path.base->sample(init_rng);
      for (int k = K - 1; k >= 0; --k) {
        const double s = path.times[k], t = path.times[k + 1];
        const GaussianKernelParams down = denoising_kernel_first_order(
            path.schedule, s, t, x[k + 1], path.levels[k + 1].oracle.score(x[k + 1]));
        x[k] = kernel_sample(down, x[k + 1], init_rng);
      }
    }

    Vec steps(K + 1, cfg.mala_step0);
    int comm_round = 0;
    for (long step = 1; step <= cfg.re_total_steps; ++step) {
      for (int k = 0; k <= K; ++k) {
        MalaOptions opt;
        opt.n_steps = 1;
        opt.step = steps[k];
        opt.target_accept = cfg.mala_target_accept;
        MalaResult mr = mala_chain(path.levels[k].oracle, std::move(x[k]), opt, level_rngs[k]);
        x[k] = std::move(mr.x);
        steps[k] = mr.step;
        chain_out.diag.mala_accept_sum += mr.accept_rate;
        ++chain_out.diag.mala_chains;
      }
      if (step % cfg.swap_period == 0) {
        if (step > cfg.re_warmup_steps) chain_out.level0_samples.push_back(x[0]);
        const int parity = comm_round % 2;
        chain_out.round_parity.push_back(parity);
        ++comm_round;
        Vec y_lo, y_up;
        for (int k = parity; k + 1 <= K; k += 2) {
          const double logr = detail::swap_log_ratio(path, k, spec, x[k], x[k + 1], y_lo,
                                                     y_up, swap_rng, chain_out.diag);
          ++chain_out.diag.swap_attempts;
          ++chain_out.diag.per_level_swap_attempts[k];
          if (std::isfinite(logr) && std::log(swap_rng.uniform()) < logr) {
            x[k] = y_lo;
            x[k + 1] = y_up;
            ++chain_out.diag.swap_accepts;
            ++chain_out.diag.per_level_swap_accepts[k];
          }
        }
      }
    }
  });
  for (int c = 0; c < cfg.re_chains; ++c) {
    out.diag.merge(per_chain[c].diag);
    out.level0_samples.insert(out.level0_samples.end(), per_chain[c].level0_samples.begin(),
                              per_chain[c].level0_samples.end());
  }
  out.round_parity = per_chain[0].round_parity;
  return out;
}

}  // namespace damc

#endif
