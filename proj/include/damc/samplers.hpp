#ifndef DAMC_SAMPLERS_HPP
#define DAMC_SAMPLERS_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "damc/density_path.hpp"
#include "damc/kernels.hpp"
#include "damc/mala.hpp"
#include "damc/metrics.hpp"
#include "damc/parallel.hpp"
#include "damc/resample.hpp"
#include "damc/rng.hpp"
#include "damc/transport.hpp"

namespace damc {

// Transition mechanism between adjacent annealing levels.
//   NoKernel: no move, standard annealing weight ratio.
//   Stoch1:   exact noising forward + first-order EI denoising backward.
//   Stoch2:   exact noising forward + DDPM (second-order) backward.
//   DetIM:    implicit-midpoint transport maps with series log-dets.
struct TransitionSpec {
  enum class Kind { NoKernel, Stoch1, Stoch2, DetIM };
  Kind kind = Kind::NoKernel;

  // DetIM knobs: fixed-point budget M, series truncation I, tolerance, and
  // the trace estimation mode.
  int fixed_point_iters = 4;
  int series_order = 3;
  double fixed_point_tol = 1e-8;
  TraceMode trace = TraceMode::exact_diag();

  static TransitionSpec none() { return {}; }
  static TransitionSpec stoch1() { return {Kind::Stoch1}; }
  static TransitionSpec stoch2() { return {Kind::Stoch2}; }
  static TransitionSpec det_im(int m = 4, int order = 3, double tol = 1e-8,
                               TraceMode trace = TraceMode::exact_diag()) {
    TransitionSpec t{Kind::DetIM};
    t.fixed_point_iters = m;
    t.series_order = order;
    t.fixed_point_tol = tol;
    t.trace = trace;
    return t;
  }
};

inline std::string transition_name(const TransitionSpec& t) {
  switch (t.kind) {
    case TransitionSpec::Kind::NoKernel: return "none";
    case TransitionSpec::Kind::Stoch1: return "stoch1";
    case TransitionSpec::Kind::Stoch2: return "stoch2";
    case TransitionSpec::Kind::DetIM:
      return t.trace.kind == TraceMode::Kind::ExactDiag ? "det-hessian" : "det-hutchinson";
  }
  return "?";
}

// Rejects (path, transition) combinations whose oracles are missing, with a
// message naming the violated constraint.
inline void validate_transition(const DensityPath& path, const TransitionSpec& spec) {
  if (spec.kind == TransitionSpec::Kind::NoKernel) return;
  if (!path.has_transition_kernels())
    throw std::invalid_argument(
        "transition '" + transition_name(spec) +
        "' requires a diffusion path (noising/denoising kernels are undefined on a "
        "tempering path)");
  if (spec.kind == TransitionSpec::Kind::Stoch2) {
    for (const PathLevel& lvl : path.levels)
      if (!lvl.oracle.hessian_diag)
        throw std::invalid_argument("stoch2 requires hessian_diag on every level");
  }
  if (spec.kind == TransitionSpec::Kind::DetIM) {
    const bool need_diag = spec.trace.kind == TraceMode::Kind::ExactDiag;
    for (const LevelOracle& mid : path.mid_oracles) {
      if (need_diag && !mid.hessian_diag)
        throw std::invalid_argument("det-hessian requires hessian_diag on midpoint levels");
      if (!need_diag && !mid.hessian_vp)
        throw std::invalid_argument("det-hutchinson requires hessian_vp on midpoint levels");
    }
  }
}

// Full-scale default tuning constants; desk presets override them.
struct SamplerConfig {
  int n_particles = 8192;
  int mcmc_steps_per_level = 160;
  int mcmc_warmup_per_level = 128;
  double ess_threshold = 0.30;
  long re_total_steps = 24576;
  long re_warmup_steps = 8192;
  int re_chains = 4;
  int swap_period = 8;
  double mala_step0 = 0.01;
  double mala_target_accept = 0.70;
  int keep_last = 32;
  enum class ReInit { Base, ScoreInformed } re_init = ReInit::ScoreInformed;

  void validate() const {
    if (n_particles < 1 || re_chains < 1 || swap_period < 1 || re_total_steps < 1)
      throw std::invalid_argument("SamplerConfig: counts must be positive");
    if (!(ess_threshold > 0.0 && ess_threshold < 1.0))
      throw std::invalid_argument("SamplerConfig: ess_threshold must be in (0,1)");
    if (!(mala_target_accept > 0.0 && mala_target_accept < 1.0))
      throw std::invalid_argument("SamplerConfig: mala_target_accept must be in (0,1)");
    if (mcmc_steps_per_level < 0 || mcmc_warmup_per_level < 0 || keep_last < 0)
      throw std::invalid_argument("SamplerConfig: negative step counts");
  }
};

struct RunDiagnostics {
  long fp_calls = 0;
  long fp_iterations = 0;
  long fp_nonconverged = 0;
  long ddpm_violations = 0;
  long flagged_particles = 0;
  long resample_events = 0;
  long swap_attempts = 0;
  long swap_accepts = 0;
  double mala_accept_sum = 0.0;
  long mala_chains = 0;
  Vec per_level_ess;  // SMC: ESS fraction per level, target end first
  std::vector<long> per_level_swap_attempts;  // RE: per pair (k, k+1)
  std::vector<long> per_level_swap_accepts;

  double mala_accept_mean() const {
    return mala_chains > 0 ? mala_accept_sum / mala_chains : 0.0;
  }
  double swap_accept_rate() const {
    return swap_attempts > 0 ? static_cast<double>(swap_accepts) / swap_attempts : 0.0;
  }
  void merge(const RunDiagnostics& o) {
    fp_calls += o.fp_calls;
    fp_iterations += o.fp_iterations;
    fp_nonconverged += o.fp_nonconverged;
    ddpm_violations += o.ddpm_violations;
    flagged_particles += o.flagged_particles;
    resample_events += o.resample_events;
    swap_attempts += o.swap_attempts;
    swap_accepts += o.swap_accepts;
    mala_accept_sum += o.mala_accept_sum;
    mala_chains += o.mala_chains;
    if (per_level_swap_attempts.size() < o.per_level_swap_attempts.size()) {
      per_level_swap_attempts.resize(o.per_level_swap_attempts.size(), 0);
      per_level_swap_accepts.resize(o.per_level_swap_accepts.size(), 0);
    }
    for (std::size_t k = 0; k < o.per_level_swap_attempts.size(); ++k) {
      per_level_swap_attempts[k] += o.per_level_swap_attempts[k];
      per_level_swap_accepts[k] += o.per_level_swap_accepts[k];
    }
  }
};

// Weighted ensemble state after a sweep. `tails` holds per-particle MCMC
// trajectory tails at the final level when the variant runs local MCMC.
struct ParticleEnsemble {
  std::vector<Vec> positions;
  Vec log_weights;
  std::vector<int> ancestry;
  std::vector<std::vector<Vec>> tails;
  double log_normalizer = std::numeric_limits<double>::quiet_NaN();
  RunDiagnostics diag;

  // Flattened view used by metrics: tail states inherit their particle's
  // weight; without tails the final positions are used.
  void flatten(std::vector<Vec>& points, Vec& weights) const {
    points.clear();
    weights.clear();
    const Vec w = normalized_weights_from_log(log_weights);
    bool any_tail = false;
    for (const auto& t : tails)
      if (!t.empty()) any_tail = true;
    if (!any_tail) {
      points = positions;
      weights = w;
      return;
    }
    for (std::size_t i = 0; i < positions.size(); ++i) {
      if (tails[i].empty()) {
        points.push_back(positions[i]);
        weights.push_back(w[i]);
        continue;
      }
      for (const Vec& x : tails[i]) {
        points.push_back(x);
        weights.push_back(w[i] / tails[i].size());
      }
    }
  }
};

namespace detail {

struct MoveResult {
  Vec x;
  double log_inc = 0.0;
  bool ok = true;
};

// One backward transition from level k+1 to level k with its incremental
// log-weight. All four mechanisms share this entry point; AIS and SMC
// accumulate the increments, RE uses the kernels through its own swaps.
inline MoveResult backward_transition(const DensityPath& path, int k, const Vec& x_upper,
                                      const TransitionSpec& spec, Rng& rng,
                                      RunDiagnostics& diag) {
  const LevelOracle& lower = path.levels[k].oracle;
  const LevelOracle& upper = path.levels[k + 1].oracle;
  MoveResult res;
  switch (spec.kind) {
    case TransitionSpec::Kind::NoKernel: {
      res.x = x_upper;
      res.log_inc = lower.log_density(x_upper) - upper.log_density(x_upper);
      break;
    }
    case TransitionSpec::Kind::Stoch1:
    case TransitionSpec::Kind::Stoch2: {
      const double s = path.times[k], t = path.times[k + 1];
      GaussianKernelParams down;
      try {
        down = spec.kind == TransitionSpec::Kind::Stoch1
                   ? denoising_kernel_first_order(path.schedule, s, t, x_upper,
                                                  upper.score(x_upper))
                   : denoising_kernel_second_order(path.schedule, s, t, x_upper,
                                                   upper.score(x_upper),
                                                   upper.hessian_diag(x_upper));
      } catch (const std::runtime_error&) {
        ++diag.ddpm_violations;
        res.x = x_upper;
        res.log_inc = -std::numeric_limits<double>::infinity();
        res.ok = false;
        return res;
      }
      res.x = kernel_sample(down, x_upper, rng);
      const GaussianKernelParams up = noising_kernel(path.schedule, s, t);
      res.log_inc = lower.log_density(res.x) + kernel_log_pdf(up, x_upper, res.x) -
                    upper.log_density(x_upper) - kernel_log_pdf(down, res.x, x_upper);
      break;
    }
    case TransitionSpec::Kind::DetIM: {
      const double s = path.times[k], t = path.times[k + 1];
      const LevelOracle& mid = path.mid_oracles[k];
      const MapResult map =
          implicit_midpoint_map(path.schedule, s, t, OdeDirection::Backward, x_upper,
                                mid.score, spec.fixed_point_iters, spec.fixed_point_tol);
      ++diag.fp_calls;
      diag.fp_iterations += map.iterations_used;
      if (!map.converged) ++diag.fp_nonconverged;
      const double ld = logdet_estimate(path.schedule, s, t, OdeDirection::Backward,
                                        x_upper, map, spec.series_order, spec.trace, mid, rng);
      res.x = map.point;
      res.log_inc = lower.log_density(res.x) - upper.log_density(x_upper) + ld;
      break;
    }
  }
  if (!std::isfinite(res.log_inc)) {
    res.log_inc = -std::numeric_limits<double>::infinity();
    res.ok = false;
  }
  return res;
}

inline int tail_length(const SamplerConfig& cfg) {
  return std::min(cfg.keep_last,
                  std::max(0, cfg.mcmc_steps_per_level - cfg.mcmc_warmup_per_level));
}

}  // namespace detail

// Annealed importance sampling from the base level down to the target.
// NoKernel runs local MALA at every level (standard AIS); kernel and map
// variants move particles with the transition alone, as in the AIS weight
// construction over the extended space.
inline ParticleEnsemble ais_run(const DensityPath& path, const TransitionSpec& spec,
                                const SamplerConfig& cfg, Rng& rng) {
  validate_transition(path, spec);
  cfg.validate();
  const int N = cfg.n_particles;
  const int K = path.K;
  const bool with_mcmc = spec.kind == TransitionSpec::Kind::NoKernel;

  ParticleEnsemble ens;
  ens.positions.resize(N);
  ens.log_weights.assign(N, 0.0);
  ens.tails.resize(N);
  // Each particle owns its slots and a seed-derived stream, so the result
  // does not depend on how particles are distributed over workers.
  std::vector<RunDiagnostics> diag(N);
  parallel_for(N, [&](int i) {
    Rng prng = rng.child(0xA15, i);
    Vec x = path.base->sample(prng);
    double logw = 0.0;
    double step = cfg.mala_step0;
    for (int k = K - 1; k >= 0; --k) {
      Rng move_rng = prng.child(2 * k);
      const detail::MoveResult mv =
          detail::backward_transition(path, k, x, spec, move_rng, diag[i]);
      x = mv.x;
      logw += mv.log_inc;
      if (!mv.ok) ++diag[i].flagged_particles;
      if (with_mcmc && cfg.mcmc_steps_per_level > 0) {
        Rng mala_rng = prng.child(2 * k + 1);
        MalaOptions opt;
        opt.n_steps = cfg.mcmc_steps_per_level;
        opt.step = step;
        opt.target_accept = cfg.mala_target_accept;
        opt.keep_last = k == 0 ? detail::tail_length(cfg) : 0;
        MalaResult mr = mala_chain(path.levels[k].oracle, std::move(x), opt, mala_rng);
        x = std::move(mr.x);
        step = mr.step;
        diag[i].mala_accept_sum += mr.accept_rate;
        ++diag[i].mala_chains;
        if (k == 0) ens.tails[i] = std::move(mr.tail);
      }
    }
    ens.positions[i] = std::move(x);
    ens.log_weights[i] = logw;
  });
  for (const RunDiagnostics& d : diag) ens.diag.merge(d);
  ens.log_normalizer = logsumexp(ens.log_weights) - std::log(static_cast<double>(N));
  return ens;
}

// Sequential Monte Carlo: the AIS sweep with adaptive systematic resampling
// (ESS/N below the threshold) and MALA rejuvenation at every level for all
// transition kinds.
inline ParticleEnsemble smc_run(const DensityPath& path, const TransitionSpec& spec,
                                const SamplerConfig& cfg, Rng& rng) {
  validate_transition(path, spec);
  cfg.validate();
  const int N = cfg.n_particles;
  const int K = path.K;

  ParticleEnsemble ens;
  ens.positions.resize(N);
  ens.log_weights.assign(N, 0.0);
  ens.ancestry.resize(N);
  ens.tails.resize(N);
  for (int i = 0; i < N; ++i) ens.ancestry[i] = i;
  Vec steps(N, cfg.mala_step0);
  std::vector<Rng> prngs;
  prngs.reserve(N);
  for (int i = 0; i < N; ++i) {
    prngs.push_back(rng.child(0xA15, i));
    ens.positions[i] = path.base->sample(prngs[i]);
  }
  double log_norm = 0.0;
  ens.diag.per_level_ess.assign(K + 1, 1.0);
  std::vector<RunDiagnostics> diag(N);

  for (int k = K - 1; k >= 0; --k) {
    parallel_for(N, [&](int i) {
      Rng move_rng = prngs[i].child(2 * k);
      const detail::MoveResult mv =
          detail::backward_transition(path, k, ens.positions[i], spec, move_rng, diag[i]);
      ens.positions[i] = mv.x;
      ens.log_weights[i] += mv.log_inc;
      if (!mv.ok) ++diag[i].flagged_particles;
    });
    const double ess = ess_fraction(ens.log_weights);
    ens.diag.per_level_ess[k] = ess;
    if (ess < cfg.ess_threshold) {
      // Fold the current normalizer contribution in before the reset.
      log_norm += logsumexp(ens.log_weights) - std::log(static_cast<double>(N));
      Rng res_rng = rng.child(0x5E5A, k);
      const std::vector<int> idx = systematic_resample(ens.log_weights, res_rng);
      std::vector<Vec> pos(N);
      Vec st(N);
      std::vector<int> anc(N);
      for (int i = 0; i < N; ++i) {
        pos[i] = ens.positions[idx[i]];
        st[i] = steps[idx[i]];
        anc[i] = ens.ancestry[idx[i]];
      }
      ens.positions = std::move(pos);
      steps = std::move(st);
      ens.ancestry = std::move(anc);
      ens.log_weights.assign(N, 0.0);
      ++ens.diag.resample_events;
    }
    if (cfg.mcmc_steps_per_level > 0) {
      parallel_for(N, [&](int i) {
        Rng mala_rng = prngs[i].child(2 * k + 1);
        MalaOptions opt;
        opt.n_steps = cfg.mcmc_steps_per_level;
        opt.step = steps[i];
        opt.target_accept = cfg.mala_target_accept;
        opt.keep_last = k == 0 ? detail::tail_length(cfg) : 0;
        MalaResult mr = mala_chain(path.levels[k].oracle, std::move(ens.positions[i]), opt,
                                   mala_rng);
        ens.positions[i] = std::move(mr.x);
        steps[i] = mr.step;
        diag[i].mala_accept_sum += mr.accept_rate;
        ++diag[i].mala_chains;
        if (k == 0) ens.tails[i] = std::move(mr.tail);
      });
    }
  }
  for (const RunDiagnostics& d : diag) ens.diag.merge(d);
  ens.log_normalizer = log_norm + logsumexp(ens.log_weights) -
                       std::log(static_cast<double>(N));
  return ens;
}

// Self-normalized importance sampling with an arbitrary proposal.
struct ImportanceResult {
  std::vector<Vec> samples;
  Vec log_weights;
  double log_normalizer = 0.0;
};

inline ImportanceResult importance_sampling(
    const std::function<Vec(Rng&)>& proposal_sampler,
    const std::function<double(const Vec&)>& proposal_log_pdf,
    const std::function<double(const Vec&)>& target_log_pdf, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("importance_sampling: n < 1");
  ImportanceResult out;
  out.samples.resize(n);
  out.log_weights.resize(n);
  for (int i = 0; i < n; ++i) {
    out.samples[i] = proposal_sampler(rng);
    out.log_weights[i] = target_log_pdf(out.samples[i]) - proposal_log_pdf(out.samples[i]);
  }
  const double lse = logsumexp(out.log_weights);
  if (!std::isfinite(lse))
    throw std::runtime_error("importance_sampling: all weights vanished");
  out.log_normalizer = lse - std::log(static_cast<double>(n));
  return out;
}

}  // namespace damc

#endif
