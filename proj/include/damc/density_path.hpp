#ifndef DAMC_DENSITY_PATH_HPP
#define DAMC_DENSITY_PATH_HPP

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "damc/gaussian_mixture.hpp"
#include "damc/noise_schedule.hpp"
#include "damc/oracle.hpp"
#include "damc/targets.hpp"
#include "damc/vec.hpp"

namespace damc {

// One annealing level. Level 0 is the target, level K the base. Diffusion
// levels carry their exact marginal mixture; tempering levels only the
// callable oracles.
struct PathLevel {
  LevelOracle oracle;
  double time = 0.0;  // diffusion level time t_k
  double beta = 1.0;  // tempering exponent
  std::shared_ptr<const GaussianMixture> mixture;
};

struct DensityPath {
  enum class Kind { Tempering, Diffusion };
  Kind kind = Kind::Tempering;
  int K = 0;
  std::vector<PathLevel> levels;  // K+1 entries, 0 = target end

  // Diffusion-only: schedule, level times (level 0 pinned to t = 0), and
  // midpoint-time oracles for the K transitions.
  NoiseSchedule schedule;
  std::vector<double> times;
  std::vector<LevelOracle> mid_oracles;

  std::shared_ptr<const GaussianMixture> target;
  std::shared_ptr<const GaussianMixture> base;

  bool has_transition_kernels() const { return kind == Kind::Diffusion; }
};

// Geometric path p_k oc pi^beta * base^(1-beta) with the logarithmic
// schedule beta_k = 1 - eps^((K-k)/K) for k >= 1; level 0 is pinned to
// beta = 1 so the path ends at the target exactly.
inline DensityPath tempering_path(const GaussianMixture& target_in, int K,
                                  double eps_sched = 1e-5) {
  if (K < 1) throw std::invalid_argument("tempering_path: K < 1");
  if (!(eps_sched > 0.0 && eps_sched < 1.0))
    throw std::invalid_argument("tempering_path: eps must be in (0,1)");
  auto target = std::make_shared<const GaussianMixture>(target_in);
  auto base = std::make_shared<const GaussianMixture>(isotropic_gaussian(target_in.dim()));

  DensityPath path;
  path.kind = DensityPath::Kind::Tempering;
  path.K = K;
  path.target = target;
  path.base = base;
  path.levels.resize(K + 1);
  for (int k = 0; k <= K; ++k) {
    const double beta =
        k == 0 ? 1.0 : 1.0 - std::pow(eps_sched, static_cast<double>(K - k) / K);
    PathLevel lvl;
    lvl.beta = beta;
    lvl.oracle.log_density = [target, base, beta](const Vec& x) {
      return beta * target->log_density(x) + (1.0 - beta) * base->log_density(x);
    };
    lvl.oracle.score = [target, base, beta](const Vec& x) {
      Vec s = target->score(x);
      const Vec sb = base->score(x);
      for (std::size_t j = 0; j < s.size(); ++j) s[j] = beta * s[j] + (1.0 - beta) * sb[j];
      return s;
    };
    lvl.oracle.hessian_diag = [target, base, beta](const Vec& x) {
      Vec h = target->hessian_diag(x);
      const Vec hb = base->hessian_diag(x);
      for (std::size_t j = 0; j < h.size(); ++j) h[j] = beta * h[j] + (1.0 - beta) * hb[j];
      return h;
    };
    lvl.oracle.hessian_vp = [target, base, beta](const Vec& x, const Vec& v) {
      Vec h = target->hessian_vp(x, v);
      const Vec hb = base->hessian_vp(x, v);
      for (std::size_t j = 0; j < h.size(); ++j) h[j] = beta * h[j] + (1.0 - beta) * hb[j];
      return h;
    };
    path.levels[k] = std::move(lvl);
  }
  return path;
}

// Diffusion path over the exact marginals p_{t_k}. Level 0 is pinned to the
// target (t = 0) and level K to the Gaussian base, so estimators target pi
// exactly; the grid's own t_0 and the residual between p_{t_K} and the base
// are the usual small-noise approximations.
inline DensityPath diffusion_path(const GaussianMixture& target_in, const NoiseSchedule& sched,
                                  const TimeGrid& grid) {
  const int K = grid.K;
  auto target = std::make_shared<const GaussianMixture>(target_in);
  const double base_var = sched.kind == NoiseSchedule::Kind::VP
                              ? sched.volatility * sched.volatility
                              : grid.sigma_max_grid * grid.sigma_max_grid;
  auto base = std::make_shared<const GaussianMixture>(
      isotropic_gaussian(target_in.dim(), base_var));

  DensityPath path;
  path.kind = DensityPath::Kind::Diffusion;
  path.K = K;
  path.schedule = sched;
  path.target = target;
  path.base = base;
  path.times = grid.times;
  path.times[0] = 0.0;

  path.levels.resize(K + 1);
  for (int k = 0; k <= K; ++k) {
    std::shared_ptr<const GaussianMixture> marginal;
    if (k == 0)
      marginal = target;
    else if (k == K)
      marginal = base;
    else
      marginal = std::make_shared<const GaussianMixture>(diffuse(*target, sched, path.times[k]));
    PathLevel lvl;
    lvl.time = path.times[k];
    lvl.mixture = marginal;
    lvl.oracle = oracle_of(marginal);
    path.levels[k] = std::move(lvl);
  }
  path.mid_oracles.resize(K);
  for (int k = 0; k < K; ++k) {
    const double tm = 0.5 * (path.times[k] + path.times[k + 1]);
    auto mid = std::make_shared<const GaussianMixture>(diffuse(*target, sched, tm));
    path.mid_oracles[k] = oracle_of(mid);
  }
  return path;
}

// Strongest-mode mass per level for 1-D two-mode targets. Diffusion levels
// are exact mixtures whose weights convolution preserves, so the mass is the
// strongest component weight. Tempering levels are integrated on x_grid by
// trapezoid, split at the target's density minimum between the two means.
inline Vec path_mode_mass_profile_1d(const DensityPath& path, const Vec& x_grid) {
  if (!path.target || path.target->dim() != 1)
    throw std::invalid_argument("path_mode_mass_profile_1d: target dimension must be 1");
  const GaussianMixture& target = *path.target;
  if (target.n_components() < 2)
    throw std::invalid_argument("path_mode_mass_profile_1d: need at least two modes");
  const int strongest = target.strongest_component();

  if (path.kind == DensityPath::Kind::Diffusion)
    return Vec(path.K + 1, target.weights()[strongest]);

  // Split point: density minimum between the two component means.
  double lo = target.means()[0][0], hi = target.means()[1][0];
  if (lo > hi) std::swap(lo, hi);
  double split = lo, best = std::numeric_limits<double>::infinity();
  const int n_scan = 4096;
  for (int i = 0; i <= n_scan; ++i) {
    const double x = lo + (hi - lo) * i / n_scan;
    const double ld = target.log_density({x});
    if (ld < best) {
      best = ld;
      split = x;
    }
  }
  const bool strong_below = target.means()[strongest][0] < split;

  Vec profile(path.K + 1);
  const std::size_t n = x_grid.size();
  std::vector<double> dens(n);
  for (int k = 0; k <= path.K; ++k) {
    for (std::size_t i = 0; i < n; ++i)
      dens[i] = std::exp(path.levels[k].oracle.log_density({x_grid[i]}));
    double total = 0.0, inside = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double seg = 0.5 * (dens[i] + dens[i + 1]) * (x_grid[i + 1] - x_grid[i]);
      total += seg;
      const double mid = 0.5 * (x_grid[i] + x_grid[i + 1]);
      if (strong_below ? mid < split : mid > split) inside += seg;
    }
    profile[k] = inside / total;
  }
  return profile;
}

}  // namespace damc

#endif
