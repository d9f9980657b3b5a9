#ifndef DAMC_REVERSE_SIM_HPP
#define DAMC_REVERSE_SIM_HPP

#include <stdexcept>
#include <vector>

#include "damc/density_path.hpp"
#include "damc/kernels.hpp"
#include "damc/transport.hpp"

namespace damc {

// Plain reverse-SDE sampling: chain first-order EI denoising kernels from
// the base level down to the target.
inline std::vector<Vec> reverse_sde_simulate(const DensityPath& path, int n, Rng& rng) {
  if (!path.has_transition_kernels())
    throw std::invalid_argument("reverse_sde_simulate requires a diffusion path");
  std::vector<Vec> out(std::max(n, 0));
  for (int i = 0; i < n; ++i) {
    Rng prng = rng.child(0xD1F, i);
    Vec x = path.base->sample(prng);
    for (int k = path.K - 1; k >= 0; --k) {
      const GaussianKernelParams down = denoising_kernel_first_order(
          path.schedule, path.times[k], path.times[k + 1], x,
          path.levels[k + 1].oracle.score(x));
      x = kernel_sample(down, x, prng);
    }
    out[i] = std::move(x);
  }
  return out;
}

// Deterministic analog: chain explicit EI probability-flow steps.
inline std::vector<Vec> reverse_ode_simulate(const DensityPath& path, int n, Rng& rng) {
  if (!path.has_transition_kernels())
    throw std::invalid_argument("reverse_ode_simulate requires a diffusion path");
  std::vector<Vec> out(std::max(n, 0));
  for (int i = 0; i < n; ++i) {
    Rng prng = rng.child(0xD1F, i);
    Vec x = path.base->sample(prng);
    for (int k = path.K - 1; k >= 0; --k)
      x = explicit_ode_map(path.schedule, path.times[k], path.times[k + 1],
                           OdeDirection::Backward, x, path.levels[k + 1].oracle.score);
    out[i] = std::move(x);
  }
  return out;
}

}  // namespace damc

#endif
