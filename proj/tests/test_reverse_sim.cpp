#include <catch2/catch_amalgamated.hpp>

#include "damc/metrics.hpp"
#include "damc/reverse_sim.hpp"
#include "test_helpers.hpp"

using namespace damc;

TEST_CASE("reverse ODE keeps a standardized Gaussian exactly") {
  // Each explicit EI step has zero velocity on the stationary level, so the
  // output equals the base draw.
  const NoiseSchedule sched = NoiseSchedule::vp();
  const TimeGrid grid = make_time_grid(sched, 32, 1e-2, noise_level(sched, 1.0));
  const DensityPath path = diffusion_path(isotropic_gaussian(2), sched, grid);
  Rng ode_rng(5), base_rng(5);
  const std::vector<Vec> xs = reverse_ode_simulate(path, 512, ode_rng);
  for (int i = 0; i < 512; ++i) {
    Rng prng = base_rng.child(0xD1F, i);
    const Vec want = path.base->sample(prng);
    REQUIRE(linf_dist(xs[i], want) < 1e-12);
  }
}

TEST_CASE("reverse SDE variance error on a Gaussian shrinks with K") {
  // The first-order EI kernel is not exactly stationary on N(0, I): one
  // step maps the variance to (2 - cb)^2 + cb^2 - 1 = 1 + 2 (cb - 1)^2.
  // The bias is O(step) overall and must shrink as the grid refines.
  const NoiseSchedule sched = NoiseSchedule::vp();
  Vec errs;
  for (int K : {32, 256}) {
    const TimeGrid grid = make_time_grid(sched, K, 1e-2, noise_level(sched, 1.0));
    const DensityPath path = diffusion_path(isotropic_gaussian(1), sched, grid);
    Rng rng(5);
    const std::vector<Vec> xs = reverse_sde_simulate(path, 20000, rng);
    Vec c0(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) c0[i] = xs[i][0];
    REQUIRE(std::abs(test::mean_of(c0)) < 0.05);
    errs.push_back(std::abs(test::var_of(c0) - 1.0));
  }
  REQUIRE(errs[1] < 0.5 * errs[0]);
  REQUIRE(errs[1] < 0.05);
}

TEST_CASE("empty request returns no samples") {
  const NoiseSchedule sched = NoiseSchedule::vp();
  const TimeGrid grid = make_time_grid(sched, 8, 1e-2, noise_level(sched, 1.0));
  const DensityPath path = diffusion_path(isotropic_gaussian(2), sched, grid);
  Rng rng(1);
  REQUIRE(reverse_sde_simulate(path, 0, rng).empty());
  REQUIRE(reverse_ode_simulate(path, 0, rng).empty());
}

TEST_CASE("reverse simulators require a diffusion path") {
  const DensityPath temp = tempering_path(isotropic_gaussian(2), 4);
  Rng rng(1);
  REQUIRE_THROWS_AS(reverse_sde_simulate(temp, 4, rng), std::invalid_argument);
}

TEST_CASE("reverse SDE matches exact sampling on TwoModes at desk scale") {
  const GaussianMixture target = build_target({TwoModesSpec{5.0, 16}, true});
  const NoiseSchedule sched = NoiseSchedule::vp();
  const TimeGrid grid = make_time_grid(sched, 256, 1e-2, noise_level(sched, 1.0));
  const DensityPath path = diffusion_path(target, sched, grid);

  Rng rng(77);
  const int n = 8192;
  const std::vector<Vec> generated = reverse_sde_simulate(path, n, rng);

  Vec floors;
  for (int rep = 0; rep < 8; ++rep) {
    Rng ra(200 + rep), rb(300 + rep), proj(400 + rep);
    const auto a = target.sample_n(n, ra);
    const auto b = target.sample_n(n, rb);
    floors.push_back(sliced_wasserstein(a, b, 128, proj));
  }
  const double floor = *std::max_element(floors.begin(), floors.end());

  Rng ref_rng(99), proj(111);
  const auto ref = target.sample_n(n, ref_rng);
  const double sw = sliced_wasserstein(generated, ref, 128, proj);
  REQUIRE(sw < 1.5 * floor);
}
