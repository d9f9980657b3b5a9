#ifndef DAMC_TARGETS_HPP
#define DAMC_TARGETS_HPP

#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

#include "damc/gaussian_mixture.hpp"
#include "damc/noise_schedule.hpp"

namespace damc {

// Benchmark target families. TwoModes: imbalanced bimodal mixture with
// weights (2/3, 1/3), means -/+ a*1_d and linearly graded diagonal
// covariances. ManyModes: n_modes components at uniform-random means in
// [-L, L]^d, isotropic 0.5 I covariance, geometric weights with w_L/w_1 = 3.
struct TwoModesSpec {
  double a = 5.0;
  int dim = 16;
};

struct ManyModesSpec {
  int n_modes = 16;
  int dim = 32;
  std::uint64_t mode_seed = 7;
};

struct TargetSpec {
  std::variant<TwoModesSpec, ManyModesSpec> kind = TwoModesSpec{};
  bool standardized = true;
};

inline GaussianMixture build_two_modes(const TwoModesSpec& s) {
  if (s.dim < 1) throw std::invalid_argument("TwoModes: dim < 1");
  if (!(s.a > 0.0)) throw std::invalid_argument("TwoModes: a <= 0");
  const int d = s.dim;
  const double var_hi = 0.2, var_lo = 0.01;
  Vec v1(d), v2(d);
  for (int j = 0; j < d; ++j) {
    // 1-indexed gradient: entry i carries (i/d) var_hi + ((d-i)/d) var_lo.
    const double i = static_cast<double>(j + 1);
    v1[j] = (i / d) * var_hi + ((d - i) / d) * var_lo;
  }
  for (int j = 0; j < d; ++j) v2[j] = v1[d - 1 - j];
  return GaussianMixture({2.0 / 3.0, 1.0 / 3.0}, {Vec(d, -s.a), Vec(d, s.a)},
                         {std::move(v1), std::move(v2)});
}

inline GaussianMixture build_many_modes(const ManyModesSpec& s) {
  if (s.dim < 1) throw std::invalid_argument("ManyModes: dim < 1");
  if (s.n_modes < 3) throw std::invalid_argument("ManyModes: n_modes < 3");
  const int L = s.n_modes, d = s.dim;
  Rng rng(mix_seed(s.mode_seed, 0x4d616e794d6fULL));
  std::vector<Vec> means(L, Vec(d));
  for (int l = 0; l < L; ++l)
    for (int j = 0; j < d; ++j) means[l][j] = (2.0 * rng.uniform() - 1.0) * L;
  // Strictly increasing geometric weights with ratio w_L / w_1 = 3.
  const double rho = std::pow(3.0, 1.0 / (L - 1));
  Vec w(L);
  double sum = 0.0;
  for (int l = 0; l < L; ++l) {
    w[l] = std::pow(rho, l);
    sum += w[l];
  }
  for (double& x : w) x /= sum;
  return GaussianMixture(std::move(w), std::move(means),
                         std::vector<Vec>(L, Vec(d, 0.5)));
}

inline GaussianMixture build_target(const TargetSpec& spec) {
  GaussianMixture gmm = std::holds_alternative<TwoModesSpec>(spec.kind)
                            ? build_two_modes(std::get<TwoModesSpec>(spec.kind))
                            : build_many_modes(std::get<ManyModesSpec>(spec.kind));
  return spec.standardized ? standardize(gmm) : gmm;
}

// Exact diffused marginal p_t: convolution of the mixture with the noising
// kernel scales means by S(t) and maps variances to S(t)^2 v + sigma(t)^2,
// where sigma(t) is the total noise std. Weights are unchanged for all t.
inline GaussianMixture diffuse(const GaussianMixture& gmm, const NoiseSchedule& sched,
                               double t) {
  if (t < 0.0 || t > sched.horizon + 1e-12)
    throw std::invalid_argument("diffuse: t outside [0, T]");
  const ScheduleCoeffs c = schedule_coeffs(sched, t);
  std::vector<Vec> means = gmm.means();
  std::vector<Vec> vars = gmm.var_diags();
  const double s2 = c.S * c.S, n2 = c.sigma * c.sigma;
  for (std::size_t l = 0; l < means.size(); ++l)
    for (int j = 0; j < gmm.dim(); ++j) {
      means[l][j] *= c.S;
      vars[l][j] = s2 * vars[l][j] + n2;
    }
  return GaussianMixture(gmm.weights(), std::move(means), std::move(vars));
}

}  // namespace damc

#endif
