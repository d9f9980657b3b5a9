#ifndef DAMC_MALA_HPP
#define DAMC_MALA_HPP

#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "damc/oracle.hpp"
#include "damc/rng.hpp"
#include "damc/vec.hpp"

namespace damc {

struct MalaOptions {
  int n_steps = 160;
  double step = 0.01;
  double target_accept = 0.70;
  int keep_last = 0;  // trajectory tail length to retain (0 = none)
  bool adapt = true;
};

struct MalaResult {
  Vec x;
  double accept_rate = 0.0;
  double step = 0.0;  // adapted step size after the run
  std::vector<Vec> tail;
};

// Metropolis-adjusted Langevin chain at one level. Proposal
// x' = x + h score(x) + sqrt(2h) xi with the exact MH correction; the step
// size is multiplied by 1.02 when the acceptance probability exceeds the
// target and by 0.98 otherwise, clipped to [1e-6, 1].
inline MalaResult mala_chain(const LevelOracle& level, Vec x0, const MalaOptions& opt,
                             Rng& rng) {
  double logp = level.log_density(x0);
  if (!std::isfinite(logp))
    throw std::invalid_argument("mala_chain: non-finite log-density at the initial point");
  Vec sc = level.score(x0);
  double h = opt.step;
  const int d = static_cast<int>(x0.size());

  MalaResult res;
  res.x = std::move(x0);
  std::deque<Vec> tail;
  double accepted = 0.0;

  Vec prop(d), noise(d);
  for (int step = 0; step < opt.n_steps; ++step) {
    for (int j = 0; j < d; ++j) noise[j] = rng.normal();
    for (int j = 0; j < d; ++j)
      prop[j] = res.x[j] + h * sc[j] + std::sqrt(2.0 * h) * noise[j];

    const double logp_prop = level.log_density(prop);
    double log_ratio = -std::numeric_limits<double>::infinity();
    Vec sc_prop;
    if (std::isfinite(logp_prop)) {
      sc_prop = level.score(prop);
      // log q(x | x') - log q(x' | x); the Gaussian normalizers cancel.
      double fwd = 0.0, bwd = 0.0;
      for (int j = 0; j < d; ++j) {
        const double df = prop[j] - res.x[j] - h * sc[j];
        const double db = res.x[j] - prop[j] - h * sc_prop[j];
        fwd += df * df;
        bwd += db * db;
      }
      log_ratio = logp_prop - logp + (fwd - bwd) / (4.0 * h);
    }
    const double alpha = std::min(1.0, std::exp(log_ratio));
    if (rng.uniform() < alpha) {
      res.x = prop;
      logp = logp_prop;
      sc = std::move(sc_prop);
      accepted += 1.0;
    }
    if (opt.adapt) {
      h *= alpha > opt.target_accept ? 1.02 : 0.98;
      h = std::min(1.0, std::max(1e-6, h));
    }
    if (opt.keep_last > 0) {
      tail.push_back(res.x);
      if (static_cast<int>(tail.size()) > opt.keep_last) tail.pop_front();
    }
  }
  res.accept_rate = opt.n_steps > 0 ? accepted / opt.n_steps : 0.0;
  res.step = h;
  res.tail.assign(tail.begin(), tail.end());
  return res;
}

}  // namespace damc

#endif
