#ifndef DAMC_RESAMPLE_HPP
#define DAMC_RESAMPLE_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "damc/rng.hpp"
#include "damc/vec.hpp"

namespace damc {

// Systematic resampling: one uniform offset, N evenly spaced positions
// against the cumulative normalized weights. Returns ancestor indices.
inline std::vector<int> systematic_resample(const Vec& log_weights, Rng& rng) {
  const int n = static_cast<int>(log_weights.size());
  if (n == 0) throw std::invalid_argument("systematic_resample: empty weights");
  const double lse = logsumexp(log_weights);
  if (!std::isfinite(lse))
    throw std::runtime_error("systematic_resample: all weights are zero");
  Vec cum(n);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += std::exp(log_weights[i] - lse);
    cum[i] = acc;
  }
  cum[n - 1] = 1.0;

  std::vector<int> idx(n);
  const double u0 = rng.uniform();
  int j = 0;
  for (int i = 0; i < n; ++i) {
    const double u = (i + u0) / n;
    while (cum[j] < u) ++j;
    idx[i] = j;
  }
  return idx;
}

}  // namespace damc

#endif
