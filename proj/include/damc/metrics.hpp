#ifndef DAMC_METRICS_HPP
#define DAMC_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "damc/gaussian_mixture.hpp"
#include "damc/rng.hpp"
#include "damc/vec.hpp"

namespace damc {

struct MetricsReport {
  double sw2 = 0.0;
  double mode_weight_abs_err = 0.0;
  double weight_hist_tv = 0.0;
  double ess_fraction = 1.0;
  int n_projections = 0;
};

// Self-normalized effective sample size fraction, computed in log space:
// ESS/N = 1 / (N sum w_bar^2).
inline double ess_fraction(const Vec& log_weights) {
  const int n = static_cast<int>(log_weights.size());
  if (n == 0) throw std::invalid_argument("ess_fraction: empty weights");
  const double lse = logsumexp(log_weights);
  if (!std::isfinite(lse)) throw std::runtime_error("ess_fraction: all weights are zero");
  double sum_sq = 0.0;
  for (double lw : log_weights) {
    const double w = std::exp(lw - lse);
    sum_sq += w * w;
  }
  return 1.0 / (sum_sq * n);
}

inline Vec normalized_weights_from_log(const Vec& log_weights) {
  const double lse = logsumexp(log_weights);
  Vec w(log_weights.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights[i] - lse);
  return w;
}

namespace detail {

// Squared 1-D Wasserstein-2 between weighted atoms by quantile coupling.
// Values arrive unsorted; weights must be normalized.
inline double w2_squared_1d(Vec va, Vec wa, Vec vb, Vec wb) {
  const std::size_t na = va.size(), nb = vb.size();
  std::vector<std::size_t> ia(na), ib(nb);
  std::iota(ia.begin(), ia.end(), 0);
  std::iota(ib.begin(), ib.end(), 0);
  std::sort(ia.begin(), ia.end(), [&](std::size_t x, std::size_t y) { return va[x] < va[y]; });
  std::sort(ib.begin(), ib.end(), [&](std::size_t x, std::size_t y) { return vb[x] < vb[y]; });

  double acc = 0.0;
  std::size_t i = 0, j = 0;
  double ra = wa[ia[0]], rb = wb[ib[0]];
  while (i < na && j < nb) {
    const double q = std::min(ra, rb);
    const double d = va[ia[i]] - vb[ib[j]];
    acc += q * d * d;
    ra -= q;
    rb -= q;
    if (ra <= 1e-15) {
      ++i;
      if (i < na) ra = wa[ia[i]];
    }
    if (rb <= 1e-15) {
      ++j;
      if (j < nb) rb = wb[ib[j]];
    }
  }
  return acc;
}

}  // namespace detail

// Sliced Wasserstein-2: sqrt of the average over random unit directions of
// the squared 1-D W2 between the projected (weighted) empirical measures.
inline double sliced_wasserstein(const std::vector<Vec>& X, const Vec& weights_x,
                                 const std::vector<Vec>& Y, const Vec& weights_y,
                                 int n_projections, Rng& rng) {
  if (X.empty() || Y.empty()) throw std::invalid_argument("sliced_wasserstein: empty input");
  const int d = static_cast<int>(X[0].size());
  if (static_cast<int>(Y[0].size()) != d)
    throw std::invalid_argument("sliced_wasserstein: dimension mismatch");
  Vec wx = weights_x, wy = weights_y;
  if (wx.empty()) wx.assign(X.size(), 1.0 / X.size());
  if (wy.empty()) wy.assign(Y.size(), 1.0 / Y.size());

  double total = 0.0;
  Vec theta(d), px(X.size()), py(Y.size());
  for (int p = 0; p < n_projections; ++p) {
    double nrm = 0.0;
    for (int j = 0; j < d; ++j) {
      theta[j] = rng.normal();
      nrm += theta[j] * theta[j];
    }
    nrm = std::sqrt(nrm);
    for (int j = 0; j < d; ++j) theta[j] /= nrm;
    for (std::size_t i = 0; i < X.size(); ++i) px[i] = dot(theta, X[i]);
    for (std::size_t i = 0; i < Y.size(); ++i) py[i] = dot(theta, Y[i]);
    total += detail::w2_squared_1d(px, wx, py, wy);
  }
  return std::sqrt(total / n_projections);
}

inline double sliced_wasserstein(const std::vector<Vec>& X, const std::vector<Vec>& Y,
                                 int n_projections, Rng& rng) {
  return sliced_wasserstein(X, {}, Y, {}, n_projections, rng);
}

namespace detail {

inline int nearest_component(const GaussianMixture& target, const Vec& x) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int l = 0; l < target.n_components(); ++l) {
    double d2 = 0.0;
    for (int j = 0; j < target.dim(); ++j) {
      const double d = x[j] - target.means()[l][j];
      d2 += d * d;
    }
    if (d2 < best_d) {
      best_d = d2;
      best = l;
    }
  }
  return best;
}

inline Vec mode_histogram(const std::vector<Vec>& points, const Vec& weights,
                          const GaussianMixture& target) {
  Vec w = weights;
  if (w.empty()) w.assign(points.size(), 1.0 / points.size());
  Vec hist(target.n_components(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    hist[nearest_component(target, points[i])] += w[i];
    total += w[i];
  }
  for (double& h : hist) h /= total;
  return hist;
}

}  // namespace detail

// |w_hat - w_strongest| with nearest-mean mode assignment.
inline double mode_weight_error(const std::vector<Vec>& points, const Vec& weights,
                                const GaussianMixture& target) {
  if (target.n_components() < 2)
    throw std::invalid_argument("mode_weight_error: need at least two components");
  if (points.empty()) throw std::invalid_argument("mode_weight_error: empty ensemble");
  const Vec hist = detail::mode_histogram(points, weights, target);
  const int s = target.strongest_component();
  return std::abs(hist[s] - target.weights()[s]);
}

// Total variation between the target mode weights and their nearest-mean
// Monte Carlo estimate.
inline double weight_histogram_tv(const std::vector<Vec>& points, const Vec& weights,
                                  const GaussianMixture& target) {
  if (points.empty()) throw std::invalid_argument("weight_histogram_tv: empty ensemble");
  const Vec hist = detail::mode_histogram(points, weights, target);
  double tv = 0.0;
  for (int l = 0; l < target.n_components(); ++l)
    tv += std::abs(hist[l] - target.weights()[l]);
  return 0.5 * tv;
}

}  // namespace damc

#endif
