#ifndef DAMC_GAUSSIAN_MIXTURE_HPP
#define DAMC_GAUSSIAN_MIXTURE_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "damc/rng.hpp"
#include "damc/vec.hpp"

namespace damc {

// Diagonal-covariance Gaussian mixture with exact oracles: log-density,
// score, Hessian diagonal, Hessian-vector products, and i.i.d. sampling.
// Component responsibilities are always formed in log space.
class GaussianMixture {
 public:
  GaussianMixture(Vec weights, std::vector<Vec> means, std::vector<Vec> var_diags)
      : weights_(std::move(weights)),
        means_(std::move(means)),
        var_diags_(std::move(var_diags)) {
    if (weights_.empty() || means_.size() != weights_.size() ||
        var_diags_.size() != weights_.size())
      throw std::invalid_argument("GaussianMixture: inconsistent component counts");
    dim_ = static_cast<int>(means_[0].size());
    if (dim_ < 1) throw std::invalid_argument("GaussianMixture: dim < 1");
    double wsum = 0.0;
    for (double w : weights_) {
      if (!(w > 0.0)) throw std::invalid_argument("GaussianMixture: weights must be > 0");
      wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-12)
      throw std::invalid_argument("GaussianMixture: weights must sum to 1");
    for (std::size_t l = 0; l < means_.size(); ++l) {
      if (static_cast<int>(means_[l].size()) != dim_ ||
          static_cast<int>(var_diags_[l].size()) != dim_)
        throw std::invalid_argument("GaussianMixture: component dimension mismatch");
      for (double v : var_diags_[l])
        if (!(v > 0.0)) throw std::invalid_argument("GaussianMixture: variances must be > 0");
    }
    log_weights_.resize(weights_.size());
    comp_log_norm_.resize(weights_.size());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      log_weights_[l] = std::log(weights_[l]);
      double ln = 0.0;
      for (double v : var_diags_[l]) ln += std::log(v);
      comp_log_norm_[l] = -0.5 * (dim_ * kLog2Pi + ln);
    }
  }

  int dim() const { return dim_; }
  int n_components() const { return static_cast<int>(weights_.size()); }
  const Vec& weights() const { return weights_; }
  const std::vector<Vec>& means() const { return means_; }
  const std::vector<Vec>& var_diags() const { return var_diags_; }

  // log w_l + log N(x; m_l, Sigma_l) for each component.
  Vec component_log_joint(const Vec& x) const {
    check_dim(x);
    const std::size_t L = weights_.size();
    Vec lj(L);
    for (std::size_t l = 0; l < L; ++l) {
      double q = 0.0;
      for (int j = 0; j < dim_; ++j) {
        const double d = x[j] - means_[l][j];
        q += d * d / var_diags_[l][j];
      }
      lj[l] = log_weights_[l] + comp_log_norm_[l] - 0.5 * q;
    }
    return lj;
  }

  double log_density(const Vec& x) const { return logsumexp(component_log_joint(x)); }

  Vec score(const Vec& x) const {
    const Vec resp = responsibilities(x);
    Vec s(dim_, 0.0);
    for (std::size_t l = 0; l < weights_.size(); ++l)
      for (int j = 0; j < dim_; ++j)
        s[j] += resp[l] * (means_[l][j] - x[j]) / var_diags_[l][j];
    return s;
  }

  // Diagonal of the Hessian of log density:
  //   sum_l r_l (g_lj^2 - 1/v_lj) - s_j^2,  g_l the component score.
  Vec hessian_diag(const Vec& x) const {
    const Vec resp = responsibilities(x);
    Vec s(dim_, 0.0), h(dim_, 0.0);
    for (std::size_t l = 0; l < weights_.size(); ++l)
      for (int j = 0; j < dim_; ++j) {
        const double g = (means_[l][j] - x[j]) / var_diags_[l][j];
        s[j] += resp[l] * g;
        h[j] += resp[l] * (g * g - 1.0 / var_diags_[l][j]);
      }
    for (int j = 0; j < dim_; ++j) h[j] -= s[j] * s[j];
    return h;
  }

  // Hessian-vector product without materializing any matrix:
  //   H v = sum_l r_l [ g_l (g_l . v) - v / v_l ] - s (s . v).
  Vec hessian_vp(const Vec& x, const Vec& v) const {
    check_dim(v);
    const Vec resp = responsibilities(x);
    Vec s(dim_, 0.0), out(dim_, 0.0);
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      double gv = 0.0;
      for (int j = 0; j < dim_; ++j)
        gv += (means_[l][j] - x[j]) / var_diags_[l][j] * v[j];
      for (int j = 0; j < dim_; ++j) {
        const double g = (means_[l][j] - x[j]) / var_diags_[l][j];
        s[j] += resp[l] * g;
        out[j] += resp[l] * (g * gv - v[j] / var_diags_[l][j]);
      }
    }
    const double sv = dot(s, v);
    for (int j = 0; j < dim_; ++j) out[j] -= s[j] * sv;
    return out;
  }

  Vec sample(Rng& rng) const {
    const std::size_t l = sample_component(rng);
    Vec x(dim_);
    for (int j = 0; j < dim_; ++j)
      x[j] = means_[l][j] + std::sqrt(var_diags_[l][j]) * rng.normal();
    return x;
  }

  std::vector<Vec> sample_n(int n, Rng& rng) const {
    if (n < 0) throw std::invalid_argument("sample_n: n < 0");
    std::vector<Vec> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(sample(rng));
    return out;
  }

  // Exact mixture mean and per-coordinate variance.
  Vec mean() const {
    Vec m(dim_, 0.0);
    for (std::size_t l = 0; l < weights_.size(); ++l)
      for (int j = 0; j < dim_; ++j) m[j] += weights_[l] * means_[l][j];
    return m;
  }
  Vec marginal_var() const {
    const Vec m = mean();
    Vec v(dim_, 0.0);
    for (std::size_t l = 0; l < weights_.size(); ++l)
      for (int j = 0; j < dim_; ++j)
        v[j] += weights_[l] * (var_diags_[l][j] + means_[l][j] * means_[l][j]);
    for (int j = 0; j < dim_; ++j) v[j] -= m[j] * m[j];
    return v;
  }

  // Index of the heaviest component.
  int strongest_component() const {
    int best = 0;
    for (std::size_t l = 1; l < weights_.size(); ++l)
      if (weights_[l] > weights_[best]) best = static_cast<int>(l);
    return best;
  }

 private:
  void check_dim(const Vec& x) const {
    if (static_cast<int>(x.size()) != dim_)
      throw std::invalid_argument("GaussianMixture: input dimension mismatch, expected " +
                                  std::to_string(dim_));
  }

  Vec responsibilities(const Vec& x) const {
    Vec lj = component_log_joint(x);
    const double lse = logsumexp(lj);
    for (double& v : lj) v = std::exp(v - lse);
    return lj;
  }

  std::size_t sample_component(Rng& rng) const {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      acc += weights_[l];
      if (u <= acc) return l;
    }
    return weights_.size() - 1;
  }

  Vec weights_;
  std::vector<Vec> means_;
  std::vector<Vec> var_diags_;
  int dim_ = 0;
  Vec log_weights_;
  Vec comp_log_norm_;
};

// Standard Gaussian N(0, scale^2 I_d) as a one-component mixture.
inline GaussianMixture isotropic_gaussian(int dim, double var = 1.0) {
  return GaussianMixture({1.0}, {Vec(dim, 0.0)}, {Vec(dim, var)});
}

// Affine standardization x -> D^{-1/2}(x - m) using exact mixture moments,
// so the result has zero mean and unit per-coordinate variance.
inline GaussianMixture standardize(const GaussianMixture& gmm) {
  const Vec m = gmm.mean();
  const Vec v = gmm.marginal_var();
  std::vector<Vec> means = gmm.means();
  std::vector<Vec> vars = gmm.var_diags();
  for (std::size_t l = 0; l < means.size(); ++l)
    for (int j = 0; j < gmm.dim(); ++j) {
      means[l][j] = (means[l][j] - m[j]) / std::sqrt(v[j]);
      vars[l][j] = vars[l][j] / v[j];
    }
  return GaussianMixture(gmm.weights(), std::move(means), std::move(vars));
}

}  // namespace damc

#endif
