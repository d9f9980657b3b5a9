#ifndef DAMC_ORACLE_HPP
#define DAMC_ORACLE_HPP

#include <functional>
#include <memory>

#include "damc/gaussian_mixture.hpp"
#include "damc/vec.hpp"

namespace damc {

// Callable bundle for one density: log-density (possibly unnormalized),
// score, and optional curvature oracles. Empty functions mean "not
// available"; transitions that need them must check.
struct LevelOracle {
  std::function<double(const Vec&)> log_density;
  std::function<Vec(const Vec&)> score;
  std::function<Vec(const Vec&)> hessian_diag;
  std::function<Vec(const Vec&, const Vec&)> hessian_vp;
};

inline LevelOracle oracle_of(std::shared_ptr<const GaussianMixture> g) {
  LevelOracle o;
  o.log_density = [g](const Vec& x) { return g->log_density(x); };
  o.score = [g](const Vec& x) { return g->score(x); };
  o.hessian_diag = [g](const Vec& x) { return g->hessian_diag(x); };
  o.hessian_vp = [g](const Vec& x, const Vec& v) { return g->hessian_vp(x, v); };
  return o;
}

}  // namespace damc

#endif
