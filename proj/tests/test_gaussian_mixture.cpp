#include <catch2/catch_amalgamated.hpp>

#include "damc/gaussian_mixture.hpp"
#include "damc/targets.hpp"
#include "test_helpers.hpp"

using namespace damc;

TEST_CASE("standard Gaussian log-density at the origin") {
  for (int d : {1, 4, 16}) {
    const GaussianMixture g = isotropic_gaussian(d);
    REQUIRE(g.log_density(Vec(d, 0.0)) == Catch::Approx(-0.5 * d * kLog2Pi).epsilon(1e-14));
  }
}

TEST_CASE("symmetric two-component mixture at the midpoint") {
  const GaussianMixture g({0.5, 0.5}, {{-2.0}, {2.0}}, {{0.7}, {0.7}});
  // At the midpoint both components have the same density, so the mixture
  // equals the average of the two, i.e. one component density.
  const double comp = -0.5 * (std::log(0.7) + kLog2Pi) - 0.5 * 4.0 / 0.7;
  REQUIRE(g.log_density({0.0}) == Catch::Approx(comp).epsilon(1e-13));
}

TEST_CASE("d=2 mixture density integrates to one by trapezoidal quadrature") {
  const GaussianMixture g({0.4, 0.6}, {{-1.0, 0.5}, {1.2, -0.3}}, {{0.4, 0.8}, {0.3, 0.5}});
  const double lo = -9.0, hi = 9.0;
  const int n = 901;
  const double h = (hi - lo) / (n - 1);
  double sum = 0.0;
  Vec x(2);
  for (int i = 0; i < n; ++i) {
    x[0] = lo + i * h;
    const double wx = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    for (int j = 0; j < n; ++j) {
      x[1] = lo + j * h;
      const double wy = (j == 0 || j == n - 1) ? 0.5 : 1.0;
      sum += wx * wy * std::exp(g.log_density(x));
    }
  }
  REQUIRE(sum * h * h == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("score and Hessian diagonal match finite differences") {
  const GaussianMixture g = build_target({TwoModesSpec{2.5, 4}, true});
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Vec x(4);
    for (auto& v : x) v = 2.5 * rng.normal();
    const Vec fd = test::fd_gradient([&](const Vec& y) { return g.log_density(y); }, x);
    REQUIRE(test::rel_err(g.score(x), fd) < 1e-5);
    const Vec fdh = test::fd_jacobian_diag([&](const Vec& y) { return g.score(y); }, x);
    REQUIRE(test::rel_err(g.hessian_diag(x), fdh) < 1e-5);
  }
}

TEST_CASE("standard Gaussian oracles are linear") {
  const GaussianMixture g = isotropic_gaussian(5);
  const Vec x{0.3, -1.2, 0.0, 2.0, -0.4};
  const Vec v{1.0, 0.5, -0.5, 0.0, 2.0};
  const Vec s = g.score(x);
  const Vec h = g.hessian_diag(x);
  const Vec hv = g.hessian_vp(x, v);
  for (int j = 0; j < 5; ++j) {
    REQUIRE(s[j] == Catch::Approx(-x[j]).margin(1e-14));
    REQUIRE(h[j] == Catch::Approx(-1.0).margin(1e-14));
    REQUIRE(hv[j] == Catch::Approx(-v[j]).margin(1e-14));
  }
}

TEST_CASE("Hessian-vector product against basis vectors recovers the diagonal") {
  const GaussianMixture g = build_target({TwoModesSpec{1.0, 8}, true});
  Rng rng(3);
  Vec x(8);
  for (auto& v : x) v = rng.normal();
  const Vec hd = g.hessian_diag(x);
  for (int i = 0; i < 8; ++i) {
    Vec e(8, 0.0);
    e[i] = 1.0;
    REQUIRE(g.hessian_vp(x, e)[i] == Catch::Approx(hd[i]).margin(1e-12));
  }
}

TEST_CASE("exact sampling moments") {
  const GaussianMixture g = isotropic_gaussian(2);
  Rng rng(42);
  const auto xs = g.sample_n(100000, rng);
  for (int j = 0; j < 2; ++j) {
    Vec coord(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) coord[i] = xs[i][j];
    REQUIRE(std::abs(test::mean_of(coord)) < 0.02);
    REQUIRE(std::abs(test::var_of(coord) - 1.0) < 0.02);
  }
}

TEST_CASE("TwoModes d=1 unstandardized strong-mode fraction") {
  const GaussianMixture g = build_target({TwoModesSpec{5.0, 1}, false});
  Rng rng(7);
  const auto xs = g.sample_n(100000, rng);
  double frac = 0.0;
  for (const auto& x : xs)
    if (x[0] < 0.0) frac += 1.0;
  frac /= xs.size();
  REQUIRE(std::abs(frac - 2.0 / 3.0) < 0.01);
}

TEST_CASE("single sample has the right shape") {
  const GaussianMixture g = build_target({TwoModesSpec{1.0, 3}, true});
  Rng rng(0);
  const auto xs = g.sample_n(1, rng);
  REQUIRE(xs.size() == 1);
  REQUIRE(xs[0].size() == 3);
}

TEST_CASE("standardization yields exact zero mean and unit variance") {
  for (bool many : {false, true}) {
    const GaussianMixture g = many ? build_target({ManyModesSpec{5, 3, 9}, true})
                                   : build_target({TwoModesSpec{5.0, 3}, true});
    for (double m : g.mean()) REQUIRE(std::abs(m) < 1e-12);
    for (double v : g.marginal_var()) REQUIRE(v == Catch::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("standardization is idempotent") {
  const GaussianMixture g = build_target({TwoModesSpec{2.5, 4}, true});
  const GaussianMixture g2 = standardize(g);
  for (int l = 0; l < g.n_components(); ++l)
    for (int j = 0; j < g.dim(); ++j) {
      REQUIRE(std::abs(g2.means()[l][j] - g.means()[l][j]) < 1e-10);
      REQUIRE(std::abs(g2.var_diags()[l][j] - g.var_diags()[l][j]) < 1e-10);
    }
}

TEST_CASE("invalid mixtures are rejected") {
  REQUIRE_THROWS_AS(GaussianMixture({0.5, 0.6}, {{0.0}, {1.0}}, {{1.0}, {1.0}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(GaussianMixture({1.0}, {{0.0}}, {{-1.0}}), std::invalid_argument);
  const GaussianMixture g = isotropic_gaussian(2);
  REQUIRE_THROWS_AS(g.log_density({0.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(g.score({0.0, 0.0, 0.0}), std::invalid_argument);
}
