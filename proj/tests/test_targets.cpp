#include <catch2/catch_amalgamated.hpp>

#include "damc/targets.hpp"
#include "test_helpers.hpp"

using namespace damc;

TEST_CASE("TwoModes unstandardized parameters") {
  const int d = 8;
  const double a = 2.5;
  const GaussianMixture g = build_target({TwoModesSpec{a, d}, false});
  REQUIRE(g.n_components() == 2);
  REQUIRE(g.weights()[0] == Catch::Approx(2.0 / 3.0).epsilon(1e-15));
  REQUIRE(g.weights()[1] == Catch::Approx(1.0 / 3.0).epsilon(1e-15));
  for (int j = 0; j < d; ++j) {
    REQUIRE(g.means()[0][j] == Catch::Approx(-a));
    REQUIRE(g.means()[1][j] == Catch::Approx(a));
    const double i = j + 1;
    const double want = (i / d) * 0.2 + ((d - i) / d) * 0.01;
    REQUIRE(g.var_diags()[0][j] == Catch::Approx(want).epsilon(1e-15));
    REQUIRE(g.var_diags()[1][j] == Catch::Approx(g.var_diags()[0][d - 1 - j]).epsilon(1e-15));
  }
}

TEST_CASE("ManyModes weights form a geometric sequence with ratio 3") {
  const GaussianMixture g = build_target({ManyModesSpec{16, 4, 123}, false});
  REQUIRE(g.n_components() == 16);
  const Vec& w = g.weights();
  REQUIRE(w[15] / w[0] == Catch::Approx(3.0).epsilon(1e-12));
  for (int l = 1; l < 16; ++l) REQUIRE(w[l] > w[l - 1]);
  for (int l = 0; l < 16; ++l)
    for (int j = 0; j < 4; ++j) {
      REQUIRE(g.var_diags()[l][j] == Catch::Approx(0.5));
      REQUIRE(std::abs(g.means()[l][j]) <= 16.0);
    }
}

TEST_CASE("ManyModes means are reproducible for a fixed seed") {
  const GaussianMixture a = build_target({ManyModesSpec{8, 3, 5}, false});
  const GaussianMixture b = build_target({ManyModesSpec{8, 3, 5}, false});
  const GaussianMixture c = build_target({ManyModesSpec{8, 3, 6}, false});
  REQUIRE(a.means()[0] == b.means()[0]);
  REQUIRE(a.means()[0] != c.means()[0]);
}

TEST_CASE("target spec validation") {
  REQUIRE_THROWS_AS(build_target({TwoModesSpec{-1.0, 4}, true}), std::invalid_argument);
  REQUIRE_THROWS_AS(build_target({TwoModesSpec{1.0, 0}, true}), std::invalid_argument);
  REQUIRE_THROWS_AS(build_target({ManyModesSpec{2, 4, 0}, true}), std::invalid_argument);
}

TEST_CASE("diffuse at t=0 is the identity") {
  const GaussianMixture g = build_target({TwoModesSpec{5.0, 3}, true});
  const GaussianMixture gt = diffuse(g, NoiseSchedule::vp(), 0.0);
  for (int l = 0; l < 2; ++l)
    for (int j = 0; j < 3; ++j) {
      REQUIRE(gt.means()[l][j] == Catch::Approx(g.means()[l][j]).margin(1e-15));
      REQUIRE(gt.var_diags()[l][j] == Catch::Approx(g.var_diags()[l][j]).margin(1e-15));
    }
}

TEST_CASE("VP with unit volatility preserves a standardized Gaussian for all t") {
  const GaussianMixture g = isotropic_gaussian(4);
  const NoiseSchedule sched = NoiseSchedule::vp();
  for (double t : {0.05, 0.3, 0.55, 0.8, 1.0}) {
    const GaussianMixture gt = diffuse(g, sched, t);
    for (int j = 0; j < 4; ++j) {
      REQUIRE(gt.var_diags()[0][j] == Catch::Approx(1.0).epsilon(1e-12));
      REQUIRE(std::abs(gt.means()[0][j]) < 1e-15);
    }
  }
}

TEST_CASE("diffuse preserves component weights exactly") {
  const GaussianMixture g = build_target({TwoModesSpec{5.0, 1}, false});
  for (double t : {0.1, 0.5, 1.0}) {
    const GaussianMixture gt = diffuse(g, NoiseSchedule::vp(), t);
    REQUIRE(gt.weights()[0] == 2.0 / 3.0);
    REQUIRE(gt.weights()[1] == 1.0 / 3.0);
  }
}

TEST_CASE("diffuse converges to the target as t -> 0") {
  const GaussianMixture g = build_target({TwoModesSpec{2.5, 2}, true});
  const GaussianMixture gt = diffuse(g, NoiseSchedule::vp(), 1e-12);
  double dev = 0.0;
  for (int l = 0; l < 2; ++l)
    for (int j = 0; j < 2; ++j) {
      dev = std::max(dev, std::abs(gt.means()[l][j] - g.means()[l][j]));
      dev = std::max(dev, std::abs(gt.var_diags()[l][j] - g.var_diags()[l][j]));
    }
  REQUIRE(dev < 1e-10);
}

TEST_CASE("diffuse rejects out-of-range times") {
  const GaussianMixture g = isotropic_gaussian(2);
  REQUIRE_THROWS_AS(diffuse(g, NoiseSchedule::vp(), -0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(diffuse(g, NoiseSchedule::vp(), 1.1), std::invalid_argument);
}
