#include <doctest.h>

#include <gsl/gsl_cdf.h>
#include <omp.h>

#include <cmath>
#include <vector>

#include "hazardband/brownian.hpp"
#include "hazardband/estimator.hpp"
#include "support.hpp"

using namespace hazardband;

namespace {

double kolmogorov_cdf(double x) {
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) s += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * x * x);
  return 1.0 - s;
}

double kolmogorov_quantile(double p) {
  double lo = 0.5, hi = 3.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Values from 10^6 paths on a 10^4-point grid.
constexpr double kRecordedCentral = 1.35180;   // hall-wellner on [0.2, 0.8]
constexpr double kRecordedD0Aalen = 1.27438;   // hall-wellner on [0.25, 0.52]

}  // namespace

TEST_CASE("phi transform") {
  const StepCurve zero = StepCurve::constant(0.0, 1.0);
  CHECK(phi_hat(zero, 0.5) == 0.0);

  const auto fit = nelson_aalen(hazardband::testing::d0_path());
  CHECK(phi_hat(fit.var_aalen, 2.0) == doctest::Approx(0.52).epsilon(1e-14));

  double prev = -1.0;
  for (double v : {0.0, 0.1, 1.0, 10.0, 1e3, 1e9}) {
    const double phi = phi_hat(StepCurve::constant(v, 1.0), 0.0);
    CHECK(phi > prev);
    CHECK(phi < 1.0);
    prev = phi;
  }
  CHECK(prev == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("Kolmogorov series oracle") {
  CHECK(kolmogorov_quantile(0.95) == doctest::Approx(1.3581).epsilon(1e-4));
}

TEST_CASE("bridge grid") {
  const auto g = bridge_grid(0.2, 0.8, 7);
  REQUIRE(g.size() == 7);
  CHECK(g.front() == 0.2);
  CHECK(g.back() == 0.8);
  CHECK(g[3] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(bridge_grid(0.3, 0.3, 100) == std::vector<double>{0.3});
}

TEST_CASE("bridge path construction") {
  const std::vector<double> grid{0.5};
  const std::vector<double> z{1.2, -0.4};
  std::vector<double> out(1);
  bridge_path(z, grid, out);
  CHECK(out[0] == doctest::Approx(std::sqrt(0.5) * (1.2 + 0.4) / 2.0).epsilon(1e-14));

  const std::vector<double> zeros(grid.size() + 1, 0.0);
  const std::vector<double> w{1.0};
  std::vector<double> scratch(1);
  CHECK(bridge_path_sup(zeros, grid, w, scratch) == 0.0);

  const auto fine = bridge_grid(0.0, 1.0, 101);
  const std::vector<double> zero101(fine.size() + 1, 0.0);
  const std::vector<double> ones(fine.size(), 1.0);
  std::vector<double> scratch101(fine.size());
  CHECK(bridge_path_sup(zero101, fine, ones, scratch101) == 0.0);
}

TEST_CASE("single-point interval reduces to a half-normal quantile") {
  for (double phi : {0.3, 0.52}) {
    BridgeQuantileSpec spec{BridgeWeight::hall_wellner, phi, phi, 0.95, 200000, 2001, {11, 0, 0}};
    const double expected = std::sqrt(phi * (1.0 - phi)) * gsl_cdf_ugaussian_Pinv(0.975);
    CHECK(std::fabs(bridge_quantile(spec) - expected) < 0.01);
    spec.weight = BridgeWeight::equal_precision;
    CHECK(std::fabs(bridge_quantile(spec) - gsl_cdf_ugaussian_Pinv(0.975)) < 0.02);
  }
}

TEST_CASE("sup over [0, 1] approaches the Kolmogorov quantile") {
  BridgeQuantileSpec spec{BridgeWeight::hall_wellner, 0.0, 1.0, 0.95, 50000, 10001, {12, 0, 0}};
  CHECK(std::fabs(bridge_quantile(spec) - kolmogorov_quantile(0.95)) < 0.02);
}

TEST_CASE("regression against recorded dense-grid values") {
  BridgeQuantileSpec central{BridgeWeight::hall_wellner, 0.2, 0.8, 0.95, 50000, 10001, {13, 0, 0}};
  CHECK(std::fabs(bridge_quantile(central) - kRecordedCentral) < 0.01);

  const auto fit = nelson_aalen(hazardband::testing::d0_path());
  const double c = bridge_band_critical_value(fit, VarianceKind::aalen, 1.0, 2.0, BridgeWeight::hall_wellner, 0.95,
                                              50000, 10001, {14, 0, 0});
  CHECK(std::fabs(c - kRecordedD0Aalen) < 0.01);
}

TEST_CASE("greenwood gives a narrower phi interval than aalen") {
  const auto fit = nelson_aalen(hazardband::testing::d0_path());
  const double aalen = phi_hat(fit.var_aalen, 2.0) - phi_hat(fit.var_aalen, 1.0);
  const double greenwood = phi_hat(fit.var_greenwood, 2.0) - phi_hat(fit.var_greenwood, 1.0);
  CHECK(greenwood < aalen);
}

TEST_CASE("invalid bridge requests") {
  BridgeQuantileSpec spec{BridgeWeight::equal_precision, 0.0, 0.5, 0.95, 10, 11, {}};
  CHECK_THROWS_AS(bridge_quantile(spec), std::domain_error);
  spec = {BridgeWeight::hall_wellner, 0.6, 0.5, 0.95, 10, 11, {}};
  CHECK_THROWS_AS(bridge_quantile(spec), std::invalid_argument);
  spec = {BridgeWeight::hall_wellner, 0.1, 0.5, 0.95, 0, 11, {}};
  CHECK_THROWS_AS(bridge_quantile(spec), std::invalid_argument);

  const auto fit = nelson_aalen(hazardband::testing::d0_path());
  CHECK_THROWS_AS(bridge_band_critical_value(fit, VarianceKind::aalen, 0.5, 2.0, BridgeWeight::hall_wellner, 0.95,
                                             10, 11, {}),
                  std::domain_error);
}

TEST_CASE("parallel bridge draws match the serial reference on any thread count") {
  const BridgeQuantileSpec spec{BridgeWeight::hall_wellner, 0.1, 0.9, 0.95, 3000, 257, {15, 2, 0}};
  const auto reference = serial::bridge_sup_draws(spec);
  const int saved = omp_get_max_threads();
  for (int threads : {1, 3}) {
    omp_set_num_threads(threads);
    const auto draws = bridge_sup_draws(spec);
    CHECK(draws.hall_wellner == reference.hall_wellner);
    CHECK(draws.equal_precision == reference.equal_precision);
  }
  omp_set_num_threads(saved);
  CHECK(reference.equal_precision.size() == 3000);

  const BridgeQuantileSpec full{BridgeWeight::hall_wellner, 0.0, 1.0, 0.95, 100, 33, {15, 2, 0}};
  CHECK(bridge_sup_draws(full).equal_precision.empty());
}
