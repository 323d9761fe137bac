#include <doctest.h>

#include <cmath>
#include <limits>

#include "hazardband/bands.hpp"
#include "hazardband/simulate.hpp"
#include "support.hpp"

using namespace hazardband;

namespace {

ConstantHazardScenario equal_competing(std::size_t n) {
  ConstantHazardScenario s;
  s.name = "equal";
  s.alpha01_g1 = s.alpha02_g1 = 1.0;
  s.alpha01_g2 = s.alpha02_g2 = 1.0;
  s.tau = 0.6;
  s.target_censoring = 0.25;
  s.n1 = s.n2 = n;
  return s;
}

CountingPath larger_path() {
  CountingPath p;
  p.transition = {"0", "1"};
  for (int i = 1; i <= 12; ++i) {
    p.jump_times.push_back(0.5 * i);
    p.jump_sizes.push_back(1 + i % 2);
    p.at_risk.push_back(60 - 4 * i);
  }
  p.n_subjects = 60;
  p.tau = 7.0;
  return p;
}

}  // namespace

TEST_CASE("kind names and defaults") {
  for (BandKind k : {BandKind::ep_asymptotic, BandKind::hw_asymptotic, BandKind::ep_wild, BandKind::hw_wild,
                     BandKind::direct_wild, BandKind::diff_direct_wild}) {
    CHECK(parse_band_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_band_kind("nair"), std::invalid_argument);
  CHECK(default_variance(BandKind::ep_wild) == VarianceKind::aalen);
  CHECK(default_variance(BandKind::hw_asymptotic) == VarianceKind::greenwood);
  CHECK_FALSE(is_log_transformed(BandKind::direct_wild));
}

TEST_CASE("band grid holds t1, the jumps in (t1, t2] and t2") {
  const auto fit = nelson_aalen(hazardband::testing::d0_path());
  CHECK(band_grid(fit.estimate, {0.5, 2.5}) == std::vector<double>{0.5, 1.0, 2.0, 2.5});
  CHECK(band_grid(fit.estimate, {1.0, 2.0}) == std::vector<double>{1.0, 2.0});
}

TEST_CASE("direct band with zero critical value collapses to the estimate") {
  const auto fit = nelson_aalen(hazardband::testing::d0_path());
  const auto b = band_from_critical_value(fit, BandKind::direct_wild, {0.5, 3.0}, 0.95, 0.0, std::nullopt);
  for (double t : b.grid) {
    CHECK(b.lower(t) == fit.estimate(t));
    CHECK(b.upper(t) == fit.estimate(t));
  }
  CHECK_FALSE(b.variance_used.has_value());
}

TEST_CASE("hand-evaluated equal-precision bounds") {
  const auto fit = nelson_aalen(hazardband::testing::d0_path());
  const auto b = band_from_critical_value(fit, BandKind::ep_wild, {1.0, 3.0}, 0.95, 2.0, VarianceKind::aalen);
  const double h = 2.0 * std::sqrt(13.0 / 12.0) / (std::sqrt(3.0) * 5.0 / 6.0);
  CHECK(h == doctest::Approx(1.4422).epsilon(1e-4));
  CHECK(b.lower(2.0) == doctest::Approx(5.0 / 6.0 * std::exp(-h)).epsilon(1e-14));
  CHECK(b.upper(2.0) == doctest::Approx(5.0 / 6.0 * std::exp(h)).epsilon(1e-14));
  CHECK(b.lower(2.0) == doctest::Approx(0.1970).epsilon(1e-3));
  CHECK(b.upper(2.0) == doctest::Approx(3.5251).epsilon(1e-3));
}

TEST_CASE("hall-wellner bounds widen with the critical value") {
  const auto fit = nelson_aalen(larger_path());
  double prev = 0.0;
  for (double c : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    const auto b = band_from_critical_value(fit, BandKind::hw_wild, {1.0, 6.0}, 0.95, c, std::nullopt);
    const double width = b.upper(3.0) - b.lower(3.0);
    CHECK(width > prev);
    prev = width;
    const double a = fit.estimate(3.0);
    const double v = fit.var_aalen(3.0);
    CHECK(b.upper(3.0) == doctest::Approx(a * std::exp(c * (1 + v) / (std::sqrt(60.0) * a))).epsilon(1e-14));
  }
}

TEST_CASE("log bands cannot start before the first event") {
  const auto p = hazardband::testing::d0_path();
  BandRequest req;
  req.kind = BandKind::ep_wild;
  req.interval = {0.5, 2.0};
  req.replicates = 200;
  CHECK_THROWS_AS(band(p, req), std::domain_error);
  req.kind = BandKind::hw_asymptotic;
  CHECK_THROWS_AS(band(p, req), std::domain_error);
  req.kind = BandKind::direct_wild;
  CHECK_NOTHROW(band(p, req));
  req.interval = {2.0, 1.0};
  CHECK_THROWS_AS(band(p, req), std::invalid_argument);
}

TEST_CASE("one-sided bands") {
  const auto p = larger_path();
  BandRequest req;
  req.kind = BandKind::ep_wild;
  req.interval = {1.0, 6.0};
  req.replicates = 400;
  req.seed = {3, 0, 0};
  req.side = BandSide::lower_only;
  const auto lower = band(p, req);
  req.side = BandSide::upper_only;
  const auto upper = band(p, req);
  req.side = BandSide::two_sided;
  const auto both = band(p, req);
  for (double t : lower.grid) {
    CHECK(lower.upper(t) == std::numeric_limits<double>::infinity());
    CHECK(upper.lower(t) == 0.0);
  }
  CHECK(lower.critical_value < both.critical_value);
  CHECK(upper.critical_value < both.critical_value);
  req.kind = BandKind::hw_asymptotic;
  req.side = BandSide::lower_only;
  CHECK_THROWS_AS(band(p, req), std::invalid_argument);
}

TEST_CASE("band records its settings") {
  const auto p = larger_path();
  BandRequest req;
  req.kind = BandKind::hw_wild;
  req.interval = {1.0, 6.0};
  req.replicates = 200;
  req.law = MultiplierKind::centered_poisson;
  const auto b = band(p, req);
  CHECK(b.multiplier == MultiplierKind::centered_poisson);
  CHECK(b.variance_used == VarianceKind::aalen);
  req.critical_value = 2.5;
  CHECK(band(p, req).critical_value == 2.5);
  req.kind = BandKind::ep_asymptotic;
  req.critical_value.reset();
  req.bridge_paths = 500;
  const auto asym = band(p, req);
  CHECK(asym.variance_used == VarianceKind::greenwood);
  CHECK_FALSE(asym.multiplier.has_value());
  CHECK(asym.critical_value > 0.0);
}

TEST_CASE("difference band of identical paths on distinct transitions") {
  PathMap paths;
  auto a = larger_path();
  auto b = a;
  b.transition = {"0", "2"};
  paths.emplace(a.transition, a);
  paths.emplace(b.transition, b);
  const auto band = difference_band(paths, a.transition, b.transition, {0.0, 6.0}, 0.95, 500, MultiplierLaw(),
                                    {5, 0, 0});
  for (std::size_t i = 0; i < band.grid.size(); ++i) {
    CHECK(band.center[i] == 0.0);
    CHECK(band.upper(band.grid[i]) > 0.0);
  }
  CHECK_THROWS_AS(difference_band(paths, a.transition, a.transition, {0.0, 6.0}, 0.95, 10, MultiplierLaw(), {}),
                  std::invalid_argument);
}

TEST_CASE("difference band half-width is q over root n") {
  PathMap paths;
  CountingPath a;
  a.transition = {"0", "1"};
  a.jump_times = {1.0, 2.0};
  a.jump_sizes = {3, 2};
  a.at_risk = {100, 90};
  a.n_subjects = 100;
  a.tau = 3.0;
  CountingPath b = a;
  b.transition = {"0", "2"};
  b.jump_times = {1.5};
  b.jump_sizes = {4};
  b.at_risk = {95};
  paths.emplace(a.transition, a);
  paths.emplace(b.transition, b);
  const auto band = difference_band(paths, a.transition, b.transition, {0.0, 3.0}, 0.95, 500, MultiplierLaw(),
                                    {6, 0, 0});
  for (std::size_t i = 0; i < band.grid.size(); ++i) {
    const double t = band.grid[i];
    CHECK(band.upper(t) - band.center[i] == doctest::Approx(band.critical_value / 10.0).epsilon(1e-12));
  }
}

TEST_CASE("difference band covers a zero difference under equal hazards") {
  const auto scenario = equal_competing(300);
  const std::size_t studies = 1000;
  std::size_t covered = 0;
  for (std::size_t s = 0; s < studies; ++s) {
    const auto recs = simulate_competing_risks_constant(scenario, 1, {31, s, 0});
    const auto paths = build_counting_paths(recs, scenario.tau);
    const auto band = difference_band(paths, {"0", "1"}, {"0", "2"}, {0.05, 0.6}, 0.95, 1000, MultiplierLaw(),
                                      {32, s, 0});
    bool inside = true;
    for (double t : band.grid) inside = inside && band.lower(t) <= 0.0 && 0.0 <= band.upper(t);
    covered += inside;
  }
  const double rate = double(covered) / studies;
  INFO("coverage " << rate);
  CHECK(std::fabs(rate - 0.95) <= 0.02);
}

TEST_CASE("simultaneous intervals") {
  const auto p = larger_path();
  const SeedSpec seed{8, 0, 0};

  const auto one = simultaneous_intervals(p, {3.0}, 0.95, BandKind::ep_wild, 1000, MultiplierLaw(), seed);
  REQUIRE(one.intervals.size() == 1);
  CHECK(one.intervals[0].lower < one.intervals[0].estimate);
  CHECK(one.intervals[0].estimate < one.intervals[0].upper);

  std::vector<double> jumps;
  for (double t : p.jump_times) {
    if (t >= 1.0 && t <= 5.0) jumps.push_back(t);
  }
  const auto on_jumps = simultaneous_intervals(p, jumps, 0.95, BandKind::ep_wild, 1000, MultiplierLaw(), seed);
  BandRequest req;
  req.kind = BandKind::ep_wild;
  req.interval = {1.0, 5.0};
  req.replicates = 1000;
  req.seed = seed;
  CHECK(on_jumps.critical_value == band(p, req).critical_value);

  const auto coarse = simultaneous_intervals(p, {1.0, 3.0, 5.0}, 0.95, BandKind::hw_wild, 1000, MultiplierLaw(), seed);
  const auto mid = simultaneous_intervals(p, {1.0, 2.0, 3.0, 5.0}, 0.95, BandKind::hw_wild, 1000, MultiplierLaw(), seed);
  const auto fine = simultaneous_intervals(p, jumps, 0.95, BandKind::hw_wild, 1000, MultiplierLaw(), seed);
  CHECK(coarse.critical_value <= mid.critical_value);
  CHECK(mid.critical_value <= fine.critical_value);

  CHECK_THROWS_AS(simultaneous_intervals(p, {0.2}, 0.95, BandKind::ep_wild, 10, MultiplierLaw(), seed),
                  std::invalid_argument);
  CHECK_THROWS_AS(simultaneous_intervals(p, {1.0}, 0.95, BandKind::ep_asymptotic, 10, MultiplierLaw(), seed),
                  std::invalid_argument);
}

TEST_CASE("sidak levels") {
  PathMap paths;
  auto a = larger_path();
  auto b = a;
  b.transition = {"0", "2"};
  paths.emplace(a.transition, a);
  paths.emplace(b.transition, b);
  const auto single = sidak_region(paths, {a.transition}, 3.0, 0.95, 500, MultiplierLaw(), {1, 0, 0});
  CHECK(single.per_interval_level == 0.95);
  const auto pair = sidak_region(paths, {a.transition, b.transition}, 3.0, 0.95, 500, MultiplierLaw(), {1, 0, 0});
  CHECK(pair.per_interval_level == doctest::Approx(0.97468).epsilon(1e-5));
  REQUIRE(pair.components.size() == 2);
  CHECK(pair.components[0].critical_value >= single.components[0].critical_value);
}

TEST_CASE("sidak region covers both cumulative hazards jointly") {
  const auto scenario = equal_competing(300);
  const double t = 0.4;
  const std::size_t studies = 1000;
  std::size_t covered = 0;
  for (std::size_t s = 0; s < studies; ++s) {
    const auto recs = simulate_competing_risks_constant(scenario, 1, {41, s, 0});
    const auto paths = build_counting_paths(recs, scenario.tau);
    const auto region = sidak_region(paths, {{"0", "1"}, {"0", "2"}}, t, 0.95, 1000, MultiplierLaw(), {42, s, 0});
    bool inside = true;
    for (const auto& c : region.components) {
      inside = inside && c.intervals[0].lower <= t && t <= c.intervals[0].upper;
    }
    covered += inside;
  }
  const double rate = double(covered) / studies;
  INFO("coverage " << rate);
  CHECK(std::fabs(rate - 0.95) <= 0.02);
}
