#include <doctest.h>

#include "estimator_oracle.hpp"
#include "hazardband/estimator.hpp"
#include "support.hpp"

using namespace hazardband;
using hazardband::testing::Rational;

TEST_CASE("hand-evaluated sums on the three-subject path") {
  const auto fit = nelson_aalen(hazardband::testing::d0_path());
  CHECK(fit.estimate(2.0) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(fit.var_aalen(2.0) == doctest::Approx(13.0 / 12.0).epsilon(1e-15));
  CHECK(fit.var_greenwood(2.0) == doctest::Approx(43.0 / 72.0).epsilon(1e-15));
  CHECK(fit.estimate(1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(fit.estimate(0.5) == 0.0);
  CHECK(fit.n_subjects == 3);
}

TEST_CASE("a path without jumps gives zero curves") {
  CountingPath p;
  p.transition = {"0", "1"};
  p.n_subjects = 5;
  p.tau = 2.0;
  const auto fit = nelson_aalen(p);
  for (double t : {0.0, 1.0, 2.0}) {
    CHECK(fit.estimate(t) == 0.0);
    CHECK(fit.var_aalen(t) == 0.0);
    CHECK(fit.var_greenwood(t) == 0.0);
  }
}

TEST_CASE("one jump with everybody at risk") {
  for (int n : {1, 2, 7, 50}) {
    CountingPath p;
    p.transition = {"0", "1"};
    p.jump_times = {1.0};
    p.jump_sizes = {1};
    p.at_risk = {n};
    p.n_subjects = n;
    p.tau = 2.0;
    const auto fit = nelson_aalen(p);
    CHECK(fit.estimate(1.0) == doctest::Approx(1.0 / n).epsilon(1e-15));
    CHECK(fit.var_greenwood(1.0) == doctest::Approx(double(n - 1) / (double(n) * n)).epsilon(1e-15));
  }
}

TEST_CASE("greenwood never exceeds aalen") {
  const auto fit = nelson_aalen(hazardband::testing::d0_path());
  for (double t : {1.0, 2.0, 3.0}) CHECK(fit.var_greenwood(t) <= fit.var_aalen(t));
}

TEST_CASE("rational oracle on the hand example") {
  const auto oracle = hazardband::testing::oracle_nelson_aalen(hazardband::testing::d0_records(), 3.0);
  const auto& o = oracle.at({"0", "1"});
  CHECK(o.a.back() == Rational(5, 6));
  CHECK(o.var_aalen.back() == Rational(13, 12));
  CHECK(o.var_greenwood.back() == Rational(43, 72));
}

TEST_CASE("random small datasets agree with the record-level oracle") {
  auto gen = make_stream({2024, 0, 0}, stream_tag::data);
  for (int i = 0; i < 300; ++i) {
    const auto recs = hazardband::testing::random_small_dataset(gen);
    REQUIRE_NOTHROW(validate_records(recs));
    const double tau = 1.0 + 0.5 * static_cast<int>(gen.uniform() * 12);
    bool any_event = false;
    for (const auto& r : recs) any_event = any_event || (r.to_state && r.exit_time <= tau);
    if (!any_event) continue;
    const auto cmp = hazardband::testing::compare_with_oracle(recs, tau);
    INFO(cmp.detail);
    CHECK(cmp.structure_ok);
    CHECK(cmp.values_ok);
  }
}

TEST_CASE("variance kind names") {
  CHECK(to_string(VarianceKind::aalen) == "aalen");
  CHECK(parse_variance_kind("greenwood") == VarianceKind::greenwood);
  CHECK_THROWS_AS(parse_variance_kind("delta"), std::invalid_argument);
}
