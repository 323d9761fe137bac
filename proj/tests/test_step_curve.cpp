#include <doctest.h>

#include <stdexcept>

#include "hazardband/step_curve.hpp"

using namespace hazardband;

TEST_CASE("step evaluation is right-continuous") {
  const StepCurve c(0.0, {1.0, 2.0}, {0.33, 0.83}, 3.0);
  CHECK(c(1.5) == 0.33);
  CHECK(c(0.0) == c.value_at_0());
  CHECK(c(0.999) == 0.0);
  CHECK(c(1.0) == 0.33);
  CHECK(c(2.0) == 0.83);
  CHECK(c(3.0) == 0.83);
}

TEST_CASE("evaluation outside [0, tau] is a domain error") {
  const StepCurve c(0.0, {1.0}, {0.5}, 2.0);
  CHECK_THROWS_AS(c(-0.1), std::domain_error);
  CHECK_THROWS_AS(c(2.5), std::domain_error);
  CHECK(c.value_unchecked(-1.0) == 0.0);
}

TEST_CASE("malformed curves are rejected") {
  CHECK_THROWS_AS(StepCurve(0.0, {1.0, 2.0}, {0.1}, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(StepCurve(0.0, {2.0, 1.0}, {0.1, 0.2}, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(StepCurve(0.0, {1.0, 1.0}, {0.1, 0.2}, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(StepCurve(0.0, {4.0}, {0.1}, 3.0), std::invalid_argument);
}

TEST_CASE("curve difference") {
  const StepCurve a(0.0, {1.0}, {0.5}, 3.0);
  const StepCurve b(0.0, {2.0}, {0.3}, 3.0);

  const StepCurve d = curve_difference(a, b);
  CHECK(d.times() == std::vector<double>{1.0, 2.0});
  CHECK(d.values()[0] == 0.5);
  CHECK(d.values()[1] == doctest::Approx(0.2).epsilon(1e-15));

  const StepCurve self = curve_difference(a, a);
  for (double v : self.values()) CHECK(v == 0.0);
  CHECK(self.value_at_0() == 0.0);

  const StepCurve same = curve_difference(a, StepCurve::constant(0.0, 3.0));
  CHECK(same == a);

  CHECK_THROWS_AS(curve_difference(a, StepCurve::constant(0.0, 4.0)), std::invalid_argument);
}
