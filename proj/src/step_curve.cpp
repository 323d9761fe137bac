#include "hazardband/step_curve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hazardband {

StepCurve::StepCurve(double value_at_0, std::vector<double> times, std::vector<double> values, double tau)
    : value_at_0_(value_at_0), times_(std::move(times)), values_(std::move(values)), tau_(tau) {
  if (times_.size() != values_.size()) {
    throw std::invalid_argument("step curve: times and values differ in length");
  }
  if (!(tau_ >= 0.0) || !std::isfinite(tau_)) {
    throw std::invalid_argument("step curve: tau must be finite and nonnegative");
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!(times_[i] >= 0.0 && times_[i] <= tau_)) {
      throw std::invalid_argument("step curve: time " + std::to_string(times_[i]) + " outside [0, tau]");
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw std::invalid_argument("step curve: times must be strictly increasing");
    }
  }
}

double StepCurve::value_unchecked(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return value_at_0_;
  return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double StepCurve::operator()(double t) const {
  if (!(t >= 0.0 && t <= tau_)) {
    throw std::domain_error("step curve evaluated at t=" + std::to_string(t) + " outside [0, " +
                            std::to_string(tau_) + "]");
  }
  return value_unchecked(t);
}

double evaluate(const StepCurve& curve, double t) { return curve(t); }

StepCurve curve_difference(const StepCurve& a, const StepCurve& b) {
  if (a.tau() != b.tau()) throw std::invalid_argument("curve_difference: mismatched tau");
  std::vector<double> grid;
  grid.reserve(a.size() + b.size());
  std::set_union(a.times().begin(), a.times().end(), b.times().begin(), b.times().end(),
                 std::back_inserter(grid));
  std::vector<double> values;
  values.reserve(grid.size());
  for (double t : grid) values.push_back(a.value_unchecked(t) - b.value_unchecked(t));
  return StepCurve(a.value_at_0() - b.value_at_0(), std::move(grid), std::move(values), a.tau());
}

}  // namespace hazardband
