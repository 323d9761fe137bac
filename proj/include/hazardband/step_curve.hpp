#pragma once

#include <cstddef>
#include <vector>

namespace hazardband {

/// Right-continuous piecewise-constant function on [0, tau].
///
/// `values[i]` holds on [times[i], times[i+1]); `value_at_0` holds before the
/// first time. Values are stored cumulatively, so evaluation is a binary
/// search.
class StepCurve {
 public:
  StepCurve() = default;
  StepCurve(double value_at_0, std::vector<double> times, std::vector<double> values, double tau);

  static StepCurve constant(double value, double tau) { return StepCurve(value, {}, {}, tau); }

  /// Throws std::domain_error when t lies outside [0, tau].
  double operator()(double t) const;

  /// Step evaluation without the domain check; t < 0 yields value_at_0.
  double value_unchecked(double t) const;

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  double value_at_0() const { return value_at_0_; }
  double tau() const { return tau_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }

  bool operator==(const StepCurve&) const = default;

 private:
  double value_at_0_ = 0.0;
  std::vector<double> times_;
  std::vector<double> values_;
  double tau_ = 0.0;
};

double evaluate(const StepCurve& curve, double t);

/// a(t) - b(t) on the merged time grid. Requires a.tau() == b.tau().
StepCurve curve_difference(const StepCurve& a, const StepCurve& b);

}  // namespace hazardband
