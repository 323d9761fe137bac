#pragma once

#include <string>
#include <string_view>

#include "hazardband/event_model.hpp"
#include "hazardband/step_curve.hpp"

namespace hazardband {

enum class VarianceKind { aalen, greenwood };

std::string to_string(VarianceKind kind);
VarianceKind parse_variance_kind(std::string_view name);

/// Nelson-Aalen estimate of one cumulative hazard with its two variance
/// estimators, all as cumulative step curves starting at 0.
struct NelsonAalenFit {
  TransitionKey transition;
  StepCurve estimate;
  StepCurve var_aalen;
  StepCurve var_greenwood;
  int n_subjects = 0;

  const StepCurve& variance(VarianceKind kind) const {
    return kind == VarianceKind::aalen ? var_aalen : var_greenwood;
  }
};

///   A(t)         = sum_{s <= t} dN/Y
///   var_aalen    = n * sum dN / Y^2
///   var_greenwood= n * sum (Y - dN) dN / Y^3
NelsonAalenFit nelson_aalen(const CountingPath& path);

}  // namespace hazardband
