#pragma once

#include <json.hpp>

#include "hazardband/bands.hpp"
#include "hazardband/estimator.hpp"
#include "hazardband/hypothesis.hpp"
#include "hazardband/simulate.hpp"
#include "hazardband/study.hpp"

namespace hazardband {

using nlohmann::json;

// Infinite band bounds are written as null.

json to_json(const StepCurve& curve);
StepCurve step_curve_from_json(const json& j);

json to_json(const CountingPath& path);
CountingPath counting_path_from_json(const json& j);
json to_json(const PathMap& paths);
PathMap path_map_from_json(const json& j);

json to_json(const NelsonAalenFit& fit);
json to_json(const BandResult& band);
json to_json(const IntervalSet& set);
json to_json(const SidakRegion& region);
json to_json(const TestResult& result);
json to_json(const StudyReport& report);
json to_json(const SubjectRecord& record);

json to_json(const IncrementModel& model);
/// Accepts either explicit "increments" or "constant_hazards" with "dt".
IncrementModel increment_model_from_json(const json& j);

json to_json(const ConstantHazardScenario& s);

/// "scenario" may name the built-in "illness-death-recovery" model; otherwise
/// "model" holds an increment model.
CoverageConfig coverage_config_from_json(const json& j);
SizeConfig size_config_from_json(const json& j);

}  // namespace hazardband
