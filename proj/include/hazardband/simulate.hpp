#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hazardband/event_model.hpp"
#include "hazardband/rng.hpp"
#include "hazardband/step_curve.hpp"

namespace hazardband {

struct TimedMass {
  double time = 0.0;
  double mass = 0.0;
  bool operator==(const TimedMass&) const = default;
};

/// Discrete-time multistate model. Each increment is the probability of the
/// transition at that time given occupancy of the source state just before
/// it; the remaining mass stays. Censoring masses are drawn independently and
/// any leftover mass means administrative censoring at the horizon.
struct IncrementModel {
  std::vector<std::string> states;
  std::map<std::string, double> initial_distribution;
  std::map<TransitionKey, std::vector<TimedMass>> hazard_increments;
  std::vector<TimedMass> censoring_increments;
  double horizon = 0.0;

  /// Throws ValidationError on any broken invariant (increments above 1 included).
  void validate() const;
};

/// dt, 2 dt, ..., up to horizon, each rounded to the nearest double of its decimal value.
std::vector<double> time_grid(double dt, double horizon);

/// Constant hazards turned into increments alpha * dt on the grid dt, 2 dt, ..., horizon.
IncrementModel constant_hazard_model(const std::vector<std::string>& states,
                                     const std::map<std::string, double>& initial_distribution,
                                     const std::map<TransitionKey, double>& hazards, double dt, double horizon,
                                     std::vector<TimedMass> censoring = {});

/// True cumulative hazard of a model transition: the running sum of its increments.
StepCurve cumulative_increments(const IncrementModel& model, const TransitionKey& key);

/// Subject i draws from its own stream, so records do not depend on the thread count.
std::vector<SubjectRecord> simulate_multistate(const IncrementModel& model, std::size_t n, const SeedSpec& seed);

/// Two-group competing risks with constant hazards: 0 -> 1 (type 1) and 0 -> 2 (competing).
struct ConstantHazardScenario {
  std::string name;
  double alpha01_g1 = 1.0;
  double alpha01_g2 = 1.0;
  double alpha02_g1 = 1.0;
  double alpha02_g2 = 1.0;
  double tau = 0.3;
  double target_censoring = 0.25;
  std::size_t n1 = 100;
  std::size_t n2 = 100;

  void validate() const;
};

/// "table3:I" .. "table3:IV" with n1 = n2 = n.
ConstantHazardScenario scenario_preset(std::string_view name, std::size_t n);
std::vector<std::string> scenario_preset_names();

/// Administrative cutoff c with exp(-(alpha01 + alpha02) c) = target_censoring (infinite for target 0).
double censoring_cutoff(const ConstantHazardScenario& s, int group);

std::vector<SubjectRecord> simulate_competing_risks_constant(const ConstantHazardScenario& s, int group,
                                                             const SeedSpec& seed);

/// Expected number of observed events per transition with event time in (t1, t2].
std::map<TransitionKey, double> expected_event_counts(const IncrementModel& model, std::size_t n, double t1,
                                                      double t2);
std::map<TransitionKey, double> expected_event_counts(const ConstantHazardScenario& s, int group, double t1,
                                                      double t2);

}  // namespace hazardband
