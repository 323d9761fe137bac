#include "hazardband/json_io.hpp"

#include <cmath>
#include <stdexcept>

namespace hazardband {

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json values_or_null(const std::vector<double>& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(finite_or_null(x));
  return arr;
}

std::string side_name(BandSide side) {
  switch (side) {
    case BandSide::lower_only:
      return "lower";
    case BandSide::upper_only:
      return "upper";
    default:
      return "two-sided";
  }
}

json seed_json(const SeedSpec& s) {
  return {{"master_seed", s.master_seed}, {"study", s.study}, {"replicate", s.replicate}};
}

std::vector<TimedMass> timed_from_json(const json& j, const std::string& what) {
  std::vector<TimedMass> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) throw std::invalid_argument(what + ": expected [time, value] pairs");
    out.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  return out;
}

json timed_to_json(const std::vector<TimedMass>& list) {
  json arr = json::array();
  for (const auto& m : list) arr.push_back({m.time, m.mass});
  return arr;
}

template <class T>
T value_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

json to_json(const StepCurve& curve) {
  return {{"t0", curve.value_at_0()}, {"times", curve.times()}, {"values", curve.values()}, {"tau", curve.tau()}};
}

StepCurve step_curve_from_json(const json& j) {
  return StepCurve(j.at("t0").get<double>(), j.at("times").get<std::vector<double>>(),
                   j.at("values").get<std::vector<double>>(), j.at("tau").get<double>());
}

json to_json(const CountingPath& path) {
  return {{"times", path.jump_times}, {"dn", path.jump_sizes}, {"y", path.at_risk},
          {"n", path.n_subjects},     {"tau", path.tau}};
}

CountingPath counting_path_from_json(const json& j) {
  CountingPath p;
  p.jump_times = j.at("times").get<std::vector<double>>();
  p.jump_sizes = j.at("dn").get<std::vector<int>>();
  p.at_risk = j.at("y").get<std::vector<int>>();
  p.n_subjects = j.at("n").get<int>();
  p.tau = j.at("tau").get<double>();
  return p;
}

json to_json(const PathMap& paths) {
  json j = json::object();
  for (const auto& [key, path] : paths) j[key.label()] = to_json(path);
  return j;
}

PathMap path_map_from_json(const json& j) {
  PathMap paths;
  for (const auto& [label, value] : j.items()) {
    CountingPath p = counting_path_from_json(value);
    p.transition = TransitionKey::parse(label);
    p.validate();
    paths.emplace(p.transition, std::move(p));
  }
  return paths;
}

json to_json(const NelsonAalenFit& fit) {
  return {{"transition", fit.transition.label()},
          {"n_subjects", fit.n_subjects},
          {"estimate", to_json(fit.estimate)},
          {"var_aalen", to_json(fit.var_aalen)},
          {"var_greenwood", to_json(fit.var_greenwood)}};
}

json to_json(const BandResult& band) {
  json j{{"kind", to_string(band.kind)},
         {"side", side_name(band.side)},
         {"level", band.level},
         {"interval", {band.interval.t1, band.interval.t2}},
         {"critical_value", band.critical_value},
         {"variance", band.variance_used ? json(to_string(*band.variance_used)) : json(nullptr)},
         {"law", band.multiplier ? json(MultiplierLaw(*band.multiplier).name()) : json(nullptr)},
         {"time", band.grid},
         {"estimate", band.center},
         {"lower", values_or_null(band.lower.values())},
         {"upper", values_or_null(band.upper.values())}};
  return j;
}

json to_json(const IntervalSet& set) {
  json rows = json::array();
  for (const auto& p : set.intervals) {
    rows.push_back({{"time", p.time}, {"estimate", p.estimate}, {"lower", p.lower}, {"upper", p.upper}});
  }
  return {{"transition", set.transition.label()},
          {"kind", to_string(set.kind)},
          {"level", set.level},
          {"critical_value", set.critical_value},
          {"intervals", rows}};
}

json to_json(const SidakRegion& region) {
  json comps = json::array();
  for (const auto& c : region.components) comps.push_back(to_json(c));
  return {{"joint_level", region.joint_level}, {"per_interval_level", region.per_interval_level},
          {"components", comps}};
}

json to_json(const TestResult& r) {
  json meta{{"replicates", r.meta.replicates},
            {"seed", seed_json(r.meta.seed)},
            {"interval", {r.meta.interval.t1, r.meta.interval.t2}},
            {"grid_size", r.meta.grid_size},
            {"law", r.meta.law ? json(MultiplierLaw(*r.meta.law).name()) : json(nullptr)},
            {"band_kind", r.meta.band_kind ? json(to_string(*r.meta.band_kind)) : json(nullptr)},
            {"n1", r.meta.n1}};
  if (r.meta.n2 > 0) meta["n2"] = r.meta.n2;
  return {{"kind", to_string(r.kind)},
          {"statistic", finite_or_null(r.statistic)},
          {"critical_value", r.critical_value},
          {"reject", r.reject},
          {"level", r.level},
          {"meta", meta}};
}

json to_json(const StudyReport& report) {
  json cells = json::array();
  for (const auto& c : report.cells) {
    json cell{{"scenario", c.scenario},
              {"n", c.n},
              {"method", c.method},
              {"numerator", c.numerator},
              {"denominator", c.denominator},
              {"estimate", c.estimate},
              {"standard_error", c.standard_error},
              {"failures", c.failures}};
    if (!c.transition.empty()) cell["transition"] = c.transition;
    if (!c.law.empty()) cell["law"] = c.law;
    if (!c.variance.empty()) cell["variance"] = c.variance;
    if (c.reference) cell["reference"] = *c.reference;
    if (c.expected_events) cell["expected_events"] = *c.expected_events;
    if (c.skip_reason) cell["skip_reason"] = *c.skip_reason;
    cells.push_back(cell);
  }
  return {{"kind", report.kind},         {"master_seed", report.master_seed}, {"n_studies", report.n_studies},
          {"n_boot", report.n_boot},     {"level", report.level},             {"cells", cells}};
}

json to_json(const SubjectRecord& r) {
  return {{"id", r.subject_id},
          {"from", r.from_state},
          {"to", r.to_state ? json(*r.to_state) : json(std::string(kCensoredToken))},
          {"entry", r.entry_time},
          {"exit", r.exit_time}};
}

json to_json(const IncrementModel& model) {
  json inc = json::object();
  for (const auto& [key, list] : model.hazard_increments) inc[key.label()] = timed_to_json(list);
  return {{"states", model.states},
          {"initial", model.initial_distribution},
          {"increments", inc},
          {"censoring", timed_to_json(model.censoring_increments)},
          {"horizon", model.horizon}};
}

IncrementModel increment_model_from_json(const json& j) {
  const auto states = j.at("states").get<std::vector<std::string>>();
  const auto initial = j.at("initial").get<std::map<std::string, double>>();
  const double horizon = j.at("horizon").get<double>();
  std::vector<TimedMass> censoring;
  if (j.contains("censoring")) censoring = timed_from_json(j.at("censoring"), "censoring");
  if (j.contains("constant_hazards")) {
    std::map<TransitionKey, double> hazards;
    for (const auto& [label, value] : j.at("constant_hazards").items()) {
      hazards[TransitionKey::parse(label)] = value.get<double>();
    }
    return constant_hazard_model(states, initial, hazards, j.at("dt").get<double>(), horizon, std::move(censoring));
  }
  IncrementModel m;
  m.states = states;
  m.initial_distribution = initial;
  m.horizon = horizon;
  m.censoring_increments = std::move(censoring);
  for (const auto& [label, value] : j.at("increments").items()) {
    m.hazard_increments[TransitionKey::parse(label)] = timed_from_json(value, "increments of " + label);
  }
  m.validate();
  return m;
}

json to_json(const ConstantHazardScenario& s) {
  return {{"name", s.name},
          {"alpha01_g1", s.alpha01_g1},
          {"alpha01_g2", s.alpha01_g2},
          {"alpha02_g1", s.alpha02_g1},
          {"alpha02_g2", s.alpha02_g2},
          {"tau", s.tau},
          {"target_censoring", s.target_censoring},
          {"n1", s.n1},
          {"n2", s.n2}};
}

CoverageConfig coverage_config_from_json(const json& j) {
  CoverageConfig c;
  c.scenario = value_or<std::string>(j, "scenario", "custom");
  if (j.contains("model")) {
    c.model = increment_model_from_json(j.at("model"));
  } else if (c.scenario == "illness-death-recovery") {
    c.model = illness_death_recovery_model();
  } else {
    throw std::invalid_argument("coverage config needs a \"model\" or scenario \"illness-death-recovery\"");
  }
  c.sample_sizes = value_or(j, "sample_sizes", c.sample_sizes);
  c.n_studies = value_or(j, "n_studies", c.n_studies);
  c.n_boot = value_or(j, "n_boot", c.n_boot);
  c.bridge_paths = value_or(j, "bridge_paths", c.bridge_paths);
  c.bridge_grid_points = value_or(j, "bridge_grid_points", c.bridge_grid_points);
  c.level = value_or(j, "level", c.level);
  const auto iv = j.at("interval").get<std::vector<double>>();
  if (iv.size() != 2) throw std::invalid_argument("coverage config: interval must be [t1, t2]");
  c.interval = {iv[0], iv[1]};
  if (j.contains("band_kinds")) {
    c.band_kinds.clear();
    for (const auto& k : j.at("band_kinds")) c.band_kinds.push_back(parse_band_kind(k.get<std::string>()));
  }
  if (j.contains("laws")) {
    c.laws.clear();
    for (const auto& l : j.at("laws")) c.laws.push_back(MultiplierLaw::parse(l.get<std::string>()));
  }
  if (j.contains("bridge_variances")) {
    c.bridge_variances.clear();
    for (const auto& v : j.at("bridge_variances")) c.bridge_variances.push_back(parse_variance_kind(v.get<std::string>()));
  }
  if (j.contains("transitions")) {
    for (const auto& t : j.at("transitions")) c.transitions.push_back(TransitionKey::parse(t.get<std::string>()));
  }
  c.min_expected_events = value_or(j, "min_expected_events", c.min_expected_events);
  c.master_seed = value_or(j, "master_seed", c.master_seed);
  c.validate();
  return c;
}

SizeConfig size_config_from_json(const json& j) {
  SizeConfig c;
  c.scenarios = value_or(j, "scenarios", c.scenarios);
  c.sample_sizes = value_or(j, "sample_sizes", c.sample_sizes);
  c.n_studies = value_or(j, "n_studies", c.n_studies);
  c.n_boot = value_or(j, "n_boot", c.n_boot);
  c.alpha = value_or(j, "alpha", c.alpha);
  if (j.contains("laws")) {
    c.laws.clear();
    for (const auto& l : j.at("laws")) c.laws.push_back(MultiplierLaw::parse(l.get<std::string>()));
  }
  if (j.contains("statistics")) {
    c.statistics.clear();
    for (const auto& s : j.at("statistics")) c.statistics.push_back(parse_prop_statistic(s.get<std::string>()));
  }
  c.master_seed = value_or(j, "master_seed", c.master_seed);
  c.validate();
  return c;
}

}  // namespace hazardband
