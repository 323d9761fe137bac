#include "hazardband/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include <omp.h>

namespace hazardband {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassTolerance = 1e-12;

void check_timed(const std::vector<TimedMass>& list, double horizon, const std::string& what) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& m = list[i];
    if (!(m.time > 0.0 && m.time <= horizon)) {
      throw ValidationError(what + ": time " + std::to_string(m.time) + " outside (0, horizon]");
    }
    if (i > 0 && !(m.time > list[i - 1].time)) throw ValidationError(what + ": times must be strictly increasing");
    if (!(m.mass >= 0.0 && m.mass <= 1.0)) {
      throw ValidationError(what + ": value " + std::to_string(m.mass) + " at t=" + std::to_string(m.time) +
                            " outside [0, 1]");
    }
  }
}

// Per-state event table: union of the times of all transitions out of the
// state, with the total out-probability and cumulative -log(1 - q).
struct StateTable {
  std::vector<double> times;
  std::vector<double> q;
  std::vector<double> h;            // cumulative -log(1 - q), restarting after every q == 1
  std::vector<std::size_t> next_certain;  // first index >= k with q == 1, or size()
  std::vector<std::size_t> offset;  // targets of time k live in [offset[k], offset[k+1])
  std::vector<std::size_t> target;
  std::vector<double> cum_mass;     // cumulative increments within one time
};

std::vector<StateTable> build_tables(const IncrementModel& model, const std::map<std::string, std::size_t>& index) {
  std::vector<std::map<double, std::vector<std::pair<std::size_t, double>>>> by_time(model.states.size());
  for (const auto& [key, list] : model.hazard_increments) {
    const std::size_t from = index.at(key.from);
    const std::size_t to = index.at(key.to);
    for (const auto& m : list) {
      if (m.mass > 0.0) by_time[from][m.time].emplace_back(to, m.mass);
    }
  }
  std::vector<StateTable> tables(model.states.size());
  for (std::size_t s = 0; s < tables.size(); ++s) {
    StateTable& tb = tables[s];
    double h = 0.0;
    tb.offset.push_back(0);
    for (const auto& [t, targets] : by_time[s]) {
      double q = 0.0;
      for (const auto& [to, inc] : targets) {
        q += inc;
        tb.target.push_back(to);
        tb.cum_mass.push_back(q);
      }
      q = std::min(q, 1.0);
      tb.times.push_back(t);
      tb.q.push_back(q);
      if (q >= 1.0) {
        tb.h.push_back(kInf);
        h = 0.0;
      } else {
        h += -std::log1p(-q);
        tb.h.push_back(h);
      }
      tb.offset.push_back(tb.target.size());
    }
    tb.next_certain.assign(tb.times.size() + 1, tb.times.size());
    for (std::size_t k = tb.times.size(); k-- > 0;) {
      tb.next_certain[k] = tb.q[k] >= 1.0 ? k : tb.next_certain[k + 1];
    }
  }
  return tables;
}

// Index of the first event time after `t` for an Exp(1) draw `e`, or size() if none.
std::size_t next_event(const StateTable& tb, double t, double e) {
  const std::size_t start =
      static_cast<std::size_t>(std::upper_bound(tb.times.begin(), tb.times.end(), t) - tb.times.begin());
  if (start == tb.times.size()) return start;
  const std::size_t certain = tb.next_certain[start];
  const double base = (start == 0 || tb.h[start - 1] == kInf) ? 0.0 : tb.h[start - 1];
  auto first = tb.h.begin() + static_cast<std::ptrdiff_t>(start);
  auto last = tb.h.begin() + static_cast<std::ptrdiff_t>(certain);
  auto it = std::lower_bound(first, last, base + e);
  if (it != last) return static_cast<std::size_t>(it - tb.h.begin());
  return certain;
}

std::uint64_t subject_tag(std::size_t i) { return rng::combine(stream_tag::subject, i); }

}  // namespace

void IncrementModel::validate() const {
  if (states.empty()) throw ValidationError("increment model: no states");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("increment model: horizon must be positive");
  const std::set<std::string> known(states.begin(), states.end());
  if (known.size() != states.size()) throw ValidationError("increment model: duplicate state labels");
  double total = 0.0;
  for (const auto& [state, p] : initial_distribution) {
    if (!known.count(state)) throw ValidationError("increment model: unknown initial state '" + state + "'");
    if (!(p >= 0.0)) throw ValidationError("increment model: negative initial probability");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw ValidationError("increment model: initial distribution must sum to 1");

  std::map<std::string, std::map<double, double>> out_mass;
  for (const auto& [key, list] : hazard_increments) {
    if (!known.count(key.from) || !known.count(key.to)) {
      throw ValidationError("increment model: transition " + key.label() + " uses an unknown state");
    }
    if (key.from == key.to) throw ValidationError("increment model: self transition " + key.label());
    check_timed(list, horizon, "increments of " + key.label());
    for (const auto& m : list) out_mass[key.from][m.time] += m.mass;
  }
  for (const auto& [state, masses] : out_mass) {
    for (const auto& [t, q] : masses) {
      if (q > 1.0 + kMassTolerance) {
        throw ValidationError("increment model: increments out of state '" + state + "' sum to " +
                              std::to_string(q) + " > 1 at t=" + std::to_string(t));
      }
    }
  }
  check_timed(censoring_increments, horizon, "censoring increments");
  double cens = 0.0;
  for (const auto& m : censoring_increments) cens += m.mass;
  if (cens > 1.0 + kMassTolerance) throw ValidationError("increment model: censoring masses sum above 1");
}

std::vector<double> time_grid(double dt, double horizon) {
  if (!(dt > 0.0) || !(horizon >= dt)) throw std::invalid_argument("time_grid: need 0 < dt <= horizon");
  const auto steps = static_cast<std::size_t>(std::floor(horizon / dt + 1e-9));
  std::vector<double> grid;
  for (std::size_t k = 1; k <= steps; ++k) {
    grid.push_back(std::min(std::round(static_cast<double>(k) * dt * 1e9) / 1e9, horizon));
  }
  return grid;
}

IncrementModel constant_hazard_model(const std::vector<std::string>& states,
                                     const std::map<std::string, double>& initial_distribution,
                                     const std::map<TransitionKey, double>& hazards, double dt, double horizon,
                                     std::vector<TimedMass> censoring) {
  IncrementModel m;
  m.states = states;
  m.initial_distribution = initial_distribution;
  m.horizon = horizon;
  m.censoring_increments = std::move(censoring);
  const auto grid = time_grid(dt, horizon);
  for (const auto& [key, alpha] : hazards) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("constant_hazard_model: negative hazard for " + key.label());
    auto& list = m.hazard_increments[key];
    for (double t : grid) list.push_back({t, alpha * dt});
  }
  m.validate();
  return m;
}

StepCurve cumulative_increments(const IncrementModel& model, const TransitionKey& key) {
  auto it = model.hazard_increments.find(key);
  if (it == model.hazard_increments.end()) return StepCurve::constant(0.0, model.horizon);
  std::vector<double> times, values;
  double sum = 0.0;
  for (const auto& m : it->second) {
    sum += m.mass;
    times.push_back(m.time);
    values.push_back(sum);
  }
  return StepCurve(0.0, std::move(times), std::move(values), model.horizon);
}

std::vector<SubjectRecord> simulate_multistate(const IncrementModel& model, std::size_t n, const SeedSpec& seed) {
  model.validate();
  std::map<std::string, std::size_t> index;
  for (std::size_t s = 0; s < model.states.size(); ++s) index[model.states[s]] = s;
  const auto tables = build_tables(model, index);
  std::vector<bool> absorbing(model.states.size(), true);
  for (const auto& [key, list] : model.hazard_increments) absorbing[index.at(key.from)] = false;

  std::vector<double> initial_cum;
  double acc = 0.0;
  for (const auto& s : model.states) {
    auto it = model.initial_distribution.find(s);
    acc += it == model.initial_distribution.end() ? 0.0 : it->second;
    initial_cum.push_back(acc);
  }
  std::vector<double> cens_cum;
  acc = 0.0;
  for (const auto& m : model.censoring_increments) {
    acc += m.mass;
    cens_cum.push_back(acc);
  }

  std::vector<std::vector<SubjectRecord>> per_subject(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    Xoshiro256pp gen(stream_key(seed, subject_tag(i)));
    const std::string id = std::to_string(i + 1);

    const double u0 = gen.uniform() * initial_cum.back();
    std::size_t state = static_cast<std::size_t>(std::lower_bound(initial_cum.begin(), initial_cum.end(), u0) -
                                                 initial_cum.begin());
    state = std::min(state, model.states.size() - 1);

    const double uc = gen.uniform();
    auto cit = std::lower_bound(cens_cum.begin(), cens_cum.end(), uc);
    const double cens = cit == cens_cum.end() ? model.horizon
                                              : model.censoring_increments[static_cast<std::size_t>(cit - cens_cum.begin())].time;

    auto& out = per_subject[i];
    double t = 0.0;
    while (true) {
      if (absorbing[state]) break;
      const StateTable& tb = tables[state];
      const std::size_t k = next_event(tb, t, -std::log(gen.uniform()));
      if (k == tb.times.size() || tb.times[k] > cens) {
        if (cens > t) out.push_back({id, t, cens, model.states[state], std::nullopt});
        break;
      }
      const double when = tb.times[k];
      const double pick = gen.uniform() * tb.cum_mass[tb.offset[k + 1] - 1];
      std::size_t j = tb.offset[k];
      while (j + 1 < tb.offset[k + 1] && tb.cum_mass[j] < pick) ++j;
      out.push_back({id, t, when, model.states[state], model.states[tb.target[j]]});
      t = when;
      state = tb.target[j];
    }
  }
  std::vector<SubjectRecord> records;
  for (auto& v : per_subject) {
    for (auto& r : v) records.push_back(std::move(r));
  }
  return records;
}

void ConstantHazardScenario::validate() const {
  for (double a : {alpha01_g1, alpha01_g2, alpha02_g1, alpha02_g2}) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("scenario hazards must be positive");
  }
  if (!(tau > 0.0)) throw ValidationError("scenario tau must be positive");
  if (!(target_censoring >= 0.0 && target_censoring < 1.0)) {
    throw ValidationError("target censoring fraction must lie in [0, 1)");
  }
}

ConstantHazardScenario scenario_preset(std::string_view name, std::size_t n) {
  struct Row {
    const char* name;
    double a01_g1, a01_g2;
  };
  static constexpr Row rows[] = {
      {"table3:I", 2.0, 2.0}, {"table3:II", 1.0, 2.0}, {"table3:III", 1.0, 1.0}, {"table3:IV", 1.0, 1.5}};
  for (const auto& r : rows) {
    if (name == r.name) {
      ConstantHazardScenario s;
      s.name = r.name;
      s.alpha01_g1 = r.a01_g1;
      s.alpha01_g2 = r.a01_g2;
      s.alpha02_g1 = 2.0;
      s.alpha02_g2 = 2.0;
      s.tau = 0.3;
      s.target_censoring = 0.25;
      s.n1 = n;
      s.n2 = n;
      return s;
    }
  }
  throw std::invalid_argument("unknown scenario preset '" + std::string(name) + "'");
}

std::vector<std::string> scenario_preset_names() { return {"table3:I", "table3:II", "table3:III", "table3:IV"}; }

double censoring_cutoff(const ConstantHazardScenario& s, int group) {
  s.validate();
  if (group != 1 && group != 2) throw std::invalid_argument("group must be 1 or 2");
  const double rate = group == 1 ? s.alpha01_g1 + s.alpha02_g1 : s.alpha01_g2 + s.alpha02_g2;
  if (s.target_censoring == 0.0) return kInf;
  return -std::log(s.target_censoring) / rate;
}

std::vector<SubjectRecord> simulate_competing_risks_constant(const ConstantHazardScenario& s, int group,
                                                             const SeedSpec& seed) {
  const double cutoff = censoring_cutoff(s, group);
  const double a01 = group == 1 ? s.alpha01_g1 : s.alpha01_g2;
  const double a02 = group == 1 ? s.alpha02_g1 : s.alpha02_g2;
  const double rate = a01 + a02;
  const std::size_t n = group == 1 ? s.n1 : s.n2;
  Xoshiro256pp gen(stream_key(seed, group == 1 ? stream_tag::group1 : stream_tag::group2));
  std::vector<SubjectRecord> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = -std::log(gen.uniform()) / rate;
    const bool type1 = gen.uniform() * rate < a01;
    SubjectRecord r;
    r.subject_id = std::to_string(i + 1);
    r.from_state = "0";
    if (t <= cutoff) {
      r.exit_time = t;
      r.to_state = type1 ? "1" : "2";
    } else {
      r.exit_time = cutoff;
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::map<TransitionKey, double> expected_event_counts(const IncrementModel& model, std::size_t n, double t1,
                                                      double t2) {
  model.validate();
  std::map<std::string, std::size_t> index;
  for (std::size_t s = 0; s < model.states.size(); ++s) index[model.states[s]] = s;
  std::vector<double> p(model.states.size(), 0.0);
  for (const auto& [state, prob] : model.initial_distribution) p[index.at(state)] = prob;

  std::map<double, std::vector<std::pair<TransitionKey, double>>> by_time;
  std::map<TransitionKey, double> expected;
  for (const auto& [key, list] : model.hazard_increments) {
    expected[key] = 0.0;
    for (const auto& m : list) by_time[m.time].emplace_back(key, m.mass);
  }
  std::size_t c = 0;
  double cens_before = 0.0;  // censoring mass strictly before the current time
  for (const auto& [t, incs] : by_time) {
    while (c < model.censoring_increments.size() && model.censoring_increments[c].time < t) {
      cens_before += model.censoring_increments[c++].mass;
    }
    const double observed = std::max(0.0, 1.0 - cens_before);
    std::vector<double> next = p;
    for (const auto& [key, inc] : incs) {
      const double flow = p[index.at(key.from)] * inc;
      next[index.at(key.from)] -= flow;
      next[index.at(key.to)] += flow;
      if (t > t1 && t <= t2) expected[key] += static_cast<double>(n) * flow * observed;
    }
    p = std::move(next);
  }
  return expected;
}

std::map<TransitionKey, double> expected_event_counts(const ConstantHazardScenario& s, int group, double t1,
                                                      double t2) {
  const double cutoff = censoring_cutoff(s, group);
  const double a01 = group == 1 ? s.alpha01_g1 : s.alpha01_g2;
  const double a02 = group == 1 ? s.alpha02_g1 : s.alpha02_g2;
  const double rate = a01 + a02;
  const double n = static_cast<double>(group == 1 ? s.n1 : s.n2);
  const double lo = std::clamp(t1, 0.0, cutoff);
  const double hi = std::clamp(t2, 0.0, cutoff);
  const double mass = hi > lo ? std::exp(-rate * lo) - std::exp(-rate * hi) : 0.0;
  return {{TransitionKey{"0", "1"}, n * a01 / rate * mass}, {TransitionKey{"0", "2"}, n * a02 / rate * mass}};
}

}  // namespace hazardband
