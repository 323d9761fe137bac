#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <omp.h>

#include "hazardband/bands.hpp"
#include "hazardband/estimator.hpp"
#include "hazardband/event_model.hpp"
#include "hazardband/hypothesis.hpp"
#include "hazardband/json_io.hpp"
#include "hazardband/simulate.hpp"
#include "hazardband/study.hpp"

using namespace hazardband;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

// Errors in what the user asked for (as opposed to failures while doing it).
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// File-system failures.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string out;
  int threads = 0;
  std::uint64_t seed = 1;
};

std::vector<SubjectRecord> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file '" + path + "'");
  try {
    return parse_event_csv(in);
  } catch (const ParseError& e) {
    throw UsageError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void emit(const Common& c, const json& j) {
  const std::string text = j.dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(c.out, std::ios::binary);
  if (!out) throw IoError("cannot write '" + c.out + "'");
  out << text;
}

void apply_threads(int threads) {
  if (threads <= 0) {
    if (const char* env = std::getenv("HAZARDBAND_THREADS")) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        throw UsageError("HAZARDBAND_THREADS must be a positive integer");
      }
      if (threads <= 0) throw UsageError("HAZARDBAND_THREADS must be a positive integer");
    }
  }
  if (threads > 0) omp_set_num_threads(threads);
}

Interval parse_interval(const std::string& text) {
  const auto pos = text.find(':');
  if (pos == std::string::npos) throw UsageError("--interval must be t1:t2");
  try {
    std::size_t used = 0;
    const double t1 = std::stod(text.substr(0, pos), &used);
    if (used != pos) throw UsageError("--interval must be t1:t2");
    const std::string rest = text.substr(pos + 1);
    const double t2 = std::stod(rest, &used);
    if (used != rest.size()) throw UsageError("--interval must be t1:t2");
    return {t1, t2};
  } catch (const std::logic_error&) {
    throw UsageError("--interval must be t1:t2 with numeric bounds");
  }
}

const CountingPath& require_path(const PathMap& paths, const std::string& label) {
  const TransitionKey key = TransitionKey::parse(label);
  auto it = paths.find(key);
  if (it == paths.end()) throw UsageError("transition " + label + " has no events up to tau");
  return it->second;
}

void write_band_csv(const std::string& path, const BandResult& b) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "time,estimate,lower,upper\n";
  out.precision(17);
  for (std::size_t i = 0; i < b.grid.size(); ++i) {
    out << b.grid[i] << ',' << b.center[i] << ',' << b.lower.values()[i] << ',' << b.upper.values()[i] << '\n';
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Nelson-Aalen estimation, wild bootstrap confidence bands and tests for multistate data"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "Write JSON here instead of stdout");
    sub->add_option("--threads", common.threads, "Worker threads (falls back to HAZARDBAND_THREADS)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", common.seed, "Master seed");
  };

  std::string data, data2, transition, transition2, interval_text, kind_text = "ep-wild", law_text = "normal";
  std::string variance_text, side_text = "two-sided", csv_path, config_path, stat_text = "both";
  std::string test_text = "equivalence", a0_curve, scenario, model_path, group_text = "1";
  double tau = 0.0, level = -1.0, a0_rate = -1.0, ell = 0.0, u = 0.0;
  std::size_t boot = 1000, bridge_paths = 1000, bridge_grid = 2001, n = 0, studies = 0, study_boot = 0;

  auto* est = app.add_subcommand("estimate", "Nelson-Aalen estimates with Aalen and Greenwood variances");
  est->add_option("--data", data, "Event CSV (id,from,to,entry,exit)")->required();
  est->add_option("--tau", tau, "End of the observation window")->required();
  add_common(est);

  auto* bnd = app.add_subcommand("band", "Simultaneous confidence band for one cumulative hazard");
  bnd->add_option("--data", data)->required();
  bnd->add_option("--tau", tau)->required();
  bnd->add_option("--transition", transition, "Transition as from>to")->required();
  bnd->add_option("--interval", interval_text, "Band interval t1:t2")->required();
  bnd->add_option("--kind", kind_text, "ep-wild|hw-wild|direct-wild|ep-asymptotic|hw-asymptotic");
  bnd->add_option("--side", side_text, "two-sided|lower|upper");
  bnd->add_option("--level", level, "Confidence level (default 0.95)");
  bnd->add_option("--boot", boot, "Bootstrap replicates");
  bnd->add_option("--law", law_text, "Multiplier law normal|poisson");
  bnd->add_option("--variance", variance_text, "aalen|greenwood");
  bnd->add_option("--bridge-paths", bridge_paths, "Simulated bridge paths for asymptotic kinds");
  bnd->add_option("--bridge-grid", bridge_grid, "Grid points per bridge path");
  bnd->add_option("--csv", csv_path, "Also write the band as CSV");
  add_common(bnd);

  auto* dif = app.add_subcommand("diff-band", "Band for the difference of two cumulative hazards");
  dif->add_option("--data", data)->required();
  dif->add_option("--tau", tau)->required();
  dif->add_option("--transition", transition)->required();
  dif->add_option("--transition2", transition2)->required();
  dif->add_option("--interval", interval_text)->required();
  dif->add_option("--level", level);
  dif->add_option("--boot", boot);
  dif->add_option("--law", law_text);
  dif->add_option("--csv", csv_path);
  add_common(dif);

  auto* eq = app.add_subcommand("test-equality", "Kolmogorov-Smirnov test of equal cumulative hazards");
  eq->add_option("--data", data)->required();
  eq->add_option("--data2", data2, "Second group (two-sample test)");
  eq->add_option("--tau", tau)->required();
  eq->add_option("--transition", transition)->required();
  eq->add_option("--transition2", transition2, "Second transition (within-sample test)");
  eq->add_option("--interval", interval_text)->required();
  eq->add_option("--level", level, "Nominal size alpha (default 0.05)");
  eq->add_option("--boot", boot);
  eq->add_option("--law", law_text);
  add_common(eq);

  auto* eqv = app.add_subcommand("test-equivalence", "Equivalence, inferiority or superiority by band inclusion");
  eqv->add_option("--data", data)->required();
  eqv->add_option("--tau", tau)->required();
  eqv->add_option("--transition", transition)->required();
  eqv->add_option("--interval", interval_text)->required();
  eqv->add_option("--test", test_text, "equivalence|inferiority|superiority");
  eqv->add_option("--kind", kind_text, "Band kind for the one-sided bands (default direct-wild)");
  eqv->add_option("--a0-rate", a0_rate, "Reference A0(t) = rate * t");
  eqv->add_option("--a0-curve", a0_curve, "Reference A0 as step-curve JSON");
  eqv->add_option("--margin-lower", ell, "Lower margin ell > 0")->required();
  eqv->add_option("--margin-upper", u, "Upper margin u > 0")->required();
  eqv->add_option("--level", level, "Nominal size alpha (default 0.05)");
  eqv->add_option("--boot", boot);
  eqv->add_option("--law", law_text);
  add_common(eqv);

  auto* prop = app.add_subcommand("test-prop", "Two-sample test of proportional hazards on [0, tau]");
  prop->add_option("--data", data, "Group 1 event CSV")->required();
  prop->add_option("--data2", data2, "Group 2 event CSV")->required();
  prop->add_option("--tau", tau)->required();
  prop->add_option("--transition", transition, "Transition compared (default 0>1)");
  prop->add_option("--stat", stat_text, "ks|cvm|both");
  prop->add_option("--level", level, "Nominal size alpha (default 0.05)");
  prop->add_option("--boot", boot);
  prop->add_option("--law", law_text, "normal|poisson|both");
  add_common(prop);

  auto* sim = app.add_subcommand("simulate", "Simulate event data as CSV");
  sim->add_option("--scenario", scenario, "table3:I..table3:IV or illness-death-recovery");
  sim->add_option("--model", model_path, "Increment model JSON");
  sim->add_option("--group", group_text, "Group 1 or 2 for two-sample scenarios");
  sim->add_option("--n", n, "Number of subjects")->required()->check(CLI::PositiveNumber);
  add_common(sim);

  auto* cov = app.add_subcommand("coverage-study", "Coverage of confidence bands on simulated data");
  cov->add_option("--config", config_path, "Study config JSON")->required();
  cov->add_option("--studies", studies, "Override n_studies");
  cov->add_option("--boot", study_boot, "Override n_boot");
  add_common(cov);

  auto* size = app.add_subcommand("size-study", "Size of the proportional hazards test on simulated data");
  size->add_option("--config", config_path, "Study config JSON");
  size->add_option("--studies", studies, "Override n_studies");
  size->add_option("--boot", study_boot, "Override n_boot");
  add_common(size);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }
  apply_threads(common.threads);
  const SeedSpec seed{common.seed, 0, 0};

  if (*est) {
    const auto records = load_records(data);
    const PathMap paths = build_counting_paths(records, tau);
    json fits = json::object();
    for (const auto& key : observed_transitions(records)) {
      auto it = paths.find(key);
      NelsonAalenFit fit;
      if (it != paths.end()) {
        fit = nelson_aalen(it->second);
      } else {
        fit.transition = key;
        fit.n_subjects = paths.empty() ? 0 : paths.begin()->second.n_subjects;
        fit.estimate = fit.var_aalen = fit.var_greenwood = StepCurve::constant(0.0, tau);
      }
      fits[key.label()] = to_json(fit);
    }
    std::set<std::string> ids;
    for (const auto& r : records) ids.insert(r.subject_id);
    emit(common, {{"tau", tau}, {"n_subjects", ids.size()}, {"transitions", fits}});
    return 0;
  }

  if (*bnd) {
    const PathMap paths = build_counting_paths(load_records(data), tau);
    BandRequest req;
    req.kind = parse_band_kind(kind_text);
    if (req.kind == BandKind::diff_direct_wild) throw UsageError("use diff-band for difference bands");
    if (side_text == "lower") {
      req.side = BandSide::lower_only;
    } else if (side_text == "upper") {
      req.side = BandSide::upper_only;
    } else if (side_text != "two-sided") {
      throw UsageError("--side must be two-sided, lower or upper");
    }
    if (req.side != BandSide::two_sided && !is_wild(req.kind)) {
      throw UsageError("one-sided bands need a wild bootstrap kind");
    }
    req.interval = parse_interval(interval_text);
    req.level = level < 0 ? 0.95 : level;
    if (!variance_text.empty()) req.variance = parse_variance_kind(variance_text);
    req.law = MultiplierLaw::parse(law_text);
    req.replicates = boot;
    req.bridge_paths = bridge_paths;
    req.bridge_grid_points = bridge_grid;
    req.seed = seed;
    const BandResult b = band(require_path(paths, transition), req);
    json j = to_json(b);
    j["transition"] = transition;
    if (!csv_path.empty()) write_band_csv(csv_path, b);
    emit(common, j);
    return 0;
  }

  if (*dif) {
    const PathMap paths = build_counting_paths(load_records(data), tau);
    require_path(paths, transition);
    require_path(paths, transition2);
    const BandResult b = difference_band(paths, TransitionKey::parse(transition), TransitionKey::parse(transition2),
                                         parse_interval(interval_text), level < 0 ? 0.95 : level, boot,
                                         MultiplierLaw::parse(law_text), seed);
    json j = to_json(b);
    j["transitions"] = {transition, transition2};
    if (!csv_path.empty()) write_band_csv(csv_path, b);
    emit(common, j);
    return 0;
  }

  if (*eq) {
    EqualityOptions opt;
    opt.replicates = boot;
    opt.law = MultiplierLaw::parse(law_text);
    opt.seed = seed;
    const double alpha = level < 0 ? 0.05 : level;
    const Interval iv = parse_interval(interval_text);
    if (data2.empty() == transition2.empty()) {
      throw UsageError("test-equality needs exactly one of --transition2 (within-sample) or --data2 (two-sample)");
    }
    TestResult r;
    if (!data2.empty()) {
      const PathMap p1 = build_counting_paths(load_records(data), tau);
      const PathMap p2 = build_counting_paths(load_records(data2), tau);
      r = ks_equality_two_sample(require_path(p1, transition), require_path(p2, transition), iv, alpha, opt);
    } else {
      const PathMap paths = build_counting_paths(load_records(data), tau);
      r = ks_equality_test(paths, TransitionKey::parse(transition), TransitionKey::parse(transition2), iv, alpha,
                           opt);
    }
    emit(common, to_json(r));
    return 0;
  }

  if (*eqv) {
    const PathMap paths = build_counting_paths(load_records(data), tau);
    if ((a0_rate >= 0) == !a0_curve.empty()) throw UsageError("give exactly one of --a0-rate or --a0-curve");
    std::function<double(double)> a0;
    if (a0_rate >= 0) {
      a0 = [a0_rate](double t) { return a0_rate * t; };
    } else {
      const StepCurve curve = step_curve_from_json(load_json(a0_curve));
      a0 = [curve](double t) { return curve.value_unchecked(t); };
    }
    EquivalenceOptions opt;
    if (test_text == "equivalence") {
      opt.kind = TestKind::equivalence;
    } else if (test_text == "inferiority") {
      opt.kind = TestKind::inferiority;
    } else if (test_text == "superiority") {
      opt.kind = TestKind::superiority;
    } else {
      throw UsageError("--test must be equivalence, inferiority or superiority");
    }
    opt.band_kind = eqv->count("--kind") ? parse_band_kind(kind_text) : BandKind::direct_wild;
    opt.replicates = boot;
    opt.law = MultiplierLaw::parse(law_text);
    opt.seed = seed;
    const TestResult r = equivalence_test(require_path(paths, transition), MarginSpec::constant_margins(a0, ell, u),
                                          parse_interval(interval_text), level < 0 ? 0.05 : level, opt);
    emit(common, to_json(r));
    return 0;
  }

  if (*prop) {
    const std::string label = transition.empty() ? "0>1" : transition;
    const PathMap p1 = build_counting_paths(load_records(data), tau);
    const PathMap p2 = build_counting_paths(load_records(data2), tau);
    std::vector<MultiplierLaw> laws;
    if (law_text == "both") {
      laws = {MultiplierKind::standard_normal, MultiplierKind::centered_poisson};
    } else {
      laws = {MultiplierLaw::parse(law_text)};
    }
    if (stat_text != "ks" && stat_text != "cvm" && stat_text != "both") throw UsageError("--stat must be ks, cvm or both");
    const auto results = prop_hazards_tests(require_path(p1, label), require_path(p2, label), laws,
                                            level < 0 ? 0.05 : level, boot, seed);
    json arr = json::array();
    for (const auto& r : results) {
      if (stat_text == "both" || (stat_text == "ks") == (r.kind == TestKind::prop_ks)) arr.push_back(to_json(r));
    }
    emit(common, arr.size() == 1 ? arr[0] : arr);
    return 0;
  }

  if (*sim) {
    if (scenario.empty() == model_path.empty()) throw UsageError("give exactly one of --scenario or --model");
    std::vector<SubjectRecord> records;
    if (!model_path.empty() || scenario == "illness-death-recovery") {
      const IncrementModel model =
          model_path.empty() ? illness_death_recovery_model() : increment_model_from_json(load_json(model_path));
      records = simulate_multistate(model, n, seed);
    } else {
      const int group = group_text == "1" ? 1 : group_text == "2" ? 2 : 0;
      if (group == 0) throw UsageError("--group must be 1 or 2");
      ConstantHazardScenario sc = scenario_preset(scenario, n);
      records = simulate_competing_risks_constant(sc, group, seed);
    }
    std::ostringstream csv;
    write_event_csv(csv, records);
    if (common.out.empty()) {
      std::cout << csv.str();
    } else {
      std::ofstream out(common.out, std::ios::binary);
      if (!out) throw IoError("cannot write '" + common.out + "'");
      out << csv.str();
    }
    return 0;
  }

  if (cov->parsed() || size->parsed()) {
    const bool coverage = cov->parsed();
    const CLI::App* sub = coverage ? cov : size;
    json cfg = config_path.empty() ? json::object() : load_json(config_path);
    if (studies > 0) cfg["n_studies"] = studies;
    if (study_boot > 0) cfg["n_boot"] = study_boot;
    if (sub->count("--seed")) cfg["master_seed"] = common.seed;
    const StudyReport report =
        coverage ? run_coverage_study(coverage_config_from_json(cfg)) : run_size_study(size_config_from_json(cfg));
    write_report_table(std::cerr, report);
    emit(common, to_json(report));
    return 0;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
