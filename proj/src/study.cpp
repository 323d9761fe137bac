#include "hazardband/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <omp.h>

#include "hazardband/quantile.hpp"

namespace hazardband {

namespace {

constexpr std::uint64_t kBootTag = 0x626f6f74ULL;

enum Outcome : std::uint8_t { kMiss = 0, kHit = 1, kFailed = 2 };

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void finish_cell(ReportCell& cell) {
  if (cell.denominator == 0) return;
  const double p = static_cast<double>(cell.numerator) / static_cast<double>(cell.denominator);
  cell.estimate = p;
  cell.standard_error = std::sqrt(p * (1.0 - p) / static_cast<double>(cell.denominator));
}

// Runs body(study) for every study in parallel, rethrowing the first failure
// after the loop so no exception crosses the parallel region.
template <class Body>
void for_each_study(std::size_t n_studies, Body body) {
  std::string first_error;
  std::size_t error_study = n_studies;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t s = 0; s < n_studies; ++s) {
    try {
      body(s);
    } catch (const std::exception& e) {
#pragma omp critical(hazardband_study_error)
      {
        if (s < error_study) {
          error_study = s;
          first_error = e.what();
        }
      }
    }
  }
  if (error_study < n_studies) {
    throw std::runtime_error("study " + std::to_string(error_study) + " failed: " + first_error);
  }
}

bool band_covers(const BandResult& band, const StepCurve& truth, Interval iv) {
  std::vector<double> points = band.grid;
  for (double t : truth.times()) {
    if (t > iv.t1 && t <= iv.t2) points.push_back(t);
  }
  for (double s : points) {
    const double a = truth.value_unchecked(s);
    if (!(band.lower.value_unchecked(s) <= a && a <= band.upper.value_unchecked(s))) return false;
  }
  return true;
}

SupMode wild_mode(BandKind kind) {
  switch (kind) {
    case BandKind::ep_wild:
      return SupMode::equal_precision;
    case BandKind::hw_wild:
      return SupMode::hall_wellner;
    default:
      return SupMode::direct;
  }
}

// Cell layout of one transition in a coverage study.
struct CoveragePlan {
  std::vector<BandKind> wild_kinds;
  std::vector<BandKind> bridge_kinds;
  std::size_t n_laws = 0;
  std::size_t n_variances = 0;
  std::size_t wild_cells() const { return wild_kinds.size() * n_laws; }
  std::size_t size() const { return wild_cells() + bridge_kinds.size() * n_variances; }
};

void run_coverage_transition(const CoverageConfig& cfg, const CoveragePlan& plan, const PathMap& paths,
                             const TransitionKey& key, const StepCurve& truth, const SeedSpec& boot,
                             std::uint8_t* out) {
  auto it = paths.find(key);
  if (it == paths.end()) {
    std::fill(out, out + plan.size(), kFailed);
    return;
  }
  const CountingPath& path = it->second;
  const NelsonAalenFit fit = nelson_aalen(path);
  const Interval iv = cfg.interval;

  auto assess = [&](BandKind kind, double c, std::optional<VarianceKind> var) -> std::uint8_t {
    try {
      const BandResult b = band_from_critical_value(fit, kind, iv, cfg.level, c, var);
      return band_covers(b, truth, iv) ? kHit : kMiss;
    } catch (const std::domain_error&) {
      return kFailed;
    }
  };

  if (!plan.wild_kinds.empty()) {
    std::vector<SupSpec> specs;
    for (BandKind kind : plan.wild_kinds) {
      SupSpec spec;
      spec.transition = key;
      spec.t1 = iv.t1;
      spec.t2 = iv.t2;
      spec.mode = wild_mode(kind);
      specs.push_back(spec);
    }
    const PathMap single{{key, path}};
    const auto draws = bootstrap_sup_draws(single, cfg.laws, specs, cfg.n_boot, boot);
    const std::size_t per_law = cfg.n_boot * specs.size();
    for (std::size_t l = 0; l < plan.n_laws; ++l) {
      const std::span<const double> block(draws.data() + l * per_law, per_law);
      for (std::size_t k = 0; k < specs.size(); ++k) {
        const double c = order_statistic_quantile(block, specs.size(), k, cfg.level);
        out[k * plan.n_laws + l] = assess(plan.wild_kinds[k], c, std::nullopt);
      }
    }
  }

  std::uint8_t* bridge_out = out + plan.wild_cells();
  for (std::size_t v = 0; v < plan.n_variances; ++v) {
    const VarianceKind var = cfg.bridge_variances[v];
    const double lo = phi_hat(fit.variance(var), iv.t1);
    const double hi = phi_hat(fit.variance(var), iv.t2);
    if (!(lo > 0.0)) {
      for (std::size_t k = 0; k < plan.bridge_kinds.size(); ++k) bridge_out[k * plan.n_variances + v] = kFailed;
      continue;
    }
    BridgeQuantileSpec spec{BridgeWeight::hall_wellner, lo, hi, cfg.level, cfg.bridge_paths,
                            cfg.bridge_grid_points, SeedSpec{boot.master_seed, boot.study,
                                                             rng::hash_label(key.label())}};
    const BridgeDraws draws = bridge_sup_draws(spec);
    for (std::size_t k = 0; k < plan.bridge_kinds.size(); ++k) {
      const BandKind kind = plan.bridge_kinds[k];
      const auto& d = kind == BandKind::ep_asymptotic ? draws.equal_precision : draws.hall_wellner;
      bridge_out[k * plan.n_variances + v] =
          d.empty() ? std::uint8_t{kFailed} : assess(kind, order_statistic_quantile(d, cfg.level), var);
    }
  }
}

// Published Table 3 sizes, indexed [scenario][n][ks-sn, ks-poi, cvm-sn, cvm-poi].
struct Table3Row {
  const char* scenario;
  std::size_t n;
  double values[4];
};

constexpr Table3Row kTable3[] = {
    {"table3:I", 125, {.029, .024, .033, .030}},   {"table3:II", 125, {.029, .026, .027, .023}},
    {"table3:III", 125, {.045, .041, .028, .030}}, {"table3:IV", 125, {.046, .042, .030, .025}},
    {"table3:I", 250, {.035, .039, .039, .040}},   {"table3:II", 250, {.040, .038, .037, .034}},
    {"table3:III", 250, {.039, .040, .037, .034}}, {"table3:IV", 250, {.034, .034, .033, .030}},
    {"table3:I", 500, {.057, .054, .059, .060}},   {"table3:II", 500, {.034, .038, .040, .041}},
    {"table3:III", 500, {.056, .053, .047, .045}}, {"table3:IV", 500, {.044, .044, .043, .044}},
    {"table3:I", 1000, {.050, .050, .047, .047}},  {"table3:II", 1000, {.048, .049, .043, .046}},
    {"table3:III", 1000, {.047, .049, .045, .048}}, {"table3:IV", 1000, {.058, .059, .053, .056}},
};

}  // namespace

void CoverageConfig::validate() const {
  model.validate();
  if (n_studies < 1) throw std::invalid_argument("coverage study: n_studies must be at least 1");
  if (n_boot < 100) throw std::invalid_argument("coverage study: n_boot must be at least 100");
  if (sample_sizes.empty()) throw std::invalid_argument("coverage study: no sample sizes");
  for (auto n : sample_sizes) {
    if (n < 2) throw std::invalid_argument("coverage study: sample sizes must be at least 2");
  }
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("coverage study: level must lie in (0, 1)");
  if (!(interval.t1 >= 0.0 && interval.t1 < interval.t2 && interval.t2 <= model.horizon)) {
    throw std::invalid_argument("coverage study: interval must satisfy 0 <= t1 < t2 <= horizon");
  }
  if (band_kinds.empty()) throw std::invalid_argument("coverage study: no band kinds");
  for (auto k : band_kinds) {
    if (k == BandKind::diff_direct_wild) throw std::invalid_argument("coverage study: difference bands unsupported");
  }
  if (laws.empty()) throw std::invalid_argument("coverage study: no multiplier laws");
  for (const auto& key : transitions) {
    if (!model.hazard_increments.count(key)) {
      throw std::invalid_argument("coverage study: transition " + key.label() + " not in the model");
    }
  }
}

void SizeConfig::validate() const {
  if (n_studies < 1) throw std::invalid_argument("size study: n_studies must be at least 1");
  if (n_boot < 100) throw std::invalid_argument("size study: n_boot must be at least 100");
  if (scenarios.empty() || sample_sizes.empty()) throw std::invalid_argument("size study: no scenarios or sizes");
  for (const auto& s : scenarios) scenario_preset(s, 2);
  for (auto n : sample_sizes) {
    if (n < 2) throw std::invalid_argument("size study: sample sizes must be at least 2");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("size study: alpha must lie in (0, 1)");
  if (laws.empty() || statistics.empty()) throw std::invalid_argument("size study: no laws or statistics");
}

SeedSpec study_data_seed(std::uint64_t master_seed, std::size_t n, std::size_t study) {
  return SeedSpec{rng::combine(rng::combine(master_seed, n), stream_tag::data), study, 0};
}

SeedSpec study_boot_seed(std::uint64_t master_seed, std::size_t n, std::size_t study) {
  return SeedSpec{rng::combine(rng::combine(master_seed, n), kBootTag), study, 0};
}

IncrementModel illness_death_recovery_model() {
  const double dt = 0.1, horizon = 40.0;
  std::vector<TimedMass> censoring;
  for (double t : time_grid(dt, horizon)) censoring.push_back({t, 0.01 * dt});
  return constant_hazard_model({"0", "1", "2"}, {{"0", 0.5}, {"1", 0.5}},
                               {{{"0", "1"}, 0.04}, {{"1", "0"}, 0.08}, {{"0", "2"}, 0.03}, {{"1", "2"}, 0.04}},
                               dt, horizon, std::move(censoring));
}

StudyReport run_coverage_study(const CoverageConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();

  std::vector<TransitionKey> keys = cfg.transitions;
  if (keys.empty()) {
    for (const auto& [key, list] : cfg.model.hazard_increments) keys.push_back(key);
  }
  std::map<TransitionKey, StepCurve> truth;
  for (const auto& key : keys) truth.emplace(key, cumulative_increments(cfg.model, key));

  CoveragePlan plan;
  for (BandKind k : cfg.band_kinds) (is_wild(k) ? plan.wild_kinds : plan.bridge_kinds).push_back(k);
  plan.n_laws = cfg.laws.size();
  plan.n_variances = cfg.bridge_variances.size();
  if (!plan.bridge_kinds.empty() && plan.n_variances == 0) {
    throw std::invalid_argument("coverage study: bridge bands need at least one variance");
  }

  StudyReport report;
  report.kind = "coverage";
  report.master_seed = cfg.master_seed;
  report.n_studies = cfg.n_studies;
  report.n_boot = cfg.n_boot;
  report.level = cfg.level;

  for (std::size_t n : cfg.sample_sizes) {
    const auto expected = expected_event_counts(cfg.model, n, cfg.interval.t1, cfg.interval.t2);
    std::vector<TransitionKey> active;
    std::vector<ReportCell> cells;
    for (const auto& key : keys) {
      const double ev = expected.at(key);
      std::vector<ReportCell> row;
      for (BandKind k : plan.wild_kinds) {
        for (const auto& law : cfg.laws) {
          ReportCell c;
          c.method = to_string(k);
          c.law = law.name();
          c.variance = "aalen";
          row.push_back(c);
        }
      }
      for (BandKind k : plan.bridge_kinds) {
        for (VarianceKind v : cfg.bridge_variances) {
          ReportCell c;
          c.method = to_string(k);
          c.variance = to_string(v);
          row.push_back(c);
        }
      }
      for (auto& c : row) {
        c.scenario = cfg.scenario;
        c.n = n;
        c.transition = key.label();
        c.expected_events = ev;
        if (ev < cfg.min_expected_events) {
          std::ostringstream why;
          why << "expected events " << std::fixed << std::setprecision(1) << ev << " below "
              << cfg.min_expected_events;
          c.skip_reason = why.str();
        }
      }
      if (ev >= cfg.min_expected_events) active.push_back(key);
      cells.insert(cells.end(), row.begin(), row.end());
    }

    const std::size_t width = active.size() * plan.size();
    std::vector<std::uint8_t> outcomes(cfg.n_studies * width, kFailed);
    if (width > 0) {
      for_each_study(cfg.n_studies, [&](std::size_t s) {
        const auto records = simulate_multistate(cfg.model, n, study_data_seed(cfg.master_seed, n, s));
        const PathMap paths = build_counting_paths(records, cfg.interval.t2);
        const SeedSpec boot = study_boot_seed(cfg.master_seed, n, s);
        for (std::size_t a = 0; a < active.size(); ++a) {
          run_coverage_transition(cfg, plan, paths, active[a], truth.at(active[a]), boot,
                                  outcomes.data() + s * width + a * plan.size());
        }
      });
    }

    std::size_t a = 0;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const bool is_active = a < active.size() && active[a] == keys[i];
      for (std::size_t j = 0; j < plan.size(); ++j) {
        ReportCell& c = cells[i * plan.size() + j];
        if (!is_active) continue;
        for (std::size_t s = 0; s < cfg.n_studies; ++s) {
          const std::uint8_t o = outcomes[s * width + a * plan.size() + j];
          ++c.denominator;
          if (o == kHit) ++c.numerator;
          if (o == kFailed) ++c.failures;
        }
        finish_cell(c);
      }
      if (is_active) ++a;
    }
    report.cells.insert(report.cells.end(), cells.begin(), cells.end());
  }
  report.wall_seconds = elapsed_seconds(start);
  return report;
}

StudyReport run_size_study(const SizeConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  StudyReport report;
  report.kind = "size";
  report.master_seed = cfg.master_seed;
  report.n_studies = cfg.n_studies;
  report.n_boot = cfg.n_boot;
  report.level = cfg.alpha;

  const std::size_t width = cfg.laws.size() * cfg.statistics.size();
  for (const auto& name : cfg.scenarios) {
    for (std::size_t n : cfg.sample_sizes) {
      const ConstantHazardScenario sc = scenario_preset(name, n);
      // Scenario seeds differ through the hash of the preset name.
      const std::uint64_t master = rng::combine(cfg.master_seed, rng::hash_label(name));
      std::vector<std::uint8_t> outcomes(cfg.n_studies * width, kFailed);
      for_each_study(cfg.n_studies, [&](std::size_t s) {
        const SeedSpec data = study_data_seed(master, n, s);
        auto g1 = build_counting_paths(simulate_competing_risks_constant(sc, 1, data), sc.tau);
        auto g2 = build_counting_paths(simulate_competing_risks_constant(sc, 2, data), sc.tau);
        auto i1 = g1.find(cfg.transition);
        auto i2 = g2.find(cfg.transition);
        if (i1 == g1.end() || i2 == g2.end()) return;
        std::vector<TestResult> results;
        try {
          results = prop_hazards_tests(i1->second, i2->second, cfg.laws, cfg.alpha, cfg.n_boot,
                                       study_boot_seed(master, n, s));
        } catch (const std::domain_error&) {
          return;
        }
        for (std::size_t l = 0; l < cfg.laws.size(); ++l) {
          for (std::size_t r = 0; r < cfg.statistics.size(); ++r) {
            const TestResult& t = results[l * 2 + (cfg.statistics[r] == PropStatistic::ks ? 0 : 1)];
            outcomes[s * width + r * cfg.laws.size() + l] = t.reject ? kHit : kMiss;
          }
        }
      });
      for (std::size_t r = 0; r < cfg.statistics.size(); ++r) {
        for (std::size_t l = 0; l < cfg.laws.size(); ++l) {
          ReportCell c;
          c.scenario = name;
          c.n = n;
          c.method = to_string(cfg.statistics[r]);
          c.law = cfg.laws[l].name();
          c.reference = table3_reference(name, n, cfg.statistics[r], cfg.laws[l].kind());
          for (std::size_t s = 0; s < cfg.n_studies; ++s) {
            const std::uint8_t o = outcomes[s * width + r * cfg.laws.size() + l];
            if (o == kFailed) {
              ++c.failures;
              continue;
            }
            ++c.denominator;
            if (o == kHit) ++c.numerator;
          }
          if (c.denominator == 0) c.skip_reason = "test not applicable in any study";
          finish_cell(c);
          report.cells.push_back(c);
        }
      }
    }
  }
  report.wall_seconds = elapsed_seconds(start);
  return report;
}

std::optional<double> table3_reference(const std::string& scenario, std::size_t n, PropStatistic rho,
                                       MultiplierKind law) {
  for (const auto& row : kTable3) {
    if (scenario == row.scenario && n == row.n) {
      const int col = (rho == PropStatistic::ks ? 0 : 2) + (law == MultiplierKind::standard_normal ? 0 : 1);
      return row.values[col];
    }
  }
  return std::nullopt;
}

void write_report_table(std::ostream& out, const StudyReport& report) {
  const bool coverage = report.kind == "coverage";
  out << report.kind << " study: " << report.n_studies << " studies x " << report.n_boot << " bootstrap replicates, "
      << (coverage ? "nominal level " : "alpha ") << report.level << ", master seed " << report.master_seed << "\n";
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"scenario", "n", "transition", "method", "law", "variance", coverage ? "coverage" : "size", "se",
                  "count", "failed", "reference", "note"});
  for (const auto& c : report.cells) {
    std::ostringstream rate, se, ref;
    rate << std::fixed << std::setprecision(3) << c.estimate;
    se << std::fixed << std::setprecision(4) << c.standard_error;
    if (c.reference) ref << std::fixed << std::setprecision(3) << *c.reference;
    const bool skipped = c.skip_reason.has_value() && c.denominator == 0;
    rows.push_back({c.scenario, std::to_string(c.n), c.transition.empty() ? "-" : c.transition, c.method,
                    c.law.empty() ? "-" : c.law, c.variance.empty() ? "-" : c.variance, skipped ? "-" : rate.str(),
                    skipped ? "-" : se.str(), std::to_string(c.numerator) + "/" + std::to_string(c.denominator),
                    std::to_string(c.failures), c.reference ? ref.str() : "-", c.skip_reason.value_or("")});
  }
  std::vector<std::size_t> widths(rows.front().size(), 0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) widths[i] = std::max(widths[i], r[i].size());
  }
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      out << std::left << std::setw(static_cast<int>(widths[i])) << r[i];
      if (i + 1 < r.size()) out << "  ";
    }
    out << "\n";
  }
  out << "wall clock: " << std::fixed << std::setprecision(1) << report.wall_seconds << " s\n";
}

}  // namespace hazardband
