#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hazardband/bands.hpp"
#include "hazardband/hypothesis.hpp"
#include "hazardband/simulate.hpp"

namespace hazardband {

/// One row of a study report: an empirical coverage or rejection rate.
struct ReportCell {
  std::string scenario;
  std::size_t n = 0;
  std::string transition;  // empty for two-sample tests
  std::string method;      // band kind or test statistic
  std::string law;         // multiplier law, empty for bridge bands
  std::string variance;    // data-side variance, empty when unused
  std::size_t numerator = 0;
  std::size_t denominator = 0;
  double estimate = 0.0;
  double standard_error = 0.0;
  std::size_t failures = 0;  // studies where the method could not be applied
  std::optional<double> reference;
  std::optional<double> expected_events;
  std::optional<std::string> skip_reason;
};

struct StudyReport {
  std::string kind;  // "coverage" or "size"
  std::uint64_t master_seed = 0;
  std::size_t n_studies = 0;
  std::size_t n_boot = 0;
  double level = 0.0;
  std::vector<ReportCell> cells;
  double wall_seconds = 0.0;  // reported on the text table only
};

struct CoverageConfig {
  std::string scenario = "custom";
  IncrementModel model;
  std::vector<std::size_t> sample_sizes{500};
  std::size_t n_studies = 1000;
  std::size_t n_boot = 500;
  std::size_t bridge_paths = 1000;
  std::size_t bridge_grid_points = 2001;
  double level = 0.95;
  Interval interval;
  std::vector<BandKind> band_kinds{BandKind::ep_wild, BandKind::hw_wild};
  std::vector<MultiplierLaw> laws{MultiplierKind::standard_normal, MultiplierKind::centered_poisson};
  /// Data-side variances tried for the Brownian-bridge kinds.
  std::vector<VarianceKind> bridge_variances{VarianceKind::greenwood};
  /// Transitions to study; empty means every transition of the model.
  std::vector<TransitionKey> transitions;
  double min_expected_events = 20.0;
  std::uint64_t master_seed = 1;

  void validate() const;
};

struct SizeConfig {
  std::vector<std::string> scenarios{"table3:I", "table3:II", "table3:III", "table3:IV"};
  std::vector<std::size_t> sample_sizes{125, 250, 500, 1000};
  std::size_t n_studies = 1000;
  std::size_t n_boot = 1000;
  double alpha = 0.05;
  std::vector<MultiplierLaw> laws{MultiplierKind::standard_normal, MultiplierKind::centered_poisson};
  std::vector<PropStatistic> statistics{PropStatistic::ks, PropStatistic::cvm};
  TransitionKey transition{"0", "1"};
  std::uint64_t master_seed = 1;

  void validate() const;
};

/// Seeds of study s at sample size n: data and bootstrap streams are disjoint,
/// so changing the number of replicates leaves the simulated data unchanged.
SeedSpec study_data_seed(std::uint64_t master_seed, std::size_t n, std::size_t study);
SeedSpec study_boot_seed(std::uint64_t master_seed, std::size_t n, std::size_t study);

/// Illness-death model with recovery (0 <-> 1, 0 -> 2, 1 -> 2) with constant
/// hazards on a 0.1 time grid over [0, 40] and light uniform censoring.
IncrementModel illness_death_recovery_model();

/// Studies run in parallel; results are reduced in study order, so the report
/// does not depend on the thread count.
StudyReport run_coverage_study(const CoverageConfig& config);
StudyReport run_size_study(const SizeConfig& config);

/// Published simulated size for a Table 3 cell, if the configuration matches one.
std::optional<double> table3_reference(const std::string& scenario, std::size_t n, PropStatistic rho,
                                       MultiplierKind law);

/// Aligned text table for humans.
void write_report_table(std::ostream& out, const StudyReport& report);

}  // namespace hazardband
