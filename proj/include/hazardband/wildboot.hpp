#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hazardband/event_model.hpp"
#include "hazardband/rng.hpp"
#include "hazardband/step_curve.hpp"

namespace hazardband {

enum class MultiplierKind { standard_normal, centered_poisson };

/// Law of the wild-bootstrap multipliers G. Every kind has mean 0 and
/// variance 1 and is sampled by inversion of one uniform, so switching the
/// law under a fixed seed changes the transform but not the stream.
///
/// To add a law, add a kind and its inverse CDF in from_uniform(); the
/// moment test in tests/test_wildboot.cpp iterates over all kinds.
class MultiplierLaw {
 public:
  MultiplierLaw(MultiplierKind kind = MultiplierKind::standard_normal) : kind_(kind) {}  // NOLINT

  MultiplierKind kind() const { return kind_; }
  double from_uniform(double u) const;
  std::string name() const;

  static MultiplierLaw parse(std::string_view name);
  static const std::vector<MultiplierKind>& all_kinds();

  bool operator==(const MultiplierLaw&) const = default;

 private:
  MultiplierKind kind_;
};

/// One wild-bootstrap draw: W-hat and sigma*^2 per transition.
struct BootstrapReplicate {
  std::map<TransitionKey, StepCurve> paths;
  std::map<TransitionKey, StepCurve> var_star;
};

enum class SupMode { direct, equal_precision, hall_wellner, difference };

/// two_sided: sup |X|; upper: sup X; lower: sup -X.
enum class Side { two_sided, upper, lower };

/// Selects the functional of a replicate whose conditional quantile is wanted.
struct SupSpec {
  TransitionKey transition;
  std::optional<TransitionKey> second;  // required in difference mode
  double t1 = 0.0;
  double t2 = 0.0;
  SupMode mode = SupMode::direct;
  Side side = Side::two_sided;
  /// When non-empty, the max is taken over these time points instead of [t1, t2].
  std::vector<double> grid;
  /// Weight g(t) applied in difference mode; empty means g = 1.
  std::function<double(double)> weight;
};

/// W-hat and sigma*^2 for every path, with multipliers from `seed`.
/// All paths must share n_subjects and tau.
BootstrapReplicate draw_replicate(const PathMap& paths, const MultiplierLaw& law, const SeedSpec& seed);

/// Same as draw_replicate with explicit multipliers, one per event in jump-time
/// order (a tie of size dN takes dN consecutive entries).
BootstrapReplicate replicate_from_multipliers(const PathMap& paths,
                                              const std::map<TransitionKey, std::vector<double>>& multipliers);

/// Multipliers draw_replicate would use for one path.
std::vector<double> draw_multipliers(const CountingPath& path, const MultiplierLaw& law, const SeedSpec& seed);

/// Exact sup of the selected functional: evaluated at t1 and every jump in (t1, t2].
double sup_statistic(const BootstrapReplicate& rep, const SupSpec& spec);

/// Time points at which sup_statistic evaluates the functional.
std::vector<double> evaluation_points(const PathMap& paths, const SupSpec& spec);

/// Sup statistics of replicates 0..B-1 (replicate b uses SeedSpec{master, study, b}).
/// Result is row-major: [law][replicate][spec]. OpenMP-parallel over replicates;
/// output does not depend on the thread count.
std::vector<double> bootstrap_sup_draws(const PathMap& paths, std::span<const MultiplierLaw> laws,
                                        std::span<const SupSpec> specs, std::size_t replicates,
                                        const SeedSpec& seed);

double bootstrap_quantile(const PathMap& paths, const MultiplierLaw& law, const SupSpec& spec, double level,
                          std::size_t replicates, const SeedSpec& seed);

namespace serial {

/// Reference for bootstrap_sup_draws built from draw_replicate and
/// sup_statistic, one replicate at a time.
std::vector<double> bootstrap_sup_draws(const PathMap& paths, std::span<const MultiplierLaw> laws,
                                        std::span<const SupSpec> specs, std::size_t replicates,
                                        const SeedSpec& seed);

}  // namespace serial

}  // namespace hazardband
