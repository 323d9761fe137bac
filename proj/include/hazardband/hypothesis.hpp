#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hazardband/bands.hpp"

namespace hazardband {

enum class TestKind { equivalence, inferiority, superiority, ks_equality, prop_ks, prop_cvm };

std::string to_string(TestKind kind);

struct TestMeta {
  std::size_t replicates = 0;
  std::optional<MultiplierKind> law;
  SeedSpec seed;
  Interval interval;
  std::size_t grid_size = 0;  // number of evaluation points
  std::optional<BandKind> band_kind;
  int n1 = 0;
  int n2 = 0;
};

/// `level` is the nominal size alpha. For equivalence-type tests the statistic
/// is the smallest margin slack over the grid and the critical value is 0.
struct TestResult {
  double statistic = 0.0;
  double critical_value = 0.0;
  bool reject = false;
  double level = 0.05;
  TestKind kind = TestKind::ks_equality;
  TestMeta meta;
};

/// Reference curve A0 and margins ell, u (all functions of time).
struct MarginSpec {
  std::function<double(double)> a0;
  std::function<double(double)> ell;
  std::function<double(double)> u;

  static MarginSpec constant_margins(std::function<double(double)> a0, double ell, double u);
  /// Throws std::invalid_argument unless ell, u > 0 and a0 is nondecreasing on `grid`.
  void validate(const std::vector<double>& grid) const;
};

struct EquivalenceOptions {
  TestKind kind = TestKind::equivalence;  // or inferiority / superiority
  BandKind band_kind = BandKind::direct_wild;
  std::size_t replicates = 1000;
  MultiplierLaw law;
  SeedSpec seed;
};

/// Band-inclusion test. With one-sided bands (a_n, inf) and [0, b_n), each at
/// confidence 1 - alpha:
///   equivalence rejects iff a_n > A0 - ell and b_n < A0 + u on the whole grid,
///   inferiority iff b_n < A0 + u, superiority iff a_n > A0 - ell.
TestResult equivalence_test(const CountingPath& path, const MarginSpec& margins, Interval interval, double alpha,
                            const EquivalenceOptions& options);

/// Same decision from already computed one-sided bands.
TestResult equivalence_from_bands(const BandResult* lower_band, const BandResult* upper_band,
                                  const MarginSpec& margins, TestKind kind, double alpha);

struct EqualityOptions {
  std::size_t replicates = 1000;
  MultiplierLaw law;
  SeedSpec seed;
  /// Weight g(t); empty means g = 1.
  std::function<double(double)> weight;
  /// When non-empty, compare only at these time points.
  std::vector<double> grid;
};

/// Within-sample test of A_a = A_b on [t1, t2]:
///   statistic sqrt(n) sup g |A_a - A_b|, critical value from sup g |W_a - W_b|.
/// A transition without jumps counts as a zero curve.
TestResult ks_equality_test(const PathMap& paths, const TransitionKey& a, const TransitionKey& b, Interval interval,
                            double alpha, const EqualityOptions& options);

/// Two-sample test of A^(1) = A^(2) on [t1, t2] from independent groups:
///   statistic sqrt(n1 n2 / n) sup |A1 - A2|,
///   critical value from sup |sqrt(n2/n) W1 - sqrt(n1/n) W2|.
TestResult ks_equality_two_sample(const CountingPath& group1, const CountingPath& group2, Interval interval,
                                  double alpha, const EqualityOptions& options);

enum class PropStatistic { ks, cvm };

std::string to_string(PropStatistic rho);
PropStatistic parse_prop_statistic(std::string_view name);

/// Evaluation points of the proportionality test: the first jump of a1, every
/// jump of either curve after it up to tau, and tau.
std::vector<double> prop_evaluation_points(const StepCurve& a1, const StepCurve& a2);

/// Integral over [points.front(), points.back()] of a step function taking
/// values[i] on [points[i], points[i+1]).
double step_integral(std::span<const double> points, std::span<const double> values);

/// Observed statistic from two cumulative hazard curves on a shared [0, tau]:
///   KS  = sqrt(n1 n2 / n) max |A2 - A1 A2(tau) / A1(tau)|
///   CvM = (n1 n2 / n) integral of (A2 - A1 A2(tau) / A1(tau))^2
double prop_statistic(const StepCurve& a1, const StepCurve& a2, int n1, int n2, PropStatistic rho);

/// Bootstrap draws of both statistics for every law from shared replicates.
/// Row-major [law][replicate][rho] with rho = (ks, cvm). Group j draws its
/// multipliers from its own stream. OpenMP-parallel over replicates.
std::vector<double> prop_bootstrap_draws(const CountingPath& group1, const CountingPath& group2,
                                         std::span<const MultiplierLaw> laws, std::size_t replicates,
                                         const SeedSpec& seed);

struct PropOptions {
  std::size_t replicates = 1000;
  MultiplierLaw law;
  SeedSpec seed;
};

/// Two-sample test of proportional hazards on [0, tau] for one transition
/// observed in each group.
TestResult prop_hazards_test(const CountingPath& group1, const CountingPath& group2, PropStatistic rho,
                             double alpha, const PropOptions& options);

/// All four (rho, law) combinations from one set of bootstrap replicates;
/// results are ordered [law][rho].
std::vector<TestResult> prop_hazards_tests(const CountingPath& group1, const CountingPath& group2,
                                           std::span<const MultiplierLaw> laws, double alpha,
                                           std::size_t replicates, const SeedSpec& seed);

namespace serial {

/// Reference for prop_bootstrap_draws built on StepCurves, one replicate at a time.
std::vector<double> prop_bootstrap_draws(const CountingPath& group1, const CountingPath& group2,
                                         std::span<const MultiplierLaw> laws, std::size_t replicates,
                                         const SeedSpec& seed);

}  // namespace serial

}  // namespace hazardband
