#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hazardband/brownian.hpp"
#include "hazardband/estimator.hpp"
#include "hazardband/wildboot.hpp"

namespace hazardband {

enum class BandKind { ep_asymptotic, hw_asymptotic, ep_wild, hw_wild, direct_wild, diff_direct_wild };

/// Which bounds a band carries. lower_only is the half-open (a_n, inf),
/// upper_only is [0, b_n).
enum class BandSide { two_sided, lower_only, upper_only };

struct Interval {
  double t1 = 0.0;
  double t2 = 0.0;
};

struct BandResult {
  BandKind kind = BandKind::direct_wild;
  BandSide side = BandSide::two_sided;
  Interval interval;
  double level = 0.95;
  std::vector<double> grid;    // jump times in [t1, t2] plus both endpoints
  std::vector<double> center;  // estimate (or difference) at each grid point
  StepCurve lower;
  StepCurve upper;
  double critical_value = 0.0;
  std::optional<VarianceKind> variance_used;
  std::optional<MultiplierKind> multiplier;
};

struct BandRequest {
  BandKind kind = BandKind::ep_wild;
  BandSide side = BandSide::two_sided;
  Interval interval;
  double level = 0.95;
  /// Data-side variance; defaults to Greenwood for asymptotic kinds and Aalen for wild kinds.
  std::optional<VarianceKind> variance;
  MultiplierLaw law;
  std::size_t replicates = 1000;
  std::size_t bridge_paths = 1000;
  std::size_t bridge_grid_points = 2001;
  SeedSpec seed;
  /// Use this critical value instead of computing one.
  std::optional<double> critical_value;
};

std::string to_string(BandKind kind);
BandKind parse_band_kind(std::string_view name);
bool is_wild(BandKind kind);
bool is_log_transformed(BandKind kind);
VarianceKind default_variance(BandKind kind);

/// {t1} + jump times of `estimate` in (t1, t2] + {t2}.
std::vector<double> band_grid(const StepCurve& estimate, Interval interval);

/// Applies the band formula for a given critical value:
///   EP:     A exp(-/+ c sigma / (sqrt(n) A))
///   HW:     A exp(-/+ c (1 + sigma^2) / (sqrt(n) A))
///   direct: A -/+ c / sqrt(n)
BandResult band_from_critical_value(const NelsonAalenFit& fit, BandKind kind, Interval interval, double level,
                                    double critical_value, std::optional<VarianceKind> variance,
                                    BandSide side = BandSide::two_sided);

/// Quantile from the wild bootstrap or simulated bridges as the kind requires, then the band.
BandResult band(const CountingPath& path, const BandRequest& request);

/// Critical value the request would use, without building the band.
double band_critical_value(const CountingPath& path, const NelsonAalenFit& fit, const BandRequest& request);

/// Band for A_a - A_b from one dataset: center A_a - A_b, half-width q / sqrt(n).
BandResult difference_band(const PathMap& paths, const TransitionKey& a, const TransitionKey& b,
                           Interval interval, double level, std::size_t replicates, const MultiplierLaw& law,
                           const SeedSpec& seed);

struct PointInterval {
  double time = 0.0;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct IntervalSet {
  TransitionKey transition;
  BandKind kind = BandKind::ep_wild;
  double level = 0.95;
  double critical_value = 0.0;
  std::vector<PointInterval> intervals;
};

/// Intervals at finitely many time points, jointly at `level`: the critical
/// value is the quantile of the max over the grid. kind is one of the wild kinds.
IntervalSet simultaneous_intervals(const CountingPath& path, const std::vector<double>& grid, double level,
                                   BandKind kind, std::size_t replicates, const MultiplierLaw& law,
                                   const SeedSpec& seed);

struct SidakRegion {
  double joint_level = 0.95;
  double per_interval_level = 0.95;
  std::vector<IntervalSet> components;
};

/// Joint region for (A_1(t), ..., A_k(t)) from pointwise intervals at level^(1/k).
SidakRegion sidak_region(const PathMap& paths, const std::vector<TransitionKey>& transitions, double t,
                         double level, std::size_t replicates, const MultiplierLaw& law, const SeedSpec& seed,
                         BandKind kind = BandKind::ep_wild);

}  // namespace hazardband
