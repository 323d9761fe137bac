#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hazardband/estimator.hpp"
#include "hazardband/rng.hpp"
#include "hazardband/step_curve.hpp"

namespace hazardband {

/// g1(s) = (s(1-s))^{-1/2} gives equal-precision bands, g2 = 1 Hall-Wellner bands.
enum class BridgeWeight { equal_precision, hall_wellner };

struct BridgeQuantileSpec {
  BridgeWeight weight = BridgeWeight::hall_wellner;
  double phi_lo = 0.0;
  double phi_hi = 1.0;
  double level = 0.95;
  std::size_t n_paths = 1000;
  std::size_t grid_points = 2001;
  SeedSpec seed;
};

/// sigma^2(t) / (1 + sigma^2(t)) for a variance curve.
double phi_hat(const StepCurve& var_curve, double t);

/// Uniform grid of `points` values over [lo, hi], endpoints exact; one point if lo == hi.
std::vector<double> bridge_grid(double lo, double hi, std::size_t points);

/// Brownian bridge at the grid points from grid.size() + 1 standard normals:
/// W at grid[0], the increments between grid points, and W(1) - W(grid.back()).
void bridge_path(std::span<const double> normals, std::span<const double> grid, std::span<double> out);

/// max_i |weights[i] * B0(grid[i])| for one path built from `normals`.
double bridge_path_sup(std::span<const double> normals, std::span<const double> grid,
                       std::span<const double> weights, std::span<double> scratch);

/// Per-path sups of |g B0| over [phi_lo, phi_hi] for both weights from the same
/// paths. `equal_precision` is left empty when the interval touches 0 or 1.
struct BridgeDraws {
  std::vector<double> hall_wellner;
  std::vector<double> equal_precision;
};

/// OpenMP-parallel over paths; path p uses its own stream, so output does not
/// depend on the thread count.
BridgeDraws bridge_sup_draws(const BridgeQuantileSpec& spec);

double bridge_quantile(const BridgeQuantileSpec& spec);

/// Critical value c^g for an asymptotic band on [t1, t2], with phi taken from
/// the chosen variance estimate of `fit`.
double bridge_band_critical_value(const NelsonAalenFit& fit, VarianceKind variance, double t1, double t2,
                                  BridgeWeight weight, double level, std::size_t n_paths,
                                  std::size_t grid_points, const SeedSpec& seed);

namespace serial {
BridgeDraws bridge_sup_draws(const BridgeQuantileSpec& spec);
}

}  // namespace hazardband
