#include "hazardband/brownian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/random/normal_distribution.hpp>

#include "hazardband/detail/kernels.hpp"
#include "hazardband/quantile.hpp"

namespace hazardband {

namespace {

void check_spec(const BridgeQuantileSpec& spec) {
  if (!(spec.phi_lo >= 0.0 && spec.phi_lo <= spec.phi_hi && spec.phi_hi <= 1.0)) {
    throw std::invalid_argument("bridge interval must satisfy 0 <= phi_lo <= phi_hi <= 1");
  }
  if (spec.weight == BridgeWeight::equal_precision && (spec.phi_lo <= 0.0 || spec.phi_hi >= 1.0)) {
    throw std::domain_error("equal-precision weight needs 0 < phi_lo and phi_hi < 1");
  }
  if (spec.n_paths == 0) throw std::invalid_argument("bridge quantile needs at least one path");
  if (spec.grid_points < 2 && spec.phi_lo < spec.phi_hi) {
    throw std::invalid_argument("bridge grid needs at least two points");
  }
  if (!(spec.level > 0.0 && spec.level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
}

std::uint64_t path_tag(std::size_t p) { return rng::combine(stream_tag::bridge, p); }

struct PathWorker {
  std::vector<double> grid;
  std::vector<double> g_ep;  // empty when EP is not defined on the interval
  std::vector<double> g_hw;
  std::vector<double> normals;
  std::vector<double> values;

  explicit PathWorker(const BridgeQuantileSpec& spec)
      : grid(bridge_grid(spec.phi_lo, spec.phi_hi, spec.grid_points)),
        g_hw(grid.size(), 1.0),
        normals(grid.size() + 1),
        values(grid.size()) {
    if (spec.phi_lo > 0.0 && spec.phi_hi < 1.0) {
      for (double s : grid) g_ep.push_back(detail::equal_precision_weight(s));
    }
  }

  void run(const SeedSpec& seed, std::size_t p, double& hw, double& ep) {
    Xoshiro256pp gen(stream_key(seed, path_tag(p)));
    boost::random::normal_distribution<double> normal;
    for (auto& z : normals) z = normal(gen);
    bridge_path(normals, grid, values);
    hw = 0.0;
    ep = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) hw = std::max(hw, std::fabs(values[i]));
    if (!g_ep.empty()) {
      for (std::size_t i = 0; i < values.size(); ++i) ep = std::max(ep, std::fabs(g_ep[i] * values[i]));
    }
  }
};

}  // namespace

double phi_hat(const StepCurve& var_curve, double t) {
  const double v = var_curve(t);
  return v / (1.0 + v);
}

std::vector<double> bridge_grid(double lo, double hi, std::size_t points) {
  if (lo == hi || points <= 1) return {lo};
  std::vector<double> grid(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = lo + step * static_cast<double>(i);
  grid.back() = hi;
  return grid;
}

void bridge_path(std::span<const double> normals, std::span<const double> grid, std::span<double> out) {
  const std::size_t m = grid.size();
  if (normals.size() != m + 1 || out.size() != m) throw std::invalid_argument("bridge_path: size mismatch");
  double w = std::sqrt(grid[0]) * normals[0];
  out[0] = w;
  for (std::size_t i = 1; i < m; ++i) {
    w += std::sqrt(grid[i] - grid[i - 1]) * normals[i];
    out[i] = w;
  }
  const double w1 = w + std::sqrt(1.0 - grid[m - 1]) * normals[m];
  for (std::size_t i = 0; i < m; ++i) out[i] -= grid[i] * w1;
}

double bridge_path_sup(std::span<const double> normals, std::span<const double> grid,
                       std::span<const double> weights, std::span<double> scratch) {
  bridge_path(normals, grid, scratch);
  double best = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) best = std::max(best, std::fabs(weights[i] * scratch[i]));
  return best;
}

BridgeDraws bridge_sup_draws(const BridgeQuantileSpec& spec) {
  check_spec(spec);
  BridgeDraws draws;
  draws.hall_wellner.resize(spec.n_paths);
  const bool with_ep = spec.phi_lo > 0.0 && spec.phi_hi < 1.0;
  if (with_ep) draws.equal_precision.resize(spec.n_paths);
#pragma omp parallel
  {
    PathWorker worker(spec);
    double ep_sink = 0.0;
#pragma omp for schedule(static)
    for (std::size_t p = 0; p < spec.n_paths; ++p) {
      worker.run(spec.seed, p, draws.hall_wellner[p], with_ep ? draws.equal_precision[p] : ep_sink);
    }
  }
  return draws;
}

double bridge_quantile(const BridgeQuantileSpec& spec) {
  auto draws = bridge_sup_draws(spec);
  return order_statistic_quantile(
      spec.weight == BridgeWeight::hall_wellner ? std::move(draws.hall_wellner) : std::move(draws.equal_precision),
      spec.level);
}

double bridge_band_critical_value(const NelsonAalenFit& fit, VarianceKind variance, double t1, double t2,
                                  BridgeWeight weight, double level, std::size_t n_paths,
                                  std::size_t grid_points, const SeedSpec& seed) {
  if (!(t1 <= t2)) throw std::invalid_argument("band interval must satisfy t1 <= t2");
  const StepCurve& var = fit.variance(variance);
  const double lo = phi_hat(var, t1);
  const double hi = phi_hat(var, t2);
  if (!(lo > 0.0)) throw std::domain_error("band start precedes first event");
  BridgeQuantileSpec spec{weight, lo, hi, level, n_paths, grid_points, seed};
  return bridge_quantile(spec);
}

namespace serial {

BridgeDraws bridge_sup_draws(const BridgeQuantileSpec& spec) {
  check_spec(spec);
  BridgeDraws draws;
  PathWorker worker(spec);
  const bool with_ep = spec.phi_lo > 0.0 && spec.phi_hi < 1.0;
  for (std::size_t p = 0; p < spec.n_paths; ++p) {
    double hw = 0.0, ep = 0.0;
    worker.run(spec.seed, p, hw, ep);
    draws.hall_wellner.push_back(hw);
    if (with_ep) draws.equal_precision.push_back(ep);
  }
  return draws;
}

}  // namespace serial

}  // namespace hazardband
