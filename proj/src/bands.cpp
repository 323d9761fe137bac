#include "hazardband/bands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hazardband {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
}

void check_interval(Interval iv, double tau) {
  if (!(iv.t1 >= 0.0 && iv.t1 < iv.t2 && iv.t2 <= tau)) {
    throw std::invalid_argument("band interval must satisfy 0 <= t1 < t2 <= tau");
  }
}

SupMode sup_mode(BandKind kind) {
  switch (kind) {
    case BandKind::ep_wild:
      return SupMode::equal_precision;
    case BandKind::hw_wild:
      return SupMode::hall_wellner;
    case BandKind::direct_wild:
      return SupMode::direct;
    case BandKind::diff_direct_wild:
      return SupMode::difference;
    default:
      throw std::invalid_argument("band kind " + to_string(kind) + " has no bootstrap functional");
  }
}

Side sup_side(BandSide side) {
  switch (side) {
    case BandSide::lower_only:
      return Side::upper;
    case BandSide::upper_only:
      return Side::lower;
    default:
      return Side::two_sided;
  }
}

// Bounds at one point for estimate a, data-side variance v.
PointInterval bounds_at(BandKind kind, BandSide side, double time, double a, double v, double sqrt_n, double c) {
  double lo, hi;
  switch (kind) {
    case BandKind::ep_asymptotic:
    case BandKind::ep_wild:
    case BandKind::hw_asymptotic:
    case BandKind::hw_wild: {
      if (!(a > 0.0)) throw std::domain_error("band start precedes first event: estimate is 0 at t=" +
                                              std::to_string(time));
      const bool ep = kind == BandKind::ep_asymptotic || kind == BandKind::ep_wild;
      const double h = ep ? c * std::sqrt(v) / (sqrt_n * a) : c * (1.0 + v) / (sqrt_n * a);
      const double log_a = std::log(a);
      lo = std::exp(log_a - h);
      hi = std::exp(log_a + h);
      break;
    }
    default:
      lo = a - c / sqrt_n;
      hi = a + c / sqrt_n;
  }
  if (side == BandSide::lower_only) hi = kInf;
  if (side == BandSide::upper_only) lo = 0.0;
  return {time, a, lo, hi};
}

BandResult assemble(BandKind kind, BandSide side, Interval iv, double level, double c, double tau,
                    std::vector<double> grid, std::vector<double> center, std::vector<double> lower,
                    std::vector<double> upper) {
  BandResult r;
  r.kind = kind;
  r.side = side;
  r.interval = iv;
  r.level = level;
  r.critical_value = c;
  const double lo0 = lower.front();
  const double hi0 = upper.front();
  r.lower = StepCurve(lo0, grid, std::move(lower), tau);
  r.upper = StepCurve(hi0, grid, std::move(upper), tau);
  r.grid = std::move(grid);
  r.center = std::move(center);
  return r;
}

}  // namespace

std::string to_string(BandKind kind) {
  switch (kind) {
    case BandKind::ep_asymptotic:
      return "ep-asymptotic";
    case BandKind::hw_asymptotic:
      return "hw-asymptotic";
    case BandKind::ep_wild:
      return "ep-wild";
    case BandKind::hw_wild:
      return "hw-wild";
    case BandKind::direct_wild:
      return "direct-wild";
    case BandKind::diff_direct_wild:
      return "diff-direct-wild";
  }
  return "unknown";
}

BandKind parse_band_kind(std::string_view name) {
  for (BandKind k : {BandKind::ep_asymptotic, BandKind::hw_asymptotic, BandKind::ep_wild, BandKind::hw_wild,
                     BandKind::direct_wild, BandKind::diff_direct_wild}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown band kind '" + std::string(name) + "'");
}

bool is_wild(BandKind kind) { return kind != BandKind::ep_asymptotic && kind != BandKind::hw_asymptotic; }

bool is_log_transformed(BandKind kind) {
  return kind != BandKind::direct_wild && kind != BandKind::diff_direct_wild;
}

VarianceKind default_variance(BandKind kind) { return is_wild(kind) ? VarianceKind::aalen : VarianceKind::greenwood; }

std::vector<double> band_grid(const StepCurve& estimate, Interval interval) {
  std::vector<double> grid{interval.t1};
  const auto& times = estimate.times();
  auto lo = std::upper_bound(times.begin(), times.end(), interval.t1);
  auto hi = std::upper_bound(times.begin(), times.end(), interval.t2);
  grid.insert(grid.end(), lo, hi);
  if (grid.back() != interval.t2) grid.push_back(interval.t2);
  return grid;
}

BandResult band_from_critical_value(const NelsonAalenFit& fit, BandKind kind, Interval interval, double level,
                                    double critical_value, std::optional<VarianceKind> variance, BandSide side) {
  check_level(level);
  check_interval(interval, fit.estimate.tau());
  if (kind == BandKind::diff_direct_wild) throw std::invalid_argument("use difference_band for difference bands");
  if (!is_log_transformed(kind)) {
    variance.reset();
  } else if (!variance) {
    variance = default_variance(kind);
  }
  const double sqrt_n = std::sqrt(static_cast<double>(fit.n_subjects));
  auto grid = band_grid(fit.estimate, interval);
  std::vector<double> center, lower, upper;
  for (double t : grid) {
    const double a = fit.estimate(t);
    const double v = variance ? fit.variance(*variance)(t) : 0.0;
    const PointInterval p = bounds_at(kind, side, t, a, v, sqrt_n, critical_value);
    center.push_back(a);
    lower.push_back(p.lower);
    upper.push_back(p.upper);
  }
  BandResult r = assemble(kind, side, interval, level, critical_value, fit.estimate.tau(), std::move(grid),
                          std::move(center), std::move(lower), std::move(upper));
  r.variance_used = variance;
  return r;
}

double band_critical_value(const CountingPath& path, const NelsonAalenFit& fit, const BandRequest& request) {
  if (request.critical_value) return *request.critical_value;
  check_level(request.level);
  check_interval(request.interval, path.tau);
  if (is_wild(request.kind)) {
    SupSpec spec;
    spec.transition = path.transition;
    spec.t1 = request.interval.t1;
    spec.t2 = request.interval.t2;
    spec.mode = sup_mode(request.kind);
    spec.side = sup_side(request.side);
    const PathMap single{{path.transition, path}};
    return bootstrap_quantile(single, request.law, spec, request.level, request.replicates, request.seed);
  }
  if (request.side != BandSide::two_sided) {
    throw std::invalid_argument("one-sided bands are only available for wild bootstrap kinds");
  }
  const BridgeWeight weight =
      request.kind == BandKind::ep_asymptotic ? BridgeWeight::equal_precision : BridgeWeight::hall_wellner;
  return bridge_band_critical_value(fit, request.variance.value_or(default_variance(request.kind)),
                                    request.interval.t1, request.interval.t2, weight, request.level,
                                    request.bridge_paths, request.bridge_grid_points, request.seed);
}

BandResult band(const CountingPath& path, const BandRequest& request) {
  if (request.kind == BandKind::diff_direct_wild) {
    throw std::invalid_argument("use difference_band for difference bands");
  }
  const NelsonAalenFit fit = nelson_aalen(path);
  check_interval(request.interval, path.tau);
  if (is_log_transformed(request.kind) && !(fit.estimate(request.interval.t1) > 0.0)) {
    throw std::domain_error("band start precedes first event: estimate is 0 at t1");
  }
  const double c = band_critical_value(path, fit, request);
  BandResult r = band_from_critical_value(fit, request.kind, request.interval, request.level, c, request.variance,
                                          request.side);
  if (is_wild(request.kind) && !request.critical_value) r.multiplier = request.law.kind();
  return r;
}

BandResult difference_band(const PathMap& paths, const TransitionKey& a, const TransitionKey& b,
                           Interval interval, double level, std::size_t replicates, const MultiplierLaw& law,
                           const SeedSpec& seed) {
  check_level(level);
  auto pa = paths.find(a);
  auto pb = paths.find(b);
  if (pa == paths.end() || pb == paths.end()) throw std::invalid_argument("difference_band: unknown transition");
  if (a == b) throw std::invalid_argument("difference_band: the two transitions must differ");
  if (pa->second.n_subjects != pb->second.n_subjects || pa->second.tau != pb->second.tau) {
    throw std::invalid_argument("difference_band: transitions disagree on n or tau");
  }
  const double tau = pa->second.tau;
  check_interval(interval, tau);

  SupSpec spec;
  spec.transition = a;
  spec.second = b;
  spec.t1 = interval.t1;
  spec.t2 = interval.t2;
  spec.mode = SupMode::difference;
  const PathMap pair{{a, pa->second}, {b, pb->second}};
  const double q = bootstrap_quantile(pair, law, spec, level, replicates, seed);

  const StepCurve diff = curve_difference(nelson_aalen(pa->second).estimate, nelson_aalen(pb->second).estimate);
  const double half = q / std::sqrt(static_cast<double>(pa->second.n_subjects));
  auto grid = band_grid(diff, interval);
  std::vector<double> center, lower, upper;
  for (double t : grid) {
    const double d = diff(t);
    center.push_back(d);
    lower.push_back(d - half);
    upper.push_back(d + half);
  }
  BandResult r = assemble(BandKind::diff_direct_wild, BandSide::two_sided, interval, level, q, tau, std::move(grid),
                          std::move(center), std::move(lower), std::move(upper));
  r.multiplier = law.kind();
  return r;
}

IntervalSet simultaneous_intervals(const CountingPath& path, const std::vector<double>& grid, double level,
                                   BandKind kind, std::size_t replicates, const MultiplierLaw& law,
                                   const SeedSpec& seed) {
  check_level(level);
  if (grid.empty()) throw std::invalid_argument("simultaneous_intervals: empty grid");
  if (!is_wild(kind) || kind == BandKind::diff_direct_wild) {
    throw std::invalid_argument("simultaneous_intervals: kind must be ep-wild, hw-wild or direct-wild");
  }
  const NelsonAalenFit fit = nelson_aalen(path);
  const double first_jump = path.size() ? path.jump_times.front() : path.tau;
  for (double t : grid) {
    if (!(t >= first_jump && t <= path.tau)) {
      throw std::invalid_argument("simultaneous_intervals: grid point outside [first event, tau]");
    }
  }
  SupSpec spec;
  spec.transition = path.transition;
  spec.mode = sup_mode(kind);
  spec.grid = grid;
  const PathMap single{{path.transition, path}};
  const double c = bootstrap_quantile(single, law, spec, level, replicates, seed);

  IntervalSet out;
  out.transition = path.transition;
  out.kind = kind;
  out.level = level;
  out.critical_value = c;
  const double sqrt_n = std::sqrt(static_cast<double>(path.n_subjects));
  const VarianceKind var = default_variance(kind);
  for (double t : grid) {
    out.intervals.push_back(
        bounds_at(kind, BandSide::two_sided, t, fit.estimate(t), fit.variance(var)(t), sqrt_n, c));
  }
  return out;
}

SidakRegion sidak_region(const PathMap& paths, const std::vector<TransitionKey>& transitions, double t,
                         double level, std::size_t replicates, const MultiplierLaw& law, const SeedSpec& seed,
                         BandKind kind) {
  check_level(level);
  if (transitions.empty()) throw std::invalid_argument("sidak_region: no transitions");
  SidakRegion region;
  region.joint_level = level;
  region.per_interval_level = std::pow(level, 1.0 / static_cast<double>(transitions.size()));
  for (const auto& key : transitions) {
    auto it = paths.find(key);
    if (it == paths.end()) throw std::invalid_argument("sidak_region: unknown transition " + key.label());
    region.components.push_back(
        simultaneous_intervals(it->second, {t}, region.per_interval_level, kind, replicates, law, seed));
  }
  return region;
}

}  // namespace hazardband
