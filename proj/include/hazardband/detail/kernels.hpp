#pragma once

// Arithmetic shared by the fast kernels and the StepCurve-based reference
// paths. Both must produce bit-identical results, so every formula lives here.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "hazardband/event_model.hpp"
#include "hazardband/rng.hpp"
#include "hazardband/wildboot.hpp"

namespace hazardband::detail {

// Per-event contributions: every event of a tied time carries its own multiplier,
// so a tie of size dn adds sqrt(n) (G_1 + ... + G_dn) / Y to W-hat and
// n (G_1^2 + ... + G_dn^2) / Y^2 to sigma*^2.
inline double event_increment(double sqrt_n, int y) { return sqrt_n / y; }

inline double event_variance(double n, int y) { return n / (static_cast<double>(y) * y); }

inline int event_count(const CountingPath& path) {
  int total = 0;
  for (int dn : path.jump_sizes) total += dn;
  return total;
}

struct TieSums {
  double g = 0.0;
  double g2 = 0.0;
};

inline TieSums tie_sums(const double* g, int dn) {
  TieSums s;
  for (int k = 0; k < dn; ++k) {
    s.g += g[k];
    s.g2 += g[k] * g[k];
  }
  return s;
}

inline std::uint64_t multiplier_tag(const TransitionKey& key) {
  return rng::combine(stream_tag::multipliers, rng::hash_label(key.label()));
}

/// g1(s) = (s(1-s))^{-1/2}
inline double equal_precision_weight(double s) { return 1.0 / std::sqrt(s * (1.0 - s)); }

/// Weighted functional of (W-hat, sigma*^2) at one time point, before the side is applied.
inline double weighted_value(SupMode mode, double w, double v) {
  switch (mode) {
    case SupMode::direct:
    case SupMode::difference:
      return w;
    case SupMode::hall_wellner:
      return w / (1.0 + v);
    case SupMode::equal_precision:
      if (v == 0.0) {
        // sigma*^2(s) = 0 forces W-hat(s) = 0; the weighted value is 0 there.
        if (w == 0.0) return 0.0;
        throw std::domain_error("equal-precision weight undefined: sigma*^2 = 0 with nonzero W-hat");
      }
      return w / (1.0 + v) * equal_precision_weight(v / (1.0 + v));
  }
  return w;
}

inline double apply_side(Side side, double x) {
  switch (side) {
    case Side::two_sided:
      return std::fabs(x);
    case Side::upper:
      return x;
    case Side::lower:
      return -x;
  }
  return x;
}

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace hazardband::detail
