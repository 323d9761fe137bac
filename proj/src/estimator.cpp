#include "hazardband/estimator.hpp"

#include <stdexcept>

namespace hazardband {

std::string to_string(VarianceKind kind) { return kind == VarianceKind::aalen ? "aalen" : "greenwood"; }

VarianceKind parse_variance_kind(std::string_view name) {
  if (name == "aalen") return VarianceKind::aalen;
  if (name == "greenwood") return VarianceKind::greenwood;
  throw std::invalid_argument("unknown variance '" + std::string(name) + "' (expected aalen|greenwood)");
}

NelsonAalenFit nelson_aalen(const CountingPath& path) {
  path.validate();
  const std::size_t k = path.size();
  const double n = static_cast<double>(path.n_subjects);
  std::vector<double> a(k), va(k), vg(k);
  double sum_a = 0.0, sum_va = 0.0, sum_vg = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double dn = path.jump_sizes[i];
    const double y = path.at_risk[i];
    sum_a += dn / y;
    sum_va += n * dn / (y * y);
    sum_vg += n * (y - dn) * dn / (y * y * y);
    a[i] = sum_a;
    va[i] = sum_va;
    vg[i] = sum_vg;
  }
  NelsonAalenFit fit;
  fit.transition = path.transition;
  fit.n_subjects = path.n_subjects;
  fit.estimate = StepCurve(0.0, path.jump_times, std::move(a), path.tau);
  fit.var_aalen = StepCurve(0.0, path.jump_times, std::move(va), path.tau);
  fit.var_greenwood = StepCurve(0.0, path.jump_times, std::move(vg), path.tau);
  return fit;
}

}  // namespace hazardband
