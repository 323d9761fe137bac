#include "hazardband/wildboot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <gsl/gsl_cdf.h>
#include <omp.h>

#include "hazardband/detail/kernels.hpp"
#include "hazardband/quantile.hpp"

namespace hazardband {

namespace {

// P(Poisson(1) <= k); the tail beyond 19 is below double resolution.
const std::array<double, 20>& poisson1_cdf() {
  static const std::array<double, 20> table = [] {
    std::array<double, 20> t{};
    double term = std::exp(-1.0);
    double sum = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (k > 0) term /= static_cast<double>(k);
      sum += term;
      t[k] = sum;
    }
    return t;
  }();
  return table;
}

void check_shared_scale(const PathMap& paths) {
  if (paths.empty()) throw std::invalid_argument("wild bootstrap: no counting paths");
  const auto& first = paths.begin()->second;
  for (const auto& [key, path] : paths) {
    path.validate();
    if (path.n_subjects != first.n_subjects || path.tau != first.tau) {
      throw std::invalid_argument("wild bootstrap: paths disagree on n_subjects or tau (" + key.label() + ")");
    }
  }
}

const CountingPath& find_path(const PathMap& paths, const TransitionKey& key) {
  auto it = paths.find(key);
  if (it == paths.end()) throw std::invalid_argument("no counting path for transition " + key.label());
  return it->second;
}

void check_spec(const SupSpec& spec, double tau) {
  if (spec.mode == SupMode::difference && !spec.second) {
    throw std::invalid_argument("difference mode needs a second transition");
  }
  if (spec.grid.empty()) {
    if (!(spec.t1 >= 0.0 && spec.t1 < spec.t2 && spec.t2 <= tau)) {
      throw std::invalid_argument("sup interval must satisfy 0 <= t1 < t2 <= tau");
    }
  } else {
    for (double t : spec.grid) {
      if (!(t >= 0.0 && t <= tau)) throw std::invalid_argument("evaluation grid point outside [0, tau]");
    }
  }
}

// t1 plus every time in (t1, t2] from the given jump-time lists, or the explicit grid.
std::vector<double> collect_points(const SupSpec& spec, const std::vector<double>& times1,
                                   const std::vector<double>* times2) {
  if (!spec.grid.empty()) return spec.grid;
  std::vector<double> pts{spec.t1};
  auto add = [&](const std::vector<double>& times) {
    auto lo = std::upper_bound(times.begin(), times.end(), spec.t1);
    auto hi = std::upper_bound(times.begin(), times.end(), spec.t2);
    pts.insert(pts.end(), lo, hi);
  };
  add(times1);
  if (times2) add(*times2);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

struct PreparedPath {
  std::uint64_t tag = 0;
  std::vector<int> dn;
  std::vector<double> dw;  // sqrt(n) / Y per event
  std::vector<double> dv;  // n / Y^2 per event
  std::size_t events = 0;
};

PreparedPath prepare(const CountingPath& path) {
  PreparedPath p;
  p.tag = detail::multiplier_tag(path.transition);
  const double n = path.n_subjects;
  const double sqrt_n = std::sqrt(n);
  p.dn = path.jump_sizes;
  p.dw.resize(path.size());
  p.dv.resize(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    p.dw[i] = detail::event_increment(sqrt_n, path.at_risk[i]);
    p.dv[i] = detail::event_variance(n, path.at_risk[i]);
  }
  p.events = static_cast<std::size_t>(detail::event_count(path));
  return p;
}

struct PreparedSpec {
  SupMode mode = SupMode::direct;
  Side side = Side::two_sided;
  std::size_t p1 = 0;
  std::size_t p2 = 0;
  std::vector<std::size_t> idx1;  // jumps of p1 at or before each point
  std::vector<std::size_t> idx2;
  std::vector<double> weight;
};

std::size_t jumps_upto(const std::vector<double>& times, double t) {
  return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
}

}  // namespace

double MultiplierLaw::from_uniform(double u) const {
  switch (kind_) {
    case MultiplierKind::standard_normal:
      return gsl_cdf_ugaussian_Pinv(u);
    case MultiplierKind::centered_poisson: {
      const auto& cdf = poisson1_cdf();
      std::size_t k = 0;
      while (k + 1 < cdf.size() && u > cdf[k]) ++k;
      return static_cast<double>(k) - 1.0;
    }
  }
  throw std::logic_error("unknown multiplier kind");
}

std::string MultiplierLaw::name() const {
  return kind_ == MultiplierKind::standard_normal ? "normal" : "poisson";
}

MultiplierLaw MultiplierLaw::parse(std::string_view name) {
  if (name == "normal") return MultiplierLaw(MultiplierKind::standard_normal);
  if (name == "poisson") return MultiplierLaw(MultiplierKind::centered_poisson);
  throw std::invalid_argument("unknown multiplier law '" + std::string(name) + "' (expected normal|poisson)");
}

const std::vector<MultiplierKind>& MultiplierLaw::all_kinds() {
  static const std::vector<MultiplierKind> kinds{MultiplierKind::standard_normal, MultiplierKind::centered_poisson};
  return kinds;
}

std::vector<double> draw_multipliers(const CountingPath& path, const MultiplierLaw& law, const SeedSpec& seed) {
  Xoshiro256pp gen(stream_key(seed, detail::multiplier_tag(path.transition)));
  std::vector<double> g(static_cast<std::size_t>(detail::event_count(path)));
  for (auto& x : g) x = law.from_uniform(gen.uniform());
  return g;
}

BootstrapReplicate replicate_from_multipliers(const PathMap& paths,
                                              const std::map<TransitionKey, std::vector<double>>& multipliers) {
  check_shared_scale(paths);
  BootstrapReplicate rep;
  for (const auto& [key, path] : paths) {
    auto it = multipliers.find(key);
    const PreparedPath p = prepare(path);
    if (it == multipliers.end() || it->second.size() != p.events) {
      throw std::invalid_argument("multipliers missing or mis-sized for " + key.label());
    }
    const auto& g = it->second;
    std::vector<double> w(path.size()), v(path.size());
    double cw = 0.0, cv = 0.0;
    std::size_t e = 0;
    for (std::size_t i = 0; i < path.size(); ++i) {
      const detail::TieSums t = detail::tie_sums(g.data() + e, p.dn[i]);
      e += static_cast<std::size_t>(p.dn[i]);
      cw += t.g * p.dw[i];
      cv += t.g2 * p.dv[i];
      w[i] = cw;
      v[i] = cv;
    }
    rep.paths.emplace(key, StepCurve(0.0, path.jump_times, std::move(w), path.tau));
    rep.var_star.emplace(key, StepCurve(0.0, path.jump_times, std::move(v), path.tau));
  }
  return rep;
}

BootstrapReplicate draw_replicate(const PathMap& paths, const MultiplierLaw& law, const SeedSpec& seed) {
  std::map<TransitionKey, std::vector<double>> g;
  for (const auto& [key, path] : paths) g.emplace(key, draw_multipliers(path, law, seed));
  return replicate_from_multipliers(paths, g);
}

std::vector<double> evaluation_points(const PathMap& paths, const SupSpec& spec) {
  const CountingPath& p1 = find_path(paths, spec.transition);
  check_spec(spec, p1.tau);
  const std::vector<double>* times2 = nullptr;
  if (spec.mode == SupMode::difference) times2 = &find_path(paths, *spec.second).jump_times;
  return collect_points(spec, p1.jump_times, times2);
}

double sup_statistic(const BootstrapReplicate& rep, const SupSpec& spec) {
  auto get = [](const std::map<TransitionKey, StepCurve>& m, const TransitionKey& key) -> const StepCurve& {
    auto it = m.find(key);
    if (it == m.end()) throw std::invalid_argument("replicate has no path for " + key.label());
    return it->second;
  };
  const StepCurve& w1 = get(rep.paths, spec.transition);
  const StepCurve& v1 = get(rep.var_star, spec.transition);
  check_spec(spec, w1.tau());
  const StepCurve* w2 = nullptr;
  if (spec.mode == SupMode::difference) w2 = &get(rep.paths, *spec.second);
  const auto points = collect_points(spec, w1.times(), w2 ? &w2->times() : nullptr);

  double best = detail::kNegInf;
  for (double t : points) {
    double x;
    if (spec.mode == SupMode::difference) {
      const double g = spec.weight ? spec.weight(t) : 1.0;
      x = g * (w1.value_unchecked(t) - w2->value_unchecked(t));
    } else {
      x = detail::weighted_value(spec.mode, w1.value_unchecked(t), v1.value_unchecked(t));
    }
    best = std::max(best, detail::apply_side(spec.side, x));
  }
  return best;
}

std::vector<double> bootstrap_sup_draws(const PathMap& paths, std::span<const MultiplierLaw> laws,
                                        std::span<const SupSpec> specs, std::size_t replicates,
                                        const SeedSpec& seed) {
  check_shared_scale(paths);
  if (laws.empty() || specs.empty()) throw std::invalid_argument("bootstrap_sup_draws: no laws or no specs");

  // Only the transitions some spec refers to are simulated; each keeps its own stream.
  std::vector<const CountingPath*> used;
  auto index_of = [&](const TransitionKey& key) {
    const CountingPath* p = &find_path(paths, key);
    auto it = std::find(used.begin(), used.end(), p);
    if (it != used.end()) return static_cast<std::size_t>(it - used.begin());
    used.push_back(p);
    return used.size() - 1;
  };

  std::vector<PreparedSpec> prepared_specs;
  for (const auto& spec : specs) {
    PreparedSpec ps;
    ps.mode = spec.mode;
    ps.side = spec.side;
    ps.p1 = index_of(spec.transition);
    if (spec.mode == SupMode::difference) {
      if (!spec.second) throw std::invalid_argument("difference mode needs a second transition");
      ps.p2 = index_of(*spec.second);
    }
    const auto points = evaluation_points(paths, spec);
    for (double t : points) {
      ps.idx1.push_back(jumps_upto(used[ps.p1]->jump_times, t));
      if (spec.mode == SupMode::difference) {
        ps.idx2.push_back(jumps_upto(used[ps.p2]->jump_times, t));
        ps.weight.push_back(spec.weight ? spec.weight(t) : 1.0);
      }
    }
    prepared_specs.push_back(std::move(ps));
  }
  std::vector<PreparedPath> prepared;
  for (const auto* p : used) prepared.push_back(prepare(*p));

  const std::size_t n_laws = laws.size();
  const std::size_t n_specs = specs.size();
  const std::size_t n_paths = prepared.size();
  std::vector<double> out(n_laws * replicates * n_specs);

#pragma omp parallel
  {
    std::vector<double> u, g;
    // Cumulative W-hat / sigma*^2 per (law, path), with a leading 0 entry.
    std::vector<std::vector<double>> wc(n_laws * n_paths), vc(n_laws * n_paths);
    for (std::size_t l = 0; l < n_laws; ++l) {
      for (std::size_t j = 0; j < n_paths; ++j) {
        wc[l * n_paths + j].resize(prepared[j].dw.size() + 1);
        vc[l * n_paths + j].resize(prepared[j].dw.size() + 1);
      }
    }

#pragma omp for schedule(static)
    for (std::size_t b = 0; b < replicates; ++b) {
      const SeedSpec rs{seed.master_seed, seed.study, b};
      for (std::size_t j = 0; j < n_paths; ++j) {
        const PreparedPath& pp = prepared[j];
        Xoshiro256pp gen(stream_key(rs, pp.tag));
        u.resize(pp.events);
        g.resize(pp.events);
        for (auto& x : u) x = gen.uniform();
        for (std::size_t l = 0; l < n_laws; ++l) {
          auto& w = wc[l * n_paths + j];
          auto& v = vc[l * n_paths + j];
          for (std::size_t k = 0; k < u.size(); ++k) g[k] = laws[l].from_uniform(u[k]);
          double cw = 0.0, cv = 0.0;
          std::size_t e = 0;
          for (std::size_t i = 0; i < pp.dw.size(); ++i) {
            const detail::TieSums t = detail::tie_sums(g.data() + e, pp.dn[i]);
            e += static_cast<std::size_t>(pp.dn[i]);
            cw += t.g * pp.dw[i];
            cv += t.g2 * pp.dv[i];
            w[i + 1] = cw;
            v[i + 1] = cv;
          }
        }
      }
      for (std::size_t l = 0; l < n_laws; ++l) {
        for (std::size_t s = 0; s < n_specs; ++s) {
          const PreparedSpec& ps = prepared_specs[s];
          const auto& w1 = wc[l * n_paths + ps.p1];
          const auto& v1 = vc[l * n_paths + ps.p1];
          double best = detail::kNegInf;
          if (ps.mode == SupMode::difference) {
            const auto& w2 = wc[l * n_paths + ps.p2];
            for (std::size_t e = 0; e < ps.idx1.size(); ++e) {
              const double x = ps.weight[e] * (w1[ps.idx1[e]] - w2[ps.idx2[e]]);
              best = std::max(best, detail::apply_side(ps.side, x));
            }
          } else {
            for (std::size_t e = 0; e < ps.idx1.size(); ++e) {
              const double x = detail::weighted_value(ps.mode, w1[ps.idx1[e]], v1[ps.idx1[e]]);
              best = std::max(best, detail::apply_side(ps.side, x));
            }
          }
          out[(l * replicates + b) * n_specs + s] = best;
        }
      }
    }
  }
  return out;
}

double bootstrap_quantile(const PathMap& paths, const MultiplierLaw& law, const SupSpec& spec, double level,
                          std::size_t replicates, const SeedSpec& seed) {
  if (replicates < 100) throw std::invalid_argument("bootstrap_quantile needs at least 100 replicates");
  const auto draws = bootstrap_sup_draws(paths, std::span(&law, 1), std::span(&spec, 1), replicates, seed);
  return order_statistic_quantile(draws, level);
}

namespace serial {

std::vector<double> bootstrap_sup_draws(const PathMap& paths, std::span<const MultiplierLaw> laws,
                                        std::span<const SupSpec> specs, std::size_t replicates,
                                        const SeedSpec& seed) {
  std::vector<double> out(laws.size() * replicates * specs.size());
  for (std::size_t l = 0; l < laws.size(); ++l) {
    for (std::size_t b = 0; b < replicates; ++b) {
      const auto rep = draw_replicate(paths, laws[l], SeedSpec{seed.master_seed, seed.study, b});
      for (std::size_t s = 0; s < specs.size(); ++s) {
        out[(l * replicates + b) * specs.size() + s] = sup_statistic(rep, specs[s]);
      }
    }
  }
  return out;
}

}  // namespace serial

}  // namespace hazardband
