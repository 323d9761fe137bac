#include "hazardband/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <omp.h>

#include "hazardband/detail/kernels.hpp"
#include "hazardband/quantile.hpp"

namespace hazardband {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("test level alpha must lie in (0, 1)");
}

void check_replicates(std::size_t b) {
  if (b < 100) throw std::invalid_argument("bootstrap tests need at least 100 replicates");
}

std::size_t jumps_upto(const std::vector<double>& times, double t) {
  return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
}

std::uint64_t group_tag(std::uint64_t group, const TransitionKey& key) {
  return rng::combine(group, detail::multiplier_tag(key));
}

// One group of a two-sample comparison, reduced to what a replicate needs.
struct GroupPrep {
  std::uint64_t tag = 0;
  std::vector<int> dn;
  std::vector<double> dw;         // sqrt(n_j) / Y per event
  std::size_t events = 0;
  std::vector<std::size_t> idx;   // jumps at or before each evaluation point
};

GroupPrep prepare_group(const CountingPath& path, std::uint64_t group, const std::vector<double>& points) {
  GroupPrep g;
  g.tag = group_tag(group, path.transition);
  const double sqrt_n = std::sqrt(static_cast<double>(path.n_subjects));
  for (std::size_t i = 0; i < path.size(); ++i) {
    g.dw.push_back(detail::event_increment(sqrt_n, path.at_risk[i]));
  }
  g.dn = path.jump_sizes;
  g.events = static_cast<std::size_t>(detail::event_count(path));
  for (double t : points) g.idx.push_back(jumps_upto(path.jump_times, t));
  return g;
}

// Runs `replicates` wild-bootstrap draws of both groups' W-hat at the
// evaluation points and hands them to `emit(law, replicate, w1, w2)`.
template <class Emit>
void two_group_replicates(const GroupPrep& g1, const GroupPrep& g2, std::span<const MultiplierLaw> laws,
                          std::size_t replicates, const SeedSpec& seed, Emit emit) {
  const std::size_t n_laws = laws.size();
  const std::size_t m = g1.idx.size();
#pragma omp parallel
  {
    std::vector<double> u, mult, cum;
    std::vector<double> w1(n_laws * m), w2(n_laws * m);
    auto fill = [&](const GroupPrep& g, const SeedSpec& rs, std::vector<double>& w) {
      Xoshiro256pp gen(stream_key(rs, g.tag));
      u.resize(g.events);
      mult.resize(g.events);
      for (auto& x : u) x = gen.uniform();
      cum.resize(g.dw.size() + 1);
      cum[0] = 0.0;
      for (std::size_t l = 0; l < n_laws; ++l) {
        for (std::size_t k = 0; k < u.size(); ++k) mult[k] = laws[l].from_uniform(u[k]);
        double c = 0.0;
        std::size_t ev = 0;
        for (std::size_t i = 0; i < g.dw.size(); ++i) {
          c += detail::tie_sums(mult.data() + ev, g.dn[i]).g * g.dw[i];
          ev += static_cast<std::size_t>(g.dn[i]);
          cum[i + 1] = c;
        }
        for (std::size_t e = 0; e < m; ++e) w[l * m + e] = cum[g.idx[e]];
      }
    };
#pragma omp for schedule(static)
    for (std::size_t b = 0; b < replicates; ++b) {
      const SeedSpec rs{seed.master_seed, seed.study, b};
      fill(g1, rs, w1);
      fill(g2, rs, w2);
      for (std::size_t l = 0; l < n_laws; ++l) emit(l, b, w1.data() + l * m, w2.data() + l * m);
    }
  }
}

// Inputs to the proportionality functionals, shared by kernel and reference.
struct PropSetup {
  std::vector<double> points;
  std::vector<double> a1, a2;  // estimates at the points
  std::vector<double> len;     // segment lengths, last is 0
  double c1 = 0.0;             // sqrt(n1 / n)
  double c2 = 0.0;             // sqrt(n2 / n)
  double a1_tau = 0.0;
  double a2_tau = 0.0;
};

PropSetup prop_setup(const StepCurve& a1, const StepCurve& a2, int n1, int n2) {
  if (n1 < 2 || n2 < 2) throw std::invalid_argument("proportionality test needs n1, n2 >= 2");
  PropSetup s;
  s.points = prop_evaluation_points(a1, a2);
  const double n = static_cast<double>(n1) + n2;
  s.c1 = std::sqrt(n1 / n);
  s.c2 = std::sqrt(n2 / n);
  for (std::size_t e = 0; e < s.points.size(); ++e) {
    s.a1.push_back(a1.value_unchecked(s.points[e]));
    s.a2.push_back(a2.value_unchecked(s.points[e]));
    s.len.push_back(e + 1 < s.points.size() ? s.points[e + 1] - s.points[e] : 0.0);
  }
  s.a1_tau = s.a1.back();
  s.a2_tau = s.a2.back();
  return s;
}

struct PropPair {
  double ks;
  double cvm;
};

// Bootstrap functionals from W-hat of each group at the evaluation points.
PropPair prop_functionals(const PropSetup& s, const double* w1, const double* w2) {
  const std::size_t last = s.points.size() - 1;
  const double d_tau = s.c1 * w2[last] / s.a1_tau - s.c2 * w1[last] * s.a2_tau / (s.a1_tau * s.a1_tau);
  double ks = 0.0, cvm = 0.0;
  for (std::size_t e = 0; e <= last; ++e) {
    const double term = s.c1 * w2[e] - s.c2 * w1[e] * s.a2[e] / s.a1[e] - s.a1[e] * d_tau;
    ks = std::max(ks, std::fabs(term));
    cvm += term * term * s.len[e];
  }
  return {ks, cvm};
}

void check_prop_groups(const CountingPath& g1, const CountingPath& g2) {
  g1.validate();
  g2.validate();
  if (g1.tau != g2.tau) throw std::invalid_argument("proportionality test: groups disagree on tau");
}

TestMeta prop_meta(const CountingPath& g1, const CountingPath& g2, std::size_t replicates, const SeedSpec& seed,
                   std::size_t grid_size) {
  TestMeta meta;
  meta.replicates = replicates;
  meta.seed = seed;
  meta.interval = {0.0, g1.tau};
  meta.grid_size = grid_size;
  meta.n1 = g1.n_subjects;
  meta.n2 = g2.n_subjects;
  return meta;
}

}  // namespace

std::string to_string(TestKind kind) {
  switch (kind) {
    case TestKind::equivalence:
      return "equivalence";
    case TestKind::inferiority:
      return "inferiority";
    case TestKind::superiority:
      return "superiority";
    case TestKind::ks_equality:
      return "ks-equality";
    case TestKind::prop_ks:
      return "prop-ks";
    case TestKind::prop_cvm:
      return "prop-cvm";
  }
  return "unknown";
}

std::string to_string(PropStatistic rho) { return rho == PropStatistic::ks ? "ks" : "cvm"; }

PropStatistic parse_prop_statistic(std::string_view name) {
  if (name == "ks") return PropStatistic::ks;
  if (name == "cvm") return PropStatistic::cvm;
  throw std::invalid_argument("unknown statistic '" + std::string(name) + "' (expected ks|cvm)");
}

MarginSpec MarginSpec::constant_margins(std::function<double(double)> a0, double ell, double u) {
  return MarginSpec{std::move(a0), [ell](double) { return ell; }, [u](double) { return u; }};
}

void MarginSpec::validate(const std::vector<double>& grid) const {
  if (!a0 || !ell || !u) throw std::invalid_argument("margin spec needs a0, ell and u");
  double prev = -std::numeric_limits<double>::infinity();
  for (double s : grid) {
    if (!(ell(s) > 0.0) || !(u(s) > 0.0)) {
      throw std::invalid_argument("margins ell and u must be positive at t=" + std::to_string(s));
    }
    const double a = a0(s);
    if (a < prev) throw std::invalid_argument("reference curve A0 must be nondecreasing");
    prev = a;
  }
}

TestResult equivalence_from_bands(const BandResult* lower_band, const BandResult* upper_band,
                                  const MarginSpec& margins, TestKind kind, double alpha) {
  check_alpha(alpha);
  const bool need_lower = kind == TestKind::equivalence || kind == TestKind::superiority;
  const bool need_upper = kind == TestKind::equivalence || kind == TestKind::inferiority;
  if (!need_lower && !need_upper) throw std::invalid_argument("equivalence_from_bands: not a band-inclusion test");
  if ((need_lower && !lower_band) || (need_upper && !upper_band)) {
    throw std::invalid_argument("equivalence_from_bands: missing one-sided band");
  }
  const BandResult& ref = need_lower ? *lower_band : *upper_band;
  margins.validate(ref.grid);
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ref.grid.size(); ++i) {
    const double s = ref.grid[i];
    const double a0 = margins.a0(s);
    if (need_lower) slack = std::min(slack, lower_band->lower.values()[i] - (a0 - margins.ell(s)));
    if (need_upper) slack = std::min(slack, (a0 + margins.u(s)) - upper_band->upper.values()[i]);
  }
  TestResult r;
  r.statistic = slack;
  r.critical_value = 0.0;
  r.reject = r.statistic > r.critical_value;
  r.level = alpha;
  r.kind = kind;
  r.meta.interval = ref.interval;
  r.meta.grid_size = ref.grid.size();
  r.meta.band_kind = ref.kind;
  r.meta.law = ref.multiplier;
  return r;
}

TestResult equivalence_test(const CountingPath& path, const MarginSpec& margins, Interval interval, double alpha,
                            const EquivalenceOptions& options) {
  check_alpha(alpha);
  if (!is_wild(options.band_kind) || options.band_kind == BandKind::diff_direct_wild) {
    throw std::invalid_argument("equivalence tests need a one-sided wild band kind");
  }
  BandRequest req;
  req.kind = options.band_kind;
  req.interval = interval;
  req.level = 1.0 - alpha;
  req.law = options.law;
  req.replicates = options.replicates;
  req.seed = options.seed;

  std::optional<BandResult> lower, upper;
  if (options.kind == TestKind::equivalence || options.kind == TestKind::superiority) {
    req.side = BandSide::lower_only;
    lower = band(path, req);
  }
  if (options.kind == TestKind::equivalence || options.kind == TestKind::inferiority) {
    req.side = BandSide::upper_only;
    upper = band(path, req);
  }
  TestResult r = equivalence_from_bands(lower ? &*lower : nullptr, upper ? &*upper : nullptr, margins,
                                        options.kind, alpha);
  r.meta.replicates = options.replicates;
  r.meta.seed = options.seed;
  r.meta.n1 = path.n_subjects;
  return r;
}

TestResult ks_equality_test(const PathMap& paths, const TransitionKey& a, const TransitionKey& b, Interval interval,
                            double alpha, const EqualityOptions& options) {
  check_alpha(alpha);
  check_replicates(options.replicates);
  if (a == b) throw std::invalid_argument("ks_equality_test: the two transitions must differ");
  auto ia = paths.find(a);
  auto ib = paths.find(b);

  TestResult r;
  r.level = alpha;
  r.kind = TestKind::ks_equality;
  r.meta.replicates = options.replicates;
  r.meta.law = options.law.kind();
  r.meta.seed = options.seed;
  r.meta.interval = interval;
  if (ia == paths.end() && ib == paths.end()) {
    // Neither transition has a jump: both estimates and all replicates vanish.
    r.meta.grid_size = options.grid.empty() ? 1 : options.grid.size();
    r.reject = false;
    return r;
  }
  const CountingPath& known = ia != paths.end() ? ia->second : ib->second;
  auto complete = [&](const TransitionKey& key, PathMap::const_iterator it) {
    if (it != paths.end()) return it->second;
    CountingPath empty;
    empty.transition = key;
    empty.n_subjects = known.n_subjects;
    empty.tau = known.tau;
    return empty;
  };
  const PathMap pair{{a, complete(a, ia)}, {b, complete(b, ib)}};
  const CountingPath& pa = pair.at(a);
  const CountingPath& pb = pair.at(b);

  SupSpec spec;
  spec.transition = a;
  spec.second = b;
  spec.t1 = interval.t1;
  spec.t2 = interval.t2;
  spec.mode = SupMode::difference;
  spec.weight = options.weight;
  spec.grid = options.grid;

  const auto points = evaluation_points(pair, spec);
  const StepCurve ea = nelson_aalen(pa).estimate;
  const StepCurve eb = nelson_aalen(pb).estimate;
  const double sqrt_n = std::sqrt(static_cast<double>(pa.n_subjects));
  double stat = 0.0;
  for (double t : points) {
    const double g = spec.weight ? spec.weight(t) : 1.0;
    stat = std::max(stat, sqrt_n * std::fabs(g * (ea.value_unchecked(t) - eb.value_unchecked(t))));
  }
  r.statistic = stat;
  r.critical_value = bootstrap_quantile(pair, options.law, spec, 1.0 - alpha, options.replicates, options.seed);
  r.reject = r.statistic > r.critical_value;
  r.meta.grid_size = points.size();
  r.meta.n1 = pa.n_subjects;
  return r;
}

TestResult ks_equality_two_sample(const CountingPath& group1, const CountingPath& group2, Interval interval,
                                  double alpha, const EqualityOptions& options) {
  check_alpha(alpha);
  check_replicates(options.replicates);
  group1.validate();
  group2.validate();
  if (group1.tau != group2.tau) throw std::invalid_argument("two-sample test: groups disagree on tau");
  std::vector<double> points = options.grid;
  if (points.empty()) {
    if (!(interval.t1 >= 0.0 && interval.t1 < interval.t2 && interval.t2 <= group1.tau)) {
      throw std::invalid_argument("test interval must satisfy 0 <= t1 < t2 <= tau");
    }
    points.push_back(interval.t1);
    for (const auto* p : {&group1, &group2}) {
      for (double t : p->jump_times) {
        if (t > interval.t1 && t <= interval.t2) points.push_back(t);
      }
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
  }
  const double n1 = group1.n_subjects, n2 = group2.n_subjects, n = n1 + n2;
  const double c1 = std::sqrt(n1 / n), c2 = std::sqrt(n2 / n);
  const StepCurve e1 = nelson_aalen(group1).estimate;
  const StepCurve e2 = nelson_aalen(group2).estimate;
  std::vector<double> g(points.size());
  double stat = 0.0;
  for (std::size_t e = 0; e < points.size(); ++e) {
    g[e] = options.weight ? options.weight(points[e]) : 1.0;
    stat = std::max(stat, std::sqrt(n1 * n2 / n) *
                              std::fabs(g[e] * (e1.value_unchecked(points[e]) - e2.value_unchecked(points[e]))));
  }

  const GroupPrep p1 = prepare_group(group1, stream_tag::group1, points);
  const GroupPrep p2 = prepare_group(group2, stream_tag::group2, points);
  std::vector<double> draws(options.replicates);
  const std::size_t m = points.size();
  two_group_replicates(p1, p2, std::span(&options.law, 1), options.replicates, options.seed,
                       [&](std::size_t, std::size_t b, const double* w1, const double* w2) {
                         double best = 0.0;
                         for (std::size_t e = 0; e < m; ++e) {
                           best = std::max(best, std::fabs(g[e] * (c2 * w1[e] - c1 * w2[e])));
                         }
                         draws[b] = best;
                       });

  TestResult r;
  r.statistic = stat;
  r.critical_value = order_statistic_quantile(std::move(draws), 1.0 - alpha);
  r.reject = r.statistic > r.critical_value;
  r.level = alpha;
  r.kind = TestKind::ks_equality;
  r.meta.replicates = options.replicates;
  r.meta.law = options.law.kind();
  r.meta.seed = options.seed;
  r.meta.interval = interval;
  r.meta.grid_size = m;
  r.meta.n1 = group1.n_subjects;
  r.meta.n2 = group2.n_subjects;
  return r;
}

std::vector<double> prop_evaluation_points(const StepCurve& a1, const StepCurve& a2) {
  if (a1.tau() != a2.tau()) throw std::invalid_argument("proportionality test: curves disagree on tau");
  const double tau = a1.tau();
  auto first = std::find_if(a1.values().begin(), a1.values().end(), [](double v) { return v > 0.0; });
  if (a1.value_at_0() > 0.0) {
    first = a1.values().begin();
  } else if (first == a1.values().end()) {
    throw std::domain_error("proportionality test: group-1 estimate is 0 on [0, tau]");
  }
  const double start = a1.value_at_0() > 0.0 ? 0.0 : a1.times()[static_cast<std::size_t>(first - a1.values().begin())];
  if (!(a1.value_unchecked(tau) > 0.0)) throw std::domain_error("proportionality test: group-1 estimate is 0 at tau");
  if (!(a2.value_unchecked(tau) > 0.0)) throw std::domain_error("proportionality test: group-2 estimate is 0 at tau");
  std::vector<double> pts{start};
  for (const auto* c : {&a1, &a2}) {
    for (double t : c->times()) {
      if (t > start && t <= tau) pts.push_back(t);
    }
  }
  pts.push_back(tau);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double step_integral(std::span<const double> points, std::span<const double> values) {
  if (points.size() != values.size()) throw std::invalid_argument("step_integral: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) total += values[i] * (points[i + 1] - points[i]);
  return total;
}

double prop_statistic(const StepCurve& a1, const StepCurve& a2, int n1, int n2, PropStatistic rho) {
  const PropSetup s = prop_setup(a1, a2, n1, n2);
  const double ratio = s.a2_tau / s.a1_tau;
  const double scale = static_cast<double>(n1) * n2 / (static_cast<double>(n1) + n2);
  if (rho == PropStatistic::ks) {
    double best = 0.0;
    for (std::size_t e = 0; e < s.points.size(); ++e) best = std::max(best, std::fabs(s.a2[e] - s.a1[e] * ratio));
    return std::sqrt(scale) * best;
  }
  std::vector<double> sq(s.points.size());
  for (std::size_t e = 0; e < s.points.size(); ++e) {
    const double d = s.a2[e] - s.a1[e] * ratio;
    sq[e] = d * d;
  }
  return scale * step_integral(s.points, sq);
}

std::vector<double> prop_bootstrap_draws(const CountingPath& group1, const CountingPath& group2,
                                         std::span<const MultiplierLaw> laws, std::size_t replicates,
                                         const SeedSpec& seed) {
  check_prop_groups(group1, group2);
  if (laws.empty()) throw std::invalid_argument("prop_bootstrap_draws: no multiplier laws");
  const PropSetup s =
      prop_setup(nelson_aalen(group1).estimate, nelson_aalen(group2).estimate, group1.n_subjects, group2.n_subjects);
  const GroupPrep p1 = prepare_group(group1, stream_tag::group1, s.points);
  const GroupPrep p2 = prepare_group(group2, stream_tag::group2, s.points);
  std::vector<double> out(laws.size() * replicates * 2);
  two_group_replicates(p1, p2, laws, replicates, seed,
                       [&](std::size_t l, std::size_t b, const double* w1, const double* w2) {
                         const PropPair f = prop_functionals(s, w1, w2);
                         out[(l * replicates + b) * 2] = f.ks;
                         out[(l * replicates + b) * 2 + 1] = f.cvm;
                       });
  return out;
}

std::vector<TestResult> prop_hazards_tests(const CountingPath& group1, const CountingPath& group2,
                                           std::span<const MultiplierLaw> laws, double alpha,
                                           std::size_t replicates, const SeedSpec& seed) {
  check_alpha(alpha);
  check_replicates(replicates);
  check_prop_groups(group1, group2);
  const StepCurve a1 = nelson_aalen(group1).estimate;
  const StepCurve a2 = nelson_aalen(group2).estimate;
  const double ks = prop_statistic(a1, a2, group1.n_subjects, group2.n_subjects, PropStatistic::ks);
  const double cvm = prop_statistic(a1, a2, group1.n_subjects, group2.n_subjects, PropStatistic::cvm);
  const std::size_t grid = prop_evaluation_points(a1, a2).size();
  const auto draws = prop_bootstrap_draws(group1, group2, laws, replicates, seed);

  std::vector<TestResult> results;
  for (std::size_t l = 0; l < laws.size(); ++l) {
    const std::span<const double> block(draws.data() + l * replicates * 2, replicates * 2);
    for (int k = 0; k < 2; ++k) {
      TestResult r;
      r.kind = k == 0 ? TestKind::prop_ks : TestKind::prop_cvm;
      r.statistic = k == 0 ? ks : cvm;
      r.critical_value = order_statistic_quantile(block, 2, static_cast<std::size_t>(k), 1.0 - alpha);
      r.reject = r.statistic > r.critical_value;
      r.level = alpha;
      r.meta = prop_meta(group1, group2, replicates, seed, grid);
      r.meta.law = laws[l].kind();
      results.push_back(r);
    }
  }
  return results;
}

TestResult prop_hazards_test(const CountingPath& group1, const CountingPath& group2, PropStatistic rho,
                             double alpha, const PropOptions& options) {
  const auto all = prop_hazards_tests(group1, group2, std::span(&options.law, 1), alpha, options.replicates,
                                      options.seed);
  return all[rho == PropStatistic::ks ? 0 : 1];
}

namespace serial {

std::vector<double> prop_bootstrap_draws(const CountingPath& group1, const CountingPath& group2,
                                         std::span<const MultiplierLaw> laws, std::size_t replicates,
                                         const SeedSpec& seed) {
  check_prop_groups(group1, group2);
  const PropSetup s =
      prop_setup(nelson_aalen(group1).estimate, nelson_aalen(group2).estimate, group1.n_subjects, group2.n_subjects);
  auto replicate_curve = [&](const CountingPath& path, std::uint64_t group, const MultiplierLaw& law,
                             const SeedSpec& rs) {
    Xoshiro256pp gen(stream_key(rs, group_tag(group, path.transition)));
    const double sqrt_n = std::sqrt(static_cast<double>(path.n_subjects));
    std::vector<double> w(path.size()), g;
    double c = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
      g.resize(static_cast<std::size_t>(path.jump_sizes[i]));
      for (auto& x : g) x = law.from_uniform(gen.uniform());
      c += detail::tie_sums(g.data(), path.jump_sizes[i]).g * detail::event_increment(sqrt_n, path.at_risk[i]);
      w[i] = c;
    }
    return StepCurve(0.0, path.jump_times, std::move(w), path.tau);
  };
  std::vector<double> out(laws.size() * replicates * 2);
  for (std::size_t l = 0; l < laws.size(); ++l) {
    for (std::size_t b = 0; b < replicates; ++b) {
      const SeedSpec rs{seed.master_seed, seed.study, b};
      const StepCurve c1 = replicate_curve(group1, stream_tag::group1, laws[l], rs);
      const StepCurve c2 = replicate_curve(group2, stream_tag::group2, laws[l], rs);
      std::vector<double> w1, w2;
      for (double t : s.points) {
        w1.push_back(c1.value_unchecked(t));
        w2.push_back(c2.value_unchecked(t));
      }
      const PropPair f = prop_functionals(s, w1.data(), w2.data());
      out[(l * replicates + b) * 2] = f.ks;
      out[(l * replicates + b) * 2 + 1] = f.cvm;
    }
  }
  return out;
}

}  // namespace serial

}  // namespace hazardband
