#include <benchmark/benchmark.h>
#include <omp.h>

#include <vector>

#include "hazardband/brownian.hpp"
#include "hazardband/event_model.hpp"
#include "hazardband/hypothesis.hpp"
#include "hazardband/simulate.hpp"
#include "hazardband/study.hpp"
#include "hazardband/wildboot.hpp"

using namespace hazardband;

namespace {

const PathMap& illness_death_paths() {
  static const PathMap paths = [] {
    const auto model = illness_death_recovery_model();
    return build_counting_paths(simulate_multistate(model, 747, SeedSpec{3, 0, 0}), model.horizon);
  }();
  return paths;
}

std::vector<SupSpec> band_specs(const PathMap& paths) {
  std::vector<SupSpec> specs;
  for (const auto& [key, path] : paths) {
    for (SupMode mode : {SupMode::equal_precision, SupMode::hall_wellner}) {
      SupSpec s;
      s.transition = key;
      s.t1 = 5.0;
      s.t2 = 30.0;
      s.mode = mode;
      specs.push_back(s);
    }
  }
  return specs;
}

const std::vector<MultiplierLaw> kLaws{MultiplierKind::standard_normal, MultiplierKind::centered_poisson};

template <bool Parallel>
void BM_bootstrap_sup(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(0)));
  const auto& paths = illness_death_paths();
  const auto specs = band_specs(paths);
  for (auto _ : state) {
    auto draws = Parallel ? bootstrap_sup_draws(paths, kLaws, specs, 500, SeedSpec{1, 0, 0})
                          : serial::bootstrap_sup_draws(paths, kLaws, specs, 500, SeedSpec{1, 0, 0});
    benchmark::DoNotOptimize(draws.data());
  }
}

template <bool Parallel>
void BM_bridge_sup(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(0)));
  BridgeQuantileSpec spec;
  spec.phi_lo = 0.1;
  spec.phi_hi = 0.9;
  spec.n_paths = 2000;
  spec.grid_points = 2001;
  for (auto _ : state) {
    auto draws = Parallel ? bridge_sup_draws(spec) : serial::bridge_sup_draws(spec);
    benchmark::DoNotOptimize(draws.hall_wellner.data());
  }
}

template <bool Parallel>
void BM_prop_bootstrap(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(0)));
  const auto s = scenario_preset("table3:II", 1000);
  const TransitionKey key{"0", "1"};
  const auto g1 = build_counting_paths(simulate_competing_risks_constant(s, 1, SeedSpec{4, 0, 0}), s.tau).at(key);
  const auto g2 = build_counting_paths(simulate_competing_risks_constant(s, 2, SeedSpec{4, 0, 0}), s.tau).at(key);
  for (auto _ : state) {
    auto draws = Parallel ? prop_bootstrap_draws(g1, g2, kLaws, 1000, SeedSpec{1, 0, 0})
                          : serial::prop_bootstrap_draws(g1, g2, kLaws, 1000, SeedSpec{1, 0, 0});
    benchmark::DoNotOptimize(draws.data());
  }
}

void thread_counts(benchmark::internal::Benchmark* b) {
  const int max_threads = omp_get_num_procs();
  for (int t = 1; t <= max_threads; t *= 2) b->Arg(t);
  if ((max_threads & (max_threads - 1)) != 0) b->Arg(max_threads);
}

}  // namespace

BENCHMARK(BM_bootstrap_sup<false>)->Name("bootstrap_sup/serial")->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bootstrap_sup<true>)->Name("bootstrap_sup/openmp")->Apply(thread_counts)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bridge_sup<false>)->Name("bridge_sup/serial")->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bridge_sup<true>)->Name("bridge_sup/openmp")->Apply(thread_counts)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_prop_bootstrap<false>)->Name("prop_bootstrap/serial")->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_prop_bootstrap<true>)->Name("prop_bootstrap/openmp")->Apply(thread_counts)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
