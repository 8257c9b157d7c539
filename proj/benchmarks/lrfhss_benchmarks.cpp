#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>

#include "lrfhss/hopping.hpp"
#include "lrfhss/model.hpp"
#include "lrfhss/montecarlo.hpp"
#include "lrfhss/nearest.hpp"
#include "lrfhss/quadrature.hpp"
#include "lrfhss/sweep.hpp"

namespace {

using namespace lrfhss;

NetworkScenario scenario_at(DataRate dr, double load_mbps) {
  sweep::SweepConfig c;
  return sweep::load_to_scenario(load_mbps, c, sweep::profile_for(dr, c));
}

void BM_BinomialTail(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  double p = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(binomial_upper_tail(n, n / 3, p));
    p = p < 0.9 ? p + 1e-4 : 0.3;
  }
}
BENCHMARK(BM_BinomialTail)->Arg(28)->Arg(32)->Arg(1000);

void BM_MacroTotal(benchmark::State& state) {
  const NetworkScenario s = scenario_at(DataRate::DR5, 7.9);
  for (auto _ : state) benchmark::DoNotOptimize(total_success(s).total);
}
BENCHMARK(BM_MacroTotal);

void BM_NearestTotal(benchmark::State& state) {
  const NetworkScenario s = scenario_at(DataRate::DR5, 7.9);
  for (auto _ : state) benchmark::DoNotOptimize(nearest::total_success(s).total);
}
BENCHMARK(BM_NearestTotal);

void BM_AdaptiveQuadrature(benchmark::State& state) {
  QuadratureSpec spec;
  spec.rel_tol = 1e-12;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        integrate([](double y) { return y * std::exp(-y * y) * (1.0 + std::cos(7.0 * y)); }, 0.0,
                  8.0, spec)
            .value);
  }
}
BENCHMARK(BM_AdaptiveQuadrature);

void BM_MonteCarloTrial(benchmark::State& state) {
  const NetworkScenario s = scenario_at(DataRate::DR5, 7.9);
  const auto sampling = state.range(0) == 0 ? mc::SamplingModel::macro_model()
                                            : mc::SamplingModel::physical();
  const double lambda_hat = effective_interferer_density(s, airtimes(s));
  const mc::SimRegion region = mc::SimRegion::for_scenario(s, lambda_hat);
  std::uint64_t trial = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mc::run_trial(s, lambda_hat, region, sampling, 1, trial++, 0.0));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MonteCarloTrial)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_HopSequence(benchmark::State& state) {
  std::uint32_t id = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hopping::generate_sequence(id, 7, static_cast<int>(id % 52), 31));
    ++id;
  }
  state.SetItemsProcessed(state.iterations() * 31);
}
BENCHMARK(BM_HopSequence);

}  // namespace

BENCHMARK_MAIN();
