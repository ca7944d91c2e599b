#include <benchmark/benchmark.h>

#include "cbm/model.hpp"
#include "cbm/optimizer.hpp"
#include "cbm/reliability.hpp"
#include "cbm/surrogate.hpp"

namespace {

using namespace cbm;

DegradationState half_worn(const SystemModel& s) {
  DegradationState u;
  for (const auto& c : s.components) u.u.push_back(0.5 * c.soft_threshold);
  return u;
}

void BM_GammaCdf(benchmark::State& state) {
  const double shape = static_cast<double>(state.range(0));
  double x = 0.5 * shape;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gamma_cdf(x, shape, 1.0));
    x += 1e-9;
  }
}
BENCHMARK(BM_GammaCdf)->Arg(1)->Arg(10)->Arg(100);

void BM_SystemReliability(benchmark::State& state) {
  SystemModel s = reference_system();
  s.shock_rate = static_cast<double>(state.range(0)) * 1e-3;
  const DegradationState u = half_worn(s);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_reliability(s, 3.0, u));
}
BENCHMARK(BM_SystemReliability)->Arg(2)->Arg(100)->Arg(1000);

void BM_CostRate(benchmark::State& state) {
  const SystemModel s = reference_system();
  const CostParams c = CostParams::defaults(s.size());
  const DegradationState u = half_worn(s);
  for (auto _ : state) benchmark::DoNotOptimize(cost_rate(s, c, 2.0, u));
}
BENCHMARK(BM_CostRate)->Unit(benchmark::kMicrosecond);

void BM_OptimalInspectionTime(benchmark::State& state) {
  const SystemModel s = reference_system();
  const CostParams c = CostParams::defaults(s.size());
  const DegradationState u = half_worn(s);
  for (auto _ : state) benchmark::DoNotOptimize(optimal_inspection_time(s, c, u));
}
BENCHMARK(BM_OptimalInspectionTime)->Unit(benchmark::kMillisecond)->Iterations(5);

void BM_SurrogateForward(benchmark::State& state) {
  const MlpModel m = MlpModel::create({3, 16, 16, 1}, 1);
  const std::vector<double> x{0.2, 0.4, 0.6};
  for (auto _ : state) benchmark::DoNotOptimize(forward(m, x));
}
BENCHMARK(BM_SurrogateForward);

}  // namespace

BENCHMARK_MAIN();
