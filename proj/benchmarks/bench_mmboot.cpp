#include <benchmark/benchmark.h>

#include "mmboot/mmdist.hpp"
#include "mmboot/mspe.hpp"
#include "mmboot/pipeline.hpp"
#include "mmboot/simulate.hpp"

using namespace mmboot;

namespace {

Dataset sample_data(Index n) {
  const Scenario sc = Scenario::standard(n, 1.0);
  Rng design_rng = make_stream(1, Stream::study_design);
  const Dataset design = make_design(sc, design_rng);
  Rng data_rng = make_stream(1, Stream::study_data);
  return simulate_sample(design, sc, ErrorModel::parse("m1"), data_rng).data;
}

}  // namespace

static void BM_EstimatorSetup(benchmark::State& state) {
  const Dataset d = sample_data(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Estimator(d));
}
BENCHMARK(BM_EstimatorSetup)->Arg(60)->Arg(1000);

static void BM_Fit(benchmark::State& state) {
  const Dataset d = sample_data(state.range(0));
  const Estimator est(d);
  for (auto _ : state) benchmark::DoNotOptimize(est.fit(d, true));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Fit)->Arg(60)->Arg(100)->Arg(1000);

static void BM_MseSingle(benchmark::State& state) {
  const Dataset d = sample_data(60);
  const Estimator est(d);
  const FittedModel fitted = est.fit(d, true);
  BootstrapConfig cfg = BootstrapConfig::desk();
  cfg.b1 = state.range(0);
  cfg.jobs = 1;
  cfg.master_seed = 3;
  for (auto _ : state) benchmark::DoNotOptimize(mse_single(est, fitted, cfg));
}
BENCHMARK(BM_MseSingle)->Arg(100)->Arg(400);

static void BM_MseDoubleDesk(benchmark::State& state) {
  const Dataset d = sample_data(60);
  const Estimator est(d);
  const FittedModel fitted = est.fit(d, true);
  BootstrapConfig cfg = BootstrapConfig::desk();
  cfg.jobs = 1;
  cfg.master_seed = 3;
  for (auto _ : state) benchmark::DoNotOptimize(mse_double(est, fitted, cfg));
}
BENCHMARK(BM_MseDoubleDesk)->Unit(benchmark::kMillisecond);

static void BM_ThreePointSample(benchmark::State& state) {
  const auto dist = MatchedDistribution::three_point(1.0, 4.0);
  Rng rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(sample(dist, rng, 1000));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_ThreePointSample);

static void BM_StudentTSample(benchmark::State& state) {
  const auto dist = MatchedDistribution::student_t(1.0, 6.0);
  Rng rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(sample(dist, rng, 1000));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_StudentTSample);

BENCHMARK_MAIN();
