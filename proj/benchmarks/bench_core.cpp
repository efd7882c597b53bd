// Microbenchmarks for the hot paths: morphology, inner-set breakpoint
// walks, nonconformity scoring, and end-to-end calibration.

#include <benchmark/benchmark.h>

#include <confmask/conformal.hpp>
#include <confmask/datagen.hpp>
#include <confmask/inner_sets.hpp>
#include <confmask/mask.hpp>
#include <confmask/risk.hpp>
#include <confmask/rng.hpp>

#include <cstdint>
#include <vector>

using namespace confmask;

namespace {

BinaryMask random_mask(std::size_t side, double density, std::uint64_t seed) {
  SplitMix64 rng(seed);
  BinaryMask m(side, side);
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = 0; j < side; ++j)
      if (rng.next_unit() < density) m.set(i, j, true);
  return m;
}

ScoreMap random_scores(std::size_t side, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<float> v(side * side);
  for (auto& s : v) s = static_cast<float>(rng.next_unit());
  return ScoreMap(side, side, std::move(v));
}

SynthParams bench_params(std::uint64_t seed) {
  SynthParams p;
  p.seed = seed;
  return p;
}

void BM_Erode(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const BinaryMask m = random_mask(side, 0.7, 1);
  const StructuringElement se = cross4();
  for (auto _ : state) benchmark::DoNotOptimize(erode(m, se));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(side * side));
}
BENCHMARK(BM_Erode)->Arg(64)->Arg(256)->Arg(1024);

void BM_Threshold(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const ScoreMap s = random_scores(side, 2);
  for (auto _ : state) benchmark::DoNotOptimize(threshold(s, 0.5));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(side * side));
}
BENCHMARK(BM_Threshold)->Arg(64)->Arg(256)->Arg(1024);

void BM_ThresholdBreakpoints(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const InnerFamily fam = InnerFamily::thresholding(random_scores(side, 3));
  for (auto _ : state) benchmark::DoNotOptimize(fam.breakpoints());
}
BENCHMARK(BM_ThresholdBreakpoints)->Arg(64)->Arg(256);

void BM_NonconformityThreshold(benchmark::State& state) {
  const LabeledPrediction item = synth_item(bench_params(4), 0);
  for (auto _ : state) benchmark::DoNotOptimize(nonconformity_score(item, 0.01));
}
BENCHMARK(BM_NonconformityThreshold);

void BM_NonconformityErosion(benchmark::State& state) {
  const LabeledPrediction item =
      with_erosion_family(synth_item(bench_params(5), 0), cross4());
  for (auto _ : state) benchmark::DoNotOptimize(nonconformity_score(item, 0.01));
}
BENCHMARK(BM_NonconformityErosion);

void BM_ReferenceScanThreshold(benchmark::State& state) {
  const LabeledPrediction item = synth_item(bench_params(4), 0);
  for (auto _ : state)
    benchmark::DoNotOptimize(brute_force_nonconformity(item, 0.01));
}
BENCHMARK(BM_ReferenceScanThreshold);

void BM_SynthItem(benchmark::State& state) {
  const SynthParams params = bench_params(6);
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(synth_item(params, i++));
}
BENCHMARK(BM_SynthItem);

void BM_Calibrate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SynthParams params = bench_params(7);
  std::vector<LabeledPrediction> items;
  items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) items.push_back(synth_item(params, i));
  const CalibConfig config(0.1, 0.01, Family::threshold);
  for (auto _ : state) benchmark::DoNotOptimize(calibrate(items, config, 1));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Calibrate)->Arg(50)->Arg(250);

void BM_Apply(benchmark::State& state) {
  const SynthParams params = bench_params(8);
  std::vector<LabeledPrediction> items;
  for (std::size_t i = 0; i < 50; ++i) items.push_back(synth_item(params, i));
  const CalibConfig config(0.1, 0.01, Family::threshold);
  const CalibratedModel model = calibrate(items, config, 1);
  const InnerFamily& input = items.front().family;
  for (auto _ : state) benchmark::DoNotOptimize(apply(model, input));
}
BENCHMARK(BM_Apply);

}  // namespace

BENCHMARK_MAIN();
