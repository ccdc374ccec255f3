#include <benchmark/benchmark.h>

#include <random>

#include "mdhar/beamform.hpp"
#include "mdhar/nnet/adam.hpp"
#include "mdhar/nnet/model.hpp"
#include "mdhar/scene_synth.hpp"
#include "mdhar/tfproc.hpp"

using namespace mdhar;

namespace {

RadarParams short_radar(std::uint32_t pulses) {
  RadarParams p;
  p.num_pulses = pulses;
  return p;
}

std::vector<PersonMotion> one_walker() {
  PersonMotion p;
  p.initial_range = 2.0;
  p.schedule.push_back({ActivityClass::WalkForward0, 0.1, 0.8});
  return {p};
}

nnet::Sample<float> random_sample(const nnet::Architecture& arch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  nnet::Sample<float> s;
  s.id = "bench";
  for (std::size_t b = 0; b < arch.branches; ++b) {
    std::vector<float> x(arch.input_elements());
    for (auto& v : x) v = u(rng);
    s.branches.push_back(std::move(x));
  }
  return s;
}

}  // namespace

static void BM_SynthesizeCube(benchmark::State& state) {
  const auto params = short_radar(static_cast<std::uint32_t>(state.range(0)));
  const auto persons = one_walker();
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_cube(persons, params, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SynthesizeCube)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_Beamform(benchmark::State& state) {
  const auto params = short_radar(static_cast<std::uint32_t>(state.range(0)));
  const auto cube = synthesize_cube(one_walker(), params, 1);
  for (auto _ : state) benchmark::DoNotOptimize(beamform(cube, 90.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Beamform)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_RangeMap(benchmark::State& state) {
  const auto params = short_radar(static_cast<std::uint32_t>(state.range(0)));
  const auto y = beamform(synthesize_cube(one_walker(), params, 1), 90.0);
  const auto pm = reshape_pulses(y, params.samples_per_pulse);
  for (auto _ : state) benchmark::DoNotOptimize(range_map(pm, params));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RangeMap)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_Spectrogram(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  SlowTimeSignal v;
  v.values.resize(12000);
  for (auto& s : v.values) s = {n(rng), n(rng)};
  const auto window = hann_window(128);
  for (auto _ : state) benchmark::DoNotOptimize(spectrogram(v, window, 93, 1000.0));
}
BENCHMARK(BM_Spectrogram)->Unit(benchmark::kMillisecond);

static void BM_CnnForward(benchmark::State& state) {
  nnet::Architecture arch;
  const auto model = nnet::CnnModel<float>::random(arch, 1);
  const auto sample = random_sample(arch, 2);
  for (auto _ : state) benchmark::DoNotOptimize(nnet::forward(model, sample));
}
BENCHMARK(BM_CnnForward)->Unit(benchmark::kMillisecond);

static void BM_TrainStep(benchmark::State& state) {
  nnet::Architecture arch;
  auto model = nnet::CnnModel<float>::random(arch, 1);
  std::vector<nnet::Sample<float>> batch;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    batch.push_back(random_sample(arch, 10 + static_cast<std::uint64_t>(i)));
    batch.back().label = static_cast<std::size_t>(i) % arch.classes;
  }
  auto adam = nnet::AdamState<float>::for_model(model);
  auto grads = model.zero_buffers();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        nnet::loss_and_grad(model, std::span<const nnet::Sample<float>>(batch), grads));
    nnet::adam_step(adam, model.params(), grads, {});
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainStep)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
