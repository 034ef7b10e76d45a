#include <benchmark/benchmark.h>

#include "defmag/dsf.hpp"
#include "defmag/icp.hpp"
#include "defmag/magnify.hpp"
#include "defmag/pipeline.hpp"
#include "defmag/random.hpp"
#include "defmag/synth.hpp"

using namespace defmag;

namespace {

std::vector<TriMesh> frames(std::size_t n) {
  SynthSpec spec;
  spec.frames = n;
  SynthSequenceInfo info;
  info.label = Expression::HA;
  info.subject = "S000";
  return synth_sequence(spec, 1, info);
}

DsfSequence random_dsf(std::size_t n, std::size_t rows, std::size_t cols) {
  Rng rng(3);
  DsfSequence s;
  s.sample_rate = 25;
  for (std::size_t i = 0; i < n; ++i) {
    DsfField f{Grid(rows, cols), static_cast<std::int64_t>(i)};
    for (auto& v : f.grid.values()) v = rng.uniform(0.0, 1.0);
    s.frames.push_back(std::move(f));
  }
  return s;
}

void BM_RigidAlign(benchmark::State& state) {
  const auto f = frames(2);
  for (auto _ : state) benchmark::DoNotOptimize(rigid_align(f[1], f[0]));
}
BENCHMARK(BM_RigidAlign)->Unit(benchmark::kMillisecond);

void BM_ExtractFrame(benchmark::State& state) {
  const auto f = frames(1);
  const Vec3 nose = find_nose_tip(f[0]);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(extract_radial_curves(f[0], nose, n, 50));
}
BENCHMARK(BM_ExtractFrame)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_DsfBetween(benchmark::State& state) {
  const auto f = frames(2);
  const Vec3 nose = find_nose_tip(f[0]);
  const auto a = extract_radial_curves(f[0], nose, 200, 50);
  const auto b = extract_radial_curves(f[1], nose, 200, 50);
  for (auto _ : state) benchmark::DoNotOptimize(dsf_between(a, b));
}
BENCHMARK(BM_DsfBetween)->Unit(benchmark::kMicrosecond);

void BM_Magnify(benchmark::State& state) {
  const auto seq = random_dsf(static_cast<std::size_t>(state.range(0)), 200, 50);
  MagnifyConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(magnify_sequence(seq, cfg));
}
BENCHMARK(BM_Magnify)->Arg(75)->Arg(150)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
