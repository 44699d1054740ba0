#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sstem/aggregation.hpp"
#include "sstem/backend_config.hpp"
#include "sstem/stages.hpp"
#include "sstem/stats.hpp"

namespace {

using namespace sstem;
using stats::kendall_tau_b;
using stats::spearman;

std::vector<double> noise(std::size_t n, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

void BM_Spearman(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = noise(n, 1), y = noise(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(spearman(x, y));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Spearman)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

// O(n^2) pair scan.
void BM_KendallTauB(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = noise(n, 3), y = noise(n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kendall_tau_b(x, y));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KendallTauB)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

std::vector<FitRow> fit_rows(std::size_t n) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<FitRow> rows(n);
  for (auto& r : rows) {
    r.scores.s_similarity = u(rng);
    r.scores.s_object = u(rng);
    r.scores.s_temporal = u(rng);
    r.human = 0.3 * r.scores.s_similarity + 0.2 * r.scores.s_object + 0.5 * r.scores.s_temporal + 0.01 * (u(rng) - 0.5);
  }
  return rows;
}

void BM_Fit(benchmark::State& state, FitMethod method) {
  const auto rows = fit_rows(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_weights(rows, method));
}
BENCHMARK_CAPTURE(BM_Fit, ols, FitMethod::kOls)->Range(8, 8192);
BENCHMARK_CAPTURE(BM_Fit, simplex, FitMethod::kSimplex)->Range(8, 8192);

FrameSequence moving_squares(int n_frames, int size) {
  FrameSequence seq;
  seq.video_id = "bench";
  seq.fps = 25.0;
  for (int f = 0; f < n_frames; ++f) {
    RgbImage img{size, size, std::vector<std::uint8_t>(static_cast<std::size_t>(size) * size * 3, 20)};
    const int off = f % (size / 2);
    for (int y = off; y < off + size / 4; ++y) {
      for (int x = off; x < off + size / 4; ++x) img.pixels[(static_cast<std::size_t>(y) * size + x) * 3] = 220;
    }
    seq.frames.push_back(Frame::from_image(static_cast<std::uint64_t>(f), std::move(img)));
  }
  return seq;
}

void BM_TemporalScoreMock(benchmark::State& state) {
  const auto seq = moving_squares(static_cast<int>(state.range(0)), 64);
  auto backends = make_backends(BackendConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(temporal_score(seq, *backends.frame_embedder));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TemporalScoreMock)->Arg(8)->Arg(32)->Arg(128);

void BM_ScoreFramesMock(benchmark::State& state) {
  const auto seq = moving_squares(static_cast<int>(state.range(0)), 64);
  auto backends = make_backends(BackendConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(score_frames(seq, "make the square blue", backends));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ScoreFramesMock)->Arg(8)->Arg(32);

}  // namespace

// The distro benchmark_main archive is LTO bytecode from another gcc, so main lives here.
BENCHMARK_MAIN();
