#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "umivr/kernels.hpp"

using namespace umivr::kernels;

namespace {

constexpr std::size_t kDim = 768;

struct Corpus {
  std::vector<float> matrix;
  std::vector<double> query;
  std::vector<std::string> ids;
  std::vector<double> scores;

  explicit Corpus(std::size_t rows) : matrix(rows * kDim), query(kDim), ids(rows) {
    std::mt19937_64 rng(42);
    std::normal_distribution<float> n(0.0f, 1.0f);
    for (auto& x : matrix) x = n(rng);
    for (auto& x : query) x = n(rng);
    for (std::size_t i = 0; i < rows; ++i) ids[i] = "v" + std::to_string(i);
    scores = serial::cosine_scan(view(), query);
  }
  MatrixView view() const { return {matrix, ids.size(), kDim}; }
};

struct Clip {
  std::vector<std::vector<std::uint8_t>> pixels;
  std::vector<PlaneView> planes;

  Clip(std::size_t frames, std::size_t side) : pixels(frames, std::vector<std::uint8_t>(side * side)) {
    std::mt19937_64 rng(7);
    for (auto& f : pixels) {
      for (auto& p : f) p = static_cast<std::uint8_t>(rng() & 0xFF);
      planes.push_back({f, side, side});
    }
  }
};

void BM_CosineScanSerial(benchmark::State& state) {
  const Corpus c(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(serial::cosine_scan(c.view(), c.query));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CosineScanOmp(benchmark::State& state) {
  const Corpus c(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(omp::cosine_scan(c.view(), c.query));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TopKSerial(benchmark::State& state) {
  const Corpus c(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(serial::top_k(c.scores, c.ids, 10));
}

void BM_TopKOmp(benchmark::State& state) {
  const Corpus c(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(omp::top_k(c.scores, c.ids, 10));
}

void BM_LaplacianSerial(benchmark::State& state) {
  const Clip clip(static_cast<std::size_t>(state.range(0)), 224);
  for (auto _ : state) benchmark::DoNotOptimize(serial::laplacian_variances(clip.planes));
}

void BM_LaplacianOmp(benchmark::State& state) {
  const Clip clip(static_cast<std::size_t>(state.range(0)), 224);
  for (auto _ : state) benchmark::DoNotOptimize(omp::laplacian_variances(clip.planes));
}

}  // namespace

BENCHMARK(BM_CosineScanSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_CosineScanOmp)->Arg(1000)->Arg(10000);
BENCHMARK(BM_TopKSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_TopKOmp)->Arg(1000)->Arg(10000);
BENCHMARK(BM_LaplacianSerial)->Arg(16)->Arg(64);
BENCHMARK(BM_LaplacianOmp)->Arg(16)->Arg(64);

BENCHMARK_MAIN();
