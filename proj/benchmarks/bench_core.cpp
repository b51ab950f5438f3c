#include <benchmark/benchmark.h>

#include <random>

#include "support/fixtures.hpp"
#include "wsoleval/geometry.hpp"
#include "wsoleval/heatmap.hpp"
#include "wsoleval/metrics.hpp"
#include "wsoleval/proposals.hpp"

namespace {

using namespace wsoleval;

std::vector<MapSample> blob_dataset(std::size_t n, std::size_t side) {
  std::mt19937_64 rng(42);
  std::vector<MapSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int s = static_cast<int>(side);
    const BBox box = fixtures::random_int_box(rng, s, s, s / 8);
    out.push_back({"img" + std::to_string(i), fixtures::gaussian_blob_map(side, side, box, rng, 0.1), {box}});
  }
  return out;
}

void BM_Iou(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<BBox> boxes;
  for (int i = 0; i < 1024; ++i) boxes.push_back(fixtures::random_int_box(rng, 224, 224));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(iou(boxes[i % 1024], boxes[(i * 7 + 3) % 1024]));
    ++i;
  }
}
BENCHMARK(BM_Iou);

void BM_ConnectedComponents(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::bernoulli_distribution coin(0.45);
  std::vector<std::uint8_t> bits(side * side);
  for (auto& b : bits) b = coin(rng) ? 1 : 0;
  const BinaryMask mask(side, side, bits);
  for (auto _ : state) benchmark::DoNotOptimize(connected_components(mask, Connectivity::Eight));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(side * side));
}
BENCHMARK(BM_ConnectedComponents)->Arg(64)->Arg(224);

void BM_Otsu(benchmark::State& state) {
  const auto data = blob_dataset(1, 224);
  for (auto _ : state) benchmark::DoNotOptimize(otsu_threshold(data[0].map));
}
BENCHMARK(BM_Otsu);

void BM_BoxAccCurve(benchmark::State& state) {
  const auto data = blob_dataset(static_cast<std::size_t>(state.range(0)), 64);
  const auto grid = ThresholdGrid::uniform(100);
  for (auto _ : state) benchmark::DoNotOptimize(box_acc_curve(data, grid, 0.5));
}
BENCHMARK(BM_BoxAccCurve)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_SelectiveSearch(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const RgbImage image = fixtures::random_blocks(side, side, 3);
  SelectiveSearchParams params;
  params.k = 100;
  params.min_size = 20;
  for (auto _ : state) benchmark::DoNotOptimize(selective_search(image, params));
}
BENCHMARK(BM_SelectiveSearch)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
