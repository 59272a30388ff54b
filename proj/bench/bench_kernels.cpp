// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "mvtk/metrics.hpp"
#include "mvtk/random.hpp"
#include "mvtk/raster.hpp"

namespace {

mvtk::CanonicalPolygon random_polygon(mvtk::SeededRng& rng) {
  const double cx = rng.between(250, 750);
  const double cy = rng.between(250, 750);
  const double r = rng.between(80, 240);
  mvtk::RawPolygon raw;
  raw.extent = {1000, 1000};
  for (int k = 0; k < 16; ++k) {
    const double t = 2.0 * std::numbers::pi * k / 16;
    const double rr = r * (0.6 + 0.4 * rng.unit());
    raw.points.push_back({cx + rr * std::cos(t), cy + rr * std::sin(t)});
  }
  return mvtk::canonicalize_polygon(raw);
}

std::vector<mvtk::GroundingPair> polygon_pairs(std::size_t n) {
  mvtk::SeededRng rng(7);
  std::vector<mvtk::GroundingPair> pairs;
  for (std::size_t i = 0; i < n; ++i)
    pairs.push_back({"q" + std::to_string(i), random_polygon(rng), random_polygon(rng)});
  return pairs;
}

std::vector<mvtk::GroundingPair> box_pairs(std::size_t n) {
  mvtk::SeededRng rng(11);
  auto box = [&] {
    const int x1 = rng.between(0, 900), y1 = rng.between(0, 900);
    return mvtk::NormalizedBox2D{0, x1, y1, x1 + rng.between(1, 100), y1 + rng.between(1, 100)};
  };
  std::vector<mvtk::GroundingPair> pairs;
  for (std::size_t i = 0; i < n; ++i) pairs.push_back({"q" + std::to_string(i), box(), box()});
  return pairs;
}

void BM_RasterizeReference(benchmark::State& state) {
  mvtk::SeededRng rng(3);
  const auto poly = random_polygon(rng);
  for (auto _ : state) benchmark::DoNotOptimize(mvtk::rasterize_reference(poly.points, static_cast<int>(state.range(0))));
}

void BM_Rasterize(benchmark::State& state) {
  mvtk::SeededRng rng(3);
  const auto poly = random_polygon(rng);
  for (auto _ : state) benchmark::DoNotOptimize(mvtk::rasterize(poly.points, static_cast<int>(state.range(0))));
}

void BM_OverlapReference(benchmark::State& state) {
  mvtk::SeededRng rng(5);
  const auto a = mvtk::rasterize(random_polygon(rng).points, 1000);
  const auto b = mvtk::rasterize(random_polygon(rng).points, 1000);
  for (auto _ : state) benchmark::DoNotOptimize(mvtk::overlap_reference(a, b));
}

void BM_Overlap(benchmark::State& state) {
  mvtk::SeededRng rng(5);
  const auto a = mvtk::rasterize(random_polygon(rng).points, 1000);
  const auto b = mvtk::rasterize(random_polygon(rng).points, 1000);
  for (auto _ : state) benchmark::DoNotOptimize(mvtk::overlap(a, b));
}

void BM_PolygonPairsReference(benchmark::State& state) {
  const auto pairs = polygon_pairs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mvtk::pair_scores_reference(pairs));
}

void BM_PolygonPairs(benchmark::State& state) {
  const auto pairs = polygon_pairs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mvtk::pair_scores(pairs));
}

void BM_BoxPairsReference(benchmark::State& state) {
  const auto pairs = box_pairs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mvtk::pair_scores_reference(pairs));
}

void BM_BoxPairs(benchmark::State& state) {
  const auto pairs = box_pairs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mvtk::pair_scores(pairs));
}

}  // namespace

BENCHMARK(BM_RasterizeReference)->Arg(256)->Arg(1000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Rasterize)->Arg(256)->Arg(1000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_OverlapReference)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Overlap)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PolygonPairsReference)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PolygonPairs)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BoxPairsReference)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BoxPairs)->Arg(100000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
