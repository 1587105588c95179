#include <benchmark/benchmark.h>

#include <cmath>

#include "caries/eval.hpp"
#include "caries/geometry.hpp"
#include "caries/postprocess.hpp"
#include "caries/rng.hpp"

using namespace caries;

namespace {

Polygon octagon(double cx, double cy, double r) {
  std::vector<Point> v;
  for (int k = 0; k < 8; ++k) {
    const double a = (k + 0.5) * 3.14159265358979 / 4.0;
    v.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
  }
  return Polygon(std::move(v));
}

void BM_Rasterize(benchmark::State& state) {
  const Polygon p = octagon(64.0, 64.0, static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rasterize_polygon(p, 128, 128));
}
BENCHMARK(BM_Rasterize)->Arg(6)->Arg(40);

void BM_JaccardBoxPolygon(benchmark::State& state) {
  const Polygon p = octagon(64.0, 64.0, 10.0);
  const BBox box = BBox::make(54, 55, 75, 74);
  for (auto _ : state) benchmark::DoNotOptimize(jaccard_box_polygon(box, p, 128, 128));
}
BENCHMARK(BM_JaccardBoxPolygon);

void BM_ConnectedComponents(benchmark::State& state) {
  Rng rng(1);
  BinaryMask m(128, 128);
  for (int r = 0; r < 128; ++r) {
    for (int c = 0; c < 128; ++c) m.set(r, c, rng.uniform() < static_cast<double>(state.range(0)) / 100.0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(connected_components(m));
}
BENCHMARK(BM_ConnectedComponents)->Arg(5)->Arg(40);

void BM_MatchImage(benchmark::State& state) {
  std::vector<Polygon> truths;
  std::vector<Detection> dets;
  for (int k = 0; k < 3; ++k) {
    truths.push_back(octagon(25.0 + 35.0 * k, 40.0, 9.0));
    dets.push_back({BBox::make(16 + 35 * k, 31, 35 + 35 * k, 50), 0.9});
  }
  dets.push_back({BBox::make(10, 100, 20, 110), 0.6});
  for (auto _ : state) benchmark::DoNotOptimize(match_detections(dets, truths, 128, 128, EvalConfig{}));
}
BENCHMARK(BM_MatchImage);

}  // namespace
