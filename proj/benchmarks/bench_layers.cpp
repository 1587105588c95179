#include <benchmark/benchmark.h>

#include "caries/layers.hpp"
#include "caries/loss.hpp"
#include "caries/network.hpp"
#include "caries/rng.hpp"

using namespace caries;

namespace {

Tensor random_tensor(Shape s, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(s);
  for (auto& v : t.data()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

// Args: batch, in channels, out channels, spatial size.
void BM_ConvForward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int cin = static_cast<int>(state.range(1));
  const int cout = static_cast<int>(state.range(2));
  const int size = static_cast<int>(state.range(3));
  const Tensor x = random_tensor(Shape{n, cin, size, size}, 1);
  const Tensor w = random_tensor(Shape{cout, cin, 3, 3}, 2);
  const std::vector<float> b(static_cast<std::size_t>(cout), 0.1f);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_forward<float>(x, w, b, 1));
  state.counters["MAC/s"] = benchmark::Counter(static_cast<double>(n) * size * size * cout * cin * 9,
                                                benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_ConvForward)->Args({8, 1, 8, 128})->Args({8, 8, 8, 128})->Args({8, 16, 16, 64})->Args({8, 64, 32, 32});

void BM_ConvBackward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int cin = static_cast<int>(state.range(1));
  const int cout = static_cast<int>(state.range(2));
  const int size = static_cast<int>(state.range(3));
  const Tensor x = random_tensor(Shape{n, cin, size, size}, 1);
  const Tensor w = random_tensor(Shape{cout, cin, 3, 3}, 2);
  const Tensor g = random_tensor(Shape{n, cout, size, size}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_backward<float>(x, w, g, 1));
  state.counters["MAC/s"] = benchmark::Counter(2.0 * n * size * size * cout * cin * 9,
                                                benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_ConvBackward)->Args({8, 8, 8, 128})->Args({8, 16, 16, 64})->Args({8, 64, 32, 32});

void BM_NetworkStep(benchmark::State& state) {
  const Network net(NetworkConfig{}, 0);
  const Tensor x = random_tensor(Shape{static_cast<int>(state.range(0)), 1, 128, 128}, 4);
  Tensor t(x.shape());
  for (std::size_t i = 0; i < t.size(); i += 37) t[i] = 1.0f;
  for (auto _ : state) {
    ForwardCache<float> cache;
    const Tensor logits = net.forward(x, cache);
    benchmark::DoNotOptimize(net.backward(cache, bce_loss(logits, t, 5.0f).grad));
  }
}
BENCHMARK(BM_NetworkStep)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_NetworkForward(benchmark::State& state) {
  const Network net(NetworkConfig{}, 0);
  const Tensor x = random_tensor(Shape{1, 1, 128, 128}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
}
BENCHMARK(BM_NetworkForward)->Unit(benchmark::kMillisecond);

}  // namespace
