#include <benchmark/benchmark.h>

#include "spikekit/esa.hpp"
#include "spikekit/rng.hpp"
#include "spikekit/tbtm.hpp"
#include "spikekit/tensor.hpp"

using namespace spikekit;

namespace {

Tensor random_tensor(Rng& rng, std::vector<int64_t> shape) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
  return t;
}

}  // namespace

static void Conv2d3x3(benchmark::State& state) {
  const int64_t c = state.range(0), side = state.range(1);
  Rng rng(1);
  const Tensor input = random_tensor(rng, {c, side, side});
  const Tensor kernel = random_tensor(rng, {c, c, 3, 3});
  for (auto _ : state) {
    const Tensor out = conv2d(input, kernel, 1, 1);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * c * c * 9 * side * side);
}
BENCHMARK(Conv2d3x3)->Args({16, 64})->Args({32, 64})->Args({64, 64})->Args({32, 128});

static void TbtmBlock(benchmark::State& state) {
  TbtmConfig cfg;
  cfg.c_mid = 8;
  cfg.c_b = 8;
  cfg.channels = 32;
  const auto params = TbtmParams::seeded(cfg, 5);
  Rng rng(2);
  const Tensor block = random_tensor(rng, {cfg.t_prime, state.range(), state.range()});
  for (auto _ : state) {
    const Tensor out = tbtm_forward(block, params);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(TbtmBlock)->Arg(32)->Arg(64);

static void EsaForward(benchmark::State& state) {
  EsaConfig cfg;
  cfg.channels = state.range(0);
  const auto params = EsaParams::seeded(cfg, 7);
  Rng rng(3);
  IntensityMap imap;
  imap.values = Tensor({1, state.range(1), state.range(1)});
  for (double& v : imap.values.values()) v = rng.uniform01();
  for (auto _ : state) {
    const Tensor out = esa_forward(imap, params, cfg);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(EsaForward)->Args({16, 64})->Args({32, 64})->Args({32, 128});

static void WindowEntropy(benchmark::State& state) {
  EsaConfig cfg;
  cfg.channels = 16;
  Rng rng(4);
  const Tensor feat = random_tensor(rng, {16, state.range(), state.range()});
  for (auto _ : state) {
    const EntropyGrid grid = window_entropy(feat, cfg);
    benchmark::DoNotOptimize(grid.values.data());
  }
}
BENCHMARK(WindowEntropy)->Arg(64)->Arg(128)->Arg(256);

BENCHMARK_MAIN();
