#include <benchmark/benchmark.h>

#include "ffdyn/ff_layer.hpp"
#include "ffdyn/rng.hpp"

namespace {

struct LayerFixture {
    ffdyn::FFLayer layer;
    ffdyn::Matrix2D input;
    std::vector<ffdyn::Polarity> polarities;
    ffdyn::PeerNormConfig peer{0.03, 0.09};

    LayerFixture(std::size_t batch, std::size_t fan_in, std::size_t width) {
        ffdyn::Rng rng(7);
        layer = ffdyn::make_layer(fan_in, width, ffdyn::SgdConfig{}, rng);
        input = ffdyn::Matrix2D(batch, fan_in);
        for (double& v : input.flat()) v = rng.uniform01();
        polarities.resize(batch);
        for (std::size_t i = 0; i < batch; ++i) {
            polarities[i] = i % 2 == 0 ? ffdyn::Polarity::positive : ffdyn::Polarity::negative;
        }
    }
};

void BM_layer_forward(benchmark::State& state) {
    LayerFixture fx(2000, 784, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto result = ffdyn::layer_forward(fx.layer, fx.input);
        benchmark::DoNotOptimize(result.y.data());
    }
}
BENCHMARK(BM_layer_forward)->Arg(100)->Arg(1000);

void BM_layer_grad(benchmark::State& state) {
    LayerFixture fx(2000, 784, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto grads = ffdyn::layer_grad(fx.layer, fx.input, fx.polarities, fx.peer);
        benchmark::DoNotOptimize(grads.d_weights.data());
    }
}
BENCHMARK(BM_layer_grad)->Arg(100)->Arg(1000);

void BM_normalize_activity(benchmark::State& state) {
    LayerFixture fx(2000, 784, static_cast<std::size_t>(state.range(0)));
    auto result = ffdyn::layer_forward(fx.layer, fx.input);
    for (auto _ : state) {
        auto normalized = ffdyn::normalize_activity(result.activations);
        benchmark::DoNotOptimize(normalized.data());
    }
}
BENCHMARK(BM_normalize_activity)->Arg(100)->Arg(1000);

}  // namespace
