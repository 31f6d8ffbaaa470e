#include <benchmark/benchmark.h>

#include "ffdyn/matrix.hpp"
#include "ffdyn/rng.hpp"

namespace {

ffdyn::Matrix2D random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    ffdyn::Rng rng(seed);
    ffdyn::Matrix2D m(rows, cols);
    for (double& v : m.flat()) v = rng.uniform01();
    return m;
}

void BM_matmul_square(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    ffdyn::Matrix2D a = random_matrix(n, n, 1);
    ffdyn::Matrix2D b = random_matrix(n, n, 2);
    for (auto _ : state) {
        ffdyn::Matrix2D c = ffdyn::matmul(a, b);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_matmul_square)->Arg(64)->Arg(256)->Arg(1024);

// The shape one training batch multiplies: (2x1000) x 784 by 784 x width.
void BM_matmul_batch_shape(benchmark::State& state) {
    const auto width = static_cast<std::size_t>(state.range(0));
    ffdyn::Matrix2D a = random_matrix(2000, 784, 1);
    ffdyn::Matrix2D b = random_matrix(784, width, 2);
    for (auto _ : state) {
        ffdyn::Matrix2D c = ffdyn::matmul(a, b);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(2 * 2000 * 784 * width));
}
BENCHMARK(BM_matmul_batch_shape)->Arg(100)->Arg(1000);

void BM_matmul_transposed_a(benchmark::State& state) {
    const auto width = static_cast<std::size_t>(state.range(0));
    ffdyn::Matrix2D a = random_matrix(2000, 784, 1);
    ffdyn::Matrix2D b = random_matrix(2000, width, 2);
    for (auto _ : state) {
        ffdyn::Matrix2D c = ffdyn::matmul_transposed_a(a, b);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(2 * 2000 * 784 * width));
}
BENCHMARK(BM_matmul_transposed_a)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
