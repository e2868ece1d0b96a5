#include "mangen/catalog.hpp"
#include "mangen/embedding.hpp"
#include "mangen/generator.hpp"
#include "mangen/hausdorff.hpp"
#include "mangen/parallel.hpp"
#include "mangen/rng.hpp"
#include "mangen/sampling.hpp"

#include <benchmark/benchmark.h>

#include <numbers>

using namespace mangen;

namespace {

PointCloud random_cloud(std::size_t n, int dim, std::uint64_t seed) {
    Rng rng(seed);
    PointCloud c(dim);
    Vector p(dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < dim; ++j) p[j] = rng.uniform();
        c.push_back(p);
    }
    return c;
}

void BM_HausdorffSerial(benchmark::State& state) {
    const auto a = random_cloud(static_cast<std::size_t>(state.range(0)), 3, 1);
    const auto b = random_cloud(static_cast<std::size_t>(state.range(0)), 3, 2);
    for (auto _ : state) benchmark::DoNotOptimize(serial::hausdorff(a, b));
}

void BM_HausdorffParallel(benchmark::State& state) {
    const auto a = random_cloud(static_cast<std::size_t>(state.range(0)), 3, 1);
    const auto b = random_cloud(static_cast<std::size_t>(state.range(0)), 3, 2);
    for (auto _ : state) benchmark::DoNotOptimize(hausdorff(a, b));
}

void BM_HausdorffBruteForce(benchmark::State& state) {
    const auto a = random_cloud(static_cast<std::size_t>(state.range(0)), 3, 1);
    const auto b = random_cloud(static_cast<std::size_t>(state.range(0)), 3, 2);
    for (auto _ : state) benchmark::DoNotOptimize(brute_force_hausdorff(a, b));
}

const GeneratorMap& sphere_generator() {
    static const GeneratorMap gen = build_generator(catalog::sphere(), catalog::sphere().chart_domain.center(), 1.2 * std::numbers::pi);
    return gen;
}

void BM_LatentsSerial(benchmark::State& state) {
    const auto grid = latent_grid(2, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(serial::evaluate_latents(sphere_generator(), grid, 3));
}

void BM_LatentsParallel(benchmark::State& state) {
    const auto grid = latent_grid(2, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_latents(sphere_generator(), grid, 3));
}

// Kernels without a serial twin are compared by pinning the thread count.
void BM_VolumeThreads(benchmark::State& state) {
    const int saved = parallel::max_threads();
    parallel::set_threads(static_cast<int>(state.range(0)));
    const auto torus = catalog::doughnut_torus();
    for (auto _ : state) benchmark::DoNotOptimize(volume(torus, torus.chart_domain, 512));
    parallel::set_threads(saved);
}

void BM_RankTrialsThreads(benchmark::State& state) {
    const int saved = parallel::max_threads();
    parallel::set_threads(static_cast<int>(state.range(0)));
    const LayerSpec layer = LayerSpec::conv_transpose(5, 3, 1, 3, 1, Activation::tanh);
    for (auto _ : state) benchmark::DoNotOptimize(check_layer(layer, 100, 9));
    parallel::set_threads(saved);
}

} // namespace

BENCHMARK(BM_HausdorffSerial)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HausdorffParallel)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HausdorffBruteForce)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LatentsSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LatentsParallel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VolumeThreads)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RankTrialsThreads)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
