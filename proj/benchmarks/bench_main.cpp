#include <benchmark/benchmark.h>

#include "ldh/distortions.hpp"
#include "ldh/metrics.hpp"
#include "ldh/networks.hpp"
#include "ldh/ops.hpp"
#include "ldh/training.hpp"

namespace {

ldh::Tensor random_batch(int n, int side, std::uint64_t seed)
{
    ldh::Rng rng(seed);
    ldh::Tensor t(ldh::Shape{n, 3, side, side});
    for (double& v : t.data()) {
        v = rng.uniform();
    }
    return t;
}

ldh::NetworkConfig desk_config(int width)
{
    ldh::NetworkConfig c;
    c.omega = 2;
    c.image_side = 64;
    c.nhf = width;
    c.hiding_width = width;
    c.locating_width = width;
    return c;
}

void BM_Conv3x3(benchmark::State& state)
{
    const int ch = static_cast<int>(state.range(0));
    ldh::ag::Variable x(random_batch(8, 64, 1).slice(0, 8));
    ldh::Rng rng(2);
    ldh::Tensor w(ldh::Shape{ch, 3, 3, 3});
    for (double& v : w.data()) {
        v = rng.normal();
    }
    ldh::ag::Variable wv(std::move(w));
    for (auto _ : state) {
        benchmark::DoNotOptimize(ldh::ag::conv2d(x, wv, ldh::ag::Variable(), 1));
    }
}
BENCHMARK(BM_Conv3x3)->Arg(16)->Arg(32);

void BM_TrainStep(benchmark::State& state)
{
    const auto cfg = desk_config(static_cast<int>(state.range(0)));
    auto models = ldh::init_params(cfg, 3);
    ldh::Adam adam;
    ldh::TrainingSchedule sched;
    const auto secrets = random_batch(8, 64, 4);
    const auto covers = random_batch(8, 64, 5);
    ldh::Rng rng(6);
    const auto phase = state.range(1) ? ldh::Phase::cotrain : ldh::Phase::pretrain;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            ldh::train_step(models, adam, secrets, covers, phase, sched, nullptr, rng, 1e-4));
    }
}
BENCHMARK(BM_TrainStep)->Args({16, 0})->Args({16, 1})->Args({24, 1})->Unit(benchmark::kMillisecond);

void BM_Ssim64(benchmark::State& state)
{
    const auto a = ldh::Image::from_tensor(random_batch(1, 64, 7));
    const auto b = ldh::Image::from_tensor(random_batch(1, 64, 8));
    for (auto _ : state) {
        benchmark::DoNotOptimize(ldh::ssim(a, b));
    }
}
BENCHMARK(BM_Ssim64);

void BM_JpegApprox64(benchmark::State& state)
{
    const auto a = ldh::Image::from_tensor(random_batch(1, 64, 9));
    for (auto _ : state) {
        benchmark::DoNotOptimize(ldh::jpeg_approx(a, 80));
    }
}
BENCHMARK(BM_JpegApprox64);

} // namespace

BENCHMARK_MAIN();
