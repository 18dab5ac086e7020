#include <benchmark/benchmark.h>

#include "palign/align.hpp"
#include "palign/diagnose.hpp"
#include "palign/loss.hpp"
#include "palign/rng.hpp"
#include "palign/tensor.hpp"

namespace {

using namespace palign;

ImageRGB randomImage(std::uint64_t seed, int size) {
    Rng rng(seed);
    ImageRGB img(size, size);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < img.pixelCount(); ++i) img.at(c, i) = rng.uniform();
    return img;
}

void BM_SolveAffineAugmented(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    const ImageRGB pred = randomImage(1, size);
    const ImageRGB gt = randomImage(2, size);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solveAffine(pred, gt, 1e-3, Formulation::Augmented4x4));
    }
    state.SetItemsProcessed(state.iterations() * pred.pixelCount());
    state.counters["stats_flops"] = static_cast<double>(affineStatsFlops(pred.pixelCount()));
}
BENCHMARK(BM_SolveAffineAugmented)->Arg(64)->Arg(256)->Arg(512);

void BM_SolveAffineCovariance(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    const ImageRGB pred = randomImage(1, size);
    const ImageRGB gt = randomImage(2, size);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solveAffine(pred, gt, 1e-3, Formulation::CovarianceForm));
    }
    state.SetItemsProcessed(state.iterations() * pred.pixelCount());
}
BENCHMARK(BM_SolveAffineCovariance)->Arg(64)->Arg(256)->Arg(512);

void BM_ApplyTransform(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    const ImageRGB pred = randomImage(1, size);
    const ImageRGB gt = randomImage(2, size);
    const AffineTransform t = solveAffine(pred, gt, 1e-3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(applyTransform(t, pred));
    }
    state.SetItemsProcessed(state.iterations() * pred.pixelCount());
}
BENCHMARK(BM_ApplyTransform)->Arg(64)->Arg(256)->Arg(512);

void BM_PalLossL1(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    const ImageRGB pred = randomImage(1, size);
    const ImageRGB gt = randomImage(2, size);
    LossConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(palLoss(pred, gt, cfg));
    }
    state.SetItemsProcessed(state.iterations() * pred.pixelCount());
}
BENCHMARK(BM_PalLossL1)->Arg(64)->Arg(256);

void BM_Decompose(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    const ImageRGB pred = randomImage(1, size);
    const ImageRGB gt = randomImage(2, size);
    for (auto _ : state) {
        benchmark::DoNotOptimize(decompose(pred, gt, 1e-3, Formulation::CovarianceForm));
    }
    state.SetItemsProcessed(state.iterations() * pred.pixelCount());
}
BENCHMARK(BM_Decompose)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
