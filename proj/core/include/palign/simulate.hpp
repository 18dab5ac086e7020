#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "palign/loss.hpp"
#include "palign/tensor.hpp"

namespace palign {

// 33-parameter model: per-channel 3x3 convolution (cross-correlation,
// reflective padding) followed by per-channel gain and bias,
//   pred_c = gain_c * (kernel_c * input_c) + bias_c.
struct ToyModel {
    std::array<std::array<double, 9>, 3> kernel{};  // row-major taps per channel
    Vec3 gain{1.0, 1.0, 1.0};
    Vec3 bias{};

    static constexpr int kParamCount = 33;

    // Delta kernel, unit gain, zero bias: the model starts as the identity map.
    static ToyModel identity();

    std::array<double, kParamCount> flatten() const;
    static ToyModel unflatten(const std::array<double, kParamCount>& p);

    ImageRGB forward(const ImageRGB& input) const;
};

struct SyntheticPairConfig {
    int imageSize = 32;
    double blurSigma = 1.0;
    double noiseStdDev = 0.05;
    bool shiftsEnabled = true;
    double gainMin = 0.5;
    double gainMax = 2.0;
    double biasMin = -0.2;
    double biasMax = 0.2;
    std::uint64_t seed = 1;
};

struct PairSample {
    ImageRGB input;  // blur + noise applied to clean
    ImageRGB gt;     // diag(gain) * clean + bias, unclamped
    ImageRGB clean;
    Vec3 shiftGain{1.0, 1.0, 1.0};
    Vec3 shiftBias{};
};

// Deterministic in cfg.seed; pair i depends only on (seed, i), so prefixes are
// stable across different counts.
std::vector<PairSample> generatePairs(const SyntheticPairConfig& cfg, int count);

struct TraceRecord {
    int step = 0;
    double valPhotError = 0.0;     // mean squared photometric component on validation
    double valContentError = 0.0;  // mean squared structural component on validation
    double rho = 0.0;              // pooled photometric fraction on validation
    double trainLoss = 0.0;
};

struct TrainingTrace {
    std::vector<TraceRecord> records;

    double meanRho() const;
    const TraceRecord& final() const { return records.back(); }
};

// One plain gradient-descent step on the batch; returns the appended record.
// Validation metrics come from the eps = 0 CovarianceForm decomposition of the
// model's validation predictions. Non-finite loss aborts with the step index.
TraceRecord trainStep(ToyModel& model, std::span<const PairSample> batch, const LossConfig& cfg, double lr,
                      std::span<const PairSample> validation, int step);

// Analytic d totalLoss / d parameters under the stop-gradient contract,
// averaged over the batch.
std::array<double, ToyModel::kParamCount> parameterGradient(const ToyModel& model, std::span<const PairSample> batch,
                                                            const LossConfig& cfg);

// Batch loss with the per-pair transforms frozen at the values solved for the
// given model; the finite-difference counterpart of parameterGradient.
double frozenBatchLoss(const ToyModel& model, std::span<const PairSample> batch, const LossConfig& cfg,
                       std::span<const AffineTransform> transforms);
std::vector<AffineTransform> solveBatchTransforms(const ToyModel& model, std::span<const PairSample> batch,
                                                  const LossConfig& cfg);

struct ExperimentConfig {
    SyntheticPairConfig pairs;
    int trainPairCount = 24;
    int valPairCount = 4;
    int batchSize = 1;
    int steps = 2000;
    double lr = 0.5;
    double alpha = 0.6;  // weight of the alignment term when enabled
    double eps = 1e-3;
    Formulation formulation = Formulation::Augmented4x4;
};

// Full training run, L2 norms throughout. palEnabled = false trains the plain
// pixel baseline (alpha = 0); true adds the alignment term with cfg.alpha.
TrainingTrace runExperiment(const ExperimentConfig& cfg, bool palEnabled);

// Header `step,val_phot_error,val_content_error,rho,train_loss`.
void exportTraceCsv(const TrainingTrace& trace, const std::filesystem::path& path);
std::string traceCsv(const TrainingTrace& trace);

}  // namespace palign
