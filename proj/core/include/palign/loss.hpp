#pragma once

#include <optional>
#include <string>

#include "palign/align.hpp"
#include "palign/tensor.hpp"

namespace palign {

enum class NormKind { L1Mean, L2Mean };

struct LossConfig {
    double alpha = 0.6;
    double eps = 1e-3;
    NormKind norm = NormKind::L1Mean;       // residual norm of the alignment term
    NormKind pixelNorm = NormKind::L1Mean;  // residual norm of the plain pixel term
    Formulation formulation = Formulation::Augmented4x4;
};

struct LossResult {
    double palLoss = 0.0;
    double pixelLoss = 0.0;
    double totalLoss = 0.0;  // pixelLoss + alpha * palLoss
    AffineTransform transform;
    std::optional<ImageRGB> gradient;  // d totalLoss / d pred, transform held constant
};

// Solves the transform for this pair, then evaluates both loss terms. The
// alignment term is the mean absolute (L1Mean) or mean squared (L2Mean)
// deviation of the aligned prediction from gt over all 3N samples.
LossResult palLoss(const ImageRGB& pred, const ImageRGB& gt, const LossConfig& cfg);

// palLoss plus the analytic gradient under the stop-gradient contract: the
// solved transform is treated as a constant in the backward pass.
LossResult palGradient(const ImageRGB& pred, const ImageRGB& gt, const LossConfig& cfg);

// Evaluation and gradient with a caller-provided frozen transform; used by
// finite-difference checks and the training simulator.
LossResult lossWithTransform(const ImageRGB& pred, const ImageRGB& gt, const LossConfig& cfg,
                             const AffineTransform& t);
ImageRGB gradientWithTransform(const ImageRGB& pred, const ImageRGB& gt, const LossConfig& cfg,
                               const AffineTransform& t);

struct PipelineGradientReport {
    double maxAbsDeviationFull = 0.0;    // analytic vs finite differences that re-solve the transform
    double maxAbsDeviationFrozen = 0.0;  // analytic vs finite differences at the frozen transform
    double directionalAnalytic = 0.0;    // <gradient, 1> for the all-ones direction
    double directionalFrozenFd = 0.0;    // frozen-transform directional derivative along all-ones
    double fdStep = 0.0;
};

// Quantifies what the stop-gradient changes: with eps = 0 and L2 norms the
// detached gradient agrees with the full re-solving pipeline; with eps > 0 it
// measurably does not.
PipelineGradientReport fullPipelineGradientCheck(const ImageRGB& pred, const ImageRGB& gt, const LossConfig& cfg,
                                                 double fdStep = 1e-6);

const char* normName(NormKind n);
NormKind normFromName(const std::string& name);

// {"palLoss": ..., "pixelLoss": ..., "totalLoss": ..., "transform": {...}}
std::string toJson(const LossResult& r, const LossConfig& cfg);

}  // namespace palign
