#include "palign/loss.hpp"

#include <cmath>

#include "palign/errors.hpp"
#include "palign/jsonfmt.hpp"

namespace palign {
namespace {

void checkConfig(const LossConfig& cfg) {
    if (cfg.alpha < 0.0) throw Error("InvalidArgument", "alpha must be nonnegative");
    if (cfg.eps < 0.0) throw Error("InvalidArgument", "eps must be nonnegative");
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Mean over all 3N samples of |d| or d^2.
double meanNorm(const ImageRGB& a, const ImageRGB& b, NormKind norm) {
    const std::size_t n = a.pixelCount();
    double s = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < n; ++i) {
            const double d = a.at(c, i) - b.at(c, i);
            s += norm == NormKind::L1Mean ? std::abs(d) : d * d;
        }
    return s / static_cast<double>(3 * n);
}

LossResult evaluate(const ImageRGB& pred, const ImageRGB& gt, const LossConfig& cfg, const AffineTransform& t) {
    LossResult r;
    r.transform = t;
    const ImageRGB aligned = applyTransform(t, pred);
    r.palLoss = meanNorm(aligned, gt, cfg.norm);
    r.pixelLoss = meanNorm(pred, gt, cfg.pixelNorm);
    r.totalLoss = r.pixelLoss + cfg.alpha * r.palLoss;
    return r;
}

}  // namespace

LossResult palLoss(const ImageRGB& pred, const ImageRGB& gt, const LossConfig& cfg) {
    checkConfig(cfg);
    if (!pred.sameShape(gt)) throw Error("DimensionMismatch", "pred and gt must share dimensions");
    return evaluate(pred, gt, cfg, solveAffine(pred, gt, cfg.eps, cfg.formulation));
}

LossResult lossWithTransform(const ImageRGB& pred, const ImageRGB& gt, const LossConfig& cfg,
                             const AffineTransform& t) {
    checkConfig(cfg);
    return evaluate(pred, gt, cfg, t);
}

ImageRGB gradientWithTransform(const ImageRGB& pred, const ImageRGB& gt, const LossConfig& cfg,
                               const AffineTransform& t) {
    const std::size_t n = pred.pixelCount();
    const double inv = 1.0 / static_cast<double>(3 * n);
    const ImageRGB aligned = applyTransform(t, pred);
    ImageRGB grad(pred.width(), pred.height());
    for (std::size_t i = 0; i < n; ++i) {
        // PAL term: chain rule through aligned = C pred + b with C, b constant.
        const Vec3 d = aligned.pixel(i) - gt.pixel(i);
        Vec3 psi;
        if (cfg.norm == NormKind::L1Mean) {
            psi = {sign(d.x), sign(d.y), sign(d.z)};
        } else {
            psi = 2.0 * d;
        }
        Vec3 g = cfg.alpha * inv * (t.c.transposed() * psi);

        const Vec3 dp = pred.pixel(i) - gt.pixel(i);
        if (cfg.pixelNorm == NormKind::L1Mean) {
            g += inv * Vec3{sign(dp.x), sign(dp.y), sign(dp.z)};
        } else {
            g += (2.0 * inv) * dp;
        }
        grad.setPixel(i, g);
    }
    return grad;
}

LossResult palGradient(const ImageRGB& pred, const ImageRGB& gt, const LossConfig& cfg) {
    LossResult r = palLoss(pred, gt, cfg);
    r.gradient = gradientWithTransform(pred, gt, cfg, r.transform);
    return r;
}

PipelineGradientReport fullPipelineGradientCheck(const ImageRGB& pred, const ImageRGB& gt, const LossConfig& cfg,
                                                 double fdStep) {
    LossResult base = palGradient(pred, gt, cfg);
    const ImageRGB& analytic = *base.gradient;

    PipelineGradientReport report;
    report.fdStep = fdStep;

    ImageRGB probe = pred;
    const std::size_t n = pred.pixelCount();
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < n; ++i) {
            const double saved = probe.at(c, i);
            probe.at(c, i) = saved + fdStep;
            const double fullPlus = palLoss(probe, gt, cfg).totalLoss;
            const double frozenPlus = lossWithTransform(probe, gt, cfg, base.transform).totalLoss;
            probe.at(c, i) = saved - fdStep;
            const double fullMinus = palLoss(probe, gt, cfg).totalLoss;
            const double frozenMinus = lossWithTransform(probe, gt, cfg, base.transform).totalLoss;
            probe.at(c, i) = saved;

            const double a = analytic.at(c, i);
            const double fdFull = (fullPlus - fullMinus) / (2.0 * fdStep);
            const double fdFrozen = (frozenPlus - frozenMinus) / (2.0 * fdStep);
            report.maxAbsDeviationFull = std::max(report.maxAbsDeviationFull, std::abs(a - fdFull));
            report.maxAbsDeviationFrozen = std::max(report.maxAbsDeviationFrozen, std::abs(a - fdFrozen));
        }

    // Directional derivative along the all-ones perturbation.
    ImageRGB up(pred.width(), pred.height());
    ImageRGB down(pred.width(), pred.height());
    double gradSum = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < n; ++i) {
            up.at(c, i) = pred.at(c, i) + fdStep;
            down.at(c, i) = pred.at(c, i) - fdStep;
            gradSum += analytic.at(c, i);
        }
    report.directionalAnalytic = gradSum;
    report.directionalFrozenFd = (lossWithTransform(up, gt, cfg, base.transform).totalLoss -
                                  lossWithTransform(down, gt, cfg, base.transform).totalLoss) /
                                 (2.0 * fdStep);
    return report;
}

const char* normName(NormKind n) { return n == NormKind::L1Mean ? "l1" : "l2"; }

NormKind normFromName(const std::string& name) {
    if (name == "l1") return NormKind::L1Mean;
    if (name == "l2") return NormKind::L2Mean;
    throw Error("InvalidArgument", "unknown norm '" + name + "'");
}

std::string toJson(const LossResult& r, const LossConfig& cfg) {
    return "{\"palLoss\": " + g9(r.palLoss) + ", \"pixelLoss\": " + g9(r.pixelLoss) +
           ", \"totalLoss\": " + g9(r.totalLoss) + ", \"transform\": " + toJson(r.transform, cfg.eps, cfg.formulation) +
           "}";
}

}  // namespace palign
