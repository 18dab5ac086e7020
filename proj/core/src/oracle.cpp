#include "palign/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "palign/diagnose.hpp"
#include "palign/errors.hpp"
#include "palign/loss.hpp"
#include "palign/rng.hpp"
#include "palign/simulate.hpp"

namespace palign {
namespace {

// Raw data moments sufficient to evaluate the regularized objective
// J(C, b) = sum ||C p_i + b - g_i||^2 + ridge and its gradient exactly.
struct Moments {
    Mat3 sxx;   // sum p p^T
    Vec3 sx;    // sum p
    Mat3 sgx;   // sum g p^T
    Vec3 sg;    // sum g
    double sgg = 0.0;
    double n = 0.0;
};

Moments accumulate(const ImageRGB& pred, const ImageRGB& gt) {
    Moments m;
    const std::size_t n = pred.pixelCount();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 p = pred.pixel(i);
        const Vec3 g = gt.pixel(i);
        m.sxx += outer(p, p);
        m.sx += p;
        m.sgx += outer(g, p);
        m.sg += g;
        m.sgg += normSquared(g);
    }
    m.n = static_cast<double>(n);
    return m;
}

struct RidgeWeights {
    double onC = 0.0;
    double onB = 0.0;
};

RidgeWeights ridgeFor(double eps, Formulation f, double n) {
    if (f == Formulation::CovarianceForm) return {n * eps, 0.0};
    return {eps, eps};
}

double objective(const Moments& m, const RidgeWeights& w, const Mat3& c, const Vec3& b) {
    double j = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int k = 0; k < 3; ++k) {
            double s = 0.0;
            for (int l = 0; l < 3; ++l) s += c(r, l) * m.sxx(l, k);
            j += s * c(r, k);
        }
    j += 2.0 * dot(b, c * m.sx);
    double tr = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int k = 0; k < 3; ++k) tr += c(r, k) * m.sgx(r, k);
    j -= 2.0 * tr;
    j += m.n * normSquared(b) - 2.0 * dot(b, m.sg) + m.sgg;
    j += w.onC * frobenius(c) * frobenius(c) + w.onB * normSquared(b);
    return j;
}

void gradient(const Moments& m, const RidgeWeights& w, const Mat3& c, const Vec3& b, Mat3& gc, Vec3& gb) {
    gc = 2.0 * (c * m.sxx + outer(b, m.sx) - m.sgx) + 2.0 * w.onC * c;
    gb = 2.0 * (c * m.sx + m.n * b - m.sg) + 2.0 * w.onB * b;
}

// Hessian action on a direction, for the exact line-search step of a quadratic.
void hessianApply(const Moments& m, const RidgeWeights& w, const Mat3& dc, const Vec3& db, Mat3& hc, Vec3& hb) {
    hc = 2.0 * (dc * m.sxx + outer(db, m.sx)) + 2.0 * w.onC * dc;
    hb = 2.0 * (dc * m.sx + m.n * db) + 2.0 * w.onB * db;
}

double innerProduct(const Mat3& a, const Vec3& av, const Mat3& b, const Vec3& bv) {
    double s = dot(av, bv);
    for (std::size_t i = 0; i < 9; ++i) s += a.m[i] * b.m[i];
    return s;
}

ImageRGB uniformImage(Rng& rng, int w, int h) {
    ImageRGB img(w, h);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < img.pixelCount(); ++i) img.at(c, i) = rng.uniform();
    return img;
}

AffineTransform randomWellConditioned(Rng& rng) {
    AffineTransform t;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) t.c(r, c) = r == c ? rng.uniform(0.7, 1.3) : rng.uniform(-0.15, 0.15);
        t.b[r] = rng.uniform(-0.2, 0.2);
    }
    return t;
}

double transformDeviation(const AffineTransform& a, const AffineTransform& b) {
    double d = maxAbs(a.b - b.b);
    for (std::size_t i = 0; i < 9; ++i) d = std::max(d, std::abs(a.c.m[i] - b.c.m[i]));
    return d;
}

}  // namespace

OracleAffineReport oracleAffine(const ImageRGB& pred, const ImageRGB& gt, double eps, Formulation formulation,
                                double tol, long maxIterations) {
    OracleAffineReport report;
    report.closedForm = solveAffine(pred, gt, eps, formulation);

    const Moments m = accumulate(pred, gt);
    const RidgeWeights w = ridgeFor(eps, formulation, m.n);

    // Steepest descent with exact line search from zero initialization.
    Mat3 c;
    Vec3 b;
    Mat3 gc;
    Vec3 gb;
    for (long it = 0; it < maxIterations; ++it) {
        gradient(m, w, c, b, gc, gb);
        const double gradSquared = innerProduct(gc, gb, gc, gb);
        report.gradNorm = std::sqrt(gradSquared);
        report.iterations = it;
        if (report.gradNorm <= 1e-10) break;
        Mat3 hc;
        Vec3 hb;
        hessianApply(m, w, gc, gb, hc, hb);
        const double curvature = innerProduct(gc, gb, hc, hb);
        if (!(curvature > 0.0)) break;
        const double step = gradSquared / curvature;
        c -= step * gc;
        b -= step * gb;
    }
    report.oracle.c = c;
    report.oracle.b = b;
    report.maxDeviation = transformDeviation(report.closedForm, report.oracle);
    report.converged = report.gradNorm <= 1e-10 && report.maxDeviation <= tol;
    return report;
}

OracleScalarReport oracleScalarGrid(const ImageRGB& pred, const ImageRGB& gt, double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi > lo)) throw Error("InvalidArgument", "grid requires hi > lo and step > 0");
    OracleScalarReport report;
    report.closedFormValue = solveOptimalScalar(pred, gt).c(0, 0);

    const std::size_t n = pred.pixelCount();
    double best = lo;
    double bestValue = std::numeric_limits<double>::infinity();
    long points = 0;
    for (double c = lo; c <= hi + 0.5 * step; c += step, ++points) {
        double j = 0.0;
        for (int ch = 0; ch < 3; ++ch)
            for (std::size_t i = 0; i < n; ++i) {
                const double d = c * pred.at(ch, i) - gt.at(ch, i);
                j += d * d;
            }
        if (j < bestValue) {
            bestValue = j;
            best = c;
        }
    }
    report.iterations = points;
    report.oracleValue = best;
    report.maxDeviation = std::abs(report.closedFormValue - report.oracleValue);
    report.converged = report.maxDeviation <= step + 1e-12;
    return report;
}

std::vector<double> finiteDiff(const std::function<double(const std::vector<double>&)>& f,
                               const std::vector<double>& point, double step) {
    std::vector<double> grad(point.size());
    std::vector<double> probe = point;
    for (std::size_t i = 0; i < point.size(); ++i) {
        probe[i] = point[i] + step;
        const double plus = f(probe);
        probe[i] = point[i] - step;
        const double minus = f(probe);
        probe[i] = point[i];
        grad[i] = (plus - minus) / (2.0 * step);
    }
    return grad;
}

std::vector<VerifyEntry> runVerifySuite(bool quick, std::uint64_t seed) {
    std::vector<VerifyEntry> entries;
    const int heavy = quick ? 5 : 20;
    const int many = quick ? 10 : 50;

    auto pairAt = [&](std::uint64_t stream, std::uint64_t i, int w, int h) {
        Rng rng(mixSeed(seed ^ stream, i));
        ImageRGB pred = uniformImage(rng, w, h);
        ImageRGB gt = uniformImage(rng, w, h);
        return std::make_pair(std::move(pred), std::move(gt));
    };

    {
        VerifyEntry e{"affine_descent_cov_eps0", 0.0, 1e-6, false};
        for (int i = 0; i < heavy; ++i) {
            auto [pred, gt] = pairAt(0xA1, static_cast<std::uint64_t>(i), 8, 8);
            e.deviation = std::max(e.deviation, oracleAffine(pred, gt, 0.0, Formulation::CovarianceForm).maxDeviation);
        }
        e.pass = e.deviation <= e.tolerance;
        entries.push_back(e);
    }
    {
        VerifyEntry e{"affine_descent_cov_eps1e-3", 0.0, 1e-6, false};
        for (int i = 0; i < heavy; ++i) {
            auto [pred, gt] = pairAt(0xA2, static_cast<std::uint64_t>(i), 8, 8);
            e.deviation = std::max(e.deviation, oracleAffine(pred, gt, 1e-3, Formulation::CovarianceForm).maxDeviation);
        }
        e.pass = e.deviation <= e.tolerance;
        entries.push_back(e);
    }
    {
        VerifyEntry e{"affine_descent_aug_eps1e-3", 0.0, 1e-6, false};
        for (int i = 0; i < heavy; ++i) {
            auto [pred, gt] = pairAt(0xA3, static_cast<std::uint64_t>(i), 8, 8);
            e.deviation = std::max(e.deviation, oracleAffine(pred, gt, 1e-3, Formulation::Augmented4x4).maxDeviation);
        }
        e.pass = e.deviation <= e.tolerance;
        entries.push_back(e);
    }
    {
        VerifyEntry e{"scalar_grid", 0.0, 1e-4 + 1e-12, false};
        const int count = quick ? 3 : 10;
        for (int i = 0; i < count; ++i) {
            auto [pred, gt] = pairAt(0xA4, static_cast<std::uint64_t>(i), 8, 8);
            e.deviation = std::max(e.deviation, oracleScalarGrid(pred, gt, -1.0, 3.0, 1e-4).maxDeviation);
        }
        e.pass = e.deviation <= e.tolerance;
        entries.push_back(e);
    }
    {
        VerifyEntry e{"pythagorean_eps0", 0.0, 1e-9, false};
        for (int i = 0; i < many; ++i) {
            auto [pred, gt] = pairAt(0xA5, static_cast<std::uint64_t>(i), 16, 16);
            const PythagoreanReport r = verifyPythagorean(pred, gt, 0.0);
            e.deviation = std::max(e.deviation, std::abs(r.mseTotal - (r.ePhotRaw + r.eStructRaw)) / r.mseTotal);
        }
        e.pass = e.deviation <= e.tolerance;
        entries.push_back(e);
    }
    {
        VerifyEntry e{"cross_term_ridge", 0.0, 1e-8, false};
        for (int i = 0; i < many; ++i) {
            Rng rng(mixSeed(seed ^ 0xA6, static_cast<std::uint64_t>(i)));
            ImageRGB pred = uniformImage(rng, 16, 16);
            const AffineTransform t0 = randomWellConditioned(rng);
            ImageRGB gt = applyTransform(t0, pred);
            for (int c = 0; c < 3; ++c)
                for (std::size_t j = 0; j < gt.pixelCount(); ++j) gt.at(c, j) += 0.05 * rng.normal();
            const PythagoreanReport r = verifyPythagorean(pred, gt, 1e-3);
            const double denom = std::max(std::abs(r.predictedCrossTerm), std::abs(r.crossTerm));
            e.deviation = std::max(e.deviation, std::abs(r.crossTerm - r.predictedCrossTerm) / denom);
        }
        e.pass = e.deviation <= e.tolerance;
        entries.push_back(e);
    }
    {
        VerifyEntry e{"pal_gradient_frozen_fd", 0.0, 1e-6, false};
        LossConfig cfg;
        cfg.alpha = 0.6;
        cfg.eps = 1e-3;
        cfg.norm = NormKind::L2Mean;
        cfg.pixelNorm = NormKind::L2Mean;
        for (int i = 0; i < heavy; ++i) {
            auto [pred, gt] = pairAt(0xA7, static_cast<std::uint64_t>(i), 8, 8);
            const LossResult base = palGradient(pred, gt, cfg);
            std::vector<double> flat(3 * pred.pixelCount());
            for (int c = 0; c < 3; ++c)
                for (std::size_t j = 0; j < pred.pixelCount(); ++j)
                    flat[static_cast<std::size_t>(c) * pred.pixelCount() + j] = pred.at(c, j);
            auto evalFrozen = [&](const std::vector<double>& v) {
                ImageRGB img(pred.width(), pred.height());
                for (int c = 0; c < 3; ++c)
                    for (std::size_t j = 0; j < img.pixelCount(); ++j)
                        img.at(c, j) = v[static_cast<std::size_t>(c) * img.pixelCount() + j];
                return lossWithTransform(img, gt, cfg, base.transform).totalLoss;
            };
            const std::vector<double> fd = finiteDiff(evalFrozen, flat, 1e-6);
            double scale = 0.0;
            for (double v : fd) scale = std::max(scale, std::abs(v));
            double dev = 0.0;
            for (int c = 0; c < 3; ++c)
                for (std::size_t j = 0; j < pred.pixelCount(); ++j)
                    dev = std::max(dev, std::abs(base.gradient->at(c, j) -
                                                 fd[static_cast<std::size_t>(c) * pred.pixelCount() + j]));
            e.deviation = std::max(e.deviation, dev / std::max(scale, 1e-10));
        }
        e.pass = e.deviation <= e.tolerance;
        entries.push_back(e);
    }
    {
        VerifyEntry e{"toy_param_gradient_fd", 0.0, 1e-5, false};
        SyntheticPairConfig pcfg;
        pcfg.imageSize = 16;
        pcfg.seed = seed ^ 0xA8;
        const std::vector<PairSample> batch = generatePairs(pcfg, 2);
        ToyModel model = ToyModel::identity();
        // move off the exact identity so the gradient is generic
        model.kernel[0][3] = 0.05;
        model.gain = {1.1, 0.9, 1.05};
        model.bias = {0.02, -0.01, 0.0};
        LossConfig cfg;
        cfg.alpha = 0.6;
        cfg.eps = 1e-3;
        cfg.norm = NormKind::L2Mean;
        cfg.pixelNorm = NormKind::L2Mean;
        const auto analytic = parameterGradient(model, batch, cfg);
        const std::vector<AffineTransform> frozen = solveBatchTransforms(model, batch, cfg);
        auto eval = [&](const std::vector<double>& v) {
            std::array<double, ToyModel::kParamCount> p{};
            std::copy(v.begin(), v.end(), p.begin());
            return frozenBatchLoss(ToyModel::unflatten(p), batch, cfg, frozen);
        };
        const auto flatArr = model.flatten();
        const std::vector<double> flat(flatArr.begin(), flatArr.end());
        const std::vector<double> fd = finiteDiff(eval, flat, 1e-6);
        double scale = 0.0;
        for (double v : fd) scale = std::max(scale, std::abs(v));
        for (int i = 0; i < ToyModel::kParamCount; ++i)
            e.deviation = std::max(e.deviation, std::abs(analytic[static_cast<std::size_t>(i)] -
                                                         fd[static_cast<std::size_t>(i)]) /
                                                    std::max(scale, 1e-10));
        e.pass = e.deviation <= e.tolerance;
        entries.push_back(e);
    }
    {
        VerifyEntry e{"transform_recovery", 0.0, 1e-8, false};
        for (int i = 0; i < heavy; ++i) {
            Rng rng(mixSeed(seed ^ 0xA9, static_cast<std::uint64_t>(i)));
            const ImageRGB pred = uniformImage(rng, 16, 16);
            const AffineTransform t0 = randomWellConditioned(rng);
            const ImageRGB gt = applyTransform(t0, pred);
            for (Formulation f : {Formulation::Augmented4x4, Formulation::CovarianceForm}) {
                const AffineTransform got = solveAffine(pred, gt, 0.0, f);
                e.deviation = std::max(e.deviation, transformDeviation(got, t0));
            }
        }
        e.pass = e.deviation <= e.tolerance;
        entries.push_back(e);
    }
    return entries;
}

}  // namespace palign
