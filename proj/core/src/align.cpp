#include "palign/align.hpp"

#include <cmath>
#include <string>

#include "palign/errors.hpp"
#include "palign/jsonfmt.hpp"

namespace palign {
namespace {

void requireSameShape(const ImageRGB& pred, const ImageRGB& gt) {
    if (!pred.sameShape(gt)) throw Error("DimensionMismatch", "pred and gt must share dimensions");
}

void requireMaskShape(const ImageRGB& img, const Mask& mask) {
    if (mask.width != img.width() || mask.height != img.height())
        throw Error("DimensionMismatch", "mask must share image dimensions");
}

// Raw moments of the homogeneous design rows [pred; 1] against gt, restricted
// to the mask when given.
struct GramMoments {
    Mat4 xtx;                  // sum [p;1][p;1]^T
    std::array<Vec4, 3> xtt;   // per target channel: sum [p;1] * t_c
    std::size_t count = 0;
};

GramMoments accumulateGram(const ImageRGB& pred, const ImageRGB& gt, const Mask* mask) {
    GramMoments g;
    const std::size_t n = pred.pixelCount();
    double sxx[3][3] = {};
    double sx[3] = {};
    double sxt[3][3] = {};
    double st[3] = {};
    for (std::size_t i = 0; i < n; ++i) {
        if (mask && !mask->inside(i)) continue;
        ++g.count;
        const Vec3 p = pred.pixel(i);
        const Vec3 t = gt.pixel(i);
        for (int r = 0; r < 3; ++r) {
            sx[r] += p[r];
            st[r] += t[r];
            for (int c = r; c < 3; ++c) sxx[r][c] += p[r] * p[c];
            for (int c = 0; c < 3; ++c) sxt[r][c] += p[r] * t[c];
        }
    }
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < r; ++c) sxx[r][c] = sxx[c][r];

    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) g.xtx(r, c) = sxx[r][c];
    for (int r = 0; r < 3; ++r) {
        g.xtx(r, 3) = sx[r];
        g.xtx(3, r) = sx[r];
    }
    g.xtx(3, 3) = static_cast<double>(g.count);
    for (int c = 0; c < 3; ++c) {
        g.xtt[static_cast<std::size_t>(c)] = {sxt[0][c], sxt[1][c], sxt[2][c], st[c]};
    }
    return g;
}

AffineTransform solveAugmented(const ImageRGB& pred, const ImageRGB& gt, double eps, const Mask* mask) {
    GramMoments g = accumulateGram(pred, gt, mask);
    if (g.count == 0) throw Error("EmptyRegion", "no pixels selected for affine solve");
    Mat4 a = g.xtx;
    for (int i = 0; i < 4; ++i) a(i, i) += eps;
    const std::array<Vec4, 3> w = solveSym(a, g.xtt);
    AffineTransform t;
    for (int k = 0; k < 3; ++k) {
        const Vec4& wk = w[static_cast<std::size_t>(k)];
        for (int j = 0; j < 3; ++j) t.c(k, j) = wk[j];
        t.b[k] = wk[3];
    }
    return t;
}

AffineTransform solveCovariance(const ImageRGB& pred, const ImageRGB& gt, double eps, const Mask* mask) {
    const PixelStats stats = computeStats(pred, &gt, mask);
    Mat3 a = stats.covariance;
    for (int i = 0; i < 3; ++i) a(i, i) += eps;
    // C = Cov(gt, pred) (Cov(pred, pred) + eps E)^-1, via A C^T = Cov(gt, pred)^T.
    const Mat3 ct = solveSymColumns(a, stats.crossCovariance->transposed());
    AffineTransform t;
    t.c = ct.transposed();
    t.b = *stats.meanB - t.c * stats.mean;
    return t;
}

const char* channelLetter(int c) { return c == 0 ? "R" : (c == 1 ? "G" : "B"); }

struct ScalarSums {
    double pp = 0.0;
    double pg = 0.0;
};

ScalarSums sumsJoint(const ImageRGB& pred, const ImageRGB& gt) {
    ScalarSums s;
    const std::size_t n = pred.pixelCount();
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < n; ++i) {
            const double p = pred.at(c, i);
            s.pp += p * p;
            s.pg += p * gt.at(c, i);
        }
    return s;
}

}  // namespace

AffineTransform solveChannelMean(const ImageRGB& pred, const ImageRGB& gt) {
    requireSameShape(pred, gt);
    const PixelStats stats = computeStats(pred, &gt);
    AffineTransform t;
    t.b = *stats.meanB - stats.mean;
    return t;
}

AffineTransform solveGTMean(const ImageRGB& pred, const ImageRGB& gt) {
    requireSameShape(pred, gt);
    const std::size_t n = pred.pixelCount();
    double sp = 0.0, sg = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < n; ++i) {
            sp += pred.at(c, i);
            sg += gt.at(c, i);
        }
    const double denom = static_cast<double>(3 * n);
    const double meanPred = sp / denom;
    if (!(std::abs(meanPred) > 1e-12)) throw Error("DegenerateMean", "prediction mean is zero");
    AffineTransform t;
    t.c = Mat3::scaledIdentity((sg / denom) / meanPred);
    return t;
}

AffineTransform solveOptimalScalar(const ImageRGB& pred, const ImageRGB& gt) {
    requireSameShape(pred, gt);
    const ScalarSums s = sumsJoint(pred, gt);
    if (!(s.pp / static_cast<double>(3 * pred.pixelCount()) > 1e-12))
        throw Error("DegenerateMean", "prediction energy is zero");
    AffineTransform t;
    t.c = Mat3::scaledIdentity(s.pg / s.pp);
    return t;
}

AffineTransform solveOptimalDiagonal(const ImageRGB& pred, const ImageRGB& gt) {
    requireSameShape(pred, gt);
    const std::size_t n = pred.pixelCount();
    Vec3 d;
    for (int c = 0; c < 3; ++c) {
        double pp = 0.0, pg = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double p = pred.at(c, i);
            pp += p * p;
            pg += p * gt.at(c, i);
        }
        if (!(pp / static_cast<double>(n) > 1e-12))
            throw Error("DegenerateMean", std::string("prediction channel ") + channelLetter(c) + " is zero");
        d[c] = pg / pp;
    }
    AffineTransform t;
    t.c = Mat3::diagonal(d);
    return t;
}

AffineTransform solveAffine(const ImageRGB& pred, const ImageRGB& gt, double eps, Formulation formulation,
                            const Mask* mask) {
    requireSameShape(pred, gt);
    if (mask) requireMaskShape(pred, *mask);
    if (eps < 0.0) throw Error("InvalidArgument", "eps must be nonnegative");
    return formulation == Formulation::Augmented4x4 ? solveAugmented(pred, gt, eps, mask)
                                                    : solveCovariance(pred, gt, eps, mask);
}

MaskedTransform solveMaskedAffine(const ImageRGB& pred, const ImageRGB& gt, const Mask& mask, double eps,
                                  Formulation formulation) {
    requireSameShape(pred, gt);
    requireMaskShape(pred, mask);
    const std::size_t insideCount = mask.countInside();
    const std::size_t outsideCount = pred.pixelCount() - insideCount;
    if (insideCount < kMinPartitionPixels)
        throw Error("RegionTooSmall", "inside partition has " + std::to_string(insideCount) + " pixels, need " +
                                          std::to_string(kMinPartitionPixels));
    if (outsideCount < kMinPartitionPixels)
        throw Error("RegionTooSmall", "outside partition has " + std::to_string(outsideCount) + " pixels, need " +
                                          std::to_string(kMinPartitionPixels));
    const Mask outside = mask.inverted();
    return {solveAffine(pred, gt, eps, formulation, &mask), solveAffine(pred, gt, eps, formulation, &outside)};
}

ImageRGB applyTransform(const AffineTransform& t, const ImageRGB& img, bool clamp) {
    ImageRGB out(img.width(), img.height());
    const std::size_t n = img.pixelCount();
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 v = t.c * img.pixel(i) + t.b;
        if (clamp) {
            for (int c = 0; c < 3; ++c) v[c] = v[c] < 0.0 ? 0.0 : (v[c] > 1.0 ? 1.0 : v[c]);
        }
        out.setPixel(i, v);
    }
    return out;
}

ImageRGB applyMaskedTransform(const MaskedTransform& t, const ImageRGB& img, const Mask& mask, bool clamp) {
    requireMaskShape(img, mask);
    ImageRGB out(img.width(), img.height());
    const std::size_t n = img.pixelCount();
    for (std::size_t i = 0; i < n; ++i) {
        const AffineTransform& part = mask.inside(i) ? t.inside : t.outside;
        Vec3 v = part.c * img.pixel(i) + part.b;
        if (clamp) {
            for (int c = 0; c < 3; ++c) v[c] = v[c] < 0.0 ? 0.0 : (v[c] > 1.0 ? 1.0 : v[c]);
        }
        out.setPixel(i, v);
    }
    return out;
}

double sumSquaredError(const ImageRGB& a, const ImageRGB& b) {
    requireSameShape(a, b);
    double s = 0.0;
    const std::size_t n = a.pixelCount();
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < n; ++i) {
            const double d = a.at(c, i) - b.at(c, i);
            s += d * d;
        }
    return s;
}

const char* formulationName(Formulation f) {
    return f == Formulation::Augmented4x4 ? "augmented" : "covariance";
}

Formulation formulationFromName(const std::string& name) {
    if (name == "augmented") return Formulation::Augmented4x4;
    if (name == "covariance") return Formulation::CovarianceForm;
    throw Error("InvalidArgument", "unknown formulation '" + name + "'");
}

const char* familyName(FamilyTag tag) {
    switch (tag) {
        case FamilyTag::ChannelMean: return "chanmean";
        case FamilyTag::GTMeanScalar: return "gtmean";
        case FamilyTag::OptimalScalar: return "scalar";
        case FamilyTag::OptimalDiagonal: return "diagonal";
        case FamilyTag::FullAffine: return "affine";
        case FamilyTag::MaskedAffine: return "masked";
    }
    return "affine";
}

FamilyTag familyFromName(const std::string& name) {
    for (FamilyTag tag : {FamilyTag::ChannelMean, FamilyTag::GTMeanScalar, FamilyTag::OptimalScalar,
                          FamilyTag::OptimalDiagonal, FamilyTag::FullAffine, FamilyTag::MaskedAffine}) {
        if (name == familyName(tag)) return tag;
    }
    throw Error("InvalidArgument", "unknown family '" + name + "'");
}

std::string toJson(const AffineTransform& t, double eps, Formulation formulation) {
    std::string s = "{\"C\": [";
    for (int r = 0; r < 3; ++r) {
        s += r ? ", [" : "[";
        for (int c = 0; c < 3; ++c) {
            if (c) s += ", ";
            s += g9(t.c(r, c));
        }
        s += "]";
    }
    s += "], \"b\": [";
    for (int c = 0; c < 3; ++c) {
        if (c) s += ", ";
        s += g9(t.b[c]);
    }
    s += "], \"eps\": " + g9(eps) + ", \"formulation\": \"" + formulationName(formulation) + "\"}";
    return s;
}

std::string toJson(const MaskedTransform& t, double eps, Formulation formulation) {
    return "{\"inside\": " + toJson(t.inside, eps, formulation) +
           ", \"outside\": " + toJson(t.outside, eps, formulation) + "}";
}

}  // namespace palign
