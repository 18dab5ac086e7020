#pragma once

#include <cstdint>
#include <string>

#include "palign/linalg.hpp"
#include "palign/tensor.hpp"

namespace palign {

// Color mapping x -> C x + b.
struct AffineTransform {
    Mat3 c = Mat3::identity();
    Vec3 b{};

    static AffineTransform identity() { return {}; }
};

// Two ways to solve the regularized affine fit. Augmented4x4 works on the raw
// 4x4 Gram of homogeneous pixel rows [pred; 1], so eps also penalizes the bias
// and is not normalized by pixel count. CovarianceForm applies eps to the 3x3
// covariance and leaves the bias free; at matched scale eps_cov = eps_gram / N.
enum class Formulation { Augmented4x4, CovarianceForm };

enum class FamilyTag { ChannelMean, GTMeanScalar, OptimalScalar, OptimalDiagonal, FullAffine, MaskedAffine };

struct AlignmentFamily {
    FamilyTag tag = FamilyTag::FullAffine;
    double eps = 1e-3;
    Formulation formulation = Formulation::Augmented4x4;
};

struct MaskedTransform {
    AffineTransform inside;
    AffineTransform outside;
};

inline constexpr std::size_t kMinPartitionPixels = 16;

// Flops of the statistics pass behind a full affine solve: 16 Gram MACs plus
// 12 cross MACs per pixel, 2 flops per MAC. For a 256x256 image this is
// 3,670,016 flops, i.e. about 0.0037 GFLOP.
constexpr std::uint64_t affineStatsFlops(std::uint64_t pixelCount) { return 56u * pixelCount; }

// C = E, b = per-channel mean difference.
AffineTransform solveChannelMean(const ImageRGB& pred, const ImageRGB& gt);

// C = c*E with c the ratio of global means taken jointly over all pixels and
// channels. Throws Error("DegenerateMean") when the prediction mean vanishes.
AffineTransform solveGTMean(const ImageRGB& pred, const ImageRGB& gt);

// C = c*E with the least-squares scalar gain over all pixel-channel samples.
AffineTransform solveOptimalScalar(const ImageRGB& pred, const ImageRGB& gt);

// C = diag(d) with independent per-channel least-squares gains, no bias.
AffineTransform solveOptimalDiagonal(const ImageRGB& pred, const ImageRGB& gt);

// Ridge-regularized full affine fit of gt against pred. With a mask only the
// inside pixels enter the normal equations. Throws Error("SingularSystem")
// when eps = 0 and the system is rank-deficient.
AffineTransform solveAffine(const ImageRGB& pred, const ImageRGB& gt, double eps,
                            Formulation formulation = Formulation::Augmented4x4, const Mask* mask = nullptr);

// Independent affine fits inside and outside the mask. Each partition needs at
// least kMinPartitionPixels pixels, else Error("RegionTooSmall").
MaskedTransform solveMaskedAffine(const ImageRGB& pred, const ImageRGB& gt, const Mask& mask, double eps,
                                  Formulation formulation = Formulation::Augmented4x4);

// Per-pixel C x + b. Loss paths keep clamp = false; PNG export clamps.
ImageRGB applyTransform(const AffineTransform& t, const ImageRGB& img, bool clamp = false);
ImageRGB applyMaskedTransform(const MaskedTransform& t, const ImageRGB& img, const Mask& mask, bool clamp = false);

double sumSquaredError(const ImageRGB& a, const ImageRGB& b);

const char* formulationName(Formulation f);
Formulation formulationFromName(const std::string& name);
const char* familyName(FamilyTag tag);
FamilyTag familyFromName(const std::string& name);

// {"C": [[...]], "b": [...], "eps": e, "formulation": "..."}
std::string toJson(const AffineTransform& t, double eps, Formulation formulation);
std::string toJson(const MaskedTransform& t, double eps, Formulation formulation);

}  // namespace palign
