#pragma once

#include <string>

#include "palign/align.hpp"
#include "palign/tensor.hpp"

namespace palign {

// Exact split of gt - pred into a photometric part explained by the affine fit
// and the structural remainder:
//   deltaP(i) = (C - E) pred(i) + b
//   deltaS(i) = gt(i) - C pred(i) - b
// so deltaP + deltaS = gt - pred pointwise.
struct ResidualDecomposition {
    AffineTransform transform;
    ImageRGB deltaP;
    ImageRGB deltaS;
    double ePhot = 0.0;       // (4/N^2) * sum ||deltaP||^2
    double eStruct = 0.0;     // (4/N^2) * sum ||deltaS||^2
    double rho = 0.0;         // ePhot / (ePhot + eStruct), 0 when the sum vanishes
    double crossTerm = 0.0;   // sum <deltaP, deltaS>
    double mseTotal = 0.0;    // sum ||gt - pred||^2
    double ePhotRaw = 0.0;    // sum ||deltaP||^2
    double eStructRaw = 0.0;  // sum ||deltaS||^2
    double eps = 0.0;
    double lambda = 0.0;      // N * eps bookkeeping for the CovarianceForm
};

ResidualDecomposition decompose(const ImageRGB& pred, const ImageRGB& gt, double eps,
                                Formulation formulation = Formulation::CovarianceForm);

struct PythagoreanReport {
    double mseTotal = 0.0;
    double ePhotRaw = 0.0;
    double eStructRaw = 0.0;
    double crossTerm = 0.0;
    double predictedCrossTerm = 0.0;  // lambda * (||C||_F^2 - tr C), lambda = N * eps
};

// CovarianceForm only: at eps = 0 the cross-term vanishes and the squared
// residual splits exactly; at eps > 0 the cross-term follows the closed form.
PythagoreanReport verifyPythagorean(const ImageRGB& pred, const ImageRGB& gt, double eps);

struct SignDominanceReport {
    double fracPhotDominant = 0.0;  // fraction of samples with |deltaP| > |deltaS|
    std::size_t sampleCount = 0;
};

SignDominanceReport signDominance(const ResidualDecomposition& d);

// {"ePhot": ..., "eStruct": ..., "rho": ..., "crossTerm": ..., "mseTotal": ..., "eps": ...}
std::string toJson(const ResidualDecomposition& d);

// |deltaS| magnitude per pixel, normalized by its max, replicated to RGB.
ImageRGB structuralErrorMap(const ResidualDecomposition& d);

}  // namespace palign
