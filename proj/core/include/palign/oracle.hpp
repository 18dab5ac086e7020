#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "palign/align.hpp"
#include "palign/tensor.hpp"

namespace palign {

// Brute-force cross-checks for the closed-form solvers. These share no code
// path with align: the affine oracle minimizes the regularized objective by
// steepest descent with exact line search over the 12 parameters, and the
// scalar oracle scans a dense grid.
struct OracleAffineReport {
    AffineTransform closedForm;
    AffineTransform oracle;
    double maxDeviation = 0.0;  // entrywise max |closedForm - oracle| over C and b
    long iterations = 0;
    bool converged = false;
    double gradNorm = 0.0;
};

// Minimizes sum ||C x_i + b - y_i||^2 plus the ridge matching the chosen
// formulation: CovarianceForm adds N*eps*||C||_F^2 (bias free), Augmented4x4
// adds eps*(||C||_F^2 + ||b||^2). Convergence certificate is the gradient
// norm dropping below 1e-10.
OracleAffineReport oracleAffine(const ImageRGB& pred, const ImageRGB& gt, double eps,
                                Formulation formulation = Formulation::CovarianceForm, double tol = 1e-6,
                                long maxIterations = 200000);

struct OracleScalarReport {
    double closedFormValue = 0.0;
    double oracleValue = 0.0;  // grid argmin
    double maxDeviation = 0.0;
    long iterations = 0;  // grid points scanned
    bool converged = false;
};

OracleScalarReport oracleScalarGrid(const ImageRGB& pred, const ImageRGB& gt, double lo, double hi, double step);

// Central differences per coordinate.
std::vector<double> finiteDiff(const std::function<double(const std::vector<double>&)>& f,
                               const std::vector<double>& point, double step);

struct VerifyEntry {
    std::string name;
    double deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// Seeded self-check suite behind the `verify` subcommand: descent and grid
// oracles, decomposition identities, transform recovery, and the
// finite-difference gradient checks. quick = true runs fewer instances.
std::vector<VerifyEntry> runVerifySuite(bool quick, std::uint64_t seed);

}  // namespace palign
