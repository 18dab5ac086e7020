#include "palign/oracle.hpp"

#include <chrono>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "palign/rng.hpp"

using namespace palign;

TEST_CASE("descent oracle reproduces an exact affine relation") {
    Rng rng(91);
    const ImageRGB pred = testutil::randomImage(rng, 8, 8);
    const AffineTransform planted = testutil::randomMildAffine(rng);
    ImageRGB gt(8, 8);
    for (std::size_t i = 0; i < gt.pixelCount(); ++i) gt.setPixel(i, planted.c * pred.pixel(i) + planted.b);
    const OracleAffineReport r = oracleAffine(pred, gt, 0.0);
    CHECK(r.converged);
    CHECK(r.maxDeviation < 1e-6);
    CHECK(testutil::maxTransformDiff(r.oracle, planted) < 1e-6);
    CHECK(r.gradNorm <= 1e-10);
    CHECK(r.iterations > 0);
}

TEST_CASE("descent oracle agrees with both formulations on random pairs") {
    Rng rng(92);
    for (const Formulation f : {Formulation::CovarianceForm, Formulation::Augmented4x4}) {
        for (int trial = 0; trial < 3; ++trial) {
            const ImageRGB pred = testutil::randomImage(rng, 8, 8);
            const ImageRGB gt = testutil::randomImage(rng, 8, 8);
            for (const double eps : {0.0, 1e-3}) {
                const OracleAffineReport r = oracleAffine(pred, gt, eps, f);
                CHECK(r.converged);
                CHECK(r.maxDeviation < 1e-6);
            }
        }
    }
}

TEST_CASE("heavy ridge pulls both routes toward zero together") {
    Rng rng(93);
    const ImageRGB pred = testutil::randomImage(rng, 8, 8);
    const ImageRGB gt = testutil::randomImage(rng, 8, 8);
    const OracleAffineReport r = oracleAffine(pred, gt, 0.5, Formulation::CovarianceForm);
    CHECK(r.converged);
    CHECK(r.maxDeviation < 1e-6);
    CHECK(frobenius(r.closedForm.c) < frobenius(solveAffine(pred, gt, 0.0, Formulation::CovarianceForm).c));
}

TEST_CASE("scalar grid oracle brackets the closed-form gain") {
    Rng rng(94);
    const ImageRGB pred = testutil::randomImage(rng, 8, 8, 0.2, 0.9);
    ImageRGB gt = pred;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < gt.pixelCount(); ++i) gt.at(c, i) = 1.37 * gt.at(c, i) + 0.01 * rng.normal();
    const OracleScalarReport r = oracleScalarGrid(pred, gt, -1.0, 3.0, 1e-4);
    CHECK(r.converged);
    CHECK(r.maxDeviation <= 1e-4 + 1e-12);
    CHECK(r.closedFormValue == doctest::Approx(1.37).epsilon(1e-2));
    CHECK(r.iterations == 40001);
}

TEST_CASE("finite differences recover simple analytic gradients") {
    const auto quadratic = [](const std::vector<double>& x) {
        return x[0] * x[0] + 3.0 * x[1] * x[1] + x[0] * x[1];
    };
    const std::vector<double> at{0.7, -0.4};
    const auto g = finiteDiff(quadratic, at, 1e-6);
    REQUIRE(g.size() == 2);
    CHECK(g[0] == doctest::Approx(2.0 * 0.7 - 0.4).epsilon(1e-8));
    CHECK(g[1] == doctest::Approx(6.0 * -0.4 + 0.7).epsilon(1e-8));

    const auto linear = [](const std::vector<double>& x) { return 2.5 * x[0] - 1.5 * x[1] + 4.0; };
    const auto gl = finiteDiff(linear, at, 1e-4);
    CHECK(gl[0] == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(gl[1] == doctest::Approx(-1.5).epsilon(1e-10));
}

TEST_CASE("quick verify suite passes end to end") {
    const auto start = std::chrono::steady_clock::now();
    const auto entries = runVerifySuite(true, 1234);
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    REQUIRE(entries.size() == 9);
    for (const auto& e : entries) {
        INFO(e.name);
        CHECK(e.pass);
        CHECK(e.deviation <= e.tolerance);
        CHECK(std::isfinite(e.deviation));
    }
    CHECK(elapsed < 10.0);
}

TEST_CASE("verify suite is deterministic per seed") {
    const auto a = runVerifySuite(true, 77);
    const auto b = runVerifySuite(true, 77);
    const auto c = runVerifySuite(true, 78);
    REQUIRE(a.size() == b.size());
    bool anyDiffer = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].name == b[i].name);
        CHECK(a[i].deviation == b[i].deviation);
        if (a[i].deviation != c[i].deviation) anyDiffer = true;
    }
    CHECK(anyDiffer);  // the seed genuinely feeds the instances
}
