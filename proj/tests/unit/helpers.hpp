#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "palign/align.hpp"
#include "palign/rng.hpp"
#include "palign/tensor.hpp"

namespace testutil {

inline palign::ImageRGB randomImage(palign::Rng& rng, int w, int h, double lo = 0.0, double hi = 1.0) {
    palign::ImageRGB img(w, h);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < img.pixelCount(); ++i) img.at(c, i) = rng.uniform(lo, hi);
    return img;
}

inline palign::AffineTransform randomMildAffine(palign::Rng& rng) {
    palign::AffineTransform t;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) t.c(r, c) = r == c ? rng.uniform(0.7, 1.3) : rng.uniform(-0.15, 0.15);
        t.b[r] = rng.uniform(-0.2, 0.2);
    }
    return t;
}

inline double maxTransformDiff(const palign::AffineTransform& a, const palign::AffineTransform& b) {
    double d = palign::maxAbs(a.b - b.b);
    for (std::size_t i = 0; i < 9; ++i) d = std::max(d, std::abs(a.c.m[i] - b.c.m[i]));
    return d;
}

// Independent dense solver with partial pivoting, the cross-check route for
// the Cholesky-based solvers.
inline std::vector<double> gaussSolve(std::vector<double> a, std::vector<double> rhs, int n) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[static_cast<std::size_t>(r) * n + col]) >
                std::abs(a[static_cast<std::size_t>(pivot) * n + col]))
                pivot = r;
        for (int k = 0; k < n; ++k)
            std::swap(a[static_cast<std::size_t>(col) * n + k], a[static_cast<std::size_t>(pivot) * n + k]);
        std::swap(rhs[static_cast<std::size_t>(col)], rhs[static_cast<std::size_t>(pivot)]);
        const double d = a[static_cast<std::size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = a[static_cast<std::size_t>(r) * n + col] / d;
            for (int k = col; k < n; ++k)
                a[static_cast<std::size_t>(r) * n + k] -= f * a[static_cast<std::size_t>(col) * n + k];
            rhs[static_cast<std::size_t>(r)] -= f * rhs[static_cast<std::size_t>(col)];
        }
    }
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int r = n - 1; r >= 0; --r) {
        double s = rhs[static_cast<std::size_t>(r)];
        for (int k = r + 1; k < n; ++k) s -= a[static_cast<std::size_t>(r) * n + k] * x[static_cast<std::size_t>(k)];
        x[static_cast<std::size_t>(r)] = s / a[static_cast<std::size_t>(r) * n + r];
    }
    return x;
}

inline std::string readFile(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    std::ostringstream ss;
    ss << file.rdbuf();
    return ss.str();
}

inline std::filesystem::path tempDir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("palign_test_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline const char* envOrNull(const char* name) { return std::getenv(name); }

}  // namespace testutil
