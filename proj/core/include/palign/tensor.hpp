#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "palign/linalg.hpp"

namespace palign {

// Planar RGB image with double-precision samples. Decoded files land in [0, 1];
// synthetic intermediates may leave that range and are stored as-is.
class ImageRGB {
public:
    ImageRGB() = default;
    ImageRGB(int width, int height, double fill = 0.0);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t pixelCount() const { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_); }

    double at(int channel, std::size_t pixel) const { return planes_[static_cast<std::size_t>(channel)][pixel]; }
    double& at(int channel, std::size_t pixel) { return planes_[static_cast<std::size_t>(channel)][pixel]; }
    double at(int channel, int x, int y) const { return at(channel, index(x, y)); }
    double& at(int channel, int x, int y) { return at(channel, index(x, y)); }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    Vec3 pixel(std::size_t i) const { return {planes_[0][i], planes_[1][i], planes_[2][i]}; }
    void setPixel(std::size_t i, const Vec3& v) {
        planes_[0][i] = v.x;
        planes_[1][i] = v.y;
        planes_[2][i] = v.z;
    }

    std::span<const double> plane(int channel) const { return planes_[static_cast<std::size_t>(channel)]; }
    std::span<double> plane(int channel) { return planes_[static_cast<std::size_t>(channel)]; }

    bool sameShape(const ImageRGB& o) const { return width_ == o.width_ && height_ == o.height_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::array<std::vector<double>, 3> planes_;
};

// Binary region-of-interest mask; value 1 selects the inside partition.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    static Mask full(int width, int height, bool value = true);

    bool inside(std::size_t pixel) const { return bits[pixel] != 0; }
    std::size_t countInside() const;
    Mask inverted() const;
};

// First and second moments of one image, optionally paired with a second one.
struct PixelStats {
    Vec3 mean;                             // per-channel mean of a
    Mat3 covariance;                       // Cov(a, a), population normalization
    std::optional<Vec3> meanB;             // per-channel mean of b, when given
    std::optional<Mat3> crossCovariance;   // Cov(b, a), when given
    std::size_t sampleCount = 0;
};

// Two-pass moment accumulation in double precision. With a mask only the
// inside pixels contribute; an empty selection throws Error("EmptyRegion").
PixelStats computeStats(const ImageRGB& a, const ImageRGB* b = nullptr, const Mask* mask = nullptr);

// Threshold the mean channel intensity of an image at 0.5 to build a mask.
Mask maskFromImage(const ImageRGB& image, double threshold = 0.5);

// PNG decoding: accepts 8/16-bit gray, gray+alpha, RGB, RGBA; palette images
// are expanded. Samples are scaled to [0, 1]; gray is replicated; alpha dropped.
ImageRGB loadPng(const std::filesystem::path& path);

// PNG encoding: clamps to [0, 1] and writes 8-bit RGB, rounding half away from zero.
void savePng(const ImageRGB& image, const std::filesystem::path& path);

}  // namespace palign
