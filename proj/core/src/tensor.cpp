#include "palign/tensor.hpp"

#include <string>

#include "palign/errors.hpp"

namespace palign {

ImageRGB::ImageRGB(int width, int height, double fill) : width_(width), height_(height) {
    if (width <= 0 || height <= 0)
        throw Error("EmptyRegion", "image dimensions must be positive, got " + std::to_string(width) + "x" +
                                       std::to_string(height));
    for (auto& p : planes_) p.assign(pixelCount(), fill);
}

Mask Mask::full(int width, int height, bool value) {
    Mask m;
    m.width = width;
    m.height = height;
    m.bits.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), value ? 1 : 0);
    return m;
}

std::size_t Mask::countInside() const {
    std::size_t n = 0;
    for (std::uint8_t b : bits) n += (b != 0);
    return n;
}

Mask Mask::inverted() const {
    Mask m = *this;
    for (std::uint8_t& b : m.bits) b = b ? 0 : 1;
    return m;
}

PixelStats computeStats(const ImageRGB& a, const ImageRGB* b, const Mask* mask) {
    if (b && !a.sameShape(*b)) throw Error("DimensionMismatch", "paired images must share dimensions");
    if (mask && (mask->width != a.width() || mask->height != a.height()))
        throw Error("DimensionMismatch", "mask must share image dimensions");

    const std::size_t n = a.pixelCount();
    std::size_t count = 0;
    Vec3 sumA, sumB;
    for (std::size_t i = 0; i < n; ++i) {
        if (mask && !mask->inside(i)) continue;
        ++count;
        sumA += a.pixel(i);
        if (b) sumB += b->pixel(i);
    }
    if (count == 0) throw Error("EmptyRegion", "no pixels selected for statistics");

    const double inv = 1.0 / static_cast<double>(count);
    PixelStats stats;
    stats.sampleCount = count;
    stats.mean = sumA * inv;
    if (b) stats.meanB = sumB * inv;

    Mat3 cov, cross;
    for (std::size_t i = 0; i < n; ++i) {
        if (mask && !mask->inside(i)) continue;
        const Vec3 da = a.pixel(i) - stats.mean;
        cov += outer(da, da);
        if (b) cross += outer(b->pixel(i) - *stats.meanB, da);
    }
    stats.covariance = cov * inv;
    if (b) stats.crossCovariance = cross * inv;
    return stats;
}

Mask maskFromImage(const ImageRGB& image, double threshold) {
    Mask m;
    m.width = image.width();
    m.height = image.height();
    m.bits.resize(image.pixelCount());
    for (std::size_t i = 0; i < image.pixelCount(); ++i) {
        const Vec3 p = image.pixel(i);
        m.bits[i] = ((p.x + p.y + p.z) / 3.0 >= threshold) ? 1 : 0;
    }
    return m;
}

}  // namespace palign
