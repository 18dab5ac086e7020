// Regenerates the committed fixture dataset under tests/data.
//
// Ten 16x16 pairs with per-pair brightness levels spread over [0.2, 0.65] and
// gt = 0.5 * input + 0.2 plus a small per-pair offset, so the per-pair channel
// means trace a clean line with nonzero residual scatter. Fixed seed, so a
// rerun reproduces the committed bytes.

#include <cstdio>
#include <filesystem>
#include <string>

#include "palign/rng.hpp"
#include "palign/tensor.hpp"

namespace fs = std::filesystem;
using namespace palign;

int main(int argc, char** argv) {
    const fs::path root = argc > 1 ? argv[1] : "tests/data";
    const fs::path inputDir = root / "fixture10" / "input";
    const fs::path gtDir = root / "fixture10" / "gt";
    fs::create_directories(inputDir);
    fs::create_directories(gtDir);

    Rng rng(20240915);
    for (int i = 0; i < 10; ++i) {
        const double base = 0.2 + 0.05 * i;
        Vec3 jitter;
        for (int c = 0; c < 3; ++c) jitter[c] = rng.uniform(-0.02, 0.02);

        ImageRGB input(16, 16);
        ImageRGB gt(16, 16);
        for (int c = 0; c < 3; ++c) {
            for (std::size_t p = 0; p < input.pixelCount(); ++p) {
                const double v = rng.uniform(base - 0.08, base + 0.08);
                input.at(c, p) = v;
                gt.at(c, p) = 0.5 * v + 0.2 + jitter[c];
            }
        }

        char name[16];
        std::snprintf(name, sizeof(name), "pair%02d.png", i);
        savePng(input, inputDir / name);
        savePng(gt, gtDir / name);
    }

    std::printf("wrote 10 pairs under %s\n", (root / "fixture10").string().c_str());
    return 0;
}
