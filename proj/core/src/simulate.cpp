#include "palign/simulate.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "palign/diagnose.hpp"
#include "palign/errors.hpp"
#include "palign/jsonfmt.hpp"
#include "palign/rng.hpp"

namespace palign {
namespace {

// Symmetric reflection: -1 maps to 0, n maps to n-1.
inline int reflect(int i, int n) {
    if (i < 0) return -i - 1;
    if (i >= n) return 2 * n - i - 1;
    return i;
}

ImageRGB gaussianBlur(const ImageRGB& img, double sigma) {
    if (sigma <= 0.0) return img;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int j = -radius; j <= radius; ++j) {
        w[static_cast<std::size_t>(j + radius)] = std::exp(-0.5 * (j * j) / (sigma * sigma));
        sum += w[static_cast<std::size_t>(j + radius)];
    }
    for (double& v : w) v /= sum;

    const int width = img.width(), height = img.height();
    ImageRGB tmp(width, height), out(width, height);
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                double acc = 0.0;
                for (int j = -radius; j <= radius; ++j)
                    acc += w[static_cast<std::size_t>(j + radius)] * img.at(c, reflect(x + j, width), y);
                tmp.at(c, x, y) = acc;
            }
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                double acc = 0.0;
                for (int j = -radius; j <= radius; ++j)
                    acc += w[static_cast<std::size_t>(j + radius)] * tmp.at(c, x, reflect(y + j, height));
                out.at(c, x, y) = acc;
            }
    }
    return out;
}

ImageRGB proceduralTexture(Rng& rng, int size) {
    ImageRGB img(size, size);
    const double s = static_cast<double>(size);

    Vec3 base;
    for (int c = 0; c < 3; ++c) base[c] = 0.35 + 0.3 * rng.uniform();

    // Every pair and every channel carries the same amplitude-by-frequency
    // profile; only orientations and phases vary, independently per channel.
    // Shared profiles keep a uniform blur from degrading pairs differently,
    // and independent geometry keeps the channels' detail mutually
    // unpredictable. Otherwise the per-pair refit explains texture diversity,
    // or rebuilds one channel's blurred-away detail from the others, and
    // reports either as photometric error even without injected shifts.
    struct Wave {
        double amp, freq;
        Vec3 angle, phase;
    };
    constexpr double kWaveAmp[4] = {0.12, 0.09, 0.06, 0.05};
    constexpr double kWaveFreq[4] = {1.0, 1.8, 2.7, 7.5};
    std::vector<Wave> waves;
    for (int k = 0; k < 4; ++k) {
        Wave w;
        w.amp = kWaveAmp[k];
        w.freq = kWaveFreq[k];
        for (int c = 0; c < 3; ++c) {
            w.angle[c] = std::numbers::pi * rng.uniform();
            w.phase[c] = 2.0 * std::numbers::pi * rng.uniform();
        }
        waves.push_back(w);
    }

    struct Blob {
        double cx, cy, radius, amp;
    };
    std::vector<Blob> blobs;
    for (int k = 0; k < 2; ++k) {
        Blob b;
        b.cx = s * rng.uniform();
        b.cy = s * rng.uniform();
        b.radius = s * (0.1 + 0.15 * rng.uniform());
        b.amp = rng.uniform() < 0.5 ? -0.15 : 0.15;
        blobs.push_back(b);
    }

    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            Vec3 v = base;
            for (const Wave& w : waves)
                for (int c = 0; c < 3; ++c) {
                    const double u = (x * std::cos(w.angle[c]) + y * std::sin(w.angle[c])) / s;
                    v[c] += w.amp * std::sin(2.0 * std::numbers::pi * w.freq * u + w.phase[c]);
                }
            for (const Blob& b : blobs) {
                const double dx = x - b.cx, dy = y - b.cy;
                const double bump = b.amp * std::exp(-0.5 * (dx * dx + dy * dy) / (b.radius * b.radius));
                for (int c = 0; c < 3; ++c) v[c] += bump;
            }
            for (int c = 0; c < 3; ++c) img.at(c, x, y) = std::clamp(v[c], 0.02, 0.98);
        }
    return img;
}

// Per-channel 3x3 cross-correlation with reflective padding, before gain/bias.
ImageRGB convOnly(const ToyModel& model, const ImageRGB& input) {
    const int width = input.width(), height = input.height();
    ImageRGB out(width, height);
    for (int c = 0; c < 3; ++c) {
        const auto& k = model.kernel[static_cast<std::size_t>(c)];
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                double acc = 0.0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                        acc += k[static_cast<std::size_t>((dy + 1) * 3 + (dx + 1))] *
                               input.at(c, reflect(x + dx, width), reflect(y + dy, height));
                out.at(c, x, y) = acc;
            }
    }
    return out;
}

struct Accumulator {
    std::array<double, ToyModel::kParamCount> grad{};
    double lossSum = 0.0;
};

// Forward, loss, and backprop into the 33 parameters for one pair. The solved
// transform enters the backward pass as a constant.
void accumulatePair(const ToyModel& model, const PairSample& pair, const LossConfig& cfg, Accumulator& acc) {
    const ImageRGB u = convOnly(model, pair.input);
    ImageRGB pred(u.width(), u.height());
    const std::size_t n = u.pixelCount();
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < n; ++i) pred.at(c, i) = model.gain[c] * u.at(c, i) + model.bias[c];

    AffineTransform t;
    if (cfg.alpha > 0.0) t = solveAffine(pred, pair.gt, cfg.eps, cfg.formulation);
    acc.lossSum += lossWithTransform(pred, pair.gt, cfg, t).totalLoss;
    const ImageRGB g = gradientWithTransform(pred, pair.gt, cfg, t);

    const int width = pred.width(), height = pred.height();
    for (int c = 0; c < 3; ++c) {
        double db = 0.0, dg = 0.0;
        std::array<double, 9> dk{};
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                const double gv = g.at(c, x, y);
                db += gv;
                dg += gv * u.at(c, x, y);
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const double inv = pair.input.at(c, reflect(x + dx, width), reflect(y + dy, height));
                        dk[static_cast<std::size_t>((dy + 1) * 3 + (dx + 1))] += gv * inv;
                    }
            }
        for (int tap = 0; tap < 9; ++tap)
            acc.grad[static_cast<std::size_t>(c * 9 + tap)] += model.gain[c] * dk[static_cast<std::size_t>(tap)];
        acc.grad[27 + static_cast<std::size_t>(c)] += dg;
        acc.grad[30 + static_cast<std::size_t>(c)] += db;
    }
}

}  // namespace

ToyModel ToyModel::identity() {
    ToyModel m;
    for (int c = 0; c < 3; ++c) m.kernel[static_cast<std::size_t>(c)][4] = 1.0;
    return m;
}

std::array<double, ToyModel::kParamCount> ToyModel::flatten() const {
    std::array<double, kParamCount> p{};
    for (int c = 0; c < 3; ++c)
        for (int t = 0; t < 9; ++t) p[static_cast<std::size_t>(c * 9 + t)] = kernel[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)];
    for (int c = 0; c < 3; ++c) {
        p[27 + static_cast<std::size_t>(c)] = gain[c];
        p[30 + static_cast<std::size_t>(c)] = bias[c];
    }
    return p;
}

ToyModel ToyModel::unflatten(const std::array<double, kParamCount>& p) {
    ToyModel m;
    for (int c = 0; c < 3; ++c)
        for (int t = 0; t < 9; ++t) m.kernel[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)] = p[static_cast<std::size_t>(c * 9 + t)];
    for (int c = 0; c < 3; ++c) {
        m.gain[c] = p[27 + static_cast<std::size_t>(c)];
        m.bias[c] = p[30 + static_cast<std::size_t>(c)];
    }
    return m;
}

ImageRGB ToyModel::forward(const ImageRGB& input) const {
    ImageRGB out = convOnly(*this, input);
    const std::size_t n = out.pixelCount();
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < n; ++i) out.at(c, i) = gain[c] * out.at(c, i) + bias[c];
    return out;
}

std::vector<PairSample> generatePairs(const SyntheticPairConfig& cfg, int count) {
    if (count < 1) throw Error("InvalidArgument", "pair count must be positive");
    std::vector<PairSample> pairs;
    pairs.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        Rng rng(mixSeed(cfg.seed, static_cast<std::uint64_t>(i)));
        PairSample p;
        p.clean = proceduralTexture(rng, cfg.imageSize);
        if (cfg.shiftsEnabled) {
            for (int c = 0; c < 3; ++c) p.shiftGain[c] = rng.uniform(cfg.gainMin, cfg.gainMax);
            for (int c = 0; c < 3; ++c) p.shiftBias[c] = rng.uniform(cfg.biasMin, cfg.biasMax);
        }
        // Noise enters before the blur so the degradation stays structural;
        // unfiltered sensor noise on top would bias the validation refit.
        ImageRGB noisy = p.clean;
        const std::size_t n = noisy.pixelCount();
        for (int c = 0; c < 3; ++c)
            for (std::size_t j = 0; j < n; ++j) noisy.at(c, j) += cfg.noiseStdDev * rng.normal();
        p.input = gaussianBlur(noisy, cfg.blurSigma);
        p.gt = ImageRGB(cfg.imageSize, cfg.imageSize);
        for (int c = 0; c < 3; ++c)
            for (std::size_t j = 0; j < n; ++j) p.gt.at(c, j) = p.shiftGain[c] * p.clean.at(c, j) + p.shiftBias[c];
        pairs.push_back(std::move(p));
    }
    return pairs;
}

double TrainingTrace::meanRho() const {
    if (records.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : records) s += r.rho;
    return s / static_cast<double>(records.size());
}

std::array<double, ToyModel::kParamCount> parameterGradient(const ToyModel& model, std::span<const PairSample> batch,
                                                            const LossConfig& cfg) {
    if (batch.empty()) throw Error("InvalidArgument", "batch must be non-empty");
    Accumulator acc;
    for (const PairSample& pair : batch) accumulatePair(model, pair, cfg, acc);
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (double& v : acc.grad) v *= inv;
    return acc.grad;
}

std::vector<AffineTransform> solveBatchTransforms(const ToyModel& model, std::span<const PairSample> batch,
                                                  const LossConfig& cfg) {
    std::vector<AffineTransform> out;
    out.reserve(batch.size());
    for (const PairSample& pair : batch) {
        if (cfg.alpha > 0.0) {
            out.push_back(solveAffine(model.forward(pair.input), pair.gt, cfg.eps, cfg.formulation));
        } else {
            out.push_back(AffineTransform::identity());
        }
    }
    return out;
}

double frozenBatchLoss(const ToyModel& model, std::span<const PairSample> batch, const LossConfig& cfg,
                       std::span<const AffineTransform> transforms) {
    if (batch.size() != transforms.size()) throw Error("InvalidArgument", "one transform per batch entry required");
    double sum = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i)
        sum += lossWithTransform(model.forward(batch[i].input), batch[i].gt, cfg, transforms[i]).totalLoss;
    return sum / static_cast<double>(batch.size());
}

TraceRecord trainStep(ToyModel& model, std::span<const PairSample> batch, const LossConfig& cfg, double lr,
                      std::span<const PairSample> validation, int step) {
    if (!(lr >= 0.0)) throw Error("InvalidArgument", "learning rate must be nonnegative");
    Accumulator acc;
    for (const PairSample& pair : batch) accumulatePair(model, pair, cfg, acc);
    const double inv = 1.0 / static_cast<double>(batch.size());

    TraceRecord record;
    record.step = step;
    record.trainLoss = acc.lossSum * inv;
    if (!std::isfinite(record.trainLoss))
        throw Error("NonFinite", "non-finite training loss at step " + std::to_string(step));

    std::array<double, ToyModel::kParamCount> params = model.flatten();
    for (int i = 0; i < ToyModel::kParamCount; ++i)
        params[static_cast<std::size_t>(i)] -= lr * acc.grad[static_cast<std::size_t>(i)] * inv;
    model = ToyModel::unflatten(params);

    if (!validation.empty()) {
        double phot = 0.0, structural = 0.0;
        std::size_t samples = 0;
        for (const PairSample& pair : validation) {
            const ResidualDecomposition d =
                decompose(model.forward(pair.input), pair.gt, 0.0, Formulation::CovarianceForm);
            phot += d.ePhotRaw;
            structural += d.eStructRaw;
            samples += 3 * pair.gt.pixelCount();
        }
        record.valPhotError = phot / static_cast<double>(samples);
        record.valContentError = structural / static_cast<double>(samples);
        const double denom = phot + structural;
        record.rho = denom > 0.0 ? phot / denom : 0.0;
    }
    return record;
}

TrainingTrace runExperiment(const ExperimentConfig& cfg, bool palEnabled) {
    if (cfg.steps < 1) throw Error("InvalidArgument", "steps must be positive");
    const std::vector<PairSample> train = generatePairs(cfg.pairs, cfg.trainPairCount);
    SyntheticPairConfig valPairs = cfg.pairs;
    valPairs.seed = mixSeed(cfg.pairs.seed, 0x76616Cull);
    const std::vector<PairSample> val = generatePairs(valPairs, cfg.valPairCount);

    LossConfig lcfg;
    lcfg.alpha = palEnabled ? cfg.alpha : 0.0;
    lcfg.eps = cfg.eps;
    lcfg.norm = NormKind::L2Mean;
    lcfg.pixelNorm = NormKind::L2Mean;
    lcfg.formulation = cfg.formulation;

    ToyModel model = ToyModel::identity();
    Rng batchRng(mixSeed(cfg.pairs.seed, 0x626174ull));
    const int batchSize = std::max(1, cfg.batchSize);

    TrainingTrace trace;
    trace.records.reserve(static_cast<std::size_t>(cfg.steps));
    std::vector<PairSample> batch;
    for (int step = 0; step < cfg.steps; ++step) {
        batch.clear();
        for (int k = 0; k < batchSize; ++k) {
            const auto idx = static_cast<std::size_t>(batchRng.uniform() * static_cast<double>(train.size()));
            batch.push_back(train[std::min(idx, train.size() - 1)]);
        }
        trace.records.push_back(trainStep(model, batch, lcfg, cfg.lr, val, step));
    }
    return trace;
}

std::string traceCsv(const TrainingTrace& trace) {
    std::string csv = "step,val_phot_error,val_content_error,rho,train_loss\n";
    for (const TraceRecord& r : trace.records)
        csv += std::to_string(r.step) + "," + g9(r.valPhotError) + "," + g9(r.valContentError) + "," + g9(r.rho) +
               "," + g9(r.trainLoss) + "\n";
    return csv;
}

void exportTraceCsv(const TrainingTrace& trace, const std::filesystem::path& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open " + path.string() + " for writing");
    file << traceCsv(trace);
    if (!file) throw IoError("failed to write " + path.string());
}

}  // namespace palign
