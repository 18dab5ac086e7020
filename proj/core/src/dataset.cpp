#include "palign/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>

#include "palign/errors.hpp"
#include "palign/jsonfmt.hpp"
#include "palign/parallel.hpp"
#include "palign/tensor.hpp"

namespace palign {
namespace {

namespace fs = std::filesystem;

bool isPng(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png";
}

std::vector<fs::path> listPngs(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && isPng(entry.path())) files.push_back(entry.path());
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    return files;
}

Vec3 channelMeans(const ImageRGB& img) {
    const PixelStats stats = computeStats(img);
    return stats.mean;
}

}  // namespace

DatasetAnalysis analyzeDataset(const fs::path& inputDir, const fs::path& gtDir, PairingRule rule, std::size_t cap,
                               int threads) {
    const std::vector<fs::path> inputs = listPngs(inputDir);
    const std::vector<fs::path> gts = listPngs(gtDir);

    DatasetAnalysis analysis;
    std::vector<std::pair<fs::path, fs::path>> pairs;
    if (rule == PairingRule::ByFilename) {
        std::map<std::string, fs::path> gtByName;
        for (const auto& g : gts) gtByName[g.filename().string()] = g;
        for (const auto& in : inputs) {
            auto it = gtByName.find(in.filename().string());
            if (it == gtByName.end()) {
                analysis.warnings.push_back("no gt match for " + in.filename().string() + ", skipped");
                continue;
            }
            pairs.emplace_back(in, it->second);
            gtByName.erase(it);
        }
        for (const auto& [name, path] : gtByName)
            analysis.warnings.push_back("no input match for " + name + ", skipped");
    } else {
        const std::size_t common = std::min(inputs.size(), gts.size());
        for (std::size_t i = 0; i < common; ++i) pairs.emplace_back(inputs[i], gts[i]);
        if (inputs.size() != gts.size())
            analysis.warnings.push_back(std::to_string(std::max(inputs.size(), gts.size()) - common) +
                                        " unmatched trailing file(s) skipped in positional pairing");
    }

    if (pairs.size() > cap) pairs.resize(cap);
    if (pairs.size() < 2)
        throw Error("TooFewPairs", "need at least 2 usable pairs, found " + std::to_string(pairs.size()));

    analysis.summaries.resize(pairs.size());
    parallelFor(pairs.size(), threads, [&](std::size_t i) {
        const auto& [inPath, gtPath] = pairs[i];
        PairPhotometricSummary s;
        s.pairId = inPath.stem().string();
        s.inputMean = channelMeans(loadPng(inPath));
        s.gtMean = channelMeans(loadPng(gtPath));
        analysis.summaries[i] = std::move(s);
    });

    analysis.regressions = regressChannels(analysis.summaries);
    return analysis;
}

std::array<ChannelRegression, 3> regressChannels(const std::vector<PairPhotometricSummary>& summaries) {
    if (summaries.size() < 2) throw Error("TooFewPairs", "regression needs at least 2 pairs");
    std::array<ChannelRegression, 3> out;
    const double n = static_cast<double>(summaries.size());
    for (int c = 0; c < 3; ++c) {
        double sx = 0.0, sy = 0.0;
        for (const auto& s : summaries) {
            sx += s.inputMean[c];
            sy += s.gtMean[c];
        }
        const double mx = sx / n;
        const double my = sy / n;
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (const auto& s : summaries) {
            const double dx = s.inputMean[c] - mx;
            const double dy = s.gtMean[c] - my;
            sxx += dx * dx;
            sxy += dx * dy;
            syy += dy * dy;
        }
        if (!(sxx > 0.0))
            throw Error("SingularSystem", std::string("input means are constant in channel ") + channelName(c));
        ChannelRegression& r = out[static_cast<std::size_t>(c)];
        r.channel = c;
        r.pairCount = summaries.size();
        r.slope = sxy / sxx;
        r.intercept = my - r.slope * mx;
        double ssRes = 0.0;
        for (const auto& s : summaries) {
            const double resid = s.gtMean[c] - (r.slope * s.inputMean[c] + r.intercept);
            ssRes += resid * resid;
        }
        r.rSquared = syy > 0.0 ? 1.0 - ssRes / syy : 1.0;
        r.residualStdDev = std::sqrt(ssRes / n);
    }
    return out;
}

std::string scatterCsv(const std::vector<PairPhotometricSummary>& summaries) {
    std::string csv = "pair_id,channel,input_mean,gt_mean\n";
    for (const auto& s : summaries)
        for (int c = 0; c < 3; ++c)
            csv += s.pairId + "," + channelName(c) + "," + g9(s.inputMean[c]) + "," + g9(s.gtMean[c]) + "\n";
    return csv;
}

void exportScatterCsv(const std::vector<PairPhotometricSummary>& summaries, const fs::path& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open " + path.string() + " for writing");
    file << scatterCsv(summaries);
    if (!file) throw IoError("failed to write " + path.string());
}

std::string toJson(const std::array<ChannelRegression, 3>& regressions) {
    std::string s = "[\n";
    for (int c = 0; c < 3; ++c) {
        const ChannelRegression& r = regressions[static_cast<std::size_t>(c)];
        s += std::string("  {\"channel\": \"") + channelName(r.channel) + "\", \"slope\": " + g9(r.slope) +
             ", \"intercept\": " + g9(r.intercept) + ", \"rSquared\": " + g9(r.rSquared) +
             ", \"residualStdDev\": " + g9(r.residualStdDev) + ", \"pairCount\": " + std::to_string(r.pairCount) + "}";
        s += c < 2 ? ",\n" : "\n";
    }
    s += "]\n";
    return s;
}

const char* channelName(int channel) { return channel == 0 ? "R" : (channel == 1 ? "G" : "B"); }

}  // namespace palign
