#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "palign/linalg.hpp"

namespace palign {

struct PairPhotometricSummary {
    std::string pairId;
    Vec3 inputMean;
    Vec3 gtMean;
};

struct ChannelRegression {
    int channel = 0;  // 0 = R, 1 = G, 2 = B
    double slope = 0.0;
    double intercept = 0.0;
    double rSquared = 0.0;
    double residualStdDev = 0.0;
    std::size_t pairCount = 0;
};

enum class PairingRule { ByFilename, BySortedOrder };

struct DatasetAnalysis {
    std::vector<PairPhotometricSummary> summaries;
    std::array<ChannelRegression, 3> regressions;
    std::vector<std::string> warnings;
};

// Walks two directories of PNG pairs, computes per-channel means of each
// image, and fits gt mean against input mean per channel with ordinary least
// squares. Pairs are taken in lexicographic filename order, capped at `cap`.
// Unmatched files produce warnings and are skipped; fewer than two usable
// pairs throws Error("TooFewPairs").
DatasetAnalysis analyzeDataset(const std::filesystem::path& inputDir, const std::filesystem::path& gtDir,
                               PairingRule rule = PairingRule::ByFilename, std::size_t cap = 1000,
                               int threads = 1);

// OLS of gtMean_c against inputMean_c across pairs, channels independently.
std::array<ChannelRegression, 3> regressChannels(const std::vector<PairPhotometricSummary>& summaries);

// Header `pair_id,channel,input_mean,gt_mean`, one row per pair per channel,
// channels in R,G,B order, values with 9 significant digits, LF endings.
void exportScatterCsv(const std::vector<PairPhotometricSummary>& summaries, const std::filesystem::path& path);
std::string scatterCsv(const std::vector<PairPhotometricSummary>& summaries);

std::string toJson(const std::array<ChannelRegression, 3>& regressions);

const char* channelName(int channel);

}  // namespace palign
