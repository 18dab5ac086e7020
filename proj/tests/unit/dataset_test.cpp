#include "palign/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "palign/errors.hpp"
#include "palign/rng.hpp"
#include "palign/tensor.hpp"

using namespace palign;

namespace {

std::vector<PairPhotometricSummary> linearSummaries(std::size_t count, double slope, double intercept,
                                                    double jitter, Rng& rng) {
    std::vector<PairPhotometricSummary> out;
    for (std::size_t i = 0; i < count; ++i) {
        PairPhotometricSummary s;
        s.pairId = "p" + std::to_string(i);
        for (int c = 0; c < 3; ++c) {
            s.inputMean[c] = 0.2 + 0.6 * rng.uniform();
            s.gtMean[c] = slope * s.inputMean[c] + intercept + jitter * rng.normal();
        }
        out.push_back(s);
    }
    return out;
}

void writePair(const std::filesystem::path& inDir, const std::filesystem::path& gtDir, const std::string& name,
               double inLevel, double gtLevel) {
    savePng(ImageRGB(4, 4, inLevel), inDir / name);
    savePng(ImageRGB(4, 4, gtLevel), gtDir / name);
}

}  // namespace

TEST_CASE("regression recovers an exact linear relation") {
    Rng rng(71);
    const auto summaries = linearSummaries(24, 0.5, 0.2, 0.0, rng);
    const auto regs = regressChannels(summaries);
    for (int c = 0; c < 3; ++c) {
        CHECK(regs[c].channel == c);
        CHECK(regs[c].slope == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(regs[c].intercept == doctest::Approx(0.2).epsilon(1e-10));
        CHECK(regs[c].rSquared == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(regs[c].residualStdDev <= 1e-12);
        CHECK(regs[c].pairCount == 24);
    }
}

TEST_CASE("identity datasets regress to the diagonal") {
    Rng rng(72);
    auto summaries = linearSummaries(16, 1.0, 0.0, 0.0, rng);
    for (auto& s : summaries) s.gtMean = s.inputMean;
    const auto regs = regressChannels(summaries);
    for (int c = 0; c < 3; ++c) {
        CHECK(regs[c].slope == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(regs[c].intercept == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    }
}

TEST_CASE("noisy shifts leave residual spread behind") {
    Rng rng(73);
    const auto summaries = linearSummaries(40, 0.8, 0.1, 0.03, rng);
    const auto regs = regressChannels(summaries);
    for (int c = 0; c < 3; ++c) {
        CHECK(regs[c].residualStdDev > 1e-3);
        CHECK(regs[c].rSquared < 1.0);
        CHECK(regs[c].rSquared > 0.5);
    }

    // residualStdDev matches the direct population formula.
    double ss = 0.0;
    for (const auto& s : summaries) {
        const double r = s.gtMean[0] - (regs[0].slope * s.inputMean[0] + regs[0].intercept);
        ss += r * r;
    }
    CHECK(regs[0].residualStdDev == doctest::Approx(std::sqrt(ss / 40.0)).epsilon(1e-10));
}

TEST_CASE("degenerate abscissa is rejected by channel name") {
    std::vector<PairPhotometricSummary> summaries(3);
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        summaries[i].pairId = "p" + std::to_string(i);
        summaries[i].inputMean = Vec3{0.5, 0.2 + 0.1 * static_cast<double>(i), 0.3 + 0.1 * static_cast<double>(i)};
        summaries[i].gtMean = Vec3{0.1, 0.2, 0.3};
    }
    CHECK_THROWS_WITH_AS(regressChannels(summaries), doctest::Contains("R"), Error);
}

TEST_CASE("scatter csv is deterministic and parseable") {
    Rng rng(74);
    const auto summaries = linearSummaries(3, 0.5, 0.2, 0.01, rng);
    const std::string csv = scatterCsv(summaries);
    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "pair_id,channel,input_mean,gt_mean");
    std::size_t rows = 0;
    const char* channels[] = {"R", "G", "B"};
    while (std::getline(in, line)) {
        std::istringstream cells(line);
        std::string id, ch, x, y;
        REQUIRE(std::getline(cells, id, ','));
        REQUIRE(std::getline(cells, ch, ','));
        REQUIRE(std::getline(cells, x, ','));
        REQUIRE(std::getline(cells, y, ','));
        CHECK(id == summaries[rows / 3].pairId);
        CHECK(ch == channels[rows % 3]);
        CHECK(std::stod(x) == doctest::Approx(summaries[rows / 3].inputMean[static_cast<int>(rows % 3)]).epsilon(1e-8));
        ++rows;
    }
    CHECK(rows == 9);
    CHECK(csv == scatterCsv(summaries));
    CHECK(csv.find("\r") == std::string::npos);

    const auto dir = testutil::tempDir("scatter");
    exportScatterCsv(summaries, dir / "scatter.csv");
    CHECK(testutil::readFile(dir / "scatter.csv") == csv);
}

TEST_CASE("regression json names channels and keeps g9 formatting") {
    Rng rng(75);
    const auto regs = regressChannels(linearSummaries(10, 0.5, 0.2, 0.0, rng));
    const std::string json = toJson(regs);
    const auto j = nlohmann::json::parse(json);
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 3);
    CHECK(j[0]["channel"].get<std::string>() == "R");
    CHECK(j[1]["channel"].get<std::string>() == "G");
    CHECK(j[2]["channel"].get<std::string>() == "B");
    for (int c = 0; c < 3; ++c) {
        CHECK(j[c]["slope"].get<double>() == doctest::Approx(0.5).epsilon(1e-8));
        CHECK(j[c]["intercept"].get<double>() == doctest::Approx(0.2).epsilon(1e-8));
        CHECK(j[c]["pairCount"].get<int>() == 10);
        CHECK(j[c].contains("rSquared"));
        CHECK(j[c].contains("residualStdDev"));
    }
    CHECK(json.back() == '\n');
}

TEST_CASE("directory analysis pairs by filename and warns about strays") {
    const auto root = testutil::tempDir("ds_byname");
    const auto inDir = root / "input";
    const auto gtDir = root / "gt";
    std::filesystem::create_directories(inDir);
    std::filesystem::create_directories(gtDir);
    writePair(inDir, gtDir, "a.png", 0.2, 0.3);
    writePair(inDir, gtDir, "b.png", 0.4, 0.5);
    writePair(inDir, gtDir, "c.png", 0.6, 0.7);
    savePng(ImageRGB(4, 4, 0.9), inDir / "orphan_in.png");
    savePng(ImageRGB(4, 4, 0.9), gtDir / "orphan_gt.png");
    std::ofstream(inDir / "notes.txt") << "ignored";

    const DatasetAnalysis a = analyzeDataset(inDir, gtDir);
    REQUIRE(a.summaries.size() == 3);
    CHECK(a.summaries[0].pairId == "a");
    CHECK(a.summaries[2].pairId == "c");
    CHECK(a.summaries[0].inputMean.x == doctest::Approx(0.2).epsilon(2e-2));
    CHECK(a.summaries[0].gtMean.x == doctest::Approx(0.3).epsilon(2e-2));
    REQUIRE(a.warnings.size() == 2);
    CHECK((a.warnings[0].find("orphan_in.png") != std::string::npos ||
           a.warnings[1].find("orphan_in.png") != std::string::npos));
    CHECK((a.warnings[0].find("orphan_gt.png") != std::string::npos ||
           a.warnings[1].find("orphan_gt.png") != std::string::npos));
    for (int c = 0; c < 3; ++c) CHECK(a.regressions[c].pairCount == 3);
}

TEST_CASE("sorted-order pairing zips mismatched names") {
    const auto root = testutil::tempDir("ds_byorder");
    const auto inDir = root / "input";
    const auto gtDir = root / "gt";
    std::filesystem::create_directories(inDir);
    std::filesystem::create_directories(gtDir);
    savePng(ImageRGB(4, 4, 0.2), inDir / "in_000.png");
    savePng(ImageRGB(4, 4, 0.4), inDir / "in_001.png");
    savePng(ImageRGB(4, 4, 0.6), inDir / "in_002.png");
    savePng(ImageRGB(4, 4, 0.3), gtDir / "ref_000.png");
    savePng(ImageRGB(4, 4, 0.5), gtDir / "ref_001.png");

    const DatasetAnalysis a = analyzeDataset(inDir, gtDir, PairingRule::BySortedOrder);
    REQUIRE(a.summaries.size() == 2);
    CHECK(a.summaries[0].inputMean.x == doctest::Approx(0.2).epsilon(2e-2));
    CHECK(a.summaries[0].gtMean.x == doctest::Approx(0.3).epsilon(2e-2));
    CHECK(a.summaries[1].gtMean.x == doctest::Approx(0.5).epsilon(2e-2));
    CHECK(!a.warnings.empty());  // the unmatched third input is reported
}

TEST_CASE("pair cap truncates in filename order") {
    const auto root = testutil::tempDir("ds_cap");
    const auto inDir = root / "input";
    const auto gtDir = root / "gt";
    std::filesystem::create_directories(inDir);
    std::filesystem::create_directories(gtDir);
    for (int i = 0; i < 6; ++i) {
        const std::string name = "p" + std::to_string(i) + ".png";
        writePair(inDir, gtDir, name, 0.1 + 0.1 * i, 0.2 + 0.1 * i);
    }
    const DatasetAnalysis a = analyzeDataset(inDir, gtDir, PairingRule::ByFilename, 4);
    REQUIRE(a.summaries.size() == 4);
    CHECK(a.summaries[3].pairId == "p3");
}

TEST_CASE("too few pairs is an error naming the condition") {
    const auto root = testutil::tempDir("ds_few");
    const auto inDir = root / "input";
    const auto gtDir = root / "gt";
    std::filesystem::create_directories(inDir);
    std::filesystem::create_directories(gtDir);
    writePair(inDir, gtDir, "only.png", 0.5, 0.5);
    CHECK_THROWS_WITH_AS(analyzeDataset(inDir, gtDir), doctest::Contains("TooFewPairs"), Error);

    CHECK_THROWS_AS(analyzeDataset(root / "missing", gtDir), IoError);
}

TEST_CASE("threaded analysis matches single-threaded results") {
    const auto root = testutil::tempDir("ds_threads");
    const auto inDir = root / "input";
    const auto gtDir = root / "gt";
    std::filesystem::create_directories(inDir);
    std::filesystem::create_directories(gtDir);
    Rng rng(76);
    for (int i = 0; i < 8; ++i) {
        const std::string name = "p" + std::to_string(i) + ".png";
        ImageRGB in(8, 8), gt(8, 8);
        for (int c = 0; c < 3; ++c)
            for (std::size_t px = 0; px < in.pixelCount(); ++px) {
                in.at(c, px) = rng.uniform();
                gt.at(c, px) = rng.uniform();
            }
        savePng(in, inDir / name);
        savePng(gt, gtDir / name);
    }
    const DatasetAnalysis serial = analyzeDataset(inDir, gtDir, PairingRule::ByFilename, 1000, 1);
    const DatasetAnalysis parallel = analyzeDataset(inDir, gtDir, PairingRule::ByFilename, 1000, 4);
    REQUIRE(serial.summaries.size() == parallel.summaries.size());
    for (std::size_t i = 0; i < serial.summaries.size(); ++i) {
        CHECK(serial.summaries[i].pairId == parallel.summaries[i].pairId);
        CHECK(maxAbs(serial.summaries[i].inputMean - parallel.summaries[i].inputMean) == 0.0);
        CHECK(maxAbs(serial.summaries[i].gtMean - parallel.summaries[i].gtMean) == 0.0);
    }
    CHECK(scatterCsv(serial.summaries) == scatterCsv(parallel.summaries));
}

TEST_CASE("channel names are fixed") {
    CHECK(channelName(0) == std::string("R"));
    CHECK(channelName(1) == std::string("G"));
    CHECK(channelName(2) == std::string("B"));
}
