#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "palign/align.hpp"
#include "palign/dataset.hpp"
#include "palign/diagnose.hpp"
#include "palign/errors.hpp"
#include "palign/jsonfmt.hpp"
#include "palign/loss.hpp"
#include "palign/oracle.hpp"
#include "palign/simulate.hpp"
#include "palign/tensor.hpp"

namespace fs = std::filesystem;
using namespace palign;

namespace {

struct GlobalOpts {
    double eps = 1e-3;
    double alpha = 0.6;
    std::string formulation = "augmented";
    std::string norm = "l1";
    int threads = 1;
    std::uint64_t seed = 1;
    std::string output = ".";
};

fs::path outputDir(const GlobalOpts& g) {
    fs::path dir(g.output);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
    return dir;
}

void writeTextFile(const fs::path& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open " + path.string() + " for writing");
    file << content;
    if (!file) throw IoError("failed to write " + path.string());
}

int runAnalyze(const GlobalOpts& g, const std::string& inputDir, const std::string& gtDir,
               const std::string& pairing, std::size_t cap) {
    const PairingRule rule = pairing == "order" ? PairingRule::BySortedOrder : PairingRule::ByFilename;
    const DatasetAnalysis analysis = analyzeDataset(inputDir, gtDir, rule, cap, g.threads);
    for (const std::string& w : analysis.warnings) std::cerr << "warning: " << w << "\n";

    const fs::path dir = outputDir(g);
    exportScatterCsv(analysis.summaries, dir / "scatter.csv");
    writeTextFile(dir / "regressions.json", toJson(analysis.regressions));

    std::cout << "channel slope intercept rSquared residualStdDev pairCount\n";
    for (const ChannelRegression& r : analysis.regressions)
        std::cout << channelName(r.channel) << " " << g9(r.slope) << " " << g9(r.intercept) << " " << g9(r.rSquared)
                  << " " << g9(r.residualStdDev) << " " << r.pairCount << "\n";
    return 0;
}

int runAlign(const GlobalOpts& g, const std::string& predPath, const std::string& gtPath, const std::string& family,
             const std::string& maskPath) {
    const FamilyTag tag = familyFromName(family);
    if (tag == FamilyTag::MaskedAffine && maskPath.empty())
        throw CLI::ValidationError("align", "family 'masked' requires --mask");
    if (tag != FamilyTag::MaskedAffine && !maskPath.empty())
        throw CLI::ValidationError("align", "--mask is only valid with family 'masked'");

    const ImageRGB pred = loadPng(predPath);
    const ImageRGB gt = loadPng(gtPath);
    const Formulation formulation = formulationFromName(g.formulation);
    const fs::path dir = outputDir(g);

    ImageRGB aligned;
    std::string transformJson;
    switch (tag) {
        case FamilyTag::ChannelMean: {
            const AffineTransform t = solveChannelMean(pred, gt);
            aligned = applyTransform(t, pred, true);
            transformJson = toJson(t, 0.0, formulation);
            break;
        }
        case FamilyTag::GTMeanScalar: {
            const AffineTransform t = solveGTMean(pred, gt);
            aligned = applyTransform(t, pred, true);
            transformJson = toJson(t, 0.0, formulation);
            break;
        }
        case FamilyTag::OptimalScalar: {
            const AffineTransform t = solveOptimalScalar(pred, gt);
            aligned = applyTransform(t, pred, true);
            transformJson = toJson(t, 0.0, formulation);
            break;
        }
        case FamilyTag::OptimalDiagonal: {
            const AffineTransform t = solveOptimalDiagonal(pred, gt);
            aligned = applyTransform(t, pred, true);
            transformJson = toJson(t, 0.0, formulation);
            break;
        }
        case FamilyTag::FullAffine: {
            const AffineTransform t = solveAffine(pred, gt, g.eps, formulation);
            aligned = applyTransform(t, pred, true);
            transformJson = toJson(t, g.eps, formulation);
            break;
        }
        case FamilyTag::MaskedAffine: {
            const Mask mask = maskFromImage(loadPng(maskPath));
            const MaskedTransform t = solveMaskedAffine(pred, gt, mask, g.eps, formulation);
            aligned = applyMaskedTransform(t, pred, mask, true);
            transformJson = toJson(t, g.eps, formulation);
            break;
        }
    }
    savePng(aligned, dir / "aligned.png");
    writeTextFile(dir / "transform.json", transformJson + "\n");
    std::cout << "{\"ssePre\": " << g9(sumSquaredError(pred, gt)) << ", \"ssePost\": "
              << g9(sumSquaredError(aligned, gt)) << "}\n";
    return 0;
}

int runLoss(const GlobalOpts& g, const std::string& predPath, const std::string& gtPath,
            const std::string& pixelNorm) {
    LossConfig cfg;
    cfg.alpha = g.alpha;
    cfg.eps = g.eps;
    cfg.norm = normFromName(g.norm);
    cfg.pixelNorm = normFromName(pixelNorm.empty() ? g.norm : pixelNorm);
    cfg.formulation = formulationFromName(g.formulation);
    const LossResult r = palLoss(loadPng(predPath), loadPng(gtPath), cfg);
    std::cout << toJson(r, cfg) << "\n";
    return 0;
}

int runDecompose(const GlobalOpts& g, const std::string& predPath, const std::string& gtPath,
                 const std::string& errorMapPath) {
    const ResidualDecomposition d =
        decompose(loadPng(predPath), loadPng(gtPath), g.eps, formulationFromName(g.formulation));
    std::cout << toJson(d) << "\n";
    if (!errorMapPath.empty()) savePng(structuralErrorMap(d), errorMapPath);
    return 0;
}

int runSimulate(const GlobalOpts& g, int steps, int size, int trainPairCount, int valPairCount, int batchSize,
                double lr, bool noShifts) {
    ExperimentConfig cfg;
    cfg.pairs.imageSize = size;
    cfg.pairs.seed = g.seed;
    cfg.pairs.shiftsEnabled = !noShifts;
    cfg.trainPairCount = trainPairCount;
    cfg.valPairCount = valPairCount;
    cfg.batchSize = batchSize;
    cfg.steps = steps;
    cfg.lr = lr;
    cfg.alpha = g.alpha;
    cfg.eps = g.eps;
    cfg.formulation = formulationFromName(g.formulation);

    const TrainingTrace baseline = runExperiment(cfg, false);
    const TrainingTrace pal = runExperiment(cfg, true);

    const fs::path dir = outputDir(g);
    exportTraceCsv(baseline, dir / "trace_baseline.csv");
    exportTraceCsv(pal, dir / "trace_pal.csv");

    std::cout << "baseline mean_rho " << g9(baseline.meanRho()) << "\n";
    std::cout << "pal mean_rho " << g9(pal.meanRho()) << "\n";
    std::cout << "baseline final_content_error " << g9(baseline.final().valContentError) << "\n";
    std::cout << "pal final_content_error " << g9(pal.final().valContentError) << "\n";
    return 0;
}

int runVerify(const GlobalOpts& g, bool quick) {
    const std::vector<VerifyEntry> entries = runVerifySuite(quick, g.seed);
    bool allPass = true;
    std::cout << "check deviation tolerance status\n";
    for (const VerifyEntry& e : entries) {
        std::cout << e.name << " " << g9(e.deviation) << " " << g9(e.tolerance) << " "
                  << (e.pass ? "pass" : "FAIL") << "\n";
        allPass = allPass && e.pass;
    }
    return allPass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-form photometric alignment toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--eps", g.eps, "Ridge strength")->capture_default_str();
    app.add_option("--alpha", g.alpha, "Weight of the alignment loss term")->capture_default_str();
    app.add_option("--formulation", g.formulation, "Affine solve formulation")
        ->check(CLI::IsMember({"augmented", "covariance"}))
        ->capture_default_str();
    app.add_option("--norm", g.norm, "Residual norm of the alignment term")
        ->check(CLI::IsMember({"l1", "l2"}))
        ->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads for per-pair work")
        ->envname("PALIGN_THREADS")
        ->capture_default_str();
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--output", g.output, "Output directory for generated files")->capture_default_str();

    int rc = 0;

    auto* analyze = app.add_subcommand("analyze", "Per-pair photometric statistics over a paired dataset");
    std::string inputDir, gtDir, pairing = "name";
    std::size_t cap = 1000;
    analyze->add_option("input_dir", inputDir, "Directory of input PNGs")->required();
    analyze->add_option("gt_dir", gtDir, "Directory of ground-truth PNGs")->required();
    analyze->add_option("--pairing", pairing, "Pair by identical filename or by sorted order")
        ->check(CLI::IsMember({"name", "order"}))
        ->capture_default_str();
    analyze->add_option("--cap", cap, "Maximum number of pairs analyzed")->capture_default_str();
    analyze->callback([&] { rc = runAnalyze(g, inputDir, gtDir, pairing, cap); });

    auto* align = app.add_subcommand("align", "Solve one alignment family and apply it");
    std::string alignPred, alignGt, family = "affine", maskPath;
    align->add_option("pred", alignPred, "Prediction PNG")->required();
    align->add_option("gt", alignGt, "Ground-truth PNG")->required();
    align->add_option("--family", family, "Alignment family")
        ->check(CLI::IsMember({"chanmean", "gtmean", "scalar", "diagonal", "affine", "masked"}))
        ->capture_default_str();
    align->add_option("--mask", maskPath, "Mask PNG for family 'masked' (mean >= 0.5 selects inside)");
    align->callback([&] { rc = runAlign(g, alignPred, alignGt, family, maskPath); });

    auto* loss = app.add_subcommand("loss", "Evaluate the combined alignment loss for a pair");
    std::string lossPred, lossGt, pixelNorm;
    loss->add_option("pred", lossPred, "Prediction PNG")->required();
    loss->add_option("gt", lossGt, "Ground-truth PNG")->required();
    loss->add_option("--pixel-norm", pixelNorm, "Residual norm of the pixel term (defaults to --norm)");
    loss->callback([&] { rc = runLoss(g, lossPred, lossGt, pixelNorm); });

    auto* dec = app.add_subcommand("decompose", "Photometric/structural residual decomposition");
    std::string decPred, decGt, errorMapPath;
    dec->add_option("pred", decPred, "Prediction PNG")->required();
    dec->add_option("gt", decGt, "Ground-truth PNG")->required();
    dec->add_option("--error-map", errorMapPath, "Write the |structural residual| map to this PNG");
    dec->callback([&] { rc = runDecompose(g, decPred, decGt, errorMapPath); });

    auto* sim = app.add_subcommand("simulate", "Train the toy model with and without the alignment term");
    int steps = 2000, size = 32, trainPairCount = 24, valPairCount = 4, batchSize = 1;
    double lr = 0.5;
    bool noShifts = false;
    sim->add_option("--steps", steps, "Training steps")->capture_default_str();
    sim->add_option("--size", size, "Synthetic image size")->capture_default_str();
    sim->add_option("--train-pairs", trainPairCount, "Training pairs")->capture_default_str();
    sim->add_option("--val-pairs", valPairCount, "Validation pairs")->capture_default_str();
    sim->add_option("--batch", batchSize, "Batch size")->capture_default_str();
    sim->add_option("--lr", lr, "Learning rate")->capture_default_str();
    sim->add_flag("--no-shifts", noShifts, "Disable per-pair photometric shifts");
    sim->callback([&] { rc = runSimulate(g, steps, size, trainPairCount, valPairCount, batchSize, lr, noShifts); });

    auto* verify = app.add_subcommand("verify", "Run the oracle self-check suite");
    bool quick = false;
    verify->add_flag("--quick", quick, "Smaller instance counts");
    verify->callback([&] { rc = runVerify(g, quick); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
