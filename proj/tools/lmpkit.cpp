// lmpkit command-line front end: dense flow, feature extraction, heat maps,
// SVM training and protocol evaluation.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "lmpkit/classify.hpp"
#include "lmpkit/error.hpp"
#include "lmpkit/face.hpp"
#include "lmpkit/features.hpp"
#include "lmpkit/flowfield.hpp"
#include "lmpkit/lmp.hpp"

namespace fs = std::filesystem;
using namespace lmpkit;

namespace {

int logLevel() {
    const char* env = std::getenv("LMPKIT_LOG");
    return env ? std::atoi(env) : 0;
}

void logInfo(const std::string& msg) {
    if (logLevel() >= 1) std::cerr << "[lmpkit] " << msg << "\n";
}

struct ManifestEntry {
    std::string id;
    std::string frameDir;
    std::string landmarkFile;
    std::string label;
    std::string subject;
    int onset = 0;
    int apex = 0;
};

std::vector<ManifestEntry> readManifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path);
    std::vector<ManifestEntry> entries;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first && line.rfind("id,", 0) == 0) {
            first = false;
            continue;
        }
        first = false;
        std::istringstream ss(line);
        ManifestEntry e;
        std::string onset, apex;
        if (!std::getline(ss, e.id, ',') || !std::getline(ss, e.frameDir, ',') ||
            !std::getline(ss, e.landmarkFile, ',') || !std::getline(ss, e.label, ',') ||
            !std::getline(ss, e.subject, ',') || !std::getline(ss, onset, ',') ||
            !std::getline(ss, apex, ','))
            throw FormatError("malformed manifest row: " + line);
        try {
            e.onset = std::stoi(onset);
            e.apex = std::stoi(apex);
        } catch (...) {
            throw FormatError("non-numeric frame range in manifest row: " + line);
        }
        if (e.onset > e.apex) throw ValidationError("onset > apex in manifest row: " + line);
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw FormatError("manifest has no entries");
    return entries;
}

std::vector<std::string> listFrames(const std::string& dir) {
    if (!fs::is_directory(dir)) throw IoError("frame directory missing: " + dir);
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".png" || ext == ".pgm" || ext == ".PNG" || ext == ".PGM")
            files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no frames in " + dir);
    return files;
}

LmpConfig resolveConfig(const std::string& configPath, const std::string& preset) {
    if (!configPath.empty()) return LmpConfig::fromJsonFile(configPath);
    if (!preset.empty()) return LmpConfig::preset(preset);
    return LmpConfig{};
}

// Runs fn(i) for i in [0, n) on `jobs` threads, rethrowing the first failure.
void parallelFor(size_t n, int jobs, const std::function<void(size_t)>& fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::mutex errMutex;
    std::exception_ptr firstError;
    auto worker = [&] {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(errMutex);
                if (!firstError) firstError = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (firstError) std::rethrow_exception(firstError);
}

int cmdFlow(const std::string& inputDir, const std::string& outDir) {
    const auto frames = listFrames(inputDir);
    if (frames.size() < 2) throw InvalidInputError("need at least two frames for flow");
    fs::create_directories(outDir);
    Frame prev = readFrame(frames[0]);
    for (size_t i = 1; i < frames.size(); ++i) {
        Frame next = readFrame(frames[i]);
        const FlowField flow = computeFlow(prev, next);
        char name[32];
        std::snprintf(name, sizeof(name), "%06zu.flo", i - 1);
        writeFloFile(flow, (fs::path(outDir) / name).string());
        prev = std::move(next);
    }
    logInfo("wrote " + std::to_string(frames.size() - 1) + " flow fields to " + outDir);
    return 0;
}

FeatureRow extractSequence(const ManifestEntry& entry, const LmpConfig& cfg, bool withGeo) {
    if (!fs::exists(entry.landmarkFile)) throw IoError("landmark file missing: " + entry.landmarkFile);
    const auto frameFiles = listFrames(entry.frameDir);
    const int last = std::min<int>(entry.apex, static_cast<int>(frameFiles.size()) - 1);
    if (entry.onset < 0 || entry.onset >= last)
        throw ValidationError("activation range [" + std::to_string(entry.onset) + ", " +
                              std::to_string(entry.apex) + "] invalid for sequence " + entry.id);

    Frame first = readFrame(frameFiles[static_cast<size_t>(entry.onset)]);
    const FaceGeometry geom = loadLandmarks(entry.landmarkFile, first.width, first.height);
    const RoiPartition rois = buildRois(geom);
    const double faceSize = geom.faceSize();

    std::vector<std::vector<std::vector<double>>> perFrame;
    Frame prev = std::move(first);
    for (int t = entry.onset; t < last; ++t) {
        Frame next = readFrame(frameFiles[static_cast<size_t>(t) + 1]);
        const FlowField flow = computeFlow(prev, next);
        perFrame.push_back(frameMotion(flow, rois, cfg, faceSize));
        prev = std::move(next);
    }
    const GmdVector gmd = accumulate(perFrame, entry.id);

    FeatureRow row;
    row.id = entry.id;
    row.label = entry.label;
    row.subject = entry.subject;
    row.features = withGeo ? fuse(gmd, geoFeatures(geom, rois)) : gmd.values;
    return row;
}

int cmdExtract(const std::string& manifestPath, const LmpConfig& cfg, const std::string& outCsv,
               bool withGeo, int jobs) {
    cfg.validate();
    const auto manifest = readManifest(manifestPath);
    std::vector<FeatureRow> rows(manifest.size());
    parallelFor(manifest.size(), jobs, [&](size_t i) {
        rows[i] = extractSequence(manifest[i], cfg, withGeo);
        logInfo("extracted " + manifest[i].id);
    });
    writeFeatureCsv(rows, outCsv);
    logInfo("wrote features for " + std::to_string(rows.size()) + " sequences to " + outCsv);
    return 0;
}

int cmdHeatmap(const std::string& manifestPath, const LmpConfig& cfg, const std::string& outDir,
               int jobs) {
    cfg.validate();
    const auto manifest = readManifest(manifestPath);
    fs::create_directories(outDir);

    std::map<std::string, std::vector<const ManifestEntry*>> byClass;
    for (const auto& e : manifest) byClass[e.label].push_back(&e);

    std::vector<std::pair<std::string, std::vector<const ManifestEntry*>>> classes(byClass.begin(),
                                                                                   byClass.end());
    parallelFor(classes.size(), jobs, [&](size_t ci) {
        const auto& [label, entries] = classes[ci];
        std::vector<HeatMapSequence> sequences;
        for (const ManifestEntry* e : entries) {
            if (!fs::exists(e->landmarkFile)) throw IoError("landmark file missing: " + e->landmarkFile);
            HeatMapSequence seq;
            const auto frameFiles = listFrames(e->frameDir);
            const int last = std::min<int>(e->apex, static_cast<int>(frameFiles.size()) - 1);
            for (int t = e->onset; t <= last; ++t)
                seq.frames.push_back(readFrame(frameFiles[static_cast<size_t>(t)]));
            const FaceGeometry geom = loadLandmarks(e->landmarkFile);
            seq.landmarks.assign(seq.frames.size(), geom.landmarks);
            sequences.push_back(std::move(seq));
        }
        const HeatMap map = buildHeatMap(sequences, cfg, label);
        writeHeatMapCsv(map, (fs::path(outDir) / (label + ".csv")).string());
        writeHeatMapPng(map, (fs::path(outDir) / (label + ".png")).string());
        logInfo("heat map for class " + label);
    });
    return 0;
}

std::vector<LabeledSample> samplesFromCsv(const std::string& csvPath,
                                          std::vector<std::string>& labelNames) {
    const auto rows = readFeatureCsv(csvPath);
    std::set<std::string> labelSet;
    for (const auto& r : rows) labelSet.insert(r.label);
    labelNames.assign(labelSet.begin(), labelSet.end());
    std::map<std::string, int> labelIds;
    for (size_t i = 0; i < labelNames.size(); ++i) labelIds[labelNames[i]] = static_cast<int>(i);

    std::vector<LabeledSample> samples;
    samples.reserve(rows.size());
    for (const auto& r : rows) {
        LabeledSample s;
        s.features = r.features;
        s.label = labelIds[r.label];
        s.subject = r.subject;
        s.id = r.id;
        samples.push_back(std::move(s));
    }
    return samples;
}

int cmdTrain(const std::string& csvPath, double C, double gamma, const std::string& modelOut) {
    std::vector<std::string> labelNames;
    const auto samples = samplesFromCsv(csvPath, labelNames);
    const SvmModel model = train(samples, C, gamma);
    model.save(modelOut);
    logInfo("trained on " + std::to_string(samples.size()) + " samples, " +
            std::to_string(labelNames.size()) + " classes -> " + modelOut);
    return 0;
}

int cmdEval(const std::string& csvPath, const std::string& protocolName, const EvalOptions& opts,
            const std::string& reportOut) {
    std::vector<std::string> labelNames;
    const auto samples = samplesFromCsv(csvPath, labelNames);
    const Protocol protocol = protocolName == "loso" ? Protocol::Loso : Protocol::KFold10;
    const EvalReport report = evaluate(samples, protocol, opts);
    for (const std::string& w : report.warnings) std::cerr << "warning: " << w << "\n";

    std::ostringstream out;
    out << report.toJson();
    if (reportOut.empty() || reportOut == "-") {
        std::cout << out.str();
    } else {
        std::ofstream f(reportOut);
        if (!f) throw IoError("cannot write report " + reportOut);
        f << out.str();
    }
    logInfo("accuracy " + std::to_string(report.accuracy));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local motion pattern toolkit: coherent-motion filtering and "
                 "facial expression recognition pipeline"};
    app.require_subcommand(1);

    std::string configPath, preset, outPath;
    int jobs = 1;
    uint64_t seed = 0;
    app.add_option("--config", configPath, "filter config JSON")->capture_default_str();
    app.add_option("--preset", preset, "named parameter preset (casme2, smic-hs, smic-vis, "
                                       "smic-nir, ck+, mmi, casia-vl, casia-ni)");
    app.add_option("--jobs", jobs, "worker threads")->capture_default_str();
    app.add_option("--seed", seed, "rng seed for fold assignment")->capture_default_str();

    auto* flowCmd = app.add_subcommand("flow", "compute dense flow for a frame directory");
    std::string flowIn, flowOut;
    flowCmd->add_option("input", flowIn, "frame directory")->required();
    flowCmd->add_option("--out", flowOut, ".flo output directory")->required();

    auto* extractCmd = app.add_subcommand("extract", "extract per-sequence motion features");
    std::string manifestPath, extractOut;
    bool withGeo = false;
    extractCmd->add_option("manifest", manifestPath, "manifest csv")->required();
    extractCmd->add_option("--out", extractOut, "feature csv output")->required();
    extractCmd->add_flag("--geo", withGeo, "fuse geometric shape features");

    auto* heatmapCmd = app.add_subcommand("heatmap", "per-class motion heat maps");
    std::string heatmapManifest, heatmapOut;
    heatmapCmd->add_option("manifest", heatmapManifest, "manifest csv")->required();
    heatmapCmd->add_option("--out", heatmapOut, "output directory")->required();

    auto* trainCmd = app.add_subcommand("train", "train an svm on a feature csv");
    std::string trainCsv, modelOut;
    double trainC = 100.0, trainGamma = 0.0;
    trainCmd->add_option("features", trainCsv, "feature csv")->required();
    trainCmd->add_option("--out", modelOut, "model output path")->required();
    trainCmd->add_option("--C", trainC, "penalty C")->capture_default_str();
    trainCmd->add_option("--gamma", trainGamma, "rbf gamma (0 = 1/dim)")->capture_default_str();

    auto* evalCmd = app.add_subcommand("eval", "cross-validated evaluation");
    std::string evalCsv, protocolName = "kfold10", reportOut;
    double evalC = 100.0, evalGamma = 0.0;
    bool grid = false;
    evalCmd->add_option("features", evalCsv, "feature csv")->required();
    evalCmd->add_option("--protocol", protocolName, "kfold10 or loso")
        ->check(CLI::IsMember({"kfold10", "loso"}))
        ->capture_default_str();
    evalCmd->add_option("--out", reportOut, "json report path (default stdout)");
    evalCmd->add_option("--C", evalC, "penalty C")->capture_default_str();
    evalCmd->add_option("--gamma", evalGamma, "rbf gamma (0 = 1/dim)")->capture_default_str();
    evalCmd->add_flag("--grid", grid, "inner 3-fold grid search for C and gamma");

    auto* configCmd = app.add_subcommand("config", "dump a filter config");
    configCmd->add_option("--out", outPath, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (flowCmd->parsed()) return cmdFlow(flowIn, flowOut);
        const LmpConfig cfg = resolveConfig(configPath, preset);
        if (extractCmd->parsed()) return cmdExtract(manifestPath, cfg, extractOut, withGeo, jobs);
        if (heatmapCmd->parsed()) return cmdHeatmap(heatmapManifest, cfg, heatmapOut, jobs);
        if (trainCmd->parsed()) return cmdTrain(trainCsv, trainC, trainGamma, modelOut);
        if (evalCmd->parsed()) {
            EvalOptions opts;
            opts.C = evalC;
            opts.gamma = evalGamma;
            opts.gridSearch = grid;
            opts.seed = seed;
            return cmdEval(evalCsv, protocolName, opts, reportOut);
        }
        if (configCmd->parsed()) {
            if (outPath.empty() || outPath == "-")
                std::cout << cfg.toJson();
            else
                cfg.toJsonFile(outPath);
            return 0;
        }
    } catch (const InvalidInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const SpecError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
