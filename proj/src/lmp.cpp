#include "lmpkit/lmp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "lmpkit/error.hpp"

namespace lmpkit {

using ordered_json = nlohmann::ordered_json;

namespace {
// Layer membership and band boundaries tolerate floating accumulation of the
// 0.2 step grid.
constexpr double kMagEps = 1e-9;
constexpr double kRhoEps = 1e-9;
}  // namespace

void LmpConfig::validate() const {
    if (!(lambdaFrac > 0.0 && lambdaFrac <= 0.10))
        throw ValidationError("lambda_frac must be in (0, 0.10]");
    if (!(overlapDelta >= 0.0 && overlapDelta < 1.0))
        throw ValidationError("overlap must be in [0, 1)");
    if (!(bhattRho >= 0.0 && bhattRho <= 1.0)) throw ValidationError("rho must be in [0, 1]");
    if (!(intensityAlpha > 0.0)) throw ValidationError("intensity_e must be positive");
    if (!(spanS >= 1 && spanS <= binCount))
        throw ValidationError("density_m must be in [1, bins]");
    if (!(smoothPhi > 0.0)) throw ValidationError("variation_v must be positive");
    if (betaIters < 0) throw ValidationError("beta must be >= 0");
    if (binCount < 4 || binCount > 36) throw ValidationError("bins must be in [4, 36]");
    if (!(weights[0] < weights[1] && weights[1] < weights[2]))
        throw ValidationError("weights must be strictly increasing");
    if (!(layerStep > 0.0)) throw ValidationError("layer_step must be positive");
    if (!(minBinFraction >= 0.0 && minBinFraction < 1.0))
        throw ValidationError("min_bin_fraction must be in [0, 1)");
    if (!(magnitudeCap > 0.0)) throw ValidationError("mag_cap must be positive");
    if (connectivity < 1) throw ValidationError("connectivity must be >= 1");
}

std::string LmpConfig::toJson() const {
    ordered_json j;
    j["lambda_frac"] = lambdaFrac;
    j["overlap"] = overlapDelta;
    j["rho"] = bhattRho;
    j["intensity_e"] = intensityAlpha;
    j["density_m"] = spanS;
    j["variation_v"] = smoothPhi;
    j["beta"] = betaIters;
    j["bins"] = binCount;
    j["weights"] = weights;
    j["layer_step"] = layerStep;
    j["mag_cap"] = magnitudeCap;
    j["min_bin_fraction"] = minBinFraction;
    return j.dump(2) + "\n";
}

LmpConfig LmpConfig::fromJson(const std::string& json) {
    ordered_json j;
    try {
        j = ordered_json::parse(json);
    } catch (const std::exception& e) {
        throw FormatError(std::string("config parse error: ") + e.what());
    }
    LmpConfig cfg;
    try {
        cfg.lambdaFrac = j.at("lambda_frac").get<double>();
        cfg.overlapDelta = j.at("overlap").get<double>();
        cfg.bhattRho = j.at("rho").get<double>();
        cfg.intensityAlpha = j.at("intensity_e").get<double>();
        cfg.spanS = j.at("density_m").get<int>();
        cfg.smoothPhi = j.at("variation_v").get<double>();
        cfg.betaIters = j.at("beta").get<int>();
        cfg.binCount = j.at("bins").get<int>();
        if (j.contains("weights")) {
            auto w = j["weights"].get<std::vector<double>>();
            if (w.size() != 3) throw FormatError("weights must hold 3 values");
            cfg.weights = {w[0], w[1], w[2]};
        }
        cfg.layerStep = j.value("layer_step", cfg.layerStep);
        cfg.magnitudeCap = j.value("mag_cap", cfg.magnitudeCap);
        cfg.minBinFraction = j.value("min_bin_fraction", cfg.minBinFraction);
    } catch (const FormatError&) {
        throw;
    } catch (const std::exception& e) {
        throw FormatError(std::string("config field error: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

LmpConfig LmpConfig::fromJsonFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return fromJson(ss.str());
}

void LmpConfig::toJsonFile(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config " + path);
    out << toJson();
}

LmpConfig LmpConfig::preset(const std::string& name) {
    // lambda, rho, density_m, beta, bins per dataset; the rest is shared.
    LmpConfig cfg;
    cfg.overlapDelta = 0.5;
    cfg.intensityAlpha = 100;
    cfg.smoothPhi = 5;
    if (name == "casme2") {
        cfg.lambdaFrac = 0.04; cfg.bhattRho = 0.75; cfg.spanS = 4; cfg.betaIters = 6; cfg.binCount = 9;
    } else if (name == "smic-hs") {
        cfg.lambdaFrac = 0.03; cfg.bhattRho = 0.75; cfg.spanS = 3; cfg.betaIters = 6; cfg.binCount = 9;
    } else if (name == "smic-vis") {
        cfg.lambdaFrac = 0.05; cfg.bhattRho = 0.75; cfg.spanS = 4; cfg.betaIters = 3; cfg.binCount = 9;
    } else if (name == "smic-nir") {
        cfg.lambdaFrac = 0.04; cfg.bhattRho = 0.75; cfg.spanS = 3; cfg.betaIters = 3; cfg.binCount = 12;
    } else if (name == "ck+") {
        cfg.lambdaFrac = 0.03; cfg.bhattRho = 1.0; cfg.spanS = 4; cfg.betaIters = 3; cfg.binCount = 12;
    } else if (name == "mmi") {
        cfg.lambdaFrac = 0.03; cfg.bhattRho = 1.0; cfg.spanS = 4; cfg.betaIters = 6; cfg.binCount = 12;
    } else if (name == "casia-vl") {
        cfg.lambdaFrac = 0.04; cfg.bhattRho = 1.0; cfg.spanS = 5; cfg.betaIters = 3; cfg.binCount = 6;
    } else if (name == "casia-ni") {
        cfg.lambdaFrac = 0.05; cfg.bhattRho = 0.75; cfg.spanS = 5; cfg.betaIters = 6; cfg.binCount = 9;
    } else {
        throw InvalidInputError("unknown preset: " + name);
    }
    cfg.validate();
    return cfg;
}

std::vector<std::string> LmpConfig::presetNames() {
    return {"casme2", "smic-hs", "smic-vis", "smic-nir", "ck+", "mmi", "casia-vl", "casia-ni"};
}

int LmpConfig::regionSidePx(double faceSizePx) const {
    return std::max(3, static_cast<int>(std::lround(lambdaFrac * faceSizePx)));
}

LayerBank buildLayers(const RegionHistogram& h, const LmpConfig& cfg) {
    if (h.samples.empty()) throw InvalidInputError("empty region histogram");
    const int B = h.binCount;
    for (const auto& [bin, mag] : h.samples) {
        if (bin < 0 || bin >= B) throw ValidationError("sample bin index out of range");
        if (mag < 0.0) throw ValidationError("negative sample magnitude");
    }

    const int layerCount = static_cast<int>(std::lround(cfg.magnitudeCap / cfg.layerStep)) + 1;
    const double bandEdge1 = cfg.magnitudeCap / 3.0;
    const double bandEdge2 = 2.0 * cfg.magnitudeCap / 3.0;

    LayerBank bank;
    bank.binCount = B;
    bank.layers.reserve(layerCount);
    for (int k = 0; k < layerCount; ++k) {
        MagnitudeLayer layer;
        layer.lowerBound = k * cfg.layerStep;
        layer.shares.assign(B, 0.0);
        layer.bandCounts.assign(B, {0, 0, 0});

        std::vector<double> mass(B, 0.0);
        std::vector<std::array<int, 3>> counts(B, {0, 0, 0});
        double total = 0.0;
        for (const auto& [bin, mag] : h.samples) {
            if (mag < layer.lowerBound - kMagEps || mag > cfg.magnitudeCap + kMagEps) continue;
            mass[bin] += mag;
            total += mag;
            int band = 2;
            if (mag <= bandEdge1 + kMagEps) band = 0;
            else if (mag <= bandEdge2 + kMagEps) band = 1;
            ++counts[bin][band];
        }
        if (total > 0.0) {
            for (int bin = 0; bin < B; ++bin) {
                const double share = mass[bin] / total;
                if (share >= cfg.minBinFraction) {
                    layer.shares[bin] = share;
                    layer.bandCounts[bin] = counts[bin];
                }
            }
        }
        bank.layers.push_back(std::move(layer));
    }
    return bank;
}

CumulativeTriple cumulativeTriple(const LayerBank& bank, const LmpConfig& cfg) {
    (void)cfg;
    const int B = bank.binCount;
    CumulativeTriple ml;
    ml.ml1.assign(B, 0);
    ml.ml2.assign(B, 0);
    ml.ml3.assign(B, 0);
    for (const MagnitudeLayer& layer : bank.layers) {
        for (int bin = 0; bin < B; ++bin) {
            if (layer.shares[bin] <= 0.0) continue;
            ml.ml1[bin] += layer.bandCounts[bin][0];
            ml.ml2[bin] += layer.bandCounts[bin][1];
            ml.ml3[bin] += layer.bandCounts[bin][2];
        }
    }
    return ml;
}

DmhHistogram weightedDmh(const CumulativeTriple& ml, const LmpConfig& cfg) {
    if (ml.ml1.size() != ml.ml2.size() || ml.ml2.size() != ml.ml3.size())
        throw ValidationError("cumulative histograms disagree on bin count");
    DmhHistogram dmh(ml.ml1.size(), 0.0);
    for (size_t i = 0; i < dmh.size(); ++i)
        dmh[i] = cfg.weights[0] * ml.ml1[i] + cfg.weights[1] * ml.ml2[i] + cfg.weights[2] * ml.ml3[i];
    return dmh;
}

std::vector<BinRun> coherentRuns(const DmhHistogram& dmh, const LmpConfig& cfg) {
    const int B = static_cast<int>(dmh.size());
    std::vector<bool> above(B);
    int aboveCount = 0;
    for (int i = 0; i < B; ++i) {
        above[i] = dmh[i] > cfg.intensityAlpha;
        if (above[i]) ++aboveCount;
    }
    if (aboveCount == 0) return {};

    std::vector<BinRun> raw;
    if (aboveCount == B) {
        raw.push_back({0, B});
    } else {
        for (int i = 0; i < B; ++i) {
            const int prev = (i + B - 1) % B;
            if (!above[i] || above[prev]) continue;
            int len = 0;
            while (above[(i + len) % B]) ++len;
            raw.push_back({i, len});
        }
    }

    std::vector<BinRun> kept;
    for (const BinRun& run : raw) {
        if (run.length >= cfg.spanS) continue;  // spreads over too many bins
        double maxVal = 0.0;
        for (int k = 0; k < run.length; ++k) maxVal = std::max(maxVal, dmh[(run.start + k) % B]);
        const double tolerance = (cfg.smoothPhi / 10.0) * maxVal;
        bool smooth = true;
        for (int k = 0; k + 1 < run.length; ++k) {
            const double a = dmh[(run.start + k) % B];
            const double b = dmh[(run.start + k + 1) % B];
            if (std::abs(a - b) >= tolerance) {
                smooth = false;
                break;
            }
        }
        if (smooth) kept.push_back(run);
    }
    std::sort(kept.begin(), kept.end(),
              [](const BinRun& a, const BinRun& b) { return a.start < b.start; });
    return kept;
}

FdmhHistogram filterDmh(const DmhHistogram& dmh, const std::vector<BinRun>& runs) {
    const int B = static_cast<int>(dmh.size());
    FdmhHistogram out(B, 0.0);
    for (const BinRun& run : runs)
        for (int k = 0; k < run.length; ++k) {
            const int bin = (run.start + k) % B;
            out[bin] = dmh[bin];
        }
    return out;
}

double bhattacharyya(const FdmhHistogram& a, const FdmhHistogram& b) {
    if (a.size() != b.size()) throw ValidationError("histograms disagree on bin count");
    double sa = 0.0, sb = 0.0;
    for (double v : a) sa += v;
    for (double v : b) sb += v;
    if (sa <= 0.0 || sb <= 0.0) return 0.0;
    double coeff = 0.0;
    for (size_t i = 0; i < a.size(); ++i) coeff += std::sqrt((a[i] / sa) * (b[i] / sb));
    return std::clamp(coeff, 0.0, 1.0);
}

std::optional<FdmhHistogram> analyzeRegion(const FlowField& flow, Point center, const LmpConfig& cfg,
                                           double faceSizePx) {
    if (!flow.inBounds(center.x, center.y))
        throw GeometryError("region center outside the flow field");
    const int side = cfg.regionSidePx(faceSizePx);
    const RegionHistogram h = sampleRegion(flow, center, side, cfg.binCount, cfg.magnitudeCap);
    if (h.samples.empty()) return std::nullopt;
    const LayerBank bank = buildLayers(h, cfg);
    const CumulativeTriple ml = cumulativeTriple(bank, cfg);
    const DmhHistogram dmh = weightedDmh(ml, cfg);
    const std::vector<BinRun> runs = coherentRuns(dmh, cfg);
    if (runs.empty()) return std::nullopt;
    return filterDmh(dmh, runs);
}

LmpDistribution propagate(const FlowField& flow, Point epicenter, const LmpConfig& cfg,
                          double faceSizePx) {
    if (!flow.inBounds(epicenter.x, epicenter.y))
        throw GeometryError("epicenter outside the flow field");

    LmpDistribution out;
    out.epicenter = epicenter;
    out.md.assign(cfg.binCount, 0.0);

    const std::optional<FdmhHistogram> cmr = analyzeRegion(flow, epicenter, cfg, faceSizePx);
    if (!cmr) return out;  // incoherent: MD = 0, n = 0

    out.coherent = true;
    out.regions.push_back({epicenter, *cmr});

    const int side = cfg.regionSidePx(faceSizePx);
    const double spacing = side * (1.0 - cfg.overlapDelta);

    // Accepted regions of the previous ring, in row-major enumeration order.
    std::vector<AcceptedRegion> prevRing = {{epicenter, *cmr}};
    for (int ring = 1; ring <= cfg.betaIters && !prevRing.empty(); ++ring) {
        std::vector<AcceptedRegion> curRing;
        for (int gy = -ring; gy <= ring; ++gy) {
            for (int gx = -ring; gx <= ring; ++gx) {
                if (std::max(std::abs(gx), std::abs(gy)) != ring) continue;
                const Point center{epicenter.x + gx * spacing, epicenter.y + gy * spacing};
                if (!flow.inBounds(center.x, center.y)) continue;
                const std::optional<FdmhHistogram> fdmh = analyzeRegion(flow, center, cfg, faceSizePx);
                if (!fdmh) continue;
                // Parent: nearest accepted inner-ring region; ties resolved by
                // enumeration order (strict less keeps the earliest).
                const AcceptedRegion* parent = nullptr;
                double best = std::numeric_limits<double>::max();
                for (const AcceptedRegion& cand : prevRing) {
                    const double d = dist(center, cand.center);
                    if (d < best - 1e-12) {
                        best = d;
                        parent = &cand;
                    }
                }
                if (bhattacharyya(*fdmh, parent->fdmh) >= cfg.bhattRho - kRhoEps)
                    curRing.push_back({center, *fdmh});
            }
        }
        for (const AcceptedRegion& r : curRing) out.regions.push_back(r);
        prevRing = std::move(curRing);
    }

    out.coherentRegionCount = static_cast<int>(out.regions.size());
    for (const AcceptedRegion& r : out.regions)
        for (int i = 0; i < cfg.binCount; ++i) out.md[i] += r.fdmh[i];
    return out;
}

long maxRegions(int beta, int connectivity) {
    if (beta < 0) throw InvalidInputError("beta must be >= 0");
    if (connectivity < 1) throw InvalidInputError("connectivity must be >= 1");
    if (beta == 0) return 1;
    return 1 + static_cast<long>(connectivity) * beta * (beta + 1) / 2;
}

}  // namespace lmpkit
