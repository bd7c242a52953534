#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lmpkit/flowfield.hpp"
#include "lmpkit/geometry.hpp"

namespace lmpkit {

// All parameters of the local-motion-pattern filter.
struct LmpConfig {
    double lambdaFrac = 0.04;     // region side as a fraction of face size
    double overlapDelta = 0.5;    // fractional overlap between neighboring regions
    double bhattRho = 0.75;       // inter-region similarity threshold
    double intensityAlpha = 100;  // DMH acceptance threshold (column E)
    int spanS = 4;                // max consecutive bins per main direction (column M)
    double smoothPhi = 5;         // adjacent-bin tolerance (column V)
    int betaIters = 6;            // propagation iteration count
    int binCount = 9;
    std::array<double, 3> weights = {1, 10, 100};
    double layerStep = 0.2;
    double magnitudeCap = 10.0;
    double minBinFraction = 0.10;
    int connectivity = 8;  // fixed

    void validate() const;  // throws ValidationError on any broken invariant

    std::string toJson() const;
    static LmpConfig fromJson(const std::string& json);
    static LmpConfig fromJsonFile(const std::string& path);
    void toJsonFile(const std::string& path) const;

    // Named per-dataset presets: "casme2", "smic-hs", "smic-vis", "smic-nir",
    // "ck+", "mmi", "casia-vl", "casia-ni".
    static LmpConfig preset(const std::string& name);
    static std::vector<std::string> presetNames();

    // Square analysis window side in pixels for a given face size.
    int regionSidePx(double faceSizePx) const;
};

// One magnitude layer: which bins survived the normalize-then-filter step and,
// per bin, how many original samples fall into each of the three magnitude
// bands (needed by the cumulative triple).
struct MagnitudeLayer {
    double lowerBound = 0.0;
    std::vector<double> shares;                     // normalized per-bin mass, filtered bins zeroed
    std::vector<std::array<int, 3>> bandCounts;     // per bin, per band, sample count (surviving bins only)
};

struct LayerBank {
    int binCount = 0;
    std::vector<MagnitudeLayer> layers;  // ordered over n = 0, step, ..., cap
};

// Per-bin occurrence counts for the three magnitude bands of [0, cap].
struct CumulativeTriple {
    std::vector<long> ml1, ml2, ml3;
};

using DmhHistogram = std::vector<double>;
using FdmhHistogram = std::vector<double>;

// Circular interval of consecutive bins.
struct BinRun {
    int start = 0;   // first bin
    int length = 0;  // number of bins (may wrap past bin B-1)

    bool contains(int bin, int binCount) const {
        int d = bin - start;
        d %= binCount;
        if (d < 0) d += binCount;
        return d < length;
    }
};

struct AcceptedRegion {
    Point center;
    FdmhHistogram fdmh;
};

// The filter output: summed FDMH over all accepted regions plus metadata.
struct LmpDistribution {
    Point epicenter;
    std::vector<double> md;  // B bins, all zero when incoherent
    int coherentRegionCount = 0;
    bool coherent = false;
    std::vector<AcceptedRegion> regions;  // accepted regions, CMR first
};

// Magnitude layering over n = 0, step, ..., cap: a layer keeps the samples with
// magnitude in [n, cap]; per-bin magnitude mass is normalized to unit total and
// bins holding less than minBinFraction of the layer mass are zeroed.
LayerBank buildLayers(const RegionHistogram& h, const LmpConfig& cfg);

// Occurrence counts per band: ML_p(bin) sums, over all layers in which the bin
// survived the filter, the number of original samples of that layer/bin whose
// magnitude lies in band p (thirds of [0, cap]).
CumulativeTriple cumulativeTriple(const LayerBank& bank, const LmpConfig& cfg);

DmhHistogram weightedDmh(const CumulativeTriple& ml, const LmpConfig& cfg);

// Maximal circular runs of bins with DMH > alpha; runs of length >= s are
// discarded, as are runs with an adjacent pair differing by at least
// (phi/10) * max(run). Empty result means locally incoherent.
std::vector<BinRun> coherentRuns(const DmhHistogram& dmh, const LmpConfig& cfg);

FdmhHistogram filterDmh(const DmhHistogram& dmh, const std::vector<BinRun>& runs);

// Overlap of the two histograms after normalizing each to unit sum; 0 if either
// is all-zero.
double bhattacharyya(const FdmhHistogram& a, const FdmhHistogram& b);

// sampleRegion -> buildLayers -> cumulativeTriple -> weightedDmh ->
// coherentRuns -> filterDmh. nullopt when the region is incoherent or empty.
std::optional<FdmhHistogram> analyzeRegion(const FlowField& flow, Point center, const LmpConfig& cfg,
                                           double faceSizePx);

// Coherent-motion propagation from the epicenter through rings of neighboring
// regions (ring i holds 8i regions on the 8-connectivity grid, i = 1..beta).
LmpDistribution propagate(const FlowField& flow, Point epicenter, const LmpConfig& cfg,
                          double faceSizePx);

// 1 + c * beta(beta+1)/2 for beta >= 1, else 1.
long maxRegions(int beta, int connectivity);

}  // namespace lmpkit
