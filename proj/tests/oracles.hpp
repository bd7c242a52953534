// Independent brute-force oracles for the filter algebra. These deliberately
// re-derive everything from first principles (plain enumeration over
// (layer, bin, sample) triples and over all circular intervals) so they share
// no code path with the library implementation.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "lmpkit/flowfield.hpp"
#include "lmpkit/lmp.hpp"

namespace oracle {

struct LayerResult {
    std::vector<std::vector<double>> shares;  // [layer][bin]
    std::vector<long> ml1, ml2, ml3;
};

// Enumerates every (layer, bin, sample) triple directly.
inline LayerResult layering(const lmpkit::RegionHistogram& h, const lmpkit::LmpConfig& cfg) {
    const double eps = 1e-9;
    const int B = h.binCount;
    const int layerCount = static_cast<int>(std::lround(cfg.magnitudeCap / cfg.layerStep)) + 1;

    LayerResult r;
    r.shares.assign(layerCount, std::vector<double>(B, 0.0));
    r.ml1.assign(B, 0);
    r.ml2.assign(B, 0);
    r.ml3.assign(B, 0);

    for (int k = 0; k < layerCount; ++k) {
        const double n = k * cfg.layerStep;
        // layer membership
        std::vector<std::pair<int, double>> members;
        for (const auto& s : h.samples)
            if (s.second >= n - eps && s.second <= cfg.magnitudeCap + eps) members.push_back(s);
        double total = 0.0;
        std::vector<double> mass(B, 0.0);
        for (const auto& [bin, mag] : members) {
            mass[bin] += mag;
            total += mag;
        }
        if (total <= 0.0) continue;
        for (int bin = 0; bin < B; ++bin) {
            const double share = mass[bin] / total;
            if (share < cfg.minBinFraction) continue;
            r.shares[k][bin] = share;
            for (const auto& [sBin, mag] : members) {
                if (sBin != bin) continue;
                if (mag <= cfg.magnitudeCap / 3.0 + eps)
                    ++r.ml1[bin];
                else if (mag <= 2.0 * cfg.magnitudeCap / 3.0 + eps)
                    ++r.ml2[bin];
                else
                    ++r.ml3[bin];
            }
        }
    }
    return r;
}

// All maximal circular runs above alpha, then the length and smoothness
// filters, found by testing every (start, length) interval.
inline std::vector<lmpkit::BinRun> circularRuns(const std::vector<double>& dmh,
                                                const lmpkit::LmpConfig& cfg) {
    const int B = static_cast<int>(dmh.size());
    auto above = [&](int i) { return dmh[((i % B) + B) % B] > cfg.intensityAlpha; };

    std::vector<lmpkit::BinRun> maximal;
    int aboveCount = 0;
    for (int i = 0; i < B; ++i)
        if (above(i)) ++aboveCount;
    if (aboveCount == B) {
        maximal.push_back({0, B});
    } else {
        for (int start = 0; start < B; ++start) {
            for (int len = 1; len <= B; ++len) {
                bool all = true;
                for (int k = 0; k < len; ++k)
                    if (!above(start + k)) all = false;
                if (!all) continue;
                if (above(start - 1) || above(start + len)) continue;  // not maximal
                maximal.push_back({start, len});
            }
        }
    }

    std::vector<lmpkit::BinRun> kept;
    for (const auto& run : maximal) {
        if (run.length >= cfg.spanS) continue;
        double maxVal = 0.0;
        for (int k = 0; k < run.length; ++k)
            maxVal = std::max(maxVal, dmh[(run.start + k) % B]);
        bool ok = true;
        for (int k = 0; k + 1 < run.length; ++k) {
            const double diff =
                std::abs(dmh[(run.start + k) % B] - dmh[(run.start + k + 1) % B]);
            if (diff >= (cfg.smoothPhi / 10.0) * maxVal) ok = false;
        }
        if (ok) kept.push_back(run);
    }
    return kept;
}

inline bool sameRuns(std::vector<lmpkit::BinRun> a, std::vector<lmpkit::BinRun> b) {
    auto cmp = [](const lmpkit::BinRun& x, const lmpkit::BinRun& y) {
        return x.start != y.start ? x.start < y.start : x.length < y.length;
    };
    std::sort(a.begin(), a.end(), cmp);
    std::sort(b.begin(), b.end(), cmp);
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i].start != b[i].start || a[i].length != b[i].length) return false;
    return true;
}

}  // namespace oracle
