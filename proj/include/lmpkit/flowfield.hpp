#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lmpkit/geometry.hpp"

namespace lmpkit {

// Grayscale frame, intensities in [0,1], row-major.
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<float> pixels;

    Frame() = default;
    Frame(int w, int h, float fill = 0.f);

    float at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
    float& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }

    // Throws ValidationError on bad dimensions or out-of-range intensities.
    void validate() const;
};

// Dense per-pixel motion field in pixels/frame, row-major (dx, dy) pairs.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<float> dx;
    std::vector<float> dy;

    FlowField() = default;
    FlowField(int w, int h);

    size_t idx(int x, int y) const { return static_cast<size_t>(y) * width + x; }
    bool inBounds(double x, double y) const { return x >= 0 && y >= 0 && x < width && y < height; }
};

// Multiset of (direction bin, magnitude) samples for one local motion region.
struct RegionHistogram {
    int binCount = 0;
    std::vector<std::pair<int, double>> samples;  // (binIndex, magnitude)
};

struct FlowParams {
    int pyramidLevels = 3;
    double pyramidScale = 0.5;
    int windowSize = 15;
    int iterations = 3;
    int polyN = 5;
    double polySigma = 1.1;
};

// Dense two-frame optical flow (Farneback). Deterministic for fixed params.
FlowField computeFlow(const Frame& prev, const Frame& next, const FlowParams& params = {});

// Middlebury .flo interchange: "PIEH" magic, little-endian int32 width/height,
// interleaved float32 (dx, dy). Round trips are bit-exact.
FlowField readFlo(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> writeFlo(const FlowField& flow);
FlowField readFloFile(const std::string& path);
void writeFloFile(const FlowField& flow, const std::string& path);

// Image direction convention: y grows downward, direction = atan2(-dy, dx)
// normalized to [0, 360), so "up on screen" is 90 degrees.
double flowDirectionDeg(double dx, double dy);
int directionBin(double dx, double dy, int binCount);

// Axis-aligned square region (center, side in px). One sample per pixel of the
// region/field intersection; zero-magnitude pixels produce no sample;
// magnitudes clamped to magnitudeCap. Empty intersection -> GeometryError.
RegionHistogram sampleRegion(const FlowField& flow, Point center, int sidePx, int binCount,
                             double magnitudeCap);

// 8-bit grayscale PNG/PGM ingestion, intensities divided by 255.
Frame readFrame(const std::string& path);
void writeFrame(const Frame& frame, const std::string& path);

}  // namespace lmpkit
