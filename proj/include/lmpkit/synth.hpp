#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lmpkit/classify.hpp"
#include "lmpkit/flowfield.hpp"
#include "lmpkit/geometry.hpp"

namespace lmpkit {

// Ground-truth flow generators used as oracles throughout the test suites.
enum class SynthKind { UniformTranslation, GaussianBlob, Diverging, RandomNoise, RotatedCopy };

struct SynthSpec {
    SynthKind kind = SynthKind::UniformTranslation;
    double directionDeg = 0.0;  // screen convention: 90 = up
    double magnitude = 1.0;     // px/frame
    Point blobCenter;
    double blobSigma = 10.0;
    double rotationDeg = 0.0;  // RotatedCopy: extra rotation applied to every vector
    uint64_t seed = 0;

    std::string toJson() const;
    static SynthSpec fromJson(const std::string& json);
};

FlowField makeFlow(const SynthSpec& spec, int width, int height);

// Rotate every vector by the given angle (screen convention, counter-clockwise
// on screen).
FlowField rotateVectors(const FlowField& flow, double degrees);

// Band-limited noise texture and its integer-shifted copy (clamped edges).
struct FramePair {
    Frame prev, next;
    int shiftX = 0, shiftY = 0;  // ground-truth flow components (dx, dy)
};
FramePair makeFramePair(int shiftX, int shiftY, int width, int height, uint64_t textureSeed);

// Textured frame warped backward through an arbitrary flow field (bilinear).
Frame makeTexture(int width, int height, uint64_t seed);
Frame warpByFlow(const Frame& frame, const FlowField& flow);

// Gaussian class blobs at pairwise distance separation * sigma; subjects
// assigned round-robin. Requires dim >= nClasses for exact equidistance.
std::vector<LabeledSample> makeDataset(int nClasses, int perClass, int dim, double separation,
                                       uint64_t seed, int nSubjects = 10);

}  // namespace lmpkit
