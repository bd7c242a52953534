#pragma once

#include <map>
#include <string>
#include <vector>

#include "lmpkit/flowfield.hpp"
#include "lmpkit/geometry.hpp"
#include "lmpkit/lmp.hpp"

namespace lmpkit {

// 68 landmarks (standard 68-point indexing, 0-based) plus derived mesh points.
struct FaceGeometry {
    std::vector<Point> landmarks;            // exactly 68
    std::map<std::string, Point> derived;    // "A".."F" forehead, "Q_L", "Q_R"
    double interOcular = 0.0;
    Point faceCenter;  // midpoint of the eye centers

    double faceSize() const { return interOcular * 2.4; }

    Point eyeCenterLeft() const;
    Point eyeCenterRight() const;

    // Resolve "L<idx>" or a derived point name. Throws SpecError on unknown ids.
    Point point(const std::string& id) const;
};

// The 25-region facial partition, indexed 1..25.
struct RoiPartition {
    std::vector<Polygon> regions;  // regions[i] is ROI i+1

    const Polygon& roi(int id) const { return regions.at(static_cast<size_t>(id - 1)); }
};

// 20 columns x 30 rows motion-density grid, values in [0,1].
struct HeatMap {
    static constexpr int kCols = 20;
    static constexpr int kRows = 30;
    std::string classLabel;
    std::vector<double> values;  // row-major, kCols * kRows

    double at(int col, int row) const { return values[static_cast<size_t>(row) * kCols + col]; }
};

// Landmark ingestion: plain "x y" per line (68 lines) or ibug pts format.
// frameWidth/frameHeight of 0 skip the bounds check.
FaceGeometry loadLandmarks(const std::string& path, int frameWidth = 0, int frameHeight = 0);
FaceGeometry makeGeometry(std::vector<Point> landmarks, int frameWidth = 0, int frameHeight = 0);

// P_Q = midpoint(P10, P55) (and its mirror), forehead points A..F translated up
// from their eyebrow anchors by |P27 P33| / 4 perpendicular to the inter-ocular
// axis. Throws ValidationError on degenerate geometry.
std::map<std::string, Point> derivePoints(const std::vector<Point>& landmarks);

// Declarative ROI spec: region id (1..25) -> ordered point-id list.
using RoiSpec = std::map<int, std::vector<std::string>>;

RoiSpec defaultRoiSpec();
RoiSpec roiSpecFromJson(const std::string& json);
RoiSpec roiSpecFromJsonFile(const std::string& path);

// Instantiate the 25 polygons. Validates simplicity and the 19/18 and 22/23
// overlap requirements.
RoiPartition buildRois(const FaceGeometry& geometry, const RoiSpec& spec = defaultRoiSpec());

struct SimilarityTransform {
    double rotationDeg = 0.0;
    double scale = 1.0;
    double tx = 0.0;
    double ty = 0.0;

    Point apply(Point p) const;
};

struct AlignedSequence {
    std::vector<Frame> frames;
    std::vector<std::vector<Point>> landmarks;
    std::vector<SimilarityTransform> transforms;  // one per frame
};

// Similarity transform per frame mapping its eye centers onto the first
// frame's eye centers; frames resampled bilinearly, landmarks transformed.
AlignedSequence alignByEyes(const std::vector<Frame>& frames,
                            const std::vector<std::vector<Point>>& perFrameLandmarks);

struct HeatMapSequence {
    std::vector<Frame> frames;
    std::vector<std::vector<Point>> landmarks;  // per frame, 68 points each
};

// One class per call: per frame pair, flow -> 20x30 block grid -> LMP
// coherence mask; OR across a sequence's frame pairs; mean across sequences.
HeatMap buildHeatMap(const std::vector<HeatMapSequence>& sequences, const LmpConfig& cfg,
                     const std::string& classLabel);

void writeHeatMapCsv(const HeatMap& map, const std::string& path);
void writeHeatMapPng(const HeatMap& map, const std::string& path);

}  // namespace lmpkit
