#pragma once

#include <string>
#include <vector>

#include "lmpkit/face.hpp"
#include "lmpkit/flowfield.hpp"
#include "lmpkit/lmp.hpp"

namespace lmpkit {

// Global motion distribution: 25 per-ROI accumulated B-bin distributions,
// ROI-major order.
struct GmdVector {
    std::vector<double> values;  // 25 * binCount
    int binCount = 0;
    int frameCount = 0;
    std::string sequenceId;
};

// Normalized ROI shape descriptors at the apex frame: per ROI, centroid x/y
// relative to the face center (in inter-ocular units) and area over the
// squared face size. 25 * 3 = 75 values.
struct GeoVector {
    std::vector<double> values;
};

// LMP applied at the ROI centroid; accepted regions whose centers fall outside
// the polygon do not contribute.
std::vector<double> roiMotion(const FlowField& flow, const Polygon& roi, const LmpConfig& cfg,
                              double faceSizePx);

// All 25 ROIs of one frame pair.
std::vector<std::vector<double>> frameMotion(const FlowField& flow, const RoiPartition& rois,
                                             const LmpConfig& cfg, double faceSizePx);

// Element-wise sum over frames, concatenated ROI-major.
GmdVector accumulate(const std::vector<std::vector<std::vector<double>>>& perFramePerRoi,
                     const std::string& sequenceId = {});

GeoVector geoFeatures(const FaceGeometry& apex, const RoiPartition& rois);

std::vector<double> fuse(const GmdVector& gmd, const GeoVector& geo);

// CSV contract consumed by the classifier: one row per sequence,
// "id,label,subject,f0,f1,...".
struct FeatureRow {
    std::string id;
    std::string label;
    std::string subject;
    std::vector<double> features;
};

void writeFeatureCsv(const std::vector<FeatureRow>& rows, const std::string& path);
std::vector<FeatureRow> readFeatureCsv(const std::string& path);

}  // namespace lmpkit
