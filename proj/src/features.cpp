#include "lmpkit/features.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "lmpkit/error.hpp"

namespace lmpkit {

std::vector<double> roiMotion(const FlowField& flow, const Polygon& roi, const LmpConfig& cfg,
                              double faceSizePx) {
    if (roi.size() < 3 || std::abs(polygonArea(roi)) < 1e-9)
        throw GeometryError("degenerate roi polygon");
    const Point epicenter = polygonCentroid(roi);
    if (!flow.inBounds(epicenter.x, epicenter.y))
        throw GeometryError("roi centroid outside the flow field");

    const LmpDistribution lmp = propagate(flow, epicenter, cfg, faceSizePx);
    std::vector<double> md(static_cast<size_t>(cfg.binCount), 0.0);
    for (const AcceptedRegion& r : lmp.regions) {
        if (!pointInPolygon(r.center, roi)) continue;
        for (int i = 0; i < cfg.binCount; ++i) md[static_cast<size_t>(i)] += r.fdmh[static_cast<size_t>(i)];
    }
    return md;
}

std::vector<std::vector<double>> frameMotion(const FlowField& flow, const RoiPartition& rois,
                                             const LmpConfig& cfg, double faceSizePx) {
    std::vector<std::vector<double>> out;
    out.reserve(rois.regions.size());
    for (const Polygon& roi : rois.regions) out.push_back(roiMotion(flow, roi, cfg, faceSizePx));
    return out;
}

GmdVector accumulate(const std::vector<std::vector<std::vector<double>>>& perFramePerRoi,
                     const std::string& sequenceId) {
    if (perFramePerRoi.empty()) throw InvalidInputError("no frames to accumulate");
    const size_t roiCount = perFramePerRoi[0].size();
    const size_t bins = perFramePerRoi[0].empty() ? 0 : perFramePerRoi[0][0].size();
    if (roiCount == 0 || bins == 0) throw ValidationError("empty per-roi distributions");

    GmdVector gmd;
    gmd.binCount = static_cast<int>(bins);
    gmd.frameCount = static_cast<int>(perFramePerRoi.size());
    gmd.sequenceId = sequenceId;
    gmd.values.assign(roiCount * bins, 0.0);
    for (const auto& frame : perFramePerRoi) {
        if (frame.size() != roiCount) throw ValidationError("inconsistent roi count across frames");
        for (size_t k = 0; k < roiCount; ++k) {
            if (frame[k].size() != bins) throw ValidationError("inconsistent bin count across frames");
            for (size_t i = 0; i < bins; ++i) gmd.values[k * bins + i] += frame[k][i];
        }
    }
    for (double v : gmd.values)
        if (!std::isfinite(v) || v < 0.0) throw ValidationError("non-finite or negative gmd entry");
    return gmd;
}

GeoVector geoFeatures(const FaceGeometry& apex, const RoiPartition& rois) {
    const double faceSize = apex.faceSize();
    const double faceArea = faceSize * faceSize;
    GeoVector geo;
    geo.values.reserve(rois.regions.size() * 3);
    for (const Polygon& roi : rois.regions) {
        const Point c = polygonCentroid(roi);
        geo.values.push_back((c.x - apex.faceCenter.x) / apex.interOcular);
        geo.values.push_back((c.y - apex.faceCenter.y) / apex.interOcular);
        geo.values.push_back(std::abs(polygonArea(roi)) / faceArea);
    }
    return geo;
}

std::vector<double> fuse(const GmdVector& gmd, const GeoVector& geo) {
    std::vector<double> out = gmd.values;
    out.insert(out.end(), geo.values.begin(), geo.values.end());
    return out;
}

void writeFeatureCsv(const std::vector<FeatureRow>& rows, const std::string& path) {
    if (rows.empty()) throw InvalidInputError("no feature rows");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17);
    out << "id,label,subject";
    for (size_t i = 0; i < rows[0].features.size(); ++i) out << ",f" << i;
    out << '\n';
    for (const FeatureRow& row : rows) {
        if (row.features.size() != rows[0].features.size())
            throw ValidationError("inconsistent feature length in csv rows");
        out << row.id << ',' << row.label << ',' << row.subject;
        for (double v : row.features) out << ',' << v;
        out << '\n';
    }
}

std::vector<FeatureRow> readFeatureCsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty feature csv");
    std::vector<FeatureRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        FeatureRow row;
        std::string cell;
        if (!std::getline(ss, row.id, ',') || !std::getline(ss, row.label, ',') ||
            !std::getline(ss, row.subject, ','))
            throw FormatError("malformed feature csv row: " + line);
        while (std::getline(ss, cell, ',')) {
            try {
                row.features.push_back(std::stod(cell));
            } catch (...) {
                throw FormatError("non-numeric feature value: " + cell);
            }
        }
        if (row.features.empty()) throw FormatError("feature csv row has no features: " + line);
        if (!rows.empty() && rows[0].features.size() != row.features.size())
            throw FormatError("inconsistent feature length in csv");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw FormatError("feature csv has no data rows");
    return rows;
}

}  // namespace lmpkit
