#include "lmpkit/face.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lmpkit/error.hpp"

namespace lmpkit {

namespace {

Point meanOf(const std::vector<Point>& pts, int from, int to) {
    Point acc;
    for (int i = from; i <= to; ++i) acc = acc + pts[static_cast<size_t>(i)];
    return acc * (1.0 / (to - from + 1));
}

}  // namespace

Point FaceGeometry::eyeCenterLeft() const { return meanOf(landmarks, 36, 41); }
Point FaceGeometry::eyeCenterRight() const { return meanOf(landmarks, 42, 47); }

Point FaceGeometry::point(const std::string& id) const {
    if (!id.empty() && id[0] == 'L') {
        int idx = -1;
        try {
            idx = std::stoi(id.substr(1));
        } catch (...) {
        }
        if (idx < 0 || idx > 67) throw SpecError("unknown landmark id: " + id);
        return landmarks[static_cast<size_t>(idx)];
    }
    auto it = derived.find(id);
    if (it == derived.end()) throw SpecError("unknown point id: " + id);
    return it->second;
}

std::map<std::string, Point> derivePoints(const std::vector<Point>& landmarks) {
    if (landmarks.size() != 68) throw ValidationError("expected 68 landmarks");
    const Point eyeL = meanOf(landmarks, 36, 41);
    const Point eyeR = meanOf(landmarks, 42, 47);
    const double iod = dist(eyeL, eyeR);
    if (iod < 1e-9) throw ValidationError("degenerate geometry: coincident eye centers");

    // "Up on screen" relative to the inter-ocular axis (y grows downward).
    const Point axis = (eyeR - eyeL) * (1.0 / iod);
    const Point up{axis.y, -axis.x};
    const double foreheadOffset = dist(landmarks[27], landmarks[33]) / 4.0;

    std::map<std::string, Point> out;
    const int browAnchors[6] = {17, 19, 21, 22, 24, 26};
    const char* names[6] = {"A", "B", "C", "D", "E", "F"};
    for (int i = 0; i < 6; ++i)
        out[names[i]] = landmarks[static_cast<size_t>(browAnchors[i])] + up * foreheadOffset;

    out["Q_R"] = (landmarks[10] + landmarks[55]) * 0.5;
    out["Q_L"] = (landmarks[6] + landmarks[59]) * 0.5;
    return out;
}

FaceGeometry makeGeometry(std::vector<Point> landmarks, int frameWidth, int frameHeight) {
    if (landmarks.size() != 68) throw FormatError("expected 68 landmarks");
    if (frameWidth > 0 && frameHeight > 0) {
        for (const Point& p : landmarks)
            if (p.x < 0 || p.y < 0 || p.x >= frameWidth || p.y >= frameHeight)
                throw ValidationError("landmark outside frame bounds");
    }
    FaceGeometry g;
    g.landmarks = std::move(landmarks);
    g.derived = derivePoints(g.landmarks);
    g.interOcular = dist(g.eyeCenterLeft(), g.eyeCenterRight());
    g.faceCenter = (g.eyeCenterLeft() + g.eyeCenterRight()) * 0.5;
    return g;
}

FaceGeometry loadLandmarks(const std::string& path, int frameWidth, int frameHeight) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open landmark file " + path);

    std::vector<Point> pts;
    std::string line;
    bool ptsFormat = false;
    while (std::getline(in, line)) {
        // strip CR and surrounding blanks
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        if (line.rfind("version:", 0) == 0 || line.rfind("n_points:", 0) == 0) {
            ptsFormat = true;
            continue;
        }
        if (line == "{" || line == "}") continue;
        std::istringstream ss(line);
        double x, y;
        if (!(ss >> x >> y)) throw FormatError("malformed landmark line: " + line);
        std::string extra;
        if (ss >> extra) throw FormatError("malformed landmark line: " + line);
        pts.push_back({x, y});
    }
    (void)ptsFormat;
    if (pts.size() != 68)
        throw FormatError("landmark file holds " + std::to_string(pts.size()) + " points, expected 68");
    return makeGeometry(std::move(pts), frameWidth, frameHeight);
}

RoiSpec defaultRoiSpec() {
    // Approximation of the 25-region facial partition; regions 19 and 22
    // deliberately overlap 18 and 23 around the lip corners.
    return {
        {1, {"L17", "L19", "B", "A"}},
        {2, {"L19", "L21", "C", "B"}},
        {3, {"L21", "L22", "D", "C"}},
        {4, {"L22", "L24", "E", "D"}},
        {5, {"L24", "L26", "F", "E"}},
        {6, {"L17", "L21", "L39", "L36"}},
        {7, {"L21", "L22", "L42", "L39"}},
        {8, {"L22", "L26", "L45", "L42"}},
        {9, {"L0", "L17", "L36", "L1"}},
        {10, {"L26", "L16", "L15", "L45"}},
        {11, {"L36", "L39", "L31", "L2"}},
        {12, {"L39", "L42", "L35", "L31"}},
        {13, {"L42", "L45", "L14", "L35"}},
        {14, {"L31", "L30", "L35", "L33"}},
        {15, {"L2", "L31", "L48", "L4"}},
        {16, {"L35", "L14", "L12", "L54"}},
        {17, {"L48", "L31", "L33", "L51"}},
        {18, {"L4", "L48", "L59", "L6"}},
        {19, {"L5", "L48", "L58", "L7"}},
        {20, {"L51", "L33", "L35", "L54"}},
        {21, {"L59", "L55", "L9", "L7"}},
        {22, {"L54", "L11", "L9", "L56"}},
        {23, {"L54", "L12", "L10", "L55"}},
        {24, {"L49", "L53", "L55", "L59"}},
        {25, {"L58", "L56", "L9", "L7"}},
    };
}

RoiSpec roiSpecFromJson(const std::string& json) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json);
    } catch (const std::exception& e) {
        throw FormatError(std::string("roi spec parse error: ") + e.what());
    }
    RoiSpec spec;
    for (auto& [key, value] : j.items()) {
        int id;
        try {
            id = std::stoi(key);
        } catch (...) {
            throw SpecError("roi spec key is not a region id: " + key);
        }
        spec[id] = value.get<std::vector<std::string>>();
    }
    return spec;
}

RoiSpec roiSpecFromJsonFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open roi spec " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return roiSpecFromJson(ss.str());
}

RoiPartition buildRois(const FaceGeometry& geometry, const RoiSpec& spec) {
    if (spec.size() != 25) throw SpecError("roi spec must define exactly 25 regions");
    RoiPartition partition;
    partition.regions.resize(25);
    for (const auto& [id, pointIds] : spec) {
        if (id < 1 || id > 25) throw SpecError("region id out of range: " + std::to_string(id));
        if (pointIds.size() < 3) throw SpecError("region " + std::to_string(id) + " needs >= 3 points");
        Polygon poly;
        poly.reserve(pointIds.size());
        for (const std::string& pid : pointIds) poly.push_back(geometry.point(pid));
        if (!polygonIsSimple(poly))
            throw SpecError("region " + std::to_string(id) + " polygon self-intersects");
        partition.regions[static_cast<size_t>(id - 1)] = std::move(poly);
    }
    if (!polygonsOverlap(partition.roi(19), partition.roi(18)))
        throw SpecError("regions 19 and 18 must overlap");
    if (!polygonsOverlap(partition.roi(22), partition.roi(23)))
        throw SpecError("regions 22 and 23 must overlap");
    return partition;
}

Point SimilarityTransform::apply(Point p) const {
    const double rad = rotationDeg * M_PI / 180.0;
    const double c = std::cos(rad) * scale;
    const double s = std::sin(rad) * scale;
    return {c * p.x - s * p.y + tx, s * p.x + c * p.y + ty};
}

namespace {

// Similarity mapping the pair (srcL, srcR) onto (dstL, dstR), solved in the
// complex plane: z -> w*z + t.
SimilarityTransform solveSimilarity(Point srcL, Point srcR, Point dstL, Point dstR) {
    const double sx = srcR.x - srcL.x, sy = srcR.y - srcL.y;
    const double dx = dstR.x - dstL.x, dy = dstR.y - dstL.y;
    const double denom = sx * sx + sy * sy;
    if (denom < 1e-12) throw ValidationError("degenerate eye geometry");
    const double wr = (dx * sx + dy * sy) / denom;
    const double wi = (dy * sx - dx * sy) / denom;

    SimilarityTransform t;
    t.scale = std::hypot(wr, wi);
    t.rotationDeg = std::atan2(wi, wr) * 180.0 / M_PI;
    t.tx = dstL.x - (wr * srcL.x - wi * srcL.y);
    t.ty = dstL.y - (wi * srcL.x + wr * srcL.y);
    return t;
}

}  // namespace

AlignedSequence alignByEyes(const std::vector<Frame>& frames,
                            const std::vector<std::vector<Point>>& perFrameLandmarks) {
    if (frames.empty()) throw InvalidInputError("empty frame sequence");
    if (perFrameLandmarks.size() != frames.size())
        throw ValidationError("landmark count does not match frame count");
    for (const auto& lm : perFrameLandmarks)
        if (lm.size() != 68) throw ValidationError("each frame needs 68 landmarks");

    auto eyePair = [](const std::vector<Point>& lm) {
        Point l, r;
        for (int i = 36; i <= 41; ++i) l = l + lm[static_cast<size_t>(i)];
        for (int i = 42; i <= 47; ++i) r = r + lm[static_cast<size_t>(i)];
        return std::pair{l * (1.0 / 6.0), r * (1.0 / 6.0)};
    };
    const auto [refL, refR] = eyePair(perFrameLandmarks[0]);

    AlignedSequence out;
    out.frames.reserve(frames.size());
    out.landmarks.reserve(frames.size());
    for (size_t i = 0; i < frames.size(); ++i) {
        const auto [curL, curR] = eyePair(perFrameLandmarks[i]);
        const SimilarityTransform t = solveSimilarity(curL, curR, refL, refR);

        const double rad = t.rotationDeg * M_PI / 180.0;
        const double c = std::cos(rad) * t.scale;
        const double s = std::sin(rad) * t.scale;
        cv::Mat m = (cv::Mat_<double>(2, 3) << c, -s, t.tx, s, c, t.ty);

        cv::Mat src(frames[i].height, frames[i].width, CV_32FC1,
                    const_cast<float*>(frames[i].pixels.data()));
        cv::Mat dst;
        cv::warpAffine(src, dst, m, src.size(), cv::INTER_LINEAR, cv::BORDER_REPLICATE);

        Frame warped(frames[i].width, frames[i].height);
        for (int y = 0; y < warped.height; ++y)
            for (int x = 0; x < warped.width; ++x)
                warped.at(x, y) = std::clamp(dst.at<float>(y, x), 0.f, 1.f);

        std::vector<Point> lm;
        lm.reserve(68);
        for (const Point& p : perFrameLandmarks[i]) lm.push_back(t.apply(p));

        out.frames.push_back(std::move(warped));
        out.landmarks.push_back(std::move(lm));
        out.transforms.push_back(t);
    }
    return out;
}

HeatMap buildHeatMap(const std::vector<HeatMapSequence>& sequences, const LmpConfig& cfg,
                     const std::string& classLabel) {
    if (sequences.empty()) throw InvalidInputError("no sequences");
    cfg.validate();

    HeatMap map;
    map.classLabel = classLabel;
    map.values.assign(HeatMap::kCols * HeatMap::kRows, 0.0);

    for (const HeatMapSequence& seq : sequences) {
        if (seq.frames.size() < 2) throw ValidationError("sequence needs >= 2 frames");
        const AlignedSequence aligned = alignByEyes(seq.frames, seq.landmarks);
        const FaceGeometry geom = makeGeometry(aligned.landmarks[0]);
        const double faceSize = geom.faceSize();
        const int w = aligned.frames[0].width;
        const int h = aligned.frames[0].height;

        std::vector<uint8_t> mask(HeatMap::kCols * HeatMap::kRows, 0);
        for (size_t t = 0; t + 1 < aligned.frames.size(); ++t) {
            const FlowField flow = computeFlow(aligned.frames[t], aligned.frames[t + 1]);
            for (int row = 0; row < HeatMap::kRows; ++row) {
                for (int col = 0; col < HeatMap::kCols; ++col) {
                    const Point center{(col + 0.5) * w / HeatMap::kCols,
                                       (row + 0.5) * h / HeatMap::kRows};
                    if (analyzeRegion(flow, center, cfg, faceSize))
                        mask[static_cast<size_t>(row) * HeatMap::kCols + col] = 1;
                }
            }
        }
        for (size_t i = 0; i < mask.size(); ++i) map.values[i] += mask[i];
    }
    for (double& v : map.values) v /= static_cast<double>(sequences.size());
    return map;
}

void writeHeatMapCsv(const HeatMap& map, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17);
    for (int row = 0; row < HeatMap::kRows; ++row) {
        for (int col = 0; col < HeatMap::kCols; ++col) {
            if (col) out << ',';
            out << map.at(col, row);
        }
        out << '\n';
    }
}

void writeHeatMapPng(const HeatMap& map, const std::string& path) {
    cv::Mat img(HeatMap::kRows, HeatMap::kCols, CV_8UC1);
    for (int row = 0; row < HeatMap::kRows; ++row)
        for (int col = 0; col < HeatMap::kCols; ++col)
            img.at<uint8_t>(row, col) =
                static_cast<uint8_t>(std::lround(std::clamp(map.at(col, row), 0.0, 1.0) * 255.0));
    if (!cv::imwrite(path, img)) throw IoError("cannot write " + path);
}

}  // namespace lmpkit
