#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "lmpkit/error.hpp"
#include "lmpkit/face.hpp"
#include "lmpkit/features.hpp"
#include "lmpkit/synth.hpp"

using namespace lmpkit;

namespace {

const std::string kFixture = std::string(LMPKIT_FIXTURE_DIR) + "/face68.txt";

LmpConfig featureConfig() {
    LmpConfig cfg;
    cfg.intensityAlpha = 30;
    cfg.betaIters = 2;
    cfg.lambdaFrac = 0.04;
    return cfg;
}

std::vector<Point> scaledLandmarks(double s) {
    std::vector<Point> pts = loadLandmarks(kFixture).landmarks;
    for (Point& p : pts) p = p * s;
    return pts;
}

}  // namespace

TEST_CASE("roiMotion is zero without flow and positive under confined motion") {
    const LmpConfig cfg = featureConfig();
    const FaceGeometry geo = makeGeometry(scaledLandmarks(0.5));  // 200 x 240 face box
    const RoiPartition rois = buildRois(geo);

    const FlowField still(200, 240);
    const auto quiet = roiMotion(still, rois.roi(24), cfg, geo.faceSize());
    REQUIRE(static_cast<int>(quiet.size()) == cfg.binCount);
    for (double v : quiet) CHECK(v == 0.0);

    // blob centered on the mouth region: the mouth responds, the forehead does not
    SynthSpec spec;
    spec.kind = SynthKind::GaussianBlob;
    spec.blobCenter = polygonCentroid(rois.roi(24));
    spec.blobSigma = 6.0;
    spec.magnitude = 2.0;
    const FlowField flow = makeFlow(spec, 200, 240);
    const auto mouth = roiMotion(flow, rois.roi(24), cfg, geo.faceSize());
    CHECK(std::accumulate(mouth.begin(), mouth.end(), 0.0) > 0.0);
    const auto forehead = roiMotion(flow, rois.roi(3), cfg, geo.faceSize());
    for (double v : forehead) CHECK(v == 0.0);
}

TEST_CASE("frameMotion reports all 25 regions") {
    const LmpConfig cfg = featureConfig();
    const FaceGeometry geo = makeGeometry(scaledLandmarks(0.5));
    const RoiPartition rois = buildRois(geo);
    const auto perRoi = frameMotion(FlowField(200, 240), rois, cfg, geo.faceSize());
    REQUIRE(perRoi.size() == 25);
    for (const auto& h : perRoi) CHECK(static_cast<int>(h.size()) == cfg.binCount);
}

TEST_CASE("accumulate sums frames element-wise in ROI-major order") {
    std::vector<std::vector<double>> f1(25, std::vector<double>(9, 0.0));
    std::vector<std::vector<double>> f2 = f1;
    f1[3][2] = 5.0;
    f2[3][2] = 2.0;
    f2[24][8] = 1.0;

    const GmdVector one = accumulate({f1}, "a");
    CHECK(one.values.size() == 25 * 9);
    CHECK(one.binCount == 9);
    CHECK(one.frameCount == 1);
    CHECK(one.sequenceId == "a");
    CHECK(one.values[3 * 9 + 2] == 5.0);

    const GmdVector both = accumulate({f1, f2});
    CHECK(both.frameCount == 2);
    CHECK(both.values[3 * 9 + 2] == 7.0);
    CHECK(both.values[24 * 9 + 8] == 1.0);

    const GmdVector swapped = accumulate({f2, f1});
    CHECK(swapped.values == both.values);

    std::vector<std::vector<double>> ragged = f1;
    ragged[5].resize(8);
    CHECK_THROWS_AS(accumulate({ragged}), ValidationError);
    f1[0][0] = -1.0;
    CHECK_THROWS_AS(accumulate({f1}), ValidationError);
}

TEST_CASE("geometric features are invariant to translation and scale") {
    const std::vector<Point> base = loadLandmarks(kFixture).landmarks;
    std::vector<Point> moved = base;
    for (Point& p : moved) p = p * 1.7 + Point{31, -12};

    const FaceGeometry g1 = makeGeometry(base);
    const FaceGeometry g2 = makeGeometry(moved);
    const GeoVector v1 = geoFeatures(g1, buildRois(g1));
    const GeoVector v2 = geoFeatures(g2, buildRois(g2));
    REQUIRE(v1.values.size() == 75);
    REQUIRE(v2.values.size() == 75);
    for (size_t i = 0; i < v1.values.size(); ++i)
        CHECK(v2.values[i] == doctest::Approx(v1.values[i]).epsilon(1e-9));
}

TEST_CASE("fuse concatenates motion then shape") {
    GmdVector gmd;
    gmd.binCount = 12;
    gmd.values.assign(25 * 12, 0.5);
    GeoVector geo;
    geo.values.assign(75, -1.0);
    const auto fused = fuse(gmd, geo);
    REQUIRE(fused.size() == 25 * 12 + 75);
    CHECK(fused[0] == 0.5);
    CHECK(fused[25 * 12] == -1.0);
    CHECK(fused.back() == -1.0);
}

TEST_CASE("feature csv round trips rows exactly") {
    std::vector<FeatureRow> rows;
    rows.push_back({"seq1", "happy", "s01", {1.0, -2.5, 3.25e-17}});
    rows.push_back({"seq2", "sad", "s02", {0.0, 7.0, 1.0 / 3.0}});
    const std::string path = "features_roundtrip.csv";
    writeFeatureCsv(rows, path);
    const auto back = readFeatureCsv(path);
    std::remove(path.c_str());
    REQUIRE(back.size() == 2);
    CHECK(back[0].id == "seq1");
    CHECK(back[0].label == "happy");
    CHECK(back[1].subject == "s02");
    for (size_t r = 0; r < rows.size(); ++r) {
        REQUIRE(back[r].features.size() == rows[r].features.size());
        for (size_t i = 0; i < rows[r].features.size(); ++i)
            CHECK(back[r].features[i] == rows[r].features[i]);
    }
    CHECK_THROWS_AS(readFeatureCsv("missing_features.csv"), IoError);
}
