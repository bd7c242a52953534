#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "lmpkit/error.hpp"
#include "lmpkit/face.hpp"
#include "lmpkit/synth.hpp"

using namespace lmpkit;

namespace {

const std::string kFixture = std::string(LMPKIT_FIXTURE_DIR) + "/face68.txt";

std::vector<Point> fixtureLandmarks() { return loadLandmarks(kFixture).landmarks; }

std::vector<Point> mapPoints(const std::vector<Point>& pts, double rotDeg, double scale,
                             Point shift) {
    const double c = std::cos(rotDeg * M_PI / 180.0) * scale;
    const double s = std::sin(rotDeg * M_PI / 180.0) * scale;
    std::vector<Point> out;
    out.reserve(pts.size());
    for (Point p : pts) out.push_back({c * p.x - s * p.y + shift.x, s * p.x + c * p.y + shift.y});
    return out;
}

}  // namespace

TEST_CASE("landmark fixture loads with the expected geometry") {
    const FaceGeometry geo = loadLandmarks(kFixture, 400, 480);
    CHECK(geo.landmarks.size() == 68);
    CHECK(geo.interOcular == doctest::Approx(100.0));
    CHECK(geo.faceCenter.x == doctest::Approx(200.0));
    CHECK(geo.faceCenter.y == doctest::Approx(205.0));
    CHECK(geo.faceSize() == doctest::Approx(240.0));
    CHECK(geo.eyeCenterLeft().x == doctest::Approx(150.0));
    CHECK(geo.eyeCenterRight().x == doctest::Approx(250.0));
    CHECK(geo.point("L33").y == doctest::Approx(277.0));
    CHECK_THROWS_AS(geo.point("L68"), SpecError);
    CHECK_THROWS_AS(geo.point("Z"), SpecError);
}

TEST_CASE("landmark reader rejects malformed files") {
    const std::string path = "short68.txt";
    {
        std::ofstream out(path);
        for (int i = 0; i < 67; ++i) out << i << " " << i << "\n";
    }
    CHECK_THROWS_AS(loadLandmarks(path), FormatError);
    std::remove(path.c_str());

    CHECK_THROWS_AS(loadLandmarks("does-not-exist.txt"), IoError);
    // in-bounds for a large frame, out of bounds for a small one
    CHECK_THROWS_AS(loadLandmarks(kFixture, 300, 300), ValidationError);
}

TEST_CASE("derived points use the documented midpoints and offsets") {
    std::vector<Point> pts(68, Point{200, 200});
    // non-degenerate eyes and nose bridge
    for (int i = 36; i < 42; ++i) pts[static_cast<size_t>(i)] = {150, 205};
    for (int i = 42; i < 48; ++i) pts[static_cast<size_t>(i)] = {250, 205};
    pts[27] = {50, 40};
    pts[33] = {50, 80};  // |P27 P33| = 40 -> forehead offset 10
    pts[10] = {10, 90};
    pts[55] = {60, 70};
    pts[6] = {20, 100};
    pts[59] = {40, 60};
    pts[17] = {120, 180};
    const auto derived = derivePoints(pts);
    CHECK(derived.at("Q_R").x == doctest::Approx(35.0));
    CHECK(derived.at("Q_R").y == doctest::Approx(80.0));
    CHECK(derived.at("Q_L").x == doctest::Approx(30.0));
    CHECK(derived.at("Q_L").y == doctest::Approx(80.0));
    // inter-ocular axis is horizontal, so A..F shift straight up on screen
    CHECK(derived.at("A").x == doctest::Approx(120.0));
    CHECK(derived.at("A").y == doctest::Approx(170.0));

    std::vector<Point> degenerate(68, Point{1, 1});
    CHECK_THROWS_AS(derivePoints(degenerate), ValidationError);
}

TEST_CASE("derived points follow similarity transforms of the landmarks") {
    const std::vector<Point> base = fixtureLandmarks();
    const auto origin = derivePoints(base);
    const auto moved = derivePoints(mapPoints(base, 10.0, 1.3, {15, -8}));
    for (const auto& [name, p] : origin) {
        const Point expect = mapPoints({p}, 10.0, 1.3, {15, -8})[0];
        CHECK(moved.at(name).x == doctest::Approx(expect.x).epsilon(1e-9));
        CHECK(moved.at(name).y == doctest::Approx(expect.y).epsilon(1e-9));
    }
}

TEST_CASE("the default partition yields 25 simple overlapping-where-required regions") {
    const FaceGeometry geo = makeGeometry(fixtureLandmarks());
    const RoiPartition rois = buildRois(geo);
    REQUIRE(rois.regions.size() == 25);
    for (int id = 1; id <= 25; ++id) {
        CHECK(rois.roi(id).size() >= 3);
        CHECK(polygonIsSimple(rois.roi(id)));
        CHECK(std::abs(polygonArea(rois.roi(id))) > 0.0);
    }
    CHECK(polygonsOverlap(rois.roi(19), rois.roi(18)));
    CHECK(polygonsOverlap(rois.roi(22), rois.roi(23)));
}

TEST_CASE("the shipped partition spec file matches the built-in default") {
    const RoiSpec fromFile =
        roiSpecFromJsonFile(std::string(LMPKIT_FIXTURE_DIR) + "/../../data/roi_default.json");
    CHECK(fromFile == defaultRoiSpec());
}

TEST_CASE("partition specs with the wrong region count are rejected") {
    RoiSpec spec = defaultRoiSpec();
    spec.erase(25);
    CHECK_THROWS_AS(buildRois(makeGeometry(fixtureLandmarks()), spec), SpecError);

    spec = defaultRoiSpec();
    spec[12] = {"L0", "L1"};  // fewer than three vertices
    CHECK_THROWS_AS(buildRois(makeGeometry(fixtureLandmarks()), spec), SpecError);
}

TEST_CASE("region areas scale quadratically with the face") {
    const std::vector<Point> base = fixtureLandmarks();
    const RoiPartition small = buildRois(makeGeometry(base));
    const RoiPartition big = buildRois(makeGeometry(mapPoints(base, 0.0, 2.0, {0, 0})));
    for (int id = 1; id <= 25; ++id)
        CHECK(std::abs(polygonArea(big.roi(id))) ==
              doctest::Approx(4.0 * std::abs(polygonArea(small.roi(id)))).epsilon(1e-9));
}

TEST_CASE("alignByEyes is the identity for a steady sequence") {
    const Frame frame = makeTexture(80, 80, 3);
    std::vector<Point> pts(68, Point{40, 40});
    for (int i = 36; i < 42; ++i) pts[static_cast<size_t>(i)] = {30, 40};
    for (int i = 42; i < 48; ++i) pts[static_cast<size_t>(i)] = {50, 40};
    const AlignedSequence seq = alignByEyes({frame, frame}, {pts, pts});
    REQUIRE(seq.transforms.size() == 2);
    CHECK(seq.transforms[1].rotationDeg == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(seq.transforms[1].scale == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(seq.transforms[1].tx == doctest::Approx(0.0).epsilon(1e-9));
    for (size_t i = 0; i < frame.pixels.size(); ++i)
        CHECK(seq.frames[1].pixels[i] == doctest::Approx(frame.pixels[i]).epsilon(1e-4));
}

TEST_CASE("alignByEyes undoes in-plane rotation and scale of the landmarks") {
    const std::vector<Point> base = fixtureLandmarks();
    const Frame frame = makeTexture(400, 480, 5);
    const std::vector<Point> turned = mapPoints(base, -5.0, 1.1, {4, -2});
    const AlignedSequence seq = alignByEyes({frame, frame}, {base, turned});
    CHECK(seq.transforms[1].rotationDeg == doctest::Approx(5.0).epsilon(1e-3));
    CHECK(seq.transforms[1].scale == doctest::Approx(1.0 / 1.1).epsilon(1e-3));
    // transformed landmarks land back on the reference eye centers
    const FaceGeometry ref = makeGeometry(base);
    const FaceGeometry out = makeGeometry(seq.landmarks[1]);
    CHECK(dist(out.eyeCenterLeft(), ref.eyeCenterLeft()) < 1e-6);
    CHECK(dist(out.eyeCenterRight(), ref.eyeCenterRight()) < 1e-6);
}

TEST_CASE("heat map of a motionless class is all zero") {
    LmpConfig cfg;
    cfg.intensityAlpha = 5;
    const Frame frame = makeTexture(100, 120, 9);
    std::vector<Point> pts = mapPoints(fixtureLandmarks(), 0.0, 0.25, {0, 0});
    const HeatMap map = buildHeatMap({{{frame, frame}, {pts, pts}}}, cfg, "neutral");
    CHECK(map.classLabel == "neutral");
    REQUIRE(map.values.size() == HeatMap::kCols * HeatMap::kRows);
    for (double v : map.values) CHECK(v == 0.0);
}

TEST_CASE("heat map averages per-sequence activation masks") {
    LmpConfig cfg;
    cfg.intensityAlpha = 5;
    cfg.lambdaFrac = 0.05;
    const FramePair pair = makeFramePair(2, 0, 100, 120, 11);
    std::vector<Point> pts = mapPoints(fixtureLandmarks(), 0.0, 0.25, {0, 0});
    const HeatMapSequence moving{{pair.prev, pair.next}, {pts, pts}};
    const HeatMapSequence still{{pair.prev, pair.prev}, {pts, pts}};

    const HeatMap hot = buildHeatMap({moving}, cfg, "m");
    int ones = 0;
    for (double v : hot.values) {
        CHECK((v == 0.0 || v == 1.0));
        if (v == 1.0) ++ones;
    }
    CHECK(ones > static_cast<int>(hot.values.size()) / 2);
    CHECK(hot.at(HeatMap::kCols / 2, HeatMap::kRows / 2) == 1.0);

    const HeatMap mixed = buildHeatMap({moving, still}, cfg, "m");
    CHECK(mixed.at(HeatMap::kCols / 2, HeatMap::kRows / 2) == doctest::Approx(0.5));
}
