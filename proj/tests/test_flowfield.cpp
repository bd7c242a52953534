#include <doctest.h>

#include <cmath>
#include <random>

#include "lmpkit/error.hpp"
#include "lmpkit/flowfield.hpp"
#include "lmpkit/synth.hpp"

using namespace lmpkit;

TEST_CASE("flow of identical frames is the zero field") {
    const Frame frame = makeTexture(96, 96, 7);
    const FlowField flow = computeFlow(frame, frame);
    double maxComp = 0.0;
    for (size_t i = 0; i < flow.dx.size(); ++i) {
        maxComp = std::max(maxComp, std::abs(static_cast<double>(flow.dx[i])));
        maxComp = std::max(maxComp, std::abs(static_cast<double>(flow.dy[i])));
    }
    CHECK(maxComp < 1e-3);
}

static void checkTranslation(int sx, int sy) {
    const FramePair pair = makeFramePair(sx, sy, 128, 128, 42);
    const FlowField flow = computeFlow(pair.prev, pair.next);
    double sumX = 0.0, sumY = 0.0;
    long count = 0;
    const int margin = 16;
    for (int y = margin; y < flow.height - margin; ++y) {
        for (int x = margin; x < flow.width - margin; ++x) {
            sumX += flow.dx[flow.idx(x, y)];
            sumY += flow.dy[flow.idx(x, y)];
            ++count;
        }
    }
    CHECK(std::abs(sumX / count - sx) < 0.5);
    CHECK(std::abs(sumY / count - sy) < 0.5);
}

TEST_CASE("flow recovers synthetic translations") {
    checkTranslation(3, 0);
    checkTranslation(0, -2);
}

TEST_CASE("flow rejects mismatched frame dimensions") {
    const Frame a(32, 32, 0.5f);
    const Frame b(32, 48, 0.5f);
    CHECK_THROWS_AS(computeFlow(a, b), InvalidInputError);
}

TEST_CASE("flo round trip is bit exact") {
    FlowField one(1, 1);
    const auto bytes = writeFlo(one);
    CHECK(bytes.size() == 12 + 8);
    CHECK(writeFlo(readFlo(bytes)) == bytes);

    FlowField four(2, 2);
    four.dx = {0.5f, -1.25f, 3e-7f, 1e9f};
    four.dy = {-0.5f, 2.75f, -3e-7f, -1e9f};
    const auto bytes4 = writeFlo(four);
    const FlowField back = readFlo(bytes4);
    CHECK(back.width == 2);
    CHECK(back.height == 2);
    CHECK(back.dx == four.dx);
    CHECK(back.dy == four.dy);
    CHECK(writeFlo(back) == bytes4);
}

TEST_CASE("flo reader rejects bad payloads") {
    auto bytes = writeFlo(FlowField(1, 1));
    bytes[0] = 'X';
    CHECK_THROWS_AS(readFlo(bytes), FormatError);

    auto truncated = writeFlo(FlowField(2, 2));
    truncated.pop_back();
    CHECK_THROWS_AS(readFlo(truncated), FormatError);
}

TEST_CASE("sampleRegion bins uniform rightward motion into bin 0") {
    SynthSpec spec;
    spec.magnitude = 1.0;
    const FlowField flow = makeFlow(spec, 10, 10);
    const RegionHistogram h = sampleRegion(flow, {5, 5}, 10, 9, 10.0);
    CHECK(h.samples.size() == 100);
    for (const auto& [bin, mag] : h.samples) {
        CHECK(bin == 0);
        CHECK(mag == doctest::Approx(1.0));
    }
}

TEST_CASE("sampleRegion respects the screen angle convention") {
    // (0, 1) points down on screen = 270 degrees
    FlowField flow(12, 12);
    std::fill(flow.dy.begin(), flow.dy.end(), 1.f);
    const RegionHistogram h = sampleRegion(flow, {6, 6}, 8, 9, 10.0);
    const int expectedBin = static_cast<int>(270.0 / (360.0 / 9));
    for (const auto& [bin, mag] : h.samples) CHECK(bin == expectedBin);
}

TEST_CASE("sampleRegion clamps magnitudes to the cap") {
    FlowField flow(16, 16);
    flow.dx[flow.idx(8, 8)] = 50.f;
    const RegionHistogram h = sampleRegion(flow, {8, 8}, 4, 9, 10.0);
    REQUIRE(h.samples.size() == 1);  // zero-magnitude pixels yield no samples
    CHECK(h.samples[0].second == doctest::Approx(10.0));
}

TEST_CASE("sampleRegion counts only moving pixels") {
    FlowField flow(20, 20);
    int moving = 0;
    std::mt19937 rng(3);
    for (int y = 5; y < 15; ++y) {
        for (int x = 5; x < 15; ++x) {
            if (rng() % 2) {
                flow.dx[flow.idx(x, y)] = 1.f;
                ++moving;
            }
        }
    }
    const RegionHistogram h = sampleRegion(flow, {10, 10}, 10, 9, 10.0);
    CHECK(static_cast<int>(h.samples.size()) == moving);
}

TEST_CASE("rotating vectors by one bin width shifts every sample bin by one") {
    const int B = 9;
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> binPick(0, B - 1);
    for (int trial = 0; trial < 5; ++trial) {
        SynthSpec spec;
        spec.directionDeg = (binPick(rng) + 0.5) * 360.0 / B;  // bin center
        spec.magnitude = 1.3;
        const FlowField flow = makeFlow(spec, 16, 16);
        const FlowField rotated = rotateVectors(flow, 360.0 / B);
        const RegionHistogram a = sampleRegion(flow, {8, 8}, 8, B, 10.0);
        const RegionHistogram b = sampleRegion(rotated, {8, 8}, 8, B, 10.0);
        REQUIRE(a.samples.size() == b.samples.size());
        for (size_t i = 0; i < a.samples.size(); ++i)
            CHECK(b.samples[i].first == (a.samples[i].first + 1) % B);
    }
}

TEST_CASE("sampleRegion rejects an empty intersection") {
    const FlowField flow(16, 16);
    CHECK_THROWS_AS(sampleRegion(flow, {100, 100}, 4, 9, 10.0), GeometryError);
}
