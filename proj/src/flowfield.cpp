#include "lmpkit/flowfield.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/video/tracking.hpp>

#include <cmath>
#include <cstring>
#include <fstream>

#include "lmpkit/error.hpp"

namespace lmpkit {

Frame::Frame(int w, int h, float fill)
    : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {}

void Frame::validate() const {
    if (width < 16 || height < 16)
        throw ValidationError("frame must be at least 16x16");
    if (pixels.size() != static_cast<size_t>(width) * height)
        throw ValidationError("pixel buffer size does not match dimensions");
    for (float p : pixels)
        if (!(p >= 0.f && p <= 1.f)) throw ValidationError("intensity outside [0,1]");
}

FlowField::FlowField(int w, int h)
    : width(w), height(h),
      dx(static_cast<size_t>(w) * h, 0.f),
      dy(static_cast<size_t>(w) * h, 0.f) {}

FlowField computeFlow(const Frame& prev, const Frame& next, const FlowParams& params) {
    if (prev.width != next.width || prev.height != next.height)
        throw InvalidInputError("frame dimensions differ");
    prev.validate();
    next.validate();

    // Farneback emits ~0.1 px border noise even for a still scene; no change
    // between the frames trivially means no motion.
    if (prev.pixels == next.pixels) return FlowField(prev.width, prev.height);

    cv::Mat a(prev.height, prev.width, CV_8UC1);
    cv::Mat b(next.height, next.width, CV_8UC1);
    for (int y = 0; y < prev.height; ++y) {
        for (int x = 0; x < prev.width; ++x) {
            a.at<uint8_t>(y, x) = static_cast<uint8_t>(std::lround(prev.at(x, y) * 255.f));
            b.at<uint8_t>(y, x) = static_cast<uint8_t>(std::lround(next.at(x, y) * 255.f));
        }
    }
    cv::Mat flow;
    cv::calcOpticalFlowFarneback(a, b, flow, params.pyramidScale, params.pyramidLevels,
                                 params.windowSize, params.iterations, params.polyN,
                                 params.polySigma, 0);

    FlowField out(prev.width, prev.height);
    for (int y = 0; y < prev.height; ++y) {
        for (int x = 0; x < prev.width; ++x) {
            const cv::Point2f v = flow.at<cv::Point2f>(y, x);
            if (!std::isfinite(v.x) || !std::isfinite(v.y))
                throw ValidationError("non-finite flow component");
            out.dx[out.idx(x, y)] = v.x;
            out.dy[out.idx(x, y)] = v.y;
        }
    }
    return out;
}

namespace {

template <typename T>
T readLE(const uint8_t* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;  // host is little-endian on all supported targets
}

template <typename T>
void appendLE(std::vector<uint8_t>& out, T v) {
    uint8_t buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.insert(out.end(), buf, buf + sizeof(T));
}

}  // namespace

FlowField readFlo(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 12) throw FormatError(".flo payload truncated");
    if (std::memcmp(bytes.data(), "PIEH", 4) != 0) throw FormatError("bad .flo magic");
    const int32_t w = readLE<int32_t>(bytes.data() + 4);
    const int32_t h = readLE<int32_t>(bytes.data() + 8);
    if (w <= 0 || h <= 0) throw FormatError("bad .flo dimensions");
    const size_t expect = 12 + static_cast<size_t>(w) * h * 8;
    if (bytes.size() != expect) throw FormatError(".flo payload size mismatch");

    FlowField flow(w, h);
    const uint8_t* p = bytes.data() + 12;
    for (size_t i = 0; i < static_cast<size_t>(w) * h; ++i) {
        flow.dx[i] = readLE<float>(p);
        flow.dy[i] = readLE<float>(p + 4);
        p += 8;
    }
    return flow;
}

std::vector<uint8_t> writeFlo(const FlowField& flow) {
    std::vector<uint8_t> out;
    out.reserve(12 + static_cast<size_t>(flow.width) * flow.height * 8);
    out.insert(out.end(), {'P', 'I', 'E', 'H'});
    appendLE<int32_t>(out, flow.width);
    appendLE<int32_t>(out, flow.height);
    for (size_t i = 0; i < flow.dx.size(); ++i) {
        appendLE<float>(out, flow.dx[i]);
        appendLE<float>(out, flow.dy[i]);
    }
    return out;
}

FlowField readFloFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return readFlo(bytes);
}

void writeFloFile(const FlowField& flow, const std::string& path) {
    const std::vector<uint8_t> bytes = writeFlo(flow);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

double flowDirectionDeg(double dx, double dy) {
    double deg = std::atan2(-dy, dx) * 180.0 / M_PI;
    deg = std::fmod(deg + 360.0, 360.0);
    if (deg >= 360.0) deg -= 360.0;
    return deg;
}

int directionBin(double dx, double dy, int binCount) {
    const double deg = flowDirectionDeg(dx, dy);
    int bin = static_cast<int>(deg / (360.0 / binCount));
    if (bin >= binCount) bin = binCount - 1;
    return bin;
}

RegionHistogram sampleRegion(const FlowField& flow, Point center, int sidePx, int binCount,
                             double magnitudeCap) {
    if (binCount < 4) throw InvalidInputError("bin count must be >= 4");
    if (sidePx < 1) throw InvalidInputError("region side must be >= 1 px");
    const int cx = static_cast<int>(std::lround(center.x));
    const int cy = static_cast<int>(std::lround(center.y));
    const int x0 = std::max(0, cx - sidePx / 2);
    const int y0 = std::max(0, cy - sidePx / 2);
    const int x1 = std::min(flow.width, cx - sidePx / 2 + sidePx);
    const int y1 = std::min(flow.height, cy - sidePx / 2 + sidePx);
    if (x0 >= x1 || y0 >= y1) throw GeometryError("region does not intersect the flow field");

    RegionHistogram h;
    h.binCount = binCount;
    h.samples.reserve(static_cast<size_t>(x1 - x0) * (y1 - y0));
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            const double vx = flow.dx[flow.idx(x, y)];
            const double vy = flow.dy[flow.idx(x, y)];
            const double mag = std::hypot(vx, vy);
            if (mag <= 0.0) continue;
            h.samples.emplace_back(directionBin(vx, vy, binCount), std::min(mag, magnitudeCap));
        }
    }
    return h;
}

Frame readFrame(const std::string& path) {
    cv::Mat img = cv::imread(path, cv::IMREAD_GRAYSCALE);
    if (img.empty()) throw IoError("cannot read image " + path);
    Frame frame(img.cols, img.rows);
    for (int y = 0; y < img.rows; ++y)
        for (int x = 0; x < img.cols; ++x)
            frame.at(x, y) = static_cast<float>(img.at<uint8_t>(y, x)) / 255.f;
    return frame;
}

void writeFrame(const Frame& frame, const std::string& path) {
    cv::Mat img(frame.height, frame.width, CV_8UC1);
    for (int y = 0; y < frame.height; ++y)
        for (int x = 0; x < frame.width; ++x)
            img.at<uint8_t>(y, x) = static_cast<uint8_t>(std::lround(frame.at(x, y) * 255.f));
    if (!cv::imwrite(path, img)) throw IoError("cannot write image " + path);
}

}  // namespace lmpkit
