#include "lmpkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "lmpkit/error.hpp"

namespace lmpkit {

namespace {

const char* kindName(SynthKind kind) {
    switch (kind) {
        case SynthKind::UniformTranslation: return "uniform-translation";
        case SynthKind::GaussianBlob: return "gaussian-blob";
        case SynthKind::Diverging: return "diverging";
        case SynthKind::RandomNoise: return "random-noise";
        case SynthKind::RotatedCopy: return "rotated-copy";
    }
    throw SpecError("unknown synth kind");
}

SynthKind kindFromName(const std::string& name) {
    for (SynthKind k : {SynthKind::UniformTranslation, SynthKind::GaussianBlob,
                        SynthKind::Diverging, SynthKind::RandomNoise, SynthKind::RotatedCopy})
        if (name == kindName(k)) return k;
    throw SpecError("unknown synth kind: " + name);
}

// Screen convention: 90 degrees points up, y grows downward.
std::pair<double, double> directionVector(double degrees) {
    const double rad = degrees * M_PI / 180.0;
    return {std::cos(rad), -std::sin(rad)};
}

}  // namespace

std::string SynthSpec::toJson() const {
    nlohmann::ordered_json j;
    j["kind"] = kindName(kind);
    j["direction_deg"] = directionDeg;
    j["magnitude"] = magnitude;
    j["blob_center"] = {blobCenter.x, blobCenter.y};
    j["blob_sigma"] = blobSigma;
    j["rotation_deg"] = rotationDeg;
    j["seed"] = seed;
    return j.dump(2) + "\n";
}

SynthSpec SynthSpec::fromJson(const std::string& json) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json);
    } catch (const std::exception& e) {
        throw FormatError(std::string("synth spec parse error: ") + e.what());
    }
    SynthSpec spec;
    spec.kind = kindFromName(j.at("kind").get<std::string>());
    spec.directionDeg = j.value("direction_deg", 0.0);
    spec.magnitude = j.value("magnitude", 1.0);
    if (j.contains("blob_center")) {
        spec.blobCenter = {j["blob_center"][0].get<double>(), j["blob_center"][1].get<double>()};
    }
    spec.blobSigma = j.value("blob_sigma", 10.0);
    spec.rotationDeg = j.value("rotation_deg", 0.0);
    spec.seed = j.value("seed", uint64_t{0});
    return spec;
}

FlowField makeFlow(const SynthSpec& spec, int width, int height) {
    if (spec.magnitude < 0.0) throw SpecError("magnitude must be >= 0");
    FlowField flow(width, height);
    switch (spec.kind) {
        case SynthKind::UniformTranslation: {
            const auto [ux, uy] = directionVector(spec.directionDeg);
            std::fill(flow.dx.begin(), flow.dx.end(), static_cast<float>(ux * spec.magnitude));
            std::fill(flow.dy.begin(), flow.dy.end(), static_cast<float>(uy * spec.magnitude));
            break;
        }
        case SynthKind::GaussianBlob: {
            if (!(spec.blobSigma > 0.0)) throw SpecError("blob sigma must be positive");
            const auto [ux, uy] = directionVector(spec.directionDeg);
            for (int y = 0; y < height; ++y) {
                for (int x = 0; x < width; ++x) {
                    const double dxc = x - spec.blobCenter.x;
                    const double dyc = y - spec.blobCenter.y;
                    const double r2 = dxc * dxc + dyc * dyc;
                    const double m = spec.magnitude * std::exp(-r2 / (2.0 * spec.blobSigma * spec.blobSigma));
                    flow.dx[flow.idx(x, y)] = static_cast<float>(ux * m);
                    flow.dy[flow.idx(x, y)] = static_cast<float>(uy * m);
                }
            }
            break;
        }
        case SynthKind::Diverging: {
            for (int y = 0; y < height; ++y) {
                for (int x = 0; x < width; ++x) {
                    const double dxc = x - spec.blobCenter.x;
                    const double dyc = y - spec.blobCenter.y;
                    const double r = std::hypot(dxc, dyc);
                    if (r < 1e-9) continue;
                    flow.dx[flow.idx(x, y)] = static_cast<float>(spec.magnitude * dxc / r);
                    flow.dy[flow.idx(x, y)] = static_cast<float>(spec.magnitude * dyc / r);
                }
            }
            break;
        }
        case SynthKind::RandomNoise: {
            std::mt19937_64 rng(spec.seed);
            std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
            std::uniform_real_distribution<double> mag(0.0, spec.magnitude);
            for (size_t i = 0; i < flow.dx.size(); ++i) {
                const double a = angle(rng);
                const double m = mag(rng);
                flow.dx[i] = static_cast<float>(m * std::cos(a));
                flow.dy[i] = static_cast<float>(-m * std::sin(a));
            }
            break;
        }
        case SynthKind::RotatedCopy: {
            SynthSpec base = spec;
            base.kind = SynthKind::UniformTranslation;
            return rotateVectors(makeFlow(base, width, height), spec.rotationDeg);
        }
    }
    return flow;
}

FlowField rotateVectors(const FlowField& flow, double degrees) {
    const double rad = degrees * M_PI / 180.0;
    // Counter-clockwise on screen with y down: (dx, dy) -> (c*dx + s*dy, -s*dx + c*dy)
    const double c = std::cos(rad), s = std::sin(rad);
    FlowField out(flow.width, flow.height);
    for (size_t i = 0; i < flow.dx.size(); ++i) {
        const double dx = flow.dx[i], dy = flow.dy[i];
        out.dx[i] = static_cast<float>(c * dx + s * dy);
        out.dy[i] = static_cast<float>(-s * dx + c * dy);
    }
    return out;
}

Frame makeTexture(int width, int height, uint64_t seed) {
    // Band-limited noise: white noise box-blurred twice so local gradients stay
    // informative for flow estimation.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> uni(0.f, 1.f);
    std::vector<float> noise(static_cast<size_t>(width) * height);
    for (float& v : noise) v = uni(rng);

    auto blur = [&](const std::vector<float>& in) {
        std::vector<float> out(in.size());
        const int radius = 2;
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                float acc = 0.f;
                int cnt = 0;
                for (int oy = -radius; oy <= radius; ++oy) {
                    for (int ox = -radius; ox <= radius; ++ox) {
                        const int sx = std::clamp(x + ox, 0, width - 1);
                        const int sy = std::clamp(y + oy, 0, height - 1);
                        acc += in[static_cast<size_t>(sy) * width + sx];
                        ++cnt;
                    }
                }
                out[static_cast<size_t>(y) * width + x] = acc / cnt;
            }
        }
        return out;
    };
    noise = blur(blur(noise));

    // stretch to [0.05, 0.95] for contrast
    float lo = 1.f, hi = 0.f;
    for (float v : noise) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Frame frame(width, height);
    const float range = std::max(hi - lo, 1e-6f);
    for (size_t i = 0; i < noise.size(); ++i)
        frame.pixels[i] = 0.05f + 0.9f * (noise[i] - lo) / range;
    return frame;
}

FramePair makeFramePair(int shiftX, int shiftY, int width, int height, uint64_t textureSeed) {
    FramePair pair;
    pair.shiftX = shiftX;
    pair.shiftY = shiftY;
    pair.prev = makeTexture(width, height, textureSeed);
    pair.next = Frame(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int sx = std::clamp(x - shiftX, 0, width - 1);
            const int sy = std::clamp(y - shiftY, 0, height - 1);
            pair.next.at(x, y) = pair.prev.at(sx, sy);
        }
    }
    return pair;
}

Frame warpByFlow(const Frame& frame, const FlowField& flow) {
    if (frame.width != flow.width || frame.height != flow.height)
        throw InvalidInputError("frame and flow dimensions differ");
    Frame out(frame.width, frame.height);
    auto sample = [&](double x, double y) {
        x = std::clamp(x, 0.0, frame.width - 1.0);
        y = std::clamp(y, 0.0, frame.height - 1.0);
        const int x0 = static_cast<int>(x);
        const int y0 = static_cast<int>(y);
        const int x1 = std::min(x0 + 1, frame.width - 1);
        const int y1 = std::min(y0 + 1, frame.height - 1);
        const double fx = x - x0, fy = y - y0;
        return static_cast<float>((1 - fx) * (1 - fy) * frame.at(x0, y0) +
                                  fx * (1 - fy) * frame.at(x1, y0) +
                                  (1 - fx) * fy * frame.at(x0, y1) + fx * fy * frame.at(x1, y1));
    };
    for (int y = 0; y < frame.height; ++y)
        for (int x = 0; x < frame.width; ++x)
            out.at(x, y) = sample(x - flow.dx[flow.idx(x, y)], y - flow.dy[flow.idx(x, y)]);
    return out;
}

std::vector<LabeledSample> makeDataset(int nClasses, int perClass, int dim, double separation,
                                       uint64_t seed, int nSubjects) {
    if (nClasses < 1 || perClass < 1 || dim < 1) throw InvalidInputError("bad dataset shape");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Scaled standard-basis centers give exact pairwise distance `separation`.
    std::vector<std::vector<double>> centers(static_cast<size_t>(nClasses),
                                             std::vector<double>(static_cast<size_t>(dim), 0.0));
    for (int c = 0; c < nClasses; ++c)
        centers[static_cast<size_t>(c)][static_cast<size_t>(c % dim)] = separation / std::sqrt(2.0);

    std::vector<LabeledSample> samples;
    samples.reserve(static_cast<size_t>(nClasses) * perClass);
    int counter = 0;
    for (int c = 0; c < nClasses; ++c) {
        for (int i = 0; i < perClass; ++i) {
            LabeledSample s;
            s.label = c;
            s.subject = "s" + std::to_string(counter % nSubjects);
            s.id = "seq" + std::to_string(counter);
            s.features.resize(static_cast<size_t>(dim));
            for (int d = 0; d < dim; ++d)
                s.features[static_cast<size_t>(d)] = centers[static_cast<size_t>(c)][static_cast<size_t>(d)] + gauss(rng);
            samples.push_back(std::move(s));
            ++counter;
        }
    }
    return samples;
}

}  // namespace lmpkit
