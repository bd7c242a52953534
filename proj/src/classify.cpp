#include "lmpkit/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lmpkit/error.hpp"

namespace lmpkit {

using ordered_json = nlohmann::ordered_json;

double rbfKernel(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
    double d2 = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

std::vector<double> SvmModel::scale(const std::vector<double>& x) const {
    std::vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        const double range = scaleMax[i] - scaleMin[i];
        out[i] = range > 0.0 ? (x[i] - scaleMin[i]) / range : 0.0;
    }
    return out;
}

namespace {

constexpr double kSmoTolerance = 1e-3;
constexpr long kSmoMaxIterations = 200000;

// Two-variable SMO with maximal-violating-pair selection, no shrinking.
// labels are +1/-1; returns alphas and bias for f(x) = sum a_i y_i K(x_i,x) + b.
void smoSolve(const std::vector<std::vector<double>>& x, const std::vector<int>& y, double C,
              double gamma, std::vector<double>& alpha, double& bias) {
    const size_t n = x.size();
    alpha.assign(n, 0.0);

    std::vector<std::vector<double>> K(n, std::vector<double>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i; j < n; ++j) K[i][j] = K[j][i] = rbfKernel(x[i], x[j], gamma);

    // F_i = sum_j alpha_j y_j K_ij - y_i (prediction error without bias)
    std::vector<double> F(n);
    for (size_t i = 0; i < n; ++i) F[i] = -y[i];

    for (long iter = 0; iter < kSmoMaxIterations; ++iter) {
        // i: argmin F over I_up, j: argmax F over I_low
        long iUp = -1, iLow = -1;
        double bUp = std::numeric_limits<double>::max();
        double bLow = std::numeric_limits<double>::lowest();
        for (size_t t = 0; t < n; ++t) {
            const bool inUp = (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0);
            const bool inLow = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C);
            if (inUp && F[t] < bUp) {
                bUp = F[t];
                iUp = static_cast<long>(t);
            }
            if (inLow && F[t] > bLow) {
                bLow = F[t];
                iLow = static_cast<long>(t);
            }
        }
        if (iUp < 0 || iLow < 0 || bLow - bUp <= 2.0 * kSmoTolerance) {
            bias = -(bUp + bLow) / 2.0;
            return;
        }

        const size_t i = static_cast<size_t>(iUp);
        const size_t j = static_cast<size_t>(iLow);
        double eta = K[i][i] + K[j][j] - 2.0 * K[i][j];
        if (eta < 1e-12) eta = 1e-12;

        double lo, hi;
        if (y[i] != y[j]) {
            lo = std::max(0.0, alpha[j] - alpha[i]);
            hi = std::min(C, C + alpha[j] - alpha[i]);
        } else {
            lo = std::max(0.0, alpha[i] + alpha[j] - C);
            hi = std::min(C, alpha[i] + alpha[j]);
        }

        double ajNew = alpha[j] + y[j] * (F[i] - F[j]) / eta;
        ajNew = std::clamp(ajNew, lo, hi);
        const double aiNew = alpha[i] + static_cast<double>(y[i] * y[j]) * (alpha[j] - ajNew);

        const double di = y[i] * (aiNew - alpha[i]);
        const double dj = y[j] * (ajNew - alpha[j]);
        for (size_t t = 0; t < n; ++t) F[t] += di * K[i][t] + dj * K[j][t];
        alpha[i] = aiNew;
        alpha[j] = ajNew;
    }
    // Converged-enough fallback: recompute bias from the current F bounds.
    double bUp = std::numeric_limits<double>::max();
    double bLow = std::numeric_limits<double>::lowest();
    for (size_t t = 0; t < n; ++t) {
        const bool inUp = (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0);
        const bool inLow = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C);
        if (inUp) bUp = std::min(bUp, F[t]);
        if (inLow) bLow = std::max(bLow, F[t]);
    }
    bias = -(bUp + bLow) / 2.0;
}

void fitScaling(const std::vector<LabeledSample>& samples, SvmModel& model) {
    const size_t dim = samples[0].features.size();
    model.scaleMin.assign(dim, std::numeric_limits<double>::max());
    model.scaleMax.assign(dim, std::numeric_limits<double>::lowest());
    for (const LabeledSample& s : samples) {
        for (size_t i = 0; i < dim; ++i) {
            model.scaleMin[i] = std::min(model.scaleMin[i], s.features[i]);
            model.scaleMax[i] = std::max(model.scaleMax[i], s.features[i]);
        }
    }
}

}  // namespace

SvmModel train(const std::vector<LabeledSample>& samples, double C, double gamma) {
    if (samples.empty()) throw InvalidInputError("no training samples");
    if (!(C > 0.0)) throw InvalidInputError("C must be positive");
    const size_t dim = samples[0].features.size();
    if (dim == 0) throw InvalidInputError("empty feature vectors");

    std::set<int> classSet;
    for (const LabeledSample& s : samples) {
        if (s.features.size() != dim) throw ValidationError("inconsistent feature dimension");
        for (double v : s.features)
            if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
        classSet.insert(s.label);
    }
    if (classSet.size() < 2) throw InvalidInputError("training needs at least two classes");

    SvmModel model;
    model.dimension = static_cast<int>(dim);
    model.penaltyC = C;
    model.gamma = gamma > 0.0 ? gamma : 1.0 / static_cast<double>(dim);
    model.classes.assign(classSet.begin(), classSet.end());
    fitScaling(samples, model);

    std::vector<std::vector<double>> scaled;
    scaled.reserve(samples.size());
    for (const LabeledSample& s : samples) scaled.push_back(model.scale(s.features));

    for (size_t a = 0; a < model.classes.size(); ++a) {
        for (size_t b = a + 1; b < model.classes.size(); ++b) {
            const int ca = model.classes[a];
            const int cb = model.classes[b];
            std::vector<std::vector<double>> x;
            std::vector<int> y;
            for (size_t i = 0; i < samples.size(); ++i) {
                if (samples[i].label == ca) {
                    x.push_back(scaled[i]);
                    y.push_back(+1);
                } else if (samples[i].label == cb) {
                    x.push_back(scaled[i]);
                    y.push_back(-1);
                }
            }
            std::vector<double> alpha;
            double bias = 0.0;
            smoSolve(x, y, C, model.gamma, alpha, bias);

            BinarySvm machine;
            machine.classA = ca;
            machine.classB = cb;
            machine.bias = bias;
            for (size_t i = 0; i < x.size(); ++i) {
                if (alpha[i] > 1e-12) {
                    machine.supportVectors.push_back(x[i]);
                    machine.coefficients.push_back(alpha[i] * y[i]);
                }
            }
            model.machines.push_back(std::move(machine));
        }
    }
    return model;
}

double decisionValue(const SvmModel& model, const BinarySvm& machine, const std::vector<double>& x) {
    double f = machine.bias;
    for (size_t i = 0; i < machine.supportVectors.size(); ++i)
        f += machine.coefficients[i] * rbfKernel(machine.supportVectors[i], x, model.gamma);
    return f;
}

int predict(const SvmModel& model, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != model.dimension)
        throw ValidationError("feature dimension does not match model");
    const std::vector<double> xs = model.scale(x);
    std::map<int, int> votes;
    for (int c : model.classes) votes[c] = 0;
    for (const BinarySvm& machine : model.machines) {
        // f == 0 votes for the smaller class id (classA < classB)
        ++votes[decisionValue(model, machine, xs) >= 0.0 ? machine.classA : machine.classB];
    }
    int best = model.classes.front();
    int bestVotes = -1;
    for (int c : model.classes) {  // ascending ids: ties keep the smaller id
        if (votes[c] > bestVotes) {
            bestVotes = votes[c];
            best = c;
        }
    }
    return best;
}

std::vector<std::vector<size_t>> kfold(const std::vector<LabeledSample>& samples, int k,
                                       uint64_t seed) {
    if (k < 2 || static_cast<size_t>(k) > samples.size())
        throw InvalidInputError("k must be in [2, sample count]");

    std::map<int, std::vector<size_t>> byLabel;
    for (size_t i = 0; i < samples.size(); ++i) byLabel[samples[i].label].push_back(i);

    std::mt19937_64 rng(seed);
    std::vector<std::vector<size_t>> folds(static_cast<size_t>(k));
    size_t next = 0;  // continuous round-robin keeps overall fold sizes within 1
    for (auto& [label, indices] : byLabel) {
        std::shuffle(indices.begin(), indices.end(), rng);
        for (size_t idx : indices) {
            folds[next % static_cast<size_t>(k)].push_back(idx);
            ++next;
        }
    }
    return folds;
}

std::vector<std::vector<size_t>> loso(const std::vector<LabeledSample>& samples) {
    std::map<std::string, std::vector<size_t>> bySubject;
    for (size_t i = 0; i < samples.size(); ++i) bySubject[samples[i].subject].push_back(i);
    if (bySubject.size() < 2) throw InvalidInputError("leave-one-subject-out needs >= 2 subjects");
    std::vector<std::vector<size_t>> folds;
    folds.reserve(bySubject.size());
    for (auto& [subject, indices] : bySubject) folds.push_back(std::move(indices));
    return folds;
}

namespace {

struct GridChoice {
    double C, gamma;
};

// Inner 3-fold grid search over C in 10^{0..3} x gamma in 2^{-6..2}.
GridChoice gridSearch(const std::vector<LabeledSample>& trainSet, uint64_t seed) {
    GridChoice best{100.0, 1.0 / static_cast<double>(trainSet[0].features.size())};
    double bestAcc = -1.0;
    const auto innerFolds = kfold(trainSet, 3, seed);
    for (int cExp = 0; cExp <= 3; ++cExp) {
        for (int gExp = -6; gExp <= 2; ++gExp) {
            const double C = std::pow(10.0, cExp);
            const double gamma = std::pow(2.0, gExp);
            long correct = 0, total = 0;
            for (const auto& hold : innerFolds) {
                std::vector<LabeledSample> tr, te;
                std::set<size_t> holdSet(hold.begin(), hold.end());
                for (size_t i = 0; i < trainSet.size(); ++i)
                    (holdSet.count(i) ? te : tr).push_back(trainSet[i]);
                std::set<int> cls;
                for (const auto& s : tr) cls.insert(s.label);
                if (cls.size() < 2) continue;
                const SvmModel m = train(tr, C, gamma);
                for (const auto& s : te) {
                    if (predict(m, s.features) == s.label) ++correct;
                    ++total;
                }
            }
            const double acc = total ? static_cast<double>(correct) / total : 0.0;
            if (acc > bestAcc + 1e-12) {
                bestAcc = acc;
                best = {C, gamma};
            }
        }
    }
    return best;
}

}  // namespace

EvalReport evaluate(const std::vector<LabeledSample>& samples, Protocol protocol,
                    const EvalOptions& opts) {
    if (samples.empty()) throw InvalidInputError("no samples to evaluate");

    std::set<int> classSet;
    for (const LabeledSample& s : samples) classSet.insert(s.label);
    if (classSet.size() < 2) throw InvalidInputError("evaluation needs at least two classes");

    EvalReport report;
    report.classes.assign(classSet.begin(), classSet.end());
    const size_t nc = report.classes.size();
    report.confusion.assign(nc, std::vector<long>(nc, 0));
    std::map<int, size_t> classIdx;
    for (size_t i = 0; i < nc; ++i) classIdx[report.classes[i]] = i;

    const auto folds =
        protocol == Protocol::KFold10 ? kfold(samples, opts.k, opts.seed) : loso(samples);

    long correct = 0, total = 0;
    for (size_t f = 0; f < folds.size(); ++f) {
        std::set<size_t> holdSet(folds[f].begin(), folds[f].end());
        std::vector<LabeledSample> tr, te;
        for (size_t i = 0; i < samples.size(); ++i) (holdSet.count(i) ? te : tr).push_back(samples[i]);
        if (te.empty()) continue;

        std::set<int> trainClasses;
        for (const auto& s : tr) trainClasses.insert(s.label);
        if (trainClasses.size() < 2) {
            report.warnings.push_back("fold " + std::to_string(f) +
                                      " skipped: training split has a single class");
            report.foldAccuracies.push_back(std::nan(""));
            continue;
        }

        double C = opts.C;
        double gamma = opts.gamma > 0.0 ? opts.gamma : 1.0 / static_cast<double>(tr[0].features.size());
        if (opts.gridSearch) {
            const GridChoice choice = gridSearch(tr, opts.seed + f + 1);
            C = choice.C;
            gamma = choice.gamma;
        }

        const SvmModel model = train(tr, C, gamma);
        long foldCorrect = 0;
        for (const LabeledSample& s : te) {
            const int pred = predict(model, s.features);
            ++report.confusion[classIdx[s.label]][classIdx[pred]];
            if (pred == s.label) {
                ++correct;
                ++foldCorrect;
            }
            ++total;
        }
        report.foldAccuracies.push_back(static_cast<double>(foldCorrect) / te.size());
    }
    report.accuracy = total ? static_cast<double>(correct) / total : 0.0;
    return report;
}

std::string EvalReport::toJson() const {
    ordered_json j;
    j["accuracy"] = accuracy;
    j["classes"] = classes;
    j["confusion"] = confusion;
    ordered_json folds = ordered_json::array();
    for (double a : foldAccuracies) {
        if (std::isnan(a))
            folds.push_back(nullptr);
        else
            folds.push_back(a);
    }
    j["fold_accuracies"] = folds;
    j["warnings"] = warnings;
    return j.dump(2) + "\n";
}

void writeConfusionCsv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "true\\pred";
    for (int c : report.classes) out << ',' << c;
    out << '\n';
    for (size_t r = 0; r < report.classes.size(); ++r) {
        out << report.classes[r];
        for (long v : report.confusion[r]) out << ',' << v;
        out << '\n';
    }
}

std::string SvmModel::toJson() const {
    ordered_json j;
    j["format_version"] = 1;
    j["dimension"] = dimension;
    j["gamma"] = gamma;
    j["C"] = penaltyC;
    j["classes"] = classes;
    j["scale_min"] = scaleMin;
    j["scale_max"] = scaleMax;
    ordered_json machinesJson = ordered_json::array();
    for (const BinarySvm& m : machines) {
        ordered_json mj;
        mj["class_a"] = m.classA;
        mj["class_b"] = m.classB;
        mj["bias"] = m.bias;
        mj["coefficients"] = m.coefficients;
        mj["support_vectors"] = m.supportVectors;
        machinesJson.push_back(std::move(mj));
    }
    j["machines"] = machinesJson;
    return j.dump(2) + "\n";
}

SvmModel SvmModel::fromJson(const std::string& json) {
    ordered_json j;
    try {
        j = ordered_json::parse(json);
    } catch (const std::exception& e) {
        throw FormatError(std::string("model parse error: ") + e.what());
    }
    SvmModel model;
    try {
        if (j.at("format_version").get<int>() != 1) throw FormatError("unsupported model version");
        model.dimension = j.at("dimension").get<int>();
        model.gamma = j.at("gamma").get<double>();
        model.penaltyC = j.at("C").get<double>();
        model.classes = j.at("classes").get<std::vector<int>>();
        model.scaleMin = j.at("scale_min").get<std::vector<double>>();
        model.scaleMax = j.at("scale_max").get<std::vector<double>>();
        for (const auto& mj : j.at("machines")) {
            BinarySvm m;
            m.classA = mj.at("class_a").get<int>();
            m.classB = mj.at("class_b").get<int>();
            m.bias = mj.at("bias").get<double>();
            m.coefficients = mj.at("coefficients").get<std::vector<double>>();
            m.supportVectors = mj.at("support_vectors").get<std::vector<std::vector<double>>>();
            model.machines.push_back(std::move(m));
        }
    } catch (const FormatError&) {
        throw;
    } catch (const std::exception& e) {
        throw FormatError(std::string("model field error: ") + e.what());
    }
    return model;
}

void SvmModel::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model " + path);
    out << toJson();
}

SvmModel SvmModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return fromJson(ss.str());
}

}  // namespace lmpkit
