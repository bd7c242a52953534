#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lmpkit {

struct LabeledSample {
    std::vector<double> features;
    int label = 0;
    std::string subject;
    std::string id;
};

// One binary machine of the one-vs-one ensemble. classA < classB; the decision
// value is positive for classA.
struct BinarySvm {
    int classA = 0;
    int classB = 0;
    std::vector<std::vector<double>> supportVectors;  // already scaled
    std::vector<double> coefficients;                 // alpha_i * y_i
    double bias = 0.0;
};

struct SvmModel {
    int dimension = 0;
    double gamma = 0.0;
    double penaltyC = 0.0;
    std::vector<int> classes;              // sorted
    std::vector<double> scaleMin, scaleMax;  // per-dimension training range
    std::vector<BinarySvm> machines;

    std::vector<double> scale(const std::vector<double>& x) const;

    std::string toJson() const;
    static SvmModel fromJson(const std::string& json);
    void save(const std::string& path) const;
    static SvmModel load(const std::string& path);
};

// One-vs-one RBF SVM trained with SMO (maximal-violating-pair working set,
// tolerance 1e-3, no shrinking). Deterministic for a fixed sample order.
SvmModel train(const std::vector<LabeledSample>& samples, double C, double gamma);

// One-vs-one voting; ties broken by smallest class id.
int predict(const SvmModel& model, const std::vector<double>& x);
double decisionValue(const SvmModel& model, const BinarySvm& machine, const std::vector<double>& x);

// Stratified, seeded k-fold: fold index per sample.
std::vector<std::vector<size_t>> kfold(const std::vector<LabeledSample>& samples, int k,
                                       uint64_t seed);
// Leave-one-subject-out: one fold per distinct subject.
std::vector<std::vector<size_t>> loso(const std::vector<LabeledSample>& samples);

struct EvalOptions {
    double C = 100.0;
    double gamma = 0.0;  // 0 -> 1/dimension
    bool gridSearch = false;
    int k = 10;
    uint64_t seed = 0;
};

struct EvalReport {
    double accuracy = 0.0;
    std::vector<int> classes;
    std::vector<std::vector<long>> confusion;  // rows = true labels
    std::vector<double> foldAccuracies;
    std::vector<std::string> warnings;

    std::string toJson() const;
};

enum class Protocol { KFold10, Loso };

// Per-fold train (scaling fit on train only) and test. Degenerate folds whose
// training split holds a single class are skipped with a warning.
EvalReport evaluate(const std::vector<LabeledSample>& samples, Protocol protocol,
                    const EvalOptions& opts = {});

void writeConfusionCsv(const EvalReport& report, const std::string& path);

double rbfKernel(const std::vector<double>& a, const std::vector<double>& b, double gamma);

}  // namespace lmpkit
