#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "lmpkit/features.hpp"
#include "lmpkit/lmp.hpp"
#include "lmpkit/synth.hpp"

using namespace lmpkit;

namespace {

std::string binary() {
    const char* env = std::getenv("LMPKIT_BIN");
    return env ? env : "";
}

int run(const std::string& args) {
    const int status = std::system((binary() + " " + args).c_str());
    return WEXITSTATUS(status);
}

int runCapture(const std::string& args, const std::string& outFile) {
    return run(args + " > " + outFile + " 2> /dev/null");
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void writeSeparableCsv(const std::string& path) {
    const auto samples = makeDataset(2, 12, 3, 9.0, 4);
    std::vector<FeatureRow> rows;
    for (const auto& s : samples)
        rows.push_back({s.id, s.label == 0 ? "neg" : "pos", s.subject, s.features});
    writeFeatureCsv(rows, path);
}

}  // namespace

TEST_CASE("cli dumps presets as parseable configs") {
    if (binary().empty()) return;  // library-only build
    REQUIRE(runCapture("--preset casme2 config", "cli_config.json") == 0);
    const LmpConfig cfg = LmpConfig::fromJson(slurp("cli_config.json"));
    std::remove("cli_config.json");
    CHECK(cfg.intensityAlpha == doctest::Approx(100.0));
    CHECK(cfg.betaIters == 6);
    CHECK(cfg.binCount == 9);
}

TEST_CASE("cli rejects an unknown preset with a usage error") {
    if (binary().empty()) return;
    CHECK(run("--preset not-a-dataset config > /dev/null 2>&1") == 1);
}

TEST_CASE("cli extract maps missing inputs to the io exit code") {
    if (binary().empty()) return;
    {
        std::ofstream m("cli_manifest.csv");
        m << "id,frames_dir,landmarks,label,subject,onset,apex\n";
        m << "seq0,missing_dir,missing_landmarks.txt,happy,s01,0,5\n";
    }
    CHECK(run("extract cli_manifest.csv --out cli_feat.csv > /dev/null 2>&1") == 2);
    std::remove("cli_manifest.csv");
}

TEST_CASE("cli train refuses a single-class feature file") {
    if (binary().empty()) return;
    std::vector<FeatureRow> rows;
    for (int i = 0; i < 6; ++i)
        rows.push_back({"s" + std::to_string(i), "only", "subj", {1.0 * i, 2.0}});
    writeFeatureCsv(rows, "cli_oneclass.csv");
    CHECK(run("train cli_oneclass.csv --out cli_model.json > /dev/null 2>&1") == 1);
    std::remove("cli_oneclass.csv");
}

TEST_CASE("cli train then eval round trips on separable features") {
    if (binary().empty()) return;
    writeSeparableCsv("cli_sep.csv");
    CHECK(run("train cli_sep.csv --out cli_model.json > /dev/null 2>&1") == 0);
    CHECK(!slurp("cli_model.json").empty());
    std::remove("cli_model.json");

    REQUIRE(runCapture("--seed 7 eval cli_sep.csv --protocol kfold10", "cli_eval1.json") == 0);
    REQUIRE(runCapture("--seed 7 eval cli_sep.csv --protocol kfold10", "cli_eval2.json") == 0);
    const std::string r1 = slurp("cli_eval1.json");
    CHECK(r1 == slurp("cli_eval2.json"));  // byte-identical seeded reports
    CHECK(r1.find("\"accuracy\": 1") != std::string::npos);

    REQUIRE(runCapture("eval cli_sep.csv --protocol loso", "cli_loso.json") == 0);
    CHECK(slurp("cli_loso.json").find("\"accuracy\"") != std::string::npos);

    std::remove("cli_sep.csv");
    std::remove("cli_eval1.json");
    std::remove("cli_eval2.json");
    std::remove("cli_loso.json");
}
