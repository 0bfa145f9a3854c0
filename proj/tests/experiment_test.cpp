#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "enrichkit/experiment.hpp"
#include "fixtures.hpp"

using namespace enrichkit;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("enrichkit_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

void write_inputs(const fs::path& dir) {
    write_dataset(fixtures::blobs({{"a", 40}, {"b", 14}, {"c", 6}}, 2, 1, 1.2), dir / "base.csv");
    write_dataset(fixtures::blobs({{"a", 35}, {"b", 20}, {"c", 5}}, 2, 4, 1.2), dir / "base2.csv");
    for (int e = 0; e < 3; ++e) {
        write_dataset(fixtures::blobs({{"a", 20}, {"b", 12}, {"c", 12}}, 2, 10 + e, 1.2),
                      dir / ("ext" + std::to_string(e) + ".csv"));
    }
}

json small_config() {
    return json::parse(R"({
        "base_dataset": {"path": "base.csv"},
        "external_datasets": ["ext0.csv", "ext1.csv", "ext2.csv"],
        "cv": {"folds": 3, "repetitions": 1},
        "classifier": "knn",
        "output_dir": "out",
        "seed": 3
    })");
}

}  // namespace

TEST(Gain, RoundsToNearestPercent) {
    EXPECT_EQ(gain_percent(0.3, 0.25), 20);
    EXPECT_EQ(gain_percent(0.2, 0.25), -20);
    EXPECT_EQ(gain_percent(0.2511, 0.25), 0);
    EXPECT_EQ(gain_percent(0.415, 0.25), 66);
    EXPECT_FALSE(gain_percent(0.3, 0.0).has_value());
}

TEST(Config, ParsesAndResolvesPaths) {
    auto j = small_config();
    j["methods"] = json::parse(R"(["rane", {"method": "smote", "smote_k": "sweep"},
        {"method": "pipeline", "stages": ["seme", {"method": "supe", "amount_percent": 50}]}])");
    j["sweep"] = json::parse(R"({"amount_percent": [10, 20], "external": ["ext1"]})");
    auto cfg = parse_experiment_config(j, "/data");
    EXPECT_EQ(cfg.bases[0].path, fs::path("/data/base.csv"));
    EXPECT_EQ(cfg.bases[0].name, "base");
    EXPECT_EQ(cfg.externals.size(), 3u);
    EXPECT_EQ(cfg.methods[1].name, "smote");
    EXPECT_TRUE(cfg.methods[1].needs_smote_sweep());
    EXPECT_EQ(cfg.methods[2].name, "seme+supe");
    EXPECT_TRUE(cfg.methods[2].uses_amount());
    EXPECT_EQ(cfg.amounts, (std::vector<double>{10, 20}));
    EXPECT_EQ(cfg.classifiers[0].kind, ClassifierKind::knn);
    EXPECT_EQ(cfg.output_dir, fs::path("/data/out"));
}

TEST(Config, RejectsBadDocuments) {
    auto bad = [](auto mutate) {
        auto j = small_config();
        mutate(j);
        return j;
    };
    EXPECT_THROW(parse_experiment_config(bad([](json& j) { j["colour"] = 1; }), "."), ConfigError);
    EXPECT_THROW(parse_experiment_config(bad([](json& j) { j.erase("base_dataset"); }), "."), ConfigError);
    EXPECT_THROW(parse_experiment_config(bad([](json& j) { j["sweep"] = {{"amount_percent", json::array()}}; }), "."),
                 ConfigError);
    EXPECT_THROW(parse_experiment_config(bad([](json& j) { j["sweep"] = {{"external", {"nope"}}}; }), "."),
                 ConfigError);
    EXPECT_THROW(parse_experiment_config(bad([](json& j) { j["methods"] = {"magic"}; }), "."), ConfigError);
    EXPECT_THROW(parse_experiment_config(bad([](json& j) { j["cv"]["folds"] = 1; }), "."), ConfigError);
    EXPECT_THROW(parse_experiment_config(bad([](json& j) { j["classifier"] = "svm"; }), "."), ConfigError);
    EXPECT_THROW(parse_experiment_config(bad([](json& j) { j["methods"] = {"rane", "rane"}; }), "."), ConfigError);
    EXPECT_THROW(parse_experiment_config(bad([](json& j) {
                     j.erase("external_datasets");
                     j["methods"] = {"seme"};
                 }),
                                         "."),
                 ConfigError);
}

TEST(Run, MissingInputIsConfigError) {
    TempDir dir("missing");
    auto cfg = parse_experiment_config(small_config(), dir.path);
    EXPECT_THROW(run_experiment(cfg), ConfigError);
}

TEST(Run, NoneOnlyGivesSingleBaselineRow) {
    TempDir dir("none_only");
    write_inputs(dir.path);
    auto j = small_config();
    j["methods"] = {"none"};
    auto summary = run_experiment(parse_experiment_config(j, dir.path));
    ASSERT_EQ(summary.cells.size(), 1u);
    EXPECT_EQ(summary.failed, 0u);
    auto csv = slurp(dir.path / "out" / "results.csv");
    EXPECT_EQ(line_count(csv), 2u);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "dataset,method,external,amount_percent,classifier,f_a,f_b,f_c,macro_f,gain_percent");
    EXPECT_FALSE(fs::exists(dir.path / "out" / "ranks.csv"));
    EXPECT_TRUE(fs::exists(dir.path / "out" / "cells" / "base__none.json"));
}

TEST(Run, AmountByExternalSweepGivesGainTable) {
    TempDir dir("sweep");
    write_inputs(dir.path);
    auto j = small_config();
    j["methods"] = {"rane"};
    j["sweep"] = {{"amount_percent", {10, 20, 30, 40, 50, 60, 70, 80, 90, 100}}};
    auto summary = run_experiment(parse_experiment_config(j, dir.path));
    EXPECT_EQ(summary.cells.size(), 1u + 10u * 3u);
    EXPECT_EQ(summary.failed, 0u);
    auto table = slurp(dir.path / "out" / "tables" / "base__rane.csv");
    EXPECT_EQ(line_count(table), 11u);
    EXPECT_EQ(table.substr(0, table.find('\n')),
              "amount_percent,ext0_macro_f,ext0_gain_percent,ext1_macro_f,ext1_gain_percent,ext2_macro_f,"
              "ext2_gain_percent");
    // gain column agrees with the macro values
    for (const auto& c : summary.cells) {
        if (c.method == "None") continue;
        auto cell = json::parse(slurp(dir.path / "out" / "cells" / (c.id + ".json")));
        EXPECT_EQ(cell["gain_percent"].get<long>(),
                  *gain_percent(cell["report"]["macro_f"].get<double>(), cell["baseline_macro_f"].get<double>()));
    }
}

TEST(Run, FailedCellIsRecordedAndOthersProceed) {
    TempDir dir("partial");
    write_inputs(dir.path);
    // an external whose label is unknown to the base fails its cells only
    write_dataset(fixtures::blobs({{"zzz", 10}}, 2, 1), dir.path / "ext2.csv");
    auto j = small_config();
    j["methods"] = {"rane"};
    auto summary = run_experiment(parse_experiment_config(j, dir.path));
    EXPECT_EQ(summary.failed, 1u);
    auto manifest = slurp(dir.path / "out" / "run_manifest.log");
    EXPECT_NE(manifest.find("base__rane__ext2\tfailed"), std::string::npos);
    EXPECT_NE(manifest.find("base__rane__ext0\tok"), std::string::npos);
    EXPECT_EQ(line_count(slurp(dir.path / "out" / "results.csv")), 4u);
}

TEST(Run, RanksNeedTwoMethodsOnTwoDatasets) {
    TempDir dir("ranks");
    write_inputs(dir.path);
    auto j = small_config();
    j.erase("base_dataset");
    j["base_datasets"] = {"base.csv", "base2.csv"};
    j["methods"] = {"ros", "supe"};
    auto summary = run_experiment(parse_experiment_config(j, dir.path));
    EXPECT_EQ(summary.failed, 0u);
    auto ranks = slurp(dir.path / "out" / "ranks.csv");
    EXPECT_EQ(line_count(ranks), 4u);
    auto f = json::parse(slurp(dir.path / "out" / "friedman.json"));
    EXPECT_EQ(f["degrees_of_freedom"], 2);
}

TEST(Run, ParallelMatchesSerial) {
    TempDir a("serial"), b("parallel");
    write_inputs(a.path);
    write_inputs(b.path);
    auto j = small_config();
    j["methods"] = {"rane", "seme", "smote"};
    run_experiment(parse_experiment_config(j, a.path), {1, std::nullopt});
    run_experiment(parse_experiment_config(j, b.path), {4, std::nullopt});
    EXPECT_EQ(slurp(a.path / "out" / "results.csv"), slurp(b.path / "out" / "results.csv"));
    EXPECT_EQ(slurp(a.path / "out" / "cells" / "base__seme__ext1.json"),
              slurp(b.path / "out" / "cells" / "base__seme__ext1.json"));
}

TEST(SmoteSweep, IdenticalScoresPickSmallerK) {
    // identical minority points: every k yields the same synthetic rows
    std::vector<Observation> rows;
    auto a = fixtures::blobs({{"a", 30}}, 2, 1);
    rows.assign(a.begin(), a.end());
    for (int i = 0; i < 10; ++i) rows.push_back(fixtures::obs({3.0, 3.0}, "b"));
    Dataset d(2, rows);
    CVConfig cv;
    cv.folds = 2;
    cv.classifier.kind = ClassifierKind::knn;
    EXPECT_EQ(select_smote_k(d, ResampleMethod::smote, cv, {4, 2}, 1), 2u);
}

TEST(SmoteSweep, OnlyFeasibleKIsChosen) {
    // six minority rows, two folds: three per training fold, so only k <= 2 works
    auto d = fixtures::blobs({{"a", 30}, {"b", 6}}, 2, 5);
    CVConfig cv;
    cv.folds = 2;
    cv.classifier.kind = ClassifierKind::knn;
    EXPECT_EQ(select_smote_k(d, ResampleMethod::smote, cv, {2, 5, 8}, 1), 2u);
    EXPECT_THROW(select_smote_k(d, ResampleMethod::smote, cv, {5, 8}, 1), ResampleError);
}

TEST(Cli, ExitCodesAndSeedOverride) {
    TempDir dir("cli");
    write_inputs(dir.path);
    auto j = small_config();
    j["methods"] = {"rane"};
    std::ofstream(dir.path / "ok.json") << j.dump();
    std::ofstream(dir.path / "bad.json") << R"({"base_dataset": "base.csv", "bogus": 1})";
    const std::string cli = ENRICHKIT_CLI;
    auto run = [&](const std::string& args) {
        int status = std::system((cli + " " + args + " >/dev/null 2>&1").c_str());
        return WEXITSTATUS(status);
    };
    EXPECT_EQ(run("run --config " + (dir.path / "ok.json").string()), 0);
    auto cell = json::parse(slurp(dir.path / "out" / "cells" / "base__none.json"));
    EXPECT_EQ(cell["seed"], 3);
    EXPECT_EQ(run("run --config " + (dir.path / "ok.json").string() + " --seed 11"), 0);
    cell = json::parse(slurp(dir.path / "out" / "cells" / "base__none.json"));
    EXPECT_EQ(cell["seed"], 11);
    const std::string ok = (dir.path / "ok.json").string();
    EXPECT_EQ(WEXITSTATUS(std::system(("ENRICHKIT_SEED=21 " + cli + " run --config " + ok + " >/dev/null 2>&1").c_str())),
              0);
    EXPECT_EQ(json::parse(slurp(dir.path / "out" / "cells" / "base__none.json"))["seed"], 21);
    EXPECT_EQ(WEXITSTATUS(std::system(
                  ("ENRICHKIT_SEED=21 " + cli + " run --config " + ok + " --seed 5 >/dev/null 2>&1").c_str())),
              0);
    EXPECT_EQ(json::parse(slurp(dir.path / "out" / "cells" / "base__none.json"))["seed"], 5);
    EXPECT_EQ(run("run --config " + (dir.path / "bad.json").string()), 1);
    EXPECT_EQ(run("rank --scores " + (dir.path / "out" / "results.csv").string()), 1);
    EXPECT_EQ(run("type --dataset " + (dir.path / "base.csv").string() + " --k 5 --threshold 0.5"), 0);
}
