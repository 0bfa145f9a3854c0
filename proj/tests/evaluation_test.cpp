#include <gtest/gtest.h>

#include <map>

#include "enrichkit/evaluation.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace enrichkit;
using fixtures::obs;

TEST(FMeasure, Anchors) {
    EXPECT_EQ(f_measure(10, 0, 0), 1.0);
    EXPECT_EQ(f_measure(0, 5, 5), 0.0);
    EXPECT_DOUBLE_EQ(f_measure(1, 1, 3), 1.0 / 3.0);
    EXPECT_EQ(f_measure(0, 0, 0), 0.0);
}

TEST(Evaluate, AgreesWithOracle) {
    Rng rng(77);
    for (int t = 0; t < 200; ++t) {
        std::size_t k = 2 + rng.uniform_index(6);
        std::vector<Label> classes;
        for (std::size_t c = 0; c < k; ++c) classes.push_back("k" + std::to_string(c));
        std::size_t n = 1 + rng.uniform_index(300);
        std::vector<Label> truth, pred;
        for (std::size_t i = 0; i < n; ++i) {
            truth.push_back(classes[rng.uniform_index(k)]);
            pred.push_back(rng.uniform01() < 0.5 ? truth.back() : classes[rng.uniform_index(k)]);
        }
        auto r = evaluate(truth, pred, classes);
        auto o = oracles::f_scores(truth, pred, classes);
        double sum = 0;
        for (const auto& c : classes) {
            EXPECT_NEAR(r.per_class_f.at(c), o.at(c), 1e-12);
            sum += o.at(c);
        }
        EXPECT_NEAR(r.macro_f, sum / static_cast<double>(k), 1e-12);
    }
}

TEST(Evaluate, UnseenClassesCountAsZero) {
    std::vector<Label> t{"a", "a"}, p{"a", "a"};
    auto r = evaluate(t, p, {"a", "b"});
    EXPECT_EQ(r.per_class_f.at("b"), 0.0);
    EXPECT_DOUBLE_EQ(r.macro_f, 0.5);
    std::vector<Label> shorter{"a"};
    EXPECT_THROW(evaluate(t, shorter, {"a"}), std::invalid_argument);
    std::vector<Label> unknown{"a", "z"};
    EXPECT_THROW(evaluate(t, unknown, {"a"}), std::invalid_argument);
}

TEST(Evaluate, MacroWithinBounds) {
    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
        std::vector<Label> truth, pred;
        for (int i = 0; i < 30; ++i) {
            truth.push_back(rng.uniform01() < 0.5 ? "x" : "y");
            pred.push_back(rng.uniform01() < 0.5 ? "x" : "y");
        }
        auto r = evaluate(truth, pred, {"x", "y"});
        EXPECT_GE(r.macro_f, 0.0);
        EXPECT_LE(r.macro_f, 1.0);
    }
}

TEST(Confusion, MergeAddsCounts) {
    ConfusionMatrix a({"x", "y"}), b({"x", "y"});
    a.add("x", "y");
    b.add("x", "y");
    b.add("y", "y");
    a.merge(b);
    EXPECT_EQ(a.at(0, 1), 2u);
    EXPECT_EQ(a.total(), 3u);
    EXPECT_EQ(a.false_negatives(0), 2u);
    EXPECT_EQ(a.false_positives(1), 2u);
}

TEST(KFold, PartitionAndStratification) {
    auto d = fixtures::blobs({{"a", 53}, {"b", 17}, {"c", 10}}, 2, 3);
    auto folds = stratified_kfold(d, 10, 4);
    ASSERT_EQ(folds.size(), 10u);
    std::vector<int> seen(d.size(), 0);
    for (const auto& f : folds) {
        std::map<Label, std::size_t> per;
        for (auto i : f) {
            ++seen[i];
            ++per[d[i].label];
        }
        EXPECT_TRUE(per["a"] == 5 || per["a"] == 6);
        EXPECT_TRUE(per["b"] == 1 || per["b"] == 2);
        EXPECT_EQ(per["c"], 1u);
    }
    for (int s : seen) EXPECT_EQ(s, 1);
    EXPECT_EQ(stratified_kfold(d, 10, 4), folds);
    EXPECT_NE(stratified_kfold(d, 10, 5), folds);
}

TEST(KFold, FoldsReduceToSmallestClass) {
    auto d = fixtures::blobs({{"a", 30}, {"b", 4}}, 2, 3);
    EXPECT_EQ(effective_folds(d, 10), 4u);
    EXPECT_EQ(effective_folds(d, 3), 3u);
    CVConfig cfg;
    cfg.classifier.kind = ClassifierKind::knn;
    auto r = cross_validate(d, Dataset(2, {}), cfg);
    EXPECT_EQ(r.folds, 4u);
    ASSERT_FALSE(r.warnings.empty());
    auto tiny = fixtures::blobs({{"a", 30}, {"b", 1}}, 2, 3);
    EXPECT_THROW(effective_folds(tiny, 10), std::invalid_argument);
}

TEST(CrossValidate, TestFoldsAreBaseOnlyAndExternalsJoinTraining) {
    auto base = fixtures::blobs({{"a", 40}, {"b", 12}}, 2, 1);
    auto ext = fixtures::blobs({{"b", 9}}, 2, 2, 0.8, Provenance::base);
    CVConfig cfg;
    cfg.folds = 4;
    cfg.repetitions = 3;
    cfg.classifier.kind = ClassifierKind::decision_tree;
    std::size_t calls = 0;
    auto r = cross_validate(base, ext, cfg, [&](const Dataset& train, const Dataset& test) {
        ++calls;
        for (const auto& o : test) EXPECT_EQ(o.provenance, Provenance::base);
        EXPECT_EQ(train.size() + test.size(), base.size() + ext.size());
        std::size_t externals = 0;
        for (const auto& o : train) externals += o.provenance == Provenance::external;
        EXPECT_EQ(externals, ext.size());
    });
    EXPECT_EQ(calls, 12u);
    EXPECT_EQ(r.repetitions, 3u);
    EXPECT_EQ(r.per_repetition_macro_f.size(), 3u);
    EXPECT_EQ(r.tested_observations, base.size() * 3);
}

TEST(CrossValidate, RejectsNonBaseRows) {
    std::vector<Observation> rows;
    auto base = fixtures::blobs({{"a", 20}, {"b", 10}}, 2, 1);
    rows.assign(base.begin(), base.end());
    rows[3].provenance = Provenance::synthetic;
    CVConfig cfg;
    EXPECT_THROW(cross_validate(Dataset(2, rows), cfg, TrainingTransform{}), ProtocolViolation);
}

TEST(CrossValidate, TransformCannotLeakIntoTesting) {
    auto base = fixtures::blobs({{"a", 20}, {"b", 10}}, 2, 1);
    CVConfig cfg;
    cfg.folds = 3;
    cfg.classifier.kind = ClassifierKind::knn;
    TrainingTransform add_synthetic = [](const Dataset& train, std::uint64_t) {
        return train.append({obs({0, 0}, "b", Provenance::synthetic)});
    };
    std::size_t synthetic_in_training = 0;
    cross_validate(base, cfg, add_synthetic, [&](const Dataset& train, const Dataset& test) {
        for (const auto& o : train) synthetic_in_training += o.provenance == Provenance::synthetic;
        for (const auto& o : test) EXPECT_EQ(o.provenance, Provenance::base);
    });
    EXPECT_EQ(synthetic_in_training, 3u);
}

TEST(CrossValidate, DeterministicAndSeedSensitive) {
    auto base = fixtures::blobs({{"a", 50}, {"b", 20}, {"c", 12}}, 3, 6, 1.4);
    CVConfig cfg;
    cfg.folds = 5;
    cfg.repetitions = 2;
    cfg.seed = 10;
    auto r1 = cross_validate(base, Dataset(3, {}), cfg);
    auto r2 = cross_validate(base, Dataset(3, {}), cfg);
    EXPECT_EQ(r1.macro_f, r2.macro_f);
    EXPECT_EQ(r1.per_class_f, r2.per_class_f);
}

TEST(RepetitionAverage, MeansPerClass) {
    EvaluationReport a, b;
    a.per_class_f = {{"x", 0.2}, {"y", 0.4}};
    a.macro_f = 0.3;
    a.per_repetition_macro_f = {0.3};
    b.per_class_f = {{"x", 0.6}, {"y", 0.8}};
    b.macro_f = 0.7;
    b.per_repetition_macro_f = {0.7};
    std::vector<EvaluationReport> v{a, b};
    auto m = repetition_average(v);
    EXPECT_DOUBLE_EQ(m.per_class_f.at("x"), 0.4);
    EXPECT_DOUBLE_EQ(m.macro_f, 0.5);
    EXPECT_EQ(m.repetitions, 2u);
    b.per_class_f.erase("y");
    std::vector<EvaluationReport> bad{a, b};
    EXPECT_THROW(repetition_average(bad), std::invalid_argument);
}
