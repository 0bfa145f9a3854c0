#include <gtest/gtest.h>

#include <algorithm>

#include "enrichkit/classifiers.hpp"
#include "fixtures.hpp"

using namespace enrichkit;
using fixtures::obs;

namespace {

const ClassifierKind kAllKinds[] = {ClassifierKind::knn, ClassifierKind::decision_tree, ClassifierKind::random_forest,
                                    ClassifierKind::gaussian_nb};

Dataset separable() {
    std::vector<Observation> rows;
    for (int i = 0; i < 20; ++i) {
        rows.push_back(obs({static_cast<double>(i % 5), 0.1 * i}, "low"));
        rows.push_back(obs({20.0 + i % 5, 0.1 * i}, "high"));
        rows.push_back(obs({10.0 + i % 3, 50.0 + i}, "mid"));
    }
    return Dataset(2, rows);
}

ClassifierSpec spec_of(ClassifierKind k, std::uint64_t seed = 1) {
    ClassifierSpec s;
    s.kind = k;
    s.seed = seed;
    return s;
}

}  // namespace

TEST(Classifiers, EveryKindLearnsSeparableData) {
    auto d = separable();
    for (auto kind : kAllKinds) {
        auto m = train(spec_of(kind), d);
        auto pred = m.predict(d);
        for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(pred[i], d[i].label) << to_string(kind);
        EXPECT_EQ(m.predict(std::vector<double>{21.0, 0.5}), "high");
    }
}

TEST(Classifiers, DeterministicForFixedSeed) {
    auto d = fixtures::blobs({{"a", 60}, {"b", 30}, {"c", 10}}, 4, 3, 1.5);
    auto probe = fixtures::blobs({{"a", 30}, {"b", 30}}, 4, 99, 2.0);
    for (auto kind : kAllKinds) {
        auto p1 = train(spec_of(kind, 5), d).predict(probe);
        auto p2 = train(spec_of(kind, 5), d).predict(probe);
        EXPECT_EQ(p1, p2) << to_string(kind);
    }
}

TEST(Classifiers, PredictionsAreTrainingLabels) {
    auto d = fixtures::blobs({{"a", 40}, {"b", 10}}, 3, 7, 2.0);
    auto probe = fixtures::blobs({{"x", 50}}, 3, 8, 3.0);
    for (auto kind : kAllKinds) {
        for (const auto& l : train(spec_of(kind), d).predict(probe)) EXPECT_TRUE(l == "a" || l == "b");
    }
}

TEST(Classifiers, InputChecks) {
    auto d = separable();
    auto m = train(spec_of(ClassifierKind::knn), d);
    EXPECT_THROW(m.predict(std::vector<double>{1.0}), ClassifierError);
    EXPECT_THROW(m.predict(std::vector<double>{1.0, std::nan("")}), ClassifierError);
    EXPECT_THROW(train(spec_of(ClassifierKind::knn), Dataset(2, {})), ClassifierError);
    Dataset one(1, {obs({1}, "a"), obs({2}, "a")});
    EXPECT_THROW(train(spec_of(ClassifierKind::decision_tree), one), ClassifierError);
    EXPECT_THROW(train(spec_of(ClassifierKind::random_forest), one), ClassifierError);
}

TEST(Classifiers, TreeDepthIsBounded) {
    auto d = fixtures::blobs({{"a", 150}, {"b", 150}}, 2, 12, 3.0);
    auto s = spec_of(ClassifierKind::decision_tree);
    s.params.max_depth = 4;
    auto m = train(s, d);
    EXPECT_GE(tree_depth(m), 1u);
    EXPECT_LE(tree_depth(m), 4u);
    EXPECT_LE(tree_depth(train(spec_of(ClassifierKind::random_forest), d)), 30u);
    EXPECT_EQ(tree_depth(train(spec_of(ClassifierKind::knn), d)), 0u);
}

TEST(Classifiers, KnnVoteTieGoesToNearest) {
    // k = 2: one neighbor of each class; the nearer one decides
    Dataset d(1, {obs({0.0}, "a"), obs({1.0}, "b"), obs({10.0}, "a")});
    auto s = spec_of(ClassifierKind::knn);
    s.params.knn_neighbors = 2;
    auto m = train(s, d);
    EXPECT_EQ(m.predict(std::vector<double>{0.4}), "a");
    EXPECT_EQ(m.predict(std::vector<double>{0.6}), "b");
}

TEST(Classifiers, NaiveBayesIgnoresRowOrder) {
    auto d = fixtures::blobs({{"a", 50}, {"b", 20}, {"c", 15}}, 3, 31, 1.7);
    std::vector<Observation> rows(d.begin(), d.end());
    std::reverse(rows.begin(), rows.end());
    Dataset r(3, rows);
    auto probe = fixtures::blobs({{"x", 200}}, 3, 4, 3.0);
    auto s = spec_of(ClassifierKind::gaussian_nb);
    EXPECT_EQ(train(s, d).predict(probe), train(s, r).predict(probe));
}

TEST(Classifiers, NaiveBayesHandlesConstantFeatures) {
    Dataset d(2, {obs({1, 0}, "a"), obs({1, 0}, "a"), obs({1, 1}, "b"), obs({1, 1}, "b")});
    auto m = train(spec_of(ClassifierKind::gaussian_nb), d);
    EXPECT_EQ(m.predict(std::vector<double>{1, 0.1}), "a");
    EXPECT_EQ(m.predict(std::vector<double>{1, 0.9}), "b");
}

TEST(ClassifierSpecTest, JsonRoundTripAndValidation) {
    auto s = ClassifierSpec::from_json(nlohmann::json::parse(R"({"kind": "knn", "knn_neighbors": 7})"));
    EXPECT_EQ(s.kind, ClassifierKind::knn);
    EXPECT_EQ(s.params.knn_neighbors, 7u);
    EXPECT_EQ(ClassifierSpec::from_json(s.to_json()).params.knn_neighbors, 7u);
    EXPECT_EQ(ClassifierSpec::from_json("rf").kind, ClassifierKind::random_forest);
    EXPECT_THROW(ClassifierSpec::from_json(nlohmann::json::parse(R"({"kind": "knn", "bogus": 1})")),
                 ClassifierError);
    EXPECT_THROW(ClassifierSpec::from_json("svm"), ClassifierError);
    ClassifierSpec bad;
    bad.params.n_trees = 0;
    EXPECT_THROW(bad.validate(), ClassifierError);
}
