#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "enrichkit/dataset.hpp"

namespace enrichkit {

enum class ClassifierKind { knn, decision_tree, random_forest, gaussian_nb };

const char* to_string(ClassifierKind k);
ClassifierKind parse_classifier_kind(const std::string& s);

class ClassifierError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Defaults follow the reference configuration: kNN with 3 neighbors and
// uniform weights, gini trees of depth <= 30, a 10-tree bootstrap forest
// with sqrt(d) features per split, and Gaussian NB with 1e-9 variance
// smoothing.
struct Hyperparameters {
    std::size_t knn_neighbors = 3;
    std::size_t min_samples_split = 2;
    std::size_t min_samples_leaf = 1;
    std::size_t max_depth = 30;
    std::size_t n_trees = 10;
    // features tried per split in a forest; 0 means floor(sqrt(d))
    std::size_t max_features = 0;
    bool bootstrap = true;
    double var_smoothing = 1e-9;
};

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::random_forest;
    Hyperparameters params;
    std::uint64_t seed = 0;

    /// Throws ClassifierError on out-of-range hyperparameters.
    void validate() const;

    /// `{"kind": "random_forest", "n_trees": 10, ...}`; unknown keys are errors.
    static ClassifierSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

namespace detail {
class Model {
public:
    virtual ~Model() = default;
    // returns an index into the trained model's label list
    virtual std::size_t predict(std::span<const double> x) const = 0;
    virtual std::size_t depth() const { return 0; }
};
}  // namespace detail

/// Fitted, immutable model. Copies share the fitted state.
class TrainedModel {
public:
    TrainedModel(ClassifierSpec spec, std::vector<Label> labels, std::size_t dimension,
                 std::shared_ptr<const detail::Model> model)
        : spec_(std::move(spec)), labels_(std::move(labels)), dimension_(dimension),
          model_(std::move(model)) {}

    const ClassifierSpec& spec() const { return spec_; }
    const std::vector<Label>& class_labels() const { return labels_; }
    std::size_t dimension() const { return dimension_; }

    Label predict(std::span<const double> x) const;
    std::vector<Label> predict(const Dataset& d) const;

    std::size_t model_depth() const { return model_->depth(); }

private:
    ClassifierSpec spec_;
    std::vector<Label> labels_;
    std::size_t dimension_;
    std::shared_ptr<const detail::Model> model_;
};

TrainedModel train(const ClassifierSpec& spec, const Dataset& d);

inline Label predict(const TrainedModel& m, std::span<const double> x) { return m.predict(x); }

/// Length of the longest root-to-leaf path (in splits) of a decision tree
/// model, or of the deepest tree of a forest. Zero for other kinds.
std::size_t tree_depth(const TrainedModel& m);

}  // namespace enrichkit
