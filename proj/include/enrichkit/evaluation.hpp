#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "enrichkit/classifiers.hpp"
#include "enrichkit/dataset.hpp"

namespace enrichkit {

/// 2PR/(P+R); zero when there are no true positives.
double f_measure(std::size_t tp, std::size_t fp, std::size_t fn);

/// Counts per (true, predicted) label pair over a fixed label set.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::vector<Label> labels);

    void add(const Label& truth, const Label& predicted);
    void merge(const ConfusionMatrix& other);

    const std::vector<Label>& labels() const { return labels_; }
    std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * labels_.size() + predicted]; }
    std::size_t total() const;

    std::size_t true_positives(std::size_t c) const { return at(c, c); }
    std::size_t false_positives(std::size_t c) const;
    std::size_t false_negatives(std::size_t c) const;

private:
    std::size_t index_of(const Label& l) const;

    std::vector<Label> labels_;
    std::vector<std::size_t> counts_;
};

struct EvaluationReport {
    std::map<Label, double> per_class_f;
    double macro_f = 0.0;
    std::size_t repetitions = 1;
    std::vector<double> per_repetition_macro_f;
    // filled by cross-validation
    std::size_t folds = 0;
    std::size_t tested_observations = 0;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

/// Per-class F from one-vs-rest counts; macro F is the unweighted mean over
/// `all_classes`, so classes never seen or predicted contribute zero.
EvaluationReport evaluate(std::span<const Label> truth, std::span<const Label> predicted,
                          const std::vector<Label>& all_classes);

EvaluationReport report_from_confusion(const ConfusionMatrix& cm);

/// Mean per class and macro over reports with identical class sets; keeps
/// every per-repetition macro value.
EvaluationReport repetition_average(std::span<const EvaluationReport> reports);

/// k disjoint index sets covering `d`. Each class is shuffled and dealt
/// round-robin, so per-class fold counts differ by at most one.
std::vector<std::vector<std::size_t>> stratified_kfold(const Dataset& d, std::size_t k, std::uint64_t seed);

struct CVConfig {
    std::size_t folds = 10;
    std::size_t repetitions = 1;
    std::uint64_t seed = 0;
    ClassifierSpec classifier;
};

/// Fold count after reduction to the smallest class size.
std::size_t effective_folds(const Dataset& d, std::size_t requested);

class ProtocolViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Throws ProtocolViolation unless every observation is base-origin.
void require_base_only(const Dataset& d, std::string_view context);

/// Rewrites the training portion of a fold (enrichment, resampling). The seed
/// is unique per repetition and fold.
using TrainingTransform = std::function<Dataset(const Dataset& training, std::uint64_t seed)>;
/// Sees the final training set and the test fold of every split.
using FoldObserver = std::function<void(const Dataset& training, const Dataset& test)>;

/// Stratified k-fold CV where `external_additions` join every training fold
/// and test folds hold base observations only.
EvaluationReport cross_validate(const Dataset& base, const Dataset& external_additions, const CVConfig& cfg,
                                const FoldObserver& observer = {});

EvaluationReport cross_validate(const Dataset& base, const CVConfig& cfg, const TrainingTransform& transform,
                                const FoldObserver& observer = {});

}  // namespace enrichkit
