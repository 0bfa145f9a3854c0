#include "enrichkit/evaluation.hpp"

#include <algorithm>
#include <numeric>

#include "enrichkit/random.hpp"

namespace enrichkit {

double f_measure(std::size_t tp, std::size_t fp, std::size_t fn) {
    if (tp == 0) return 0.0;
    const double t = static_cast<double>(tp);
    const double precision = t / static_cast<double>(tp + fp);
    const double recall = t / static_cast<double>(tp + fn);
    return 2.0 * precision * recall / (precision + recall);
}

ConfusionMatrix::ConfusionMatrix(std::vector<Label> labels) : labels_(std::move(labels)) {
    std::sort(labels_.begin(), labels_.end());
    labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
    counts_.assign(labels_.size() * labels_.size(), 0);
}

std::size_t ConfusionMatrix::index_of(const Label& l) const {
    auto it = std::lower_bound(labels_.begin(), labels_.end(), l);
    if (it == labels_.end() || *it != l) throw std::invalid_argument("unknown class label '" + l + "'");
    return static_cast<std::size_t>(it - labels_.begin());
}

void ConfusionMatrix::add(const Label& truth, const Label& predicted) {
    ++counts_[index_of(truth) * labels_.size() + index_of(predicted)];
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.labels_ != labels_) throw std::invalid_argument("confusion matrices over different classes");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

std::size_t ConfusionMatrix::false_positives(std::size_t c) const {
    std::size_t n = 0;
    for (std::size_t t = 0; t < labels_.size(); ++t) n += t == c ? 0 : at(t, c);
    return n;
}

std::size_t ConfusionMatrix::false_negatives(std::size_t c) const {
    std::size_t n = 0;
    for (std::size_t p = 0; p < labels_.size(); ++p) n += p == c ? 0 : at(c, p);
    return n;
}

nlohmann::json EvaluationReport::to_json() const {
    nlohmann::json j;
    j["per_class_f"] = per_class_f;
    j["macro_f"] = macro_f;
    j["repetitions"] = repetitions;
    j["per_repetition_macro_f"] = per_repetition_macro_f;
    j["folds"] = folds;
    j["tested_observations"] = tested_observations;
    j["warnings"] = warnings;
    return j;
}

EvaluationReport report_from_confusion(const ConfusionMatrix& cm) {
    EvaluationReport r;
    const auto& labels = cm.labels();
    double sum = 0.0;
    for (std::size_t c = 0; c < labels.size(); ++c) {
        const double f = f_measure(cm.true_positives(c), cm.false_positives(c), cm.false_negatives(c));
        r.per_class_f[labels[c]] = f;
        sum += f;
    }
    r.macro_f = labels.empty() ? 0.0 : sum / static_cast<double>(labels.size());
    r.per_repetition_macro_f = {r.macro_f};
    return r;
}

EvaluationReport evaluate(std::span<const Label> truth, std::span<const Label> predicted,
                          const std::vector<Label>& all_classes) {
    if (truth.size() != predicted.size()) {
        throw std::invalid_argument("evaluate: " + std::to_string(truth.size()) + " true labels but " +
                                    std::to_string(predicted.size()) + " predictions");
    }
    ConfusionMatrix cm(all_classes);
    for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
    return report_from_confusion(cm);
}

EvaluationReport repetition_average(std::span<const EvaluationReport> reports) {
    if (reports.empty()) throw std::invalid_argument("repetition_average: no reports");
    EvaluationReport out;
    out.repetitions = 0;
    for (const auto& [label, _] : reports.front().per_class_f) out.per_class_f[label] = 0.0;
    double macro_sum = 0.0;
    std::size_t weight = 0;
    for (const auto& r : reports) {
        if (r.per_class_f.size() != out.per_class_f.size() ||
            !std::equal(r.per_class_f.begin(), r.per_class_f.end(), out.per_class_f.begin(),
                        [](const auto& a, const auto& b) { return a.first == b.first; })) {
            throw std::invalid_argument("repetition_average: reports cover different class sets");
        }
        const auto w = std::max<std::size_t>(r.repetitions, 1);
        for (const auto& [label, f] : r.per_class_f) out.per_class_f[label] += f * static_cast<double>(w);
        macro_sum += r.macro_f * static_cast<double>(w);
        weight += w;
        out.per_repetition_macro_f.insert(out.per_repetition_macro_f.end(), r.per_repetition_macro_f.begin(),
                                          r.per_repetition_macro_f.end());
        for (const auto& w_msg : r.warnings) {
            if (std::find(out.warnings.begin(), out.warnings.end(), w_msg) == out.warnings.end()) {
                out.warnings.push_back(w_msg);
            }
        }
        out.tested_observations += r.tested_observations;
        out.folds = std::max(out.folds, r.folds);
    }
    for (auto& [_, f] : out.per_class_f) f /= static_cast<double>(weight);
    out.macro_f = macro_sum / static_cast<double>(weight);
    out.repetitions = weight;
    return out;
}

std::vector<std::vector<std::size_t>> stratified_kfold(const Dataset& d, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("stratified_kfold: need at least 2 folds");
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t next = 0;
    for (auto& [label, members] : d.indices_by_label()) {
        if (members.size() < k) {
            throw std::invalid_argument("stratified_kfold: class '" + label + "' has " +
                                        std::to_string(members.size()) + " members, fewer than " +
                                        std::to_string(k) + " folds");
        }
        rng.shuffle(members);
        // continue dealing where the previous class stopped to even out fold sizes
        for (auto i : members) {
            folds[next].push_back(i);
            next = (next + 1) % k;
        }
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

std::size_t effective_folds(const Dataset& d, std::size_t requested) {
    if (requested < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
    std::size_t smallest = d.size();
    for (const auto& [_, idx] : d.indices_by_label()) smallest = std::min(smallest, idx.size());
    if (smallest < 2) {
        throw std::invalid_argument("cross-validation needs at least 2 members in every class");
    }
    return std::min(requested, smallest);
}

void require_base_only(const Dataset& d, std::string_view context) {
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i].provenance != Provenance::base) {
            throw ProtocolViolation(std::string(context) + ": observation " + std::to_string(i) + " has " +
                                    to_string(d[i].provenance) + " provenance");
        }
    }
}

EvaluationReport cross_validate(const Dataset& base, const Dataset& external_additions, const CVConfig& cfg,
                                const FoldObserver& observer) {
    for (const auto& label : external_additions.class_labels()) {
        if (!base.has_label(label)) {
            throw std::invalid_argument("cross_validate: external class '" + label + "' is not a base class");
        }
    }
    if (!external_additions.empty() && external_additions.dimension() != base.dimension()) {
        throw std::invalid_argument("cross_validate: external dimension differs from base");
    }
    std::vector<Observation> extra = external_additions.observations();
    for (auto& o : extra) {
        if (o.provenance == Provenance::base) o.provenance = Provenance::external;
    }
    TrainingTransform add = [&extra](const Dataset& training, std::uint64_t) { return training.append(extra); };
    return cross_validate(base, cfg, add, observer);
}

EvaluationReport cross_validate(const Dataset& base, const CVConfig& cfg, const TrainingTransform& transform,
                                const FoldObserver& observer) {
    if (cfg.repetitions == 0) throw std::invalid_argument("cross_validate: repetitions must be positive");
    require_base_only(base, "cross_validate base set");
    const std::size_t k = effective_folds(base, cfg.folds);
    std::vector<std::string> warnings;
    if (k < cfg.folds) {
        warnings.push_back("folds reduced from " + std::to_string(cfg.folds) + " to " + std::to_string(k) +
                           " (smallest class has " + std::to_string(k) + " members)");
    }

    std::vector<EvaluationReport> reps;
    reps.reserve(cfg.repetitions);
    for (std::size_t r = 0; r < cfg.repetitions; ++r) {
        const std::uint64_t rep_seed = cfg.seed + r;
        ClassifierSpec spec = cfg.classifier;
        spec.seed = cfg.classifier.seed + r;
        const auto folds = stratified_kfold(base, k, rep_seed);
        ConfusionMatrix pooled(base.class_labels());
        for (std::size_t f = 0; f < k; ++f) {
            std::vector<char> in_test(base.size(), 0);
            for (auto i : folds[f]) in_test[i] = 1;
            std::vector<std::size_t> train_idx;
            for (std::size_t i = 0; i < base.size(); ++i) {
                if (!in_test[i]) train_idx.push_back(i);
            }
            const Dataset test = base.subset(folds[f]);
            require_base_only(test, "test fold");
            Dataset training = base.subset(train_idx);
            if (transform) training = transform(training, derive_seed(rep_seed, f));
            if (observer) observer(training, test);
            const auto model = train(spec, training);
            for (const auto& o : test) pooled.add(o.label, model.predict(o.features));
        }
        auto rep = report_from_confusion(pooled);
        rep.tested_observations = pooled.total();
        rep.folds = k;
        reps.push_back(std::move(rep));
    }
    auto out = repetition_average(reps);
    out.warnings = std::move(warnings);
    return out;
}

}  // namespace enrichkit
