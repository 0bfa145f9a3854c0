#include "enrichkit/enrichment.hpp"

#include <algorithm>
#include <cmath>

#include "enrichkit/evaluation.hpp"
#include "enrichkit/random.hpp"

namespace enrichkit {

void EnrichmentConfig::validate() const {
    if (!(minority_threshold > 0.0 && minority_threshold <= 1.0)) {
        throw EnrichmentError("minority_threshold must lie in (0, 1]");
    }
    if (!(amount_percent >= 0.0 && amount_percent <= 100.0)) {
        throw EnrichmentError("amount_percent must lie in [0, 100]");
    }
    if (k == 0) throw EnrichmentError("typing k must be positive");
    if (!(seme_split_fraction > 0.0 && seme_split_fraction < 1.0)) {
        throw EnrichmentError("seme_split_fraction must lie in (0, 1)");
    }
    classifier.validate();
}

nlohmann::json EnrichmentAudit::to_json() const {
    nlohmann::json j;
    j["method"] = method;
    j["added_indices"] = added_indices;
    j["considered"] = considered;
    j["rejected_count"] = rejected_count;
    j["baseline_macro_f"] = baseline_macro_f;
    j["final_macro_f"] = final_macro_f;
    j["trajectory"] = trajectory;
    j["per_class_added"] = per_class_added;
    if (method == "supe") {
        j["prestep_added"] = prestep_added;
        j["per_class_target"] = per_class_target;
        std::vector<std::string> types;
        for (auto t : added_types) types.emplace_back(to_string(t));
        j["added_types"] = types;
    }
    j["warnings"] = warnings;
    return j;
}

namespace {

struct Setup {
    std::set<Label> minority;
    // external row indices per minority class, ascending
    std::map<Label, std::vector<std::size_t>> candidates;
    std::vector<std::string> warnings;
};

Setup prepare(const Dataset& base, const Dataset& external, const EnrichmentConfig& cfg) {
    cfg.validate();
    if (base.empty()) throw EnrichmentError("base set is empty");
    if (!external.empty() && external.dimension() != base.dimension()) {
        throw EnrichmentError("external set has dimension " + std::to_string(external.dimension()) +
                              ", base has " + std::to_string(base.dimension()));
    }
    for (const auto& label : external.class_labels()) {
        if (!base.has_label(label)) {
            throw EnrichmentError("external class '" + label + "' has no counterpart in the base set");
        }
    }
    Setup s;
    s.minority = minority_classes(class_distribution(base), cfg.minority_threshold);
    const auto by_label = external.indices_by_label();
    for (const auto& label : s.minority) {
        auto it = by_label.find(label);
        if (it == by_label.end()) {
            s.warnings.push_back("minority class '" + label + "' has no external observations");
            continue;
        }
        s.candidates[label] = it->second;
    }
    return s;
}

Observation as_external(const Dataset& external, std::size_t index) {
    Observation o = external[index];
    o.provenance = Provenance::external;
    o.origin_index = index;
    return o;
}

double validation_score(const ClassifierSpec& spec, const Dataset& learning, const Dataset& evaluation,
                        const std::vector<Label>& truth, const std::vector<Label>& classes) {
    const auto model = train(spec, learning);
    const auto predicted = model.predict(evaluation);
    return evaluate(truth, predicted, classes).macro_f;
}

}  // namespace

EnrichmentResult rane(const Dataset& base, const Dataset& external, const EnrichmentConfig& cfg) {
    auto setup = prepare(base, external, cfg);
    EnrichmentAudit audit;
    audit.method = "rane";
    audit.warnings = setup.warnings;
    if (cfg.amount_percent > 0.0 && setup.candidates.empty() && !setup.minority.empty()) {
        throw EnrichmentError("no minority class of the base set has a corresponding external class");
    }

    Rng rng(derive_seed(cfg.seed, 0));
    std::vector<Observation> added;
    for (const auto& [label, members] : setup.candidates) {
        const auto take = static_cast<std::size_t>(
            std::floor(cfg.amount_percent * static_cast<double>(members.size()) / 100.0 + 1e-9));
        audit.considered += members.size();
        audit.per_class_added[label] = take;
        for (auto pick : rng.sample_without_replacement(members.size(), take)) {
            audit.added_indices.push_back(members[pick]);
            added.push_back(as_external(external, members[pick]));
        }
    }
    if (cfg.amount_percent > 0.0 && added.empty() && !setup.candidates.empty()) {
        audit.warnings.push_back("amount " + std::to_string(cfg.amount_percent) +
                                 "% rounds to zero observations for every minority class");
    }
    return {base.append(std::move(added)), std::move(audit)};
}

EnrichmentResult seme(const Dataset& base, const Dataset& external, const EnrichmentConfig& cfg) {
    auto setup = prepare(base, external, cfg);
    EnrichmentAudit audit;
    audit.method = "seme";
    audit.warnings = setup.warnings;

    // Only base-origin rows may be evaluated on; anything added by an earlier
    // stage stays in the learning part.
    std::vector<std::size_t> origin, carried;
    for (std::size_t i = 0; i < base.size(); ++i) {
        (base[i].provenance == Provenance::base ? origin : carried).push_back(i);
    }
    if (origin.empty()) throw EnrichmentError("SemE needs base-origin observations to evaluate on");
    const Dataset origin_set = base.subset(origin);
    auto [learning_part, evaluation] = stratified_split(origin_set, cfg.seme_split_fraction, derive_seed(cfg.seed, 1));
    require_base_only(evaluation, "SemE evaluation split");
    for (const auto& label : base.class_labels()) {
        if (!evaluation.has_label(label)) {
            throw EnrichmentError("class '" + label + "' is absent from the SemE evaluation split; it needs at least 2 "
                                  "base-origin members");
        }
    }
    Dataset learning = learning_part.concat(base.subset(carried));

    std::vector<std::size_t> order;
    for (const auto& [_, members] : setup.candidates) order.insert(order.end(), members.begin(), members.end());
    std::sort(order.begin(), order.end());
    Rng rng(derive_seed(cfg.seed, 2));
    rng.shuffle(order);

    std::vector<Label> truth;
    for (const auto& o : evaluation) truth.push_back(o.label);
    const auto& classes = base.class_labels();

    double best = validation_score(cfg.classifier, learning, evaluation, truth, classes);
    audit.baseline_macro_f = best;
    audit.trajectory.push_back(best);

    std::vector<Observation> kept;
    for (auto index : order) {
        ++audit.considered;
        auto candidate = as_external(external, index);
        Dataset trial = learning.append({candidate});
        const double score = validation_score(cfg.classifier, trial, evaluation, truth, classes);
        if (score > best) {
            best = score;
            learning = std::move(trial);
            audit.added_indices.push_back(index);
            ++audit.per_class_added[candidate.label];
            kept.push_back(std::move(candidate));
        } else {
            ++audit.rejected_count;
        }
        audit.trajectory.push_back(best);
    }
    audit.final_macro_f = best;
    return {base.append(std::move(kept)), std::move(audit)};
}

EnrichmentResult supe(const Dataset& base, const Dataset& external, const EnrichmentConfig& cfg) {
    auto setup = prepare(base, external, cfg);
    EnrichmentAudit audit;
    audit.method = "supe";
    audit.warnings = setup.warnings;

    Dataset current = base;
    std::set<std::size_t> used;
    if (cfg.use_seme_prestep) {
        auto pre = seme(base, external, cfg);
        current = std::move(pre.data);
        used.insert(pre.audit.added_indices.begin(), pre.audit.added_indices.end());
        audit.added_indices = pre.audit.added_indices;
        audit.per_class_added = pre.audit.per_class_added;
        audit.prestep_added = pre.audit.added_indices.size();
        audit.baseline_macro_f = pre.audit.baseline_macro_f;
        audit.final_macro_f = pre.audit.final_macro_f;
        audit.trajectory = std::move(pre.audit.trajectory);
    }
    if (current.size() < cfg.k) {
        throw EnrichmentError("SupE typing needs at least k=" + std::to_string(cfg.k) + " base observations");
    }

    const auto dist = class_distribution(current);
    const std::size_t dominant = dist.counts.at(dist.dominant);
    Rng rng(derive_seed(cfg.seed, 3));
    for (const auto& label : setup.minority) {
        const std::size_t have = dist.counts.at(label);
        const std::size_t deficit = dominant > have ? dominant - have : 0;
        const auto extra = static_cast<std::size_t>(
            std::ceil(cfg.amount_percent * static_cast<double>(deficit) / 100.0 - 1e-9));
        const std::size_t target = have + std::min(extra, deficit);
        audit.per_class_target[label] = target;

        auto it = setup.candidates.find(label);
        if (it == setup.candidates.end()) continue;
        std::vector<std::size_t> pool;
        for (auto i : it->second) {
            if (!used.contains(i)) pool.push_back(i);
        }
        rng.shuffle(pool);

        std::size_t count = have;
        for (auto index : pool) {
            if (count >= target) break;
            ++audit.considered;
            auto candidate = as_external(external, index);
            // typed against the enriched set as it stands now
            const auto type = label_candidate_type(current, candidate, cfg.k);
            if (type != ObjectType::borderline) {
                ++audit.rejected_count;
                continue;
            }
            current = current.append({candidate});
            audit.added_indices.push_back(index);
            audit.added_types.push_back(type);
            ++audit.per_class_added[label];
            ++count;
        }
        if (count < target) {
            audit.warnings.push_back("class '" + label + "' reached " + std::to_string(count) + " of target " +
                                     std::to_string(target) + "; borderline candidates exhausted");
        }
    }
    return {std::move(current), std::move(audit)};
}

BalancingOp identity_stage() {
    return [](const Dataset& base, const Dataset&) { return StageOutput{base, {}, {}}; };
}

namespace {

template <typename Fn>
BalancingOp enrichment_stage(Fn fn, EnrichmentConfig cfg) {
    return [fn, cfg](const Dataset& base, const Dataset& external) {
        auto r = fn(base, external, cfg);
        auto warnings = r.audit.warnings;
        return StageOutput{std::move(r.data), {std::move(r.audit)}, std::move(warnings)};
    };
}

}  // namespace

BalancingOp rane_stage(EnrichmentConfig cfg) { return enrichment_stage(rane, std::move(cfg)); }
BalancingOp seme_stage(EnrichmentConfig cfg) { return enrichment_stage(seme, std::move(cfg)); }
BalancingOp supe_stage(EnrichmentConfig cfg) { return enrichment_stage(supe, std::move(cfg)); }

BalancingOp compose(std::vector<BalancingOp> stages) {
    if (stages.empty()) throw std::invalid_argument("compose: no stages");
    return [stages = std::move(stages)](const Dataset& base, const Dataset& external) {
        StageOutput acc{base, {}, {}};
        for (const auto& stage : stages) {
            auto out = stage(acc.data, external);
            acc.data = std::move(out.data);
            std::move(out.audits.begin(), out.audits.end(), std::back_inserter(acc.audits));
            std::move(out.warnings.begin(), out.warnings.end(), std::back_inserter(acc.warnings));
        }
        return acc;
    };
}

}  // namespace enrichkit
