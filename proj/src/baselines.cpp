#include "enrichkit/baselines.hpp"

#include <algorithm>

#include "enrichkit/random.hpp"

namespace enrichkit {

const char* to_string(ResampleMethod m) {
    switch (m) {
        case ResampleMethod::rus: return "rus";
        case ResampleMethod::ros: return "ros";
        case ResampleMethod::smote: return "smote";
        case ResampleMethod::bsmote: return "bsmote";
    }
    return "unknown";
}

ResampleMethod parse_resample_method(const std::string& s) {
    if (s == "rus") return ResampleMethod::rus;
    if (s == "ros") return ResampleMethod::ros;
    if (s == "smote") return ResampleMethod::smote;
    if (s == "bsmote" || s == "borderline_smote") return ResampleMethod::bsmote;
    throw ResampleError("unknown resampling method '" + s + "'");
}

namespace {

std::size_t target_for(const ResampleConfig& cfg, const Label& label, std::size_t fallback) {
    auto it = cfg.target.find(label);
    return it == cfg.target.end() ? fallback : it->second;
}

void require_two_classes(const Dataset& d) {
    if (d.class_labels().size() < 2) throw ResampleError("resampling needs at least two classes");
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

// k nearest rows to d[index] among `pool` (index itself excluded), ties by row index.
std::vector<std::size_t> nearest_in(const Dataset& d, std::size_t index, const std::vector<std::size_t>& pool,
                                    std::size_t k) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(pool.size());
    for (auto j : pool) {
        if (j != index) dist.emplace_back(squared_distance(d[index].features, d[j].features), j);
    }
    k = std::min(k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
    return out;
}

Observation synthetic_copy(const Dataset& d, std::size_t index) {
    Observation o = d[index];
    o.provenance = Provenance::synthetic;
    o.origin_index = index;
    return o;
}

// Shared SMOTE driver; `seeds_for` picks the allowed seed rows of a class.
template <typename SeedFn>
ResampleResult smote_family(const Dataset& d, const ResampleConfig& cfg, SeedFn seeds_for) {
    require_two_classes(d);
    if (cfg.smote_k == 0) throw ResampleError("smote_k must be positive");
    const auto dist = class_distribution(d);
    const std::size_t dominant = dist.counts.at(dist.dominant);
    const auto by_label = d.indices_by_label();
    Rng rng(cfg.seed);
    ResampleResult result{d, {}};
    std::vector<Observation> added;
    for (const auto& [label, members] : by_label) {
        const std::size_t target = target_for(cfg, label, dominant);
        if (target <= members.size()) continue;
        if (members.size() <= cfg.smote_k) {
            throw ResampleError("class '" + label + "' has " + std::to_string(members.size()) +
                                " members; SMOTE with k=" + std::to_string(cfg.smote_k) + " needs more than k");
        }
        auto seeds = seeds_for(label, members, result.warnings);
        for (std::size_t n = members.size(); n < target; ++n) {
            const std::size_t x = seeds[rng.uniform_index(seeds.size())];
            const auto nn = nearest_in(d, x, members, cfg.smote_k);
            const std::size_t partner = nn[rng.uniform_index(nn.size())];
            const double u = rng.uniform01();
            Observation o = synthetic_copy(d, x);
            for (std::size_t j = 0; j < o.features.size(); ++j) {
                o.features[j] = d[x].features[j] + u * (d[partner].features[j] - d[x].features[j]);
            }
            added.push_back(std::move(o));
        }
    }
    result.data = d.append(std::move(added));
    return result;
}

}  // namespace

ResampleResult rus(const Dataset& d, const ResampleConfig& cfg) {
    require_two_classes(d);
    const auto by_label = d.indices_by_label();
    std::size_t smallest = d.size();
    for (const auto& [_, m] : by_label) smallest = std::min(smallest, m.size());
    Rng rng(cfg.seed);
    std::vector<std::size_t> keep;
    for (const auto& [label, members] : by_label) {
        const std::size_t target = std::min(target_for(cfg, label, smallest), members.size());
        for (auto pick : rng.sample_without_replacement(members.size(), target)) keep.push_back(members[pick]);
    }
    std::sort(keep.begin(), keep.end());
    return {d.subset(keep), {}};
}

ResampleResult ros(const Dataset& d, const ResampleConfig& cfg) {
    require_two_classes(d);
    const auto dist = class_distribution(d);
    const std::size_t dominant = dist.counts.at(dist.dominant);
    Rng rng(cfg.seed);
    std::vector<Observation> added;
    for (const auto& [label, members] : d.indices_by_label()) {
        const std::size_t target = target_for(cfg, label, dominant);
        for (std::size_t n = members.size(); n < target; ++n) {
            added.push_back(synthetic_copy(d, members[rng.uniform_index(members.size())]));
        }
    }
    return {d.append(std::move(added)), {}};
}

ResampleResult smote(const Dataset& d, const ResampleConfig& cfg) {
    return smote_family(d, cfg, [](const Label&, const std::vector<std::size_t>& members, auto&) { return members; });
}

std::vector<std::size_t> danger_set(const Dataset& d, const Label& label, std::size_t m) {
    if (m == 0) throw ResampleError("DANGER neighborhood size must be positive");
    if (m >= d.size()) throw ResampleError("DANGER neighborhood size must be smaller than the dataset");
    std::vector<std::size_t> all(d.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i].label != label) continue;
        const auto nn = nearest_in(d, i, all, m);
        const auto other = static_cast<std::size_t>(
            std::count_if(nn.begin(), nn.end(), [&](std::size_t j) { return d[j].label != label; }));
        if (2 * other >= m && other < m) out.push_back(i);
    }
    return out;
}

ResampleResult bsmote(const Dataset& d, const ResampleConfig& cfg) {
    return smote_family(d, cfg, [&](const Label& label, const std::vector<std::size_t>& members,
                                    std::vector<std::string>& warnings) {
        auto danger = danger_set(d, label, cfg.smote_k);
        if (danger.empty()) {
            warnings.push_back("class '" + label + "' has no DANGER observations; fell back to plain SMOTE");
            return members;
        }
        return danger;
    });
}

ResampleResult resample(const Dataset& d, const ResampleConfig& cfg) {
    switch (cfg.method) {
        case ResampleMethod::rus: return rus(d, cfg);
        case ResampleMethod::ros: return ros(d, cfg);
        case ResampleMethod::smote: return smote(d, cfg);
        case ResampleMethod::bsmote: return bsmote(d, cfg);
    }
    throw ResampleError("unknown resampling method");
}

BalancingOp resample_stage(ResampleConfig cfg) {
    return [cfg = std::move(cfg)](const Dataset& base, const Dataset&) {
        auto r = resample(base, cfg);
        return StageOutput{std::move(r.data), {}, std::move(r.warnings)};
    };
}

}  // namespace enrichkit
