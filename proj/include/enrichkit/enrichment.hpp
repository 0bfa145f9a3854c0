#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "enrichkit/classifiers.hpp"
#include "enrichkit/dataset.hpp"
#include "enrichkit/typing.hpp"

namespace enrichkit {

class EnrichmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EnrichmentConfig {
    double minority_threshold = kDefaultMinorityThreshold;
    // RanE: share of each external minority class to add.
    // SupE: share of the gap to the dominant class count to close.
    double amount_percent = 100.0;
    std::size_t k = kDefaultTypingK;
    ClassifierSpec classifier;
    double seme_split_fraction = 0.9;
    bool use_seme_prestep = false;
    std::uint64_t seed = 0;

    void validate() const;
};

struct EnrichmentAudit {
    std::string method;
    // external row indices, in acceptance order
    std::vector<std::size_t> added_indices;
    std::size_t considered = 0;
    std::size_t rejected_count = 0;
    // SemE (and the SupE pre-step): validation macro F before and after, and
    // the best-so-far value after every evaluated candidate.
    double baseline_macro_f = 0.0;
    double final_macro_f = 0.0;
    std::vector<double> trajectory;
    std::map<Label, std::size_t> per_class_added;
    // SupE only
    std::size_t prestep_added = 0;
    std::map<Label, std::size_t> per_class_target;
    std::vector<ObjectType> added_types;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

struct EnrichmentResult {
    Dataset data;
    EnrichmentAudit audit;
};

/// Random Enrichment: adds floor(A% x |M_e|) randomly chosen external
/// observations of every minority class.
EnrichmentResult rane(const Dataset& base, const Dataset& external, const EnrichmentConfig& cfg);

/// Semi-greedy Enrichment. Splits the base-origin rows into a learning and an
/// evaluation part, then walks the external minority observations in a seeded
/// order and keeps each one only if it strictly raises the evaluation macro F.
/// Returns the base followed by the kept observations.
EnrichmentResult seme(const Dataset& base, const Dataset& external, const EnrichmentConfig& cfg);

/// Supervised Enrichment. Optionally runs SemE first, then adds external
/// minority observations that would be borderline in the current enriched
/// set until each minority class reaches its target
/// |M_b| + ceil(A% x (|D_b| - |M_b|)) or candidates run out.
EnrichmentResult supe(const Dataset& base, const Dataset& external, const EnrichmentConfig& cfg);

// ---------------------------------------------------------------------------
// Composable balancing stages

struct StageOutput {
    Dataset data;
    std::vector<EnrichmentAudit> audits;
    std::vector<std::string> warnings;
};

using BalancingOp = std::function<StageOutput(const Dataset& base, const Dataset& external)>;

BalancingOp identity_stage();
BalancingOp rane_stage(EnrichmentConfig cfg);
BalancingOp seme_stage(EnrichmentConfig cfg);
BalancingOp supe_stage(EnrichmentConfig cfg);

/// Runs stages left to right; each sees the previous output as its base and
/// the same external set.
BalancingOp compose(std::vector<BalancingOp> stages);

}  // namespace enrichkit
