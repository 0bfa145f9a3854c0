#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "enrichkit/baselines.hpp"
#include "enrichkit/classifiers.hpp"
#include "enrichkit/dataset.hpp"
#include "enrichkit/enrichment.hpp"
#include "enrichkit/evaluation.hpp"

namespace enrichkit {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DatasetSource {
    std::string name;
    std::filesystem::path path;
    Schema schema;
};

enum class StageKind { none, rane, seme, supe, rus, ros, smote, bsmote };

const char* to_string(StageKind k);
StageKind parse_stage_kind(const std::string& s);
bool is_enrichment(StageKind k);
bool is_smote_family(StageKind k);

struct StageSpec {
    StageKind kind = StageKind::none;
    std::optional<double> amount_percent;
    std::optional<bool> use_seme_prestep;
    // nullopt for SMOTE-family stages means "select by sweep"
    std::optional<std::size_t> smote_k = 5;
};

struct MethodSpec {
    std::string name;
    std::vector<StageSpec> stages;

    bool uses_external() const;
    bool uses_amount() const;
    bool needs_smote_sweep() const;
};

struct ExperimentConfig {
    std::vector<DatasetSource> bases;
    std::vector<DatasetSource> externals;
    std::vector<MethodSpec> methods;
    EnrichmentConfig enrichment;  // defaults for enrichment stages; seeds are set per fold
    // when false, SemE validates with the cell's classifier
    bool enrichment_classifier_set = false;
    std::size_t folds = 10;
    std::size_t repetitions = 50;
    std::size_t smote_sweep_repetitions = 10;
    std::vector<std::size_t> smote_k_candidates = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<ClassifierSpec> classifiers;
    std::vector<double> amounts;               // sweep axis; empty = method/default amount
    std::vector<std::string> external_names;   // sweep axis; empty = all externals
    std::filesystem::path output_dir;
    std::uint64_t seed = 0;
};

/// Parses the JSON experiment document. Relative paths resolve against
/// `base_dir`. Throws ConfigError.
ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct RunOptions {
    std::size_t jobs = 1;
    std::optional<std::uint64_t> seed_override;
};

struct CellResult {
    std::string id;
    std::string dataset;
    std::string method;
    std::string external;
    std::optional<double> amount_percent;
    std::string classifier;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double wall_ms = 0.0;
    EvaluationReport report;
    std::optional<std::size_t> selected_smote_k;
    nlohmann::json enrichment;  // aggregated audits across folds
};

struct RunSummary {
    std::vector<CellResult> cells;
    std::size_t failed = 0;
    std::vector<std::filesystem::path> written;
};

/// Runs every sweep cell and writes `results.csv`, one JSON file per cell
/// under `cells/`, pivot tables under `tables/`, `ranks.csv` and
/// `friedman.json` when at least two methods and two datasets completed, and
/// a plain-text `run_manifest.log`.
RunSummary run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Picks the SMOTE-family neighbor count with the best mean macro F over
/// `repetitions` cross-validation repetitions. Infeasible k (class too small
/// in some training fold) are skipped; ties go to the smaller k.
std::size_t select_smote_k(const Dataset& base, ResampleMethod method, const CVConfig& cv,
                           const std::vector<std::size_t>& candidates, std::size_t repetitions);

/// 100 * (method - baseline) / baseline, rounded to an integer; nullopt when
/// the baseline is zero.
std::optional<long> gain_percent(double method_f, double baseline_f);

}  // namespace enrichkit
