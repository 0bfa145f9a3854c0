#include <cstdlib>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "enrichkit/dataset.hpp"
#include "enrichkit/experiment.hpp"
#include "enrichkit/stats.hpp"
#include "enrichkit/typing.hpp"

namespace ek = enrichkit;

namespace {

constexpr const char* kConfigHelp = R"(Config document (JSON). Relative paths resolve against the config's directory.
  base_dataset        {path, name?, label_column?, positive_class?, schema?} or a path string
  base_datasets       list of the above (several base sets enable ranks.csv)
  external_datasets   list of the above; an external named like the base is skipped
  methods             list of "none"|"rane"|"seme"|"supe"|"rus"|"ros"|"smote"|"bsmote",
                      or {method, name?, amount_percent?, use_seme_prestep?, smote_k? (int or "sweep")},
                      or {method: "pipeline", name?, stages: [...]}; baseline "None" always runs
  enrichment          {minority_threshold: 0.2, amount_percent: 100, k: 5,
                       seme_split_fraction: 0.9, use_seme_prestep: false, classifier?}
                      (SemE validation classifier defaults to the cell classifier)
  cv                  {folds: 10, repetitions: 50, smote_sweep_repetitions: 10,
                       smote_k_candidates: [1..10]}
  classifier          "random_forest" (default) | "knn" | "decision_tree" | "gaussian_nb", or
                      {kind, knn_neighbors: 3, min_samples_split: 2, min_samples_leaf: 1,
                       max_depth: 30, n_trees: 10, max_features: 0 (=sqrt d), bootstrap: true,
                       var_smoothing: 1e-9}
  sweep               {amount_percent: [...], external: [names], classifier: [...]}
  output_dir          default "enrichkit_out"
  seed                default 0; ENRICHKIT_SEED overrides it, --seed overrides both
Exit codes: 0 success, 1 config error, 2 some cells failed (see run_manifest.log).)";

int run_command(const std::string& config_path, std::size_t jobs, const std::optional<std::uint64_t>& cli_seed) {
    ek::ExperimentConfig cfg;
    ek::RunOptions options;
    options.jobs = jobs;
    try {
        cfg = ek::load_experiment_config(config_path);
        if (const char* env = std::getenv("ENRICHKIT_SEED"); env && *env) {
            try {
                options.seed_override = std::stoull(env);
            } catch (const std::exception&) {
                throw ek::ConfigError(std::string("ENRICHKIT_SEED is not an unsigned integer: ") + env);
            }
        }
        if (cli_seed) options.seed_override = cli_seed;
        const auto summary = ek::run_experiment(cfg, options);
        std::cerr << "cells: " << summary.cells.size() << ", failed: " << summary.failed << ", output: "
                  << cfg.output_dir.string() << "\n";
        for (const auto& c : summary.cells) {
            if (!c.ok) std::cerr << "  failed " << c.id << ": " << c.error << "\n";
        }
        return summary.failed == 0 ? 0 : 2;
    } catch (const ek::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
}

int rank_command(const std::string& scores_path) {
    try {
        const auto matrix = ek::load_score_matrix(scores_path);
        std::cout << ek::format_rank_csv(ek::friedman_ranks(matrix));
        const auto f = ek::friedman_statistic(matrix);
        std::cerr << "chi_square=" << f.chi_square << " df=" << f.degrees_of_freedom << " p=" << f.p_value << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int type_command(const std::string& path, std::size_t k, const std::string& label_column, double threshold,
                 bool all_classes) {
    try {
        ek::Schema schema;
        if (!label_column.empty()) schema.label_column = label_column;
        const auto d = ek::load_dataset(path, schema);
        std::set<ek::Label> classes;
        if (all_classes) {
            const auto labels = d.class_labels();
            classes.insert(labels.begin(), labels.end());
        } else {
            classes = ek::minority_classes(ek::class_distribution(d), threshold);
        }
        const auto typed = ek::label_dataset_types(d, classes, k);
        std::cout << "index,class,same_class_neighbors,type\n";
        for (const auto& [i, t] : typed) {
            std::cout << i << "," << d[i].label << "," << t.same_class_neighbors << "," << ek::to_string(t.type)
                      << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minority-class enrichment experiments"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a config-driven experiment sweep");
    run->footer(kConfigHelp);
    std::string config_path;
    std::size_t jobs = 1;
    std::optional<std::uint64_t> seed;
    run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--jobs", jobs, "Worker threads for independent cells")->capture_default_str()->check(
        CLI::PositiveNumber);
    run->add_option("--seed", seed, "Seed overriding the config and ENRICHKIT_SEED");

    auto* rank = app.add_subcommand("rank", "Friedman ranks from a long-format score CSV (method,dataset,macro_f)");
    std::string scores;
    rank->add_option("--scores", scores, "Score CSV")->required()->check(CLI::ExistingFile);

    auto* type = app.add_subcommand("type", "Emit the neighborhood type of each minority observation");
    std::string dataset_path;
    std::size_t k = ek::kDefaultTypingK;
    std::string label_column;
    double threshold = 0.2;
    bool all_classes = false;
    type->add_option("--dataset", dataset_path, "Dataset CSV")->required()->check(CLI::ExistingFile);
    type->add_option("--k", k, "Neighborhood size")->capture_default_str()->check(CLI::PositiveNumber);
    type->add_option("--label-column", label_column, "Label column (default: last column)");
    type->add_option("--threshold", threshold, "Minority ratio threshold")->capture_default_str();
    type->add_flag("--all-classes", all_classes, "Type observations of every class");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    if (*run) return run_command(config_path, jobs, seed);
    if (*rank) return rank_command(scores);
    return type_command(dataset_path, k, label_column, threshold, all_classes);
}
