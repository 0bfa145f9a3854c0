#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace enrichkit {

/// Macro-F scores of methods (rows) on datasets (columns); higher is better.
class ScoreMatrix {
public:
    /// scores[m][d]; every cell must be present, finite and in [0, 1].
    ScoreMatrix(std::vector<std::string> methods, std::vector<std::string> datasets,
                std::vector<std::vector<double>> scores);

    const std::vector<std::string>& methods() const { return methods_; }
    const std::vector<std::string>& datasets() const { return datasets_; }
    double at(std::size_t method, std::size_t dataset) const { return scores_[method][dataset]; }

private:
    std::vector<std::string> methods_;
    std::vector<std::string> datasets_;
    std::vector<std::vector<double>> scores_;
};

/// Reads a long-format CSV with `method`, `dataset` and `macro_f` columns
/// (the runner's aggregate CSV qualifies). When a (method, dataset) pair
/// appears more than once its best score is used. Missing pairs are errors.
ScoreMatrix parse_score_matrix(const std::string& csv_text);
ScoreMatrix load_score_matrix(const std::filesystem::path& path);

/// Average Friedman rank per method, in the matrix's method order. Rank 1 is
/// the best score on a dataset; ties share the mean of their ranks.
std::vector<std::pair<std::string, double>> friedman_ranks(const ScoreMatrix& m);

struct FriedmanResult {
    double chi_square = 0.0;
    std::size_t degrees_of_freedom = 0;
    double p_value = 1.0;
};

FriedmanResult friedman_statistic(const ScoreMatrix& m);

/// Two-column `method,rank` CSV sorted by rank.
std::string format_rank_csv(const std::vector<std::pair<std::string, double>>& ranks);

}  // namespace enrichkit
