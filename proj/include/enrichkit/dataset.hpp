#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace enrichkit {

using Label = std::string;

/// Where an observation came from. Only base observations may ever be used
/// for testing or validation.
enum class Provenance { base, external, synthetic };

const char* to_string(Provenance p);

struct Observation {
    std::vector<double> features;
    Label label;
    Provenance provenance = Provenance::base;
    // Row index in the originating dataset. For synthetic rows, the index of
    // the seed observation in the dataset that was resampled.
    std::size_t origin_index = 0;

    friend bool operator==(const Observation&, const Observation&) = default;
};

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Immutable table of observations sharing one feature dimension.
///
/// An in-memory Dataset may be empty (an empty external set is a valid
/// input to the evaluation harness); datasets read from disk never are.
class Dataset {
public:
    Dataset(std::size_t dimension, std::vector<Observation> observations,
            std::vector<std::string> feature_names = {});

    std::size_t size() const { return observations_.size(); }
    bool empty() const { return observations_.empty(); }
    std::size_t dimension() const { return dimension_; }
    const Observation& operator[](std::size_t i) const { return observations_[i]; }
    const std::vector<Observation>& observations() const { return observations_; }
    auto begin() const { return observations_.begin(); }
    auto end() const { return observations_.end(); }

    /// Sorted set of labels present.
    const std::vector<Label>& class_labels() const { return labels_; }
    bool has_label(const Label& label) const;
    std::size_t count(const Label& label) const;

    /// Column names used when writing; generated as f1..fd when absent.
    const std::vector<std::string>& feature_names() const { return feature_names_; }

    /// Rows at the given indices, in the given order.
    Dataset subset(std::span<const std::size_t> indices) const;
    /// Rows whose label is in `labels`.
    Dataset filter_labels(const std::set<Label>& labels) const;
    /// This dataset followed by `more`. Dimensions must agree.
    Dataset concat(const Dataset& more) const;
    Dataset append(std::vector<Observation> more) const;

    /// Indices of rows per label, ascending.
    std::map<Label, std::vector<std::size_t>> indices_by_label() const;

    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.dimension_ == b.dimension_ && a.observations_ == b.observations_;
    }

private:
    std::size_t dimension_;
    std::vector<Observation> observations_;
    std::vector<Label> labels_;
    std::vector<std::string> feature_names_;
};

/// Per-class counts and ratios to the dominant (largest) class.
struct ClassDistribution {
    std::map<Label, std::size_t> counts;
    Label dominant;
    // count(c) / count(dominant), in [0, 1]
    std::map<Label, double> ratio;
    // count(dominant) / count(c); the form imbalance tables are usually printed in
    std::map<Label, double> inverse_ratio;

    std::size_t total() const;

    /// Builds a distribution from raw counts. Ties for the dominant class go
    /// to the lexicographically smallest label.
    static ClassDistribution from_counts(std::map<Label, std::size_t> counts);
};

ClassDistribution class_distribution(const Dataset& d);

inline constexpr double kDefaultMinorityThreshold = 0.2;

/// Non-dominant classes whose ratio to the dominant class is below `threshold`.
std::set<Label> minority_classes(const ClassDistribution& dist,
                                 double threshold = kDefaultMinorityThreshold);

/// Stratified two-way split. Part A receives round(fraction * n) members of
/// each class, clamped so that both parts get at least one member whenever
/// the class has two or more. Row order inside each part follows `d`.
std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double fraction,
                                             std::uint64_t seed);

/// Column layout for CSV ingestion.
struct Schema {
    std::optional<std::string> label_column;  // default: last column
    std::optional<std::string> positive_class;
};

/// Reads the optional JSON sidecar `{"label_column": ..., "positive_class": ...}`.
Schema load_schema(const std::filesystem::path& path);

Dataset load_dataset(const std::filesystem::path& path, const Schema& schema = {});
Dataset parse_dataset(const std::string& csv_text, const Schema& schema = {},
                      const std::string& source_name = "<memory>");

/// Writes features then the label column (named `label_column`).
void write_dataset(const Dataset& d, const std::filesystem::path& path,
                   const std::string& label_column = "class");
std::string format_dataset(const Dataset& d, const std::string& label_column = "class");

}  // namespace enrichkit
