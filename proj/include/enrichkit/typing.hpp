#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "enrichkit/dataset.hpp"

namespace enrichkit {

/// Minority-object categories, from the composition of an observation's
/// k-nearest-neighbor neighborhood.
enum class ObjectType { safe, borderline, rare, outlier };

const char* to_string(ObjectType t);

inline constexpr std::size_t kDefaultTypingK = 5;

/// Per-feature min/max scaling to [0, 1]. Constant features map to 0.
struct MinMaxScaler {
    std::vector<double> lo;
    std::vector<double> hi;

    static MinMaxScaler fit(const Dataset& d);
    /// Fits on `d` plus one extra feature vector.
    static MinMaxScaler fit(const Dataset& d, std::span<const double> extra);

    double scale(std::size_t feature, double value) const;
    std::vector<double> transform(std::span<const double> x) const;
};

/// The k nearest observations to d[index], excluding itself, by Euclidean
/// distance on scaled features. Ties go to the smaller index.
std::vector<std::size_t> neighborhood(const Dataset& d, std::size_t index, std::size_t k,
                                      const MinMaxScaler& scaler);

/// Maps a same-class neighbor count to a type. For k = 5: 4-5 safe,
/// 2-3 borderline, 1 rare, 0 outlier. Other k use the same proportions
/// (safe from 4/5 of k, borderline from 2/5 of k).
ObjectType label_type(std::size_t same_class_count, std::size_t k = kDefaultTypingK);

struct TypedObservation {
    std::size_t observation_index = 0;
    ObjectType type = ObjectType::safe;
    std::size_t same_class_neighbors = 0;
};

/// Types every observation of `classes`, using a scaler fitted on all of `d`.
std::map<std::size_t, TypedObservation> label_dataset_types(const Dataset& d,
                                                            const std::set<Label>& classes,
                                                            std::size_t k = kDefaultTypingK);

/// The type `candidate` would get if appended to `base`.
ObjectType label_candidate_type(const Dataset& base, const Observation& candidate,
                                std::size_t k = kDefaultTypingK);

}  // namespace enrichkit
