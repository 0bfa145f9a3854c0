#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "enrichkit/dataset.hpp"
#include "enrichkit/random.hpp"

namespace fixtures {

using enrichkit::Dataset;
using enrichkit::Observation;
using enrichkit::Provenance;

inline Observation obs(std::vector<double> x, std::string label, Provenance p = Provenance::base,
                       std::size_t origin = 0) {
    return Observation{std::move(x), std::move(label), p, origin};
}

// Approximately normal noise from the library generator (sum of uniforms).
inline double noise(enrichkit::Rng& rng, double spread) {
    double s = 0.0;
    for (int i = 0; i < 6; ++i) s += rng.uniform01();
    return (s - 3.0) * spread;
}

// Overlapping blobs: class c is centered at (c, c/2, ...), rows grouped by class.
inline Dataset blobs(const std::map<std::string, std::size_t>& counts, std::size_t dim, std::uint64_t seed,
                     double spread = 0.8, Provenance p = Provenance::base) {
    enrichkit::Rng rng(seed);
    std::vector<Observation> rows;
    std::size_t c = 0;
    for (const auto& [label, n] : counts) {
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> x(dim);
            for (std::size_t j = 0; j < dim; ++j) {
                x[j] = static_cast<double>(c) / static_cast<double>(j + 1) + noise(rng, spread);
            }
            rows.push_back(obs(std::move(x), label, p, rows.size()));
        }
        ++c;
    }
    return Dataset(dim, std::move(rows));
}

// Random class counts: one dominant class and `classes - 1` smaller ones.
inline std::map<std::string, std::size_t> random_counts(enrichkit::Rng& rng, std::size_t classes, std::size_t total) {
    std::map<std::string, std::size_t> counts;
    std::vector<double> w(classes);
    double sum = 0.0;
    for (auto& v : w) {
        v = 0.05 + rng.uniform01();
        sum += v;
    }
    for (std::size_t c = 0; c < classes; ++c) {
        auto n = static_cast<std::size_t>(std::floor(w[c] / sum * static_cast<double>(total)));
        counts["c" + std::to_string(c)] = std::max<std::size_t>(n, 3);
    }
    return counts;
}

}  // namespace fixtures
