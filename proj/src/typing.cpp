#include "enrichkit/typing.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace enrichkit {

const char* to_string(ObjectType t) {
    switch (t) {
        case ObjectType::safe: return "safe";
        case ObjectType::borderline: return "borderline";
        case ObjectType::rare: return "rare";
        case ObjectType::outlier: return "outlier";
    }
    return "unknown";
}

MinMaxScaler MinMaxScaler::fit(const Dataset& d) {
    MinMaxScaler s;
    s.lo.assign(d.dimension(), 0.0);
    s.hi.assign(d.dimension(), 0.0);
    bool first = true;
    for (const auto& o : d) {
        for (std::size_t j = 0; j < d.dimension(); ++j) {
            if (first || o.features[j] < s.lo[j]) s.lo[j] = o.features[j];
            if (first || o.features[j] > s.hi[j]) s.hi[j] = o.features[j];
        }
        first = false;
    }
    return s;
}

MinMaxScaler MinMaxScaler::fit(const Dataset& d, std::span<const double> extra) {
    if (extra.size() != d.dimension()) throw std::invalid_argument("scaler: dimension mismatch");
    if (d.empty()) {
        return MinMaxScaler{{extra.begin(), extra.end()}, {extra.begin(), extra.end()}};
    }
    auto s = fit(d);
    for (std::size_t j = 0; j < extra.size(); ++j) {
        s.lo[j] = std::min(s.lo[j], extra[j]);
        s.hi[j] = std::max(s.hi[j], extra[j]);
    }
    return s;
}

double MinMaxScaler::scale(std::size_t feature, double value) const {
    const double range = hi[feature] - lo[feature];
    if (range <= 0.0) return 0.0;
    return (value - lo[feature]) / range;
}

std::vector<double> MinMaxScaler::transform(std::span<const double> x) const {
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = scale(j, x[j]);
    return out;
}

namespace {

struct Scaled {
    std::vector<std::vector<double>> rows;
};

Scaled scale_all(const Dataset& d, const MinMaxScaler& scaler) {
    if (scaler.lo.size() != d.dimension() || scaler.hi.size() != d.dimension()) {
        throw std::invalid_argument("scaler does not cover all features");
    }
    Scaled s;
    s.rows.reserve(d.size());
    for (const auto& o : d) s.rows.push_back(scaler.transform(o.features));
    return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        sum += diff * diff;
    }
    return sum;
}

std::vector<std::size_t> nearest(const Scaled& s, std::size_t index, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(s.rows.size() - 1);
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
        if (i != index) dist.emplace_back(squared_distance(s.rows[index], s.rows[i]), i);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
    return out;
}

void check_k(const Dataset& d, std::size_t k) {
    if (k == 0) throw std::invalid_argument("neighborhood size k must be positive");
    if (k >= d.size()) {
        throw std::invalid_argument("neighborhood size k=" + std::to_string(k) +
                                    " needs more than k observations, dataset has " +
                                    std::to_string(d.size()));
    }
}

}  // namespace

std::vector<std::size_t> neighborhood(const Dataset& d, std::size_t index, std::size_t k,
                                      const MinMaxScaler& scaler) {
    check_k(d, k);
    if (index >= d.size()) throw std::out_of_range("neighborhood: index out of range");
    return nearest(scale_all(d, scaler), index, k);
}

ObjectType label_type(std::size_t same_class_count, std::size_t k) {
    if (k == 0) throw std::invalid_argument("label_type: k must be positive");
    if (same_class_count > k) {
        throw std::invalid_argument("label_type: same-class count " + std::to_string(same_class_count) +
                                    " exceeds k=" + std::to_string(k));
    }
    if (5 * same_class_count >= 4 * k) return ObjectType::safe;
    if (5 * same_class_count >= 2 * k) return ObjectType::borderline;
    if (same_class_count >= 1) return ObjectType::rare;
    return ObjectType::outlier;
}

std::map<std::size_t, TypedObservation> label_dataset_types(const Dataset& d,
                                                            const std::set<Label>& classes,
                                                            std::size_t k) {
    for (const auto& c : classes) {
        if (!d.has_label(c)) throw std::invalid_argument("label_dataset_types: unknown class '" + c + "'");
    }
    std::map<std::size_t, TypedObservation> out;
    if (classes.empty()) return out;
    check_k(d, k);
    const auto scaled = scale_all(d, MinMaxScaler::fit(d));
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!classes.contains(d[i].label)) continue;
        const auto nn = nearest(scaled, i, k);
        const auto same = static_cast<std::size_t>(std::count_if(
            nn.begin(), nn.end(), [&](std::size_t j) { return d[j].label == d[i].label; }));
        out.emplace(i, TypedObservation{i, label_type(same, k), same});
    }
    return out;
}

ObjectType label_candidate_type(const Dataset& base, const Observation& candidate, std::size_t k) {
    if (k == 0) throw std::invalid_argument("neighborhood size k must be positive");
    if (base.size() < k) {
        throw std::invalid_argument("label_candidate_type: base has fewer than k observations");
    }
    if (candidate.features.size() != base.dimension()) {
        throw std::invalid_argument("label_candidate_type: candidate dimension mismatch");
    }
    const auto scaler = MinMaxScaler::fit(base, candidate.features);
    const auto x = scaler.transform(candidate.features);
    // candidate sits after every base row, so base rows win distance ties
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        dist.emplace_back(squared_distance(x, scaler.transform(base[i].features)), i);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::size_t same = 0;
    for (std::size_t i = 0; i < k; ++i) same += base[dist[i].second].label == candidate.label ? 1 : 0;
    return label_type(same, k);
}

}  // namespace enrichkit
