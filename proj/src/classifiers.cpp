#include "enrichkit/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "enrichkit/random.hpp"

namespace enrichkit {

const char* to_string(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::knn: return "knn";
        case ClassifierKind::decision_tree: return "decision_tree";
        case ClassifierKind::random_forest: return "random_forest";
        case ClassifierKind::gaussian_nb: return "gaussian_nb";
    }
    return "unknown";
}

ClassifierKind parse_classifier_kind(const std::string& s) {
    if (s == "knn") return ClassifierKind::knn;
    if (s == "decision_tree" || s == "dt") return ClassifierKind::decision_tree;
    if (s == "random_forest" || s == "rf") return ClassifierKind::random_forest;
    if (s == "gaussian_nb" || s == "nb") return ClassifierKind::gaussian_nb;
    throw ClassifierError("unknown classifier kind '" + s + "'");
}

void ClassifierSpec::validate() const {
    if (params.knn_neighbors == 0) throw ClassifierError("knn_neighbors must be positive");
    if (params.min_samples_split < 2) throw ClassifierError("min_samples_split must be at least 2");
    if (params.min_samples_leaf == 0) throw ClassifierError("min_samples_leaf must be positive");
    if (params.max_depth == 0) throw ClassifierError("max_depth must be positive");
    if (params.n_trees == 0) throw ClassifierError("n_trees must be positive");
    if (!(params.var_smoothing >= 0.0) || !std::isfinite(params.var_smoothing)) {
        throw ClassifierError("var_smoothing must be a finite nonnegative number");
    }
}

ClassifierSpec ClassifierSpec::from_json(const nlohmann::json& j) {
    ClassifierSpec s;
    if (j.is_string()) {
        s.kind = parse_classifier_kind(j.get<std::string>());
        return s;
    }
    if (!j.is_object()) throw ClassifierError("classifier spec must be a string or an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "kind") s.kind = parse_classifier_kind(value.get<std::string>());
        else if (key == "seed") s.seed = value.get<std::uint64_t>();
        else if (key == "k" || key == "knn_neighbors") s.params.knn_neighbors = value.get<std::size_t>();
        else if (key == "min_samples_split") s.params.min_samples_split = value.get<std::size_t>();
        else if (key == "min_samples_leaf") s.params.min_samples_leaf = value.get<std::size_t>();
        else if (key == "max_depth") s.params.max_depth = value.get<std::size_t>();
        else if (key == "n_trees") s.params.n_trees = value.get<std::size_t>();
        else if (key == "max_features") s.params.max_features = value.get<std::size_t>();
        else if (key == "bootstrap") s.params.bootstrap = value.get<bool>();
        else if (key == "var_smoothing") s.params.var_smoothing = value.get<double>();
        else throw ClassifierError("unknown classifier option '" + key + "'");
    }
    s.validate();
    return s;
}

nlohmann::json ClassifierSpec::to_json() const {
    nlohmann::json j{{"kind", to_string(kind)}, {"seed", seed}};
    switch (kind) {
        case ClassifierKind::knn:
            j["knn_neighbors"] = params.knn_neighbors;
            break;
        case ClassifierKind::random_forest:
            j["n_trees"] = params.n_trees;
            j["max_features"] = params.max_features;
            j["bootstrap"] = params.bootstrap;
            [[fallthrough]];
        case ClassifierKind::decision_tree:
            j["min_samples_split"] = params.min_samples_split;
            j["min_samples_leaf"] = params.min_samples_leaf;
            j["max_depth"] = params.max_depth;
            break;
        case ClassifierKind::gaussian_nb:
            j["var_smoothing"] = params.var_smoothing;
            break;
    }
    return j;
}

namespace {

// Dense copy of a dataset with labels mapped to indices of the sorted label list.
struct TrainingData {
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t classes = 0;
    std::vector<double> x;  // row-major
    std::vector<std::size_t> y;

    double at(std::size_t row, std::size_t feature) const { return x[row * d + feature]; }
    std::span<const double> row(std::size_t r) const { return {x.data() + r * d, d}; }
};

TrainingData to_training_data(const Dataset& ds) {
    TrainingData t;
    t.n = ds.size();
    t.d = ds.dimension();
    t.classes = ds.class_labels().size();
    t.x.reserve(t.n * t.d);
    const auto& labels = ds.class_labels();
    for (const auto& o : ds) {
        t.x.insert(t.x.end(), o.features.begin(), o.features.end());
        t.y.push_back(static_cast<std::size_t>(
            std::lower_bound(labels.begin(), labels.end(), o.label) - labels.begin()));
    }
    return t;
}

std::size_t argmax_lowest(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

// ---------------------------------------------------------------------------
// k-nearest neighbors

class KnnModel final : public detail::Model {
public:
    KnnModel(TrainingData data, std::size_t k) : data_(std::move(data)), k_(std::min(k, data_.n)) {}

    std::size_t predict(std::span<const double> x) const override {
        std::vector<std::pair<double, std::size_t>> dist(data_.n);
        for (std::size_t i = 0; i < data_.n; ++i) dist[i] = {squared_distance(x, data_.row(i)), i};
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
        std::vector<std::size_t> votes(data_.classes, 0);
        for (std::size_t i = 0; i < k_; ++i) ++votes[data_.y[dist[i].second]];
        const std::size_t top = *std::max_element(votes.begin(), votes.end());
        // among tied classes, the one owning the nearest neighbor wins
        for (std::size_t i = 0; i < k_; ++i) {
            const auto c = data_.y[dist[i].second];
            if (votes[c] == top) return c;
        }
        return 0;
    }

private:
    TrainingData data_;
    std::size_t k_;
};

// ---------------------------------------------------------------------------
// CART decision tree (gini)

struct TreeNode {
    // feature == npos marks a leaf
    std::size_t feature = static_cast<std::size_t>(-1);
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    std::size_t distribution = 0;  // offset into Tree::leaf_values
};

struct Tree {
    std::vector<TreeNode> nodes;
    std::vector<double> leaf_values;  // class proportions per leaf
    std::size_t classes = 0;
    std::size_t depth = 0;

    std::span<const double> leaf_for(std::span<const double> x) const {
        std::size_t i = 0;
        while (nodes[i].feature != static_cast<std::size_t>(-1)) {
            i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
        }
        return {leaf_values.data() + nodes[i].distribution, classes};
    }
};

class TreeBuilder {
public:
    TreeBuilder(const TrainingData& data, const Hyperparameters& params, std::size_t features_per_split,
                std::uint64_t seed)
        : data_(data), params_(params), mtry_(features_per_split), rng_(seed) {
        tree_.classes = data.classes;
    }

    Tree build(std::vector<std::size_t> samples) {
        grow(samples, 0);
        return std::move(tree_);
    }

private:
    struct Split {
        bool found = false;
        std::size_t feature = 0;
        double threshold = 0.0;
        double score = -1.0;  // sum of squared class counts / size, both sides
    };

    std::size_t make_leaf(const std::vector<std::size_t>& counts, std::size_t total) {
        TreeNode node;
        node.distribution = tree_.leaf_values.size();
        for (auto c : counts) tree_.leaf_values.push_back(static_cast<double>(c) / static_cast<double>(total));
        tree_.nodes.push_back(node);
        return tree_.nodes.size() - 1;
    }

    std::size_t grow(std::vector<std::size_t>& samples, std::size_t depth) {
        tree_.depth = std::max(tree_.depth, depth);
        std::vector<std::size_t> counts(data_.classes, 0);
        for (auto s : samples) ++counts[data_.y[s]];
        const auto nonzero = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; });
        if (nonzero <= 1 || samples.size() < params_.min_samples_split || depth >= params_.max_depth) {
            return make_leaf(counts, samples.size());
        }
        const Split split = find_split(samples);
        if (!split.found) return make_leaf(counts, samples.size());

        std::vector<std::size_t> left, right;
        for (auto s : samples) (data_.at(s, split.feature) <= split.threshold ? left : right).push_back(s);
        samples.clear();
        samples.shrink_to_fit();

        const std::size_t id = tree_.nodes.size();
        tree_.nodes.push_back(TreeNode{split.feature, split.threshold, 0, 0, 0});
        const std::size_t l = grow(left, depth + 1);
        const std::size_t r = grow(right, depth + 1);
        tree_.nodes[id].left = l;
        tree_.nodes[id].right = r;
        return id;
    }

    Split find_split(const std::vector<std::size_t>& samples) {
        std::vector<std::size_t> order(data_.d);
        std::iota(order.begin(), order.end(), std::size_t{0});
        if (mtry_ < data_.d) rng_.shuffle(order);

        Split best;
        std::vector<std::size_t> batch;
        // Draw features in batches of mtry; keep drawing only while nothing
        // splittable has been seen.
        for (std::size_t pos = 0; pos < order.size() && !best.found; pos += mtry_) {
            batch.assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), pos + mtry_)));
            std::sort(batch.begin(), batch.end());
            for (auto f : batch) evaluate_feature(samples, f, best);
        }
        return best;
    }

    void evaluate_feature(const std::vector<std::size_t>& samples, std::size_t feature, Split& best) {
        const std::size_t n = samples.size();
        std::vector<std::pair<double, std::size_t>> values(n);
        for (std::size_t i = 0; i < n; ++i) values[i] = {data_.at(samples[i], feature), data_.y[samples[i]]};
        std::sort(values.begin(), values.end());
        if (values.front().first == values.back().first) return;

        std::vector<double> left(data_.classes, 0.0), right(data_.classes, 0.0);
        for (const auto& v : values) right[v.second] += 1.0;
        double sq_left = 0.0, sq_right = 0.0;
        for (double c : right) sq_right += c * c;

        const std::size_t min_leaf = params_.min_samples_leaf;
        for (std::size_t i = 1; i < n; ++i) {
            const auto c = values[i - 1].second;
            sq_left += 2.0 * left[c] + 1.0;
            sq_right -= 2.0 * right[c] - 1.0;
            left[c] += 1.0;
            right[c] -= 1.0;
            if (i < min_leaf || n - i < min_leaf) continue;
            if (values[i - 1].first == values[i].first) continue;
            const double score = sq_left / static_cast<double>(i) + sq_right / static_cast<double>(n - i);
            if (!best.found || score > best.score ||
                (score == best.score && (feature < best.feature ||
                                         (feature == best.feature && midpoint(values, i) < best.threshold)))) {
                best.found = true;
                best.score = score;
                best.feature = feature;
                best.threshold = midpoint(values, i);
            }
        }
    }

    static double midpoint(const std::vector<std::pair<double, std::size_t>>& values, std::size_t i) {
        const double lo = values[i - 1].first;
        const double hi = values[i].first;
        const double mid = lo + (hi - lo) / 2.0;
        return mid >= hi ? lo : mid;
    }

    const TrainingData& data_;
    const Hyperparameters& params_;
    std::size_t mtry_;
    Rng rng_;
    Tree tree_;
};

class TreeModel final : public detail::Model {
public:
    explicit TreeModel(Tree tree) : tree_(std::move(tree)) {}
    std::size_t predict(std::span<const double> x) const override { return argmax_lowest(tree_.leaf_for(x)); }
    std::size_t depth() const override { return tree_.depth; }

private:
    Tree tree_;
};

class ForestModel final : public detail::Model {
public:
    ForestModel(std::vector<Tree> trees, std::size_t classes) : trees_(std::move(trees)), classes_(classes) {}

    std::size_t predict(std::span<const double> x) const override {
        std::vector<double> proba(classes_, 0.0);
        for (const auto& t : trees_) {
            auto leaf = t.leaf_for(x);
            for (std::size_t c = 0; c < classes_; ++c) proba[c] += leaf[c];
        }
        return argmax_lowest(proba);
    }
    std::size_t depth() const override {
        std::size_t d = 0;
        for (const auto& t : trees_) d = std::max(d, t.depth);
        return d;
    }

private:
    std::vector<Tree> trees_;
    std::size_t classes_;
};

// ---------------------------------------------------------------------------
// Gaussian naive Bayes

// Order-independent sum, so shuffled training rows give identical models.
double sorted_sum(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

class GaussianNbModel final : public detail::Model {
public:
    GaussianNbModel(const TrainingData& data, double var_smoothing) : classes_(data.classes), d_(data.d) {
        double max_var = 0.0;
        for (std::size_t f = 0; f < d_; ++f) {
            std::vector<double> col(data.n);
            for (std::size_t i = 0; i < data.n; ++i) col[i] = data.at(i, f);
            max_var = std::max(max_var, variance(col));
        }
        double epsilon = var_smoothing * max_var;
        if (epsilon <= 0.0) epsilon = var_smoothing > 0.0 ? var_smoothing : 1e-12;

        mean_.assign(classes_ * d_, 0.0);
        var_.assign(classes_ * d_, 0.0);
        log_prior_.assign(classes_, 0.0);
        std::vector<std::vector<std::size_t>> members(classes_);
        for (std::size_t i = 0; i < data.n; ++i) members[data.y[i]].push_back(i);
        for (std::size_t c = 0; c < classes_; ++c) {
            log_prior_[c] = std::log(static_cast<double>(members[c].size()) / static_cast<double>(data.n));
            for (std::size_t f = 0; f < d_; ++f) {
                std::vector<double> col;
                col.reserve(members[c].size());
                for (auto i : members[c]) col.push_back(data.at(i, f));
                mean_[c * d_ + f] = sorted_sum(col) / static_cast<double>(col.size());
                var_[c * d_ + f] = variance(col) + epsilon;
            }
        }
    }

    std::size_t predict(std::span<const double> x) const override {
        std::vector<double> joint(classes_);
        for (std::size_t c = 0; c < classes_; ++c) {
            double ll = log_prior_[c];
            for (std::size_t f = 0; f < d_; ++f) {
                const double v = var_[c * d_ + f];
                const double diff = x[f] - mean_[c * d_ + f];
                ll -= 0.5 * std::log(2.0 * std::numbers::pi * v) + 0.5 * diff * diff / v;
            }
            joint[c] = ll;
        }
        return argmax_lowest(joint);
    }

private:
    static double variance(const std::vector<double>& v) {
        if (v.empty()) return 0.0;
        const double mean = sorted_sum(v) / static_cast<double>(v.size());
        std::vector<double> sq(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
        return sorted_sum(std::move(sq)) / static_cast<double>(v.size());
    }

    std::size_t classes_;
    std::size_t d_;
    std::vector<double> mean_;
    std::vector<double> var_;
    std::vector<double> log_prior_;
};

std::size_t features_per_split(const Hyperparameters& p, std::size_t d) {
    if (p.max_features > 0) return std::min(p.max_features, d);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))));
}

}  // namespace

Label TrainedModel::predict(std::span<const double> x) const {
    if (x.size() != dimension_) {
        throw ClassifierError("predict: expected " + std::to_string(dimension_) + " features, got " +
                              std::to_string(x.size()));
    }
    for (double v : x) {
        if (!std::isfinite(v)) throw ClassifierError("predict: non-finite feature value");
    }
    return labels_[model_->predict(x)];
}

std::vector<Label> TrainedModel::predict(const Dataset& d) const {
    std::vector<Label> out;
    out.reserve(d.size());
    for (const auto& o : d) out.push_back(predict(o.features));
    return out;
}

TrainedModel train(const ClassifierSpec& spec, const Dataset& d) {
    spec.validate();
    if (d.empty()) throw ClassifierError("train: empty training set");
    const bool tree_based = spec.kind == ClassifierKind::decision_tree || spec.kind == ClassifierKind::random_forest;
    if (tree_based && d.class_labels().size() < 2) {
        throw ClassifierError("train: tree classifiers need at least two classes");
    }
    auto data = to_training_data(d);
    std::shared_ptr<const detail::Model> model;
    switch (spec.kind) {
        case ClassifierKind::knn:
            model = std::make_shared<KnnModel>(std::move(data), spec.params.knn_neighbors);
            break;
        case ClassifierKind::decision_tree: {
            std::vector<std::size_t> all(data.n);
            std::iota(all.begin(), all.end(), std::size_t{0});
            TreeBuilder builder(data, spec.params, data.d, spec.seed);
            model = std::make_shared<TreeModel>(builder.build(std::move(all)));
            break;
        }
        case ClassifierKind::random_forest: {
            const std::size_t mtry = features_per_split(spec.params, data.d);
            std::vector<Tree> trees;
            trees.reserve(spec.params.n_trees);
            for (std::size_t t = 0; t < spec.params.n_trees; ++t) {
                const auto tree_seed = derive_seed(spec.seed, t);
                Rng rng(tree_seed);
                std::vector<std::size_t> samples(data.n);
                if (spec.params.bootstrap) {
                    for (auto& s : samples) s = rng.uniform_index(data.n);
                    std::sort(samples.begin(), samples.end());
                } else {
                    std::iota(samples.begin(), samples.end(), std::size_t{0});
                }
                TreeBuilder builder(data, spec.params, mtry, rng.next());
                trees.push_back(builder.build(std::move(samples)));
            }
            model = std::make_shared<ForestModel>(std::move(trees), data.classes);
            break;
        }
        case ClassifierKind::gaussian_nb:
            model = std::make_shared<GaussianNbModel>(data, spec.params.var_smoothing);
            break;
    }
    return TrainedModel(spec, d.class_labels(), d.dimension(), std::move(model));
}

std::size_t tree_depth(const TrainedModel& m) { return m.model_depth(); }

}  // namespace enrichkit
