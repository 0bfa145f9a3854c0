#include "enrichkit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "enrichkit/random.hpp"

namespace enrichkit {

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::base: return "base";
        case Provenance::external: return "external";
        case Provenance::synthetic: return "synthetic";
    }
    return "unknown";
}

Dataset::Dataset(std::size_t dimension, std::vector<Observation> observations,
                 std::vector<std::string> feature_names)
    : dimension_(dimension), observations_(std::move(observations)),
      feature_names_(std::move(feature_names)) {
    if (dimension_ == 0) throw DatasetError("dataset dimension must be at least 1");
    std::set<Label> labels;
    for (std::size_t i = 0; i < observations_.size(); ++i) {
        const auto& o = observations_[i];
        if (o.features.size() != dimension_) {
            throw DatasetError("observation " + std::to_string(i) + " has " +
                               std::to_string(o.features.size()) + " features, expected " +
                               std::to_string(dimension_));
        }
        for (std::size_t j = 0; j < dimension_; ++j) {
            if (!std::isfinite(o.features[j])) {
                throw DatasetError("observation " + std::to_string(i) + ", feature " +
                                   std::to_string(j) + " is not finite");
            }
        }
        labels.insert(o.label);
    }
    labels_.assign(labels.begin(), labels.end());
    if (feature_names_.empty()) {
        for (std::size_t j = 0; j < dimension_; ++j) feature_names_.push_back("f" + std::to_string(j + 1));
    } else if (feature_names_.size() != dimension_) {
        throw DatasetError("feature name count does not match dimension");
    }
}

bool Dataset::has_label(const Label& label) const {
    return std::binary_search(labels_.begin(), labels_.end(), label);
}

std::size_t Dataset::count(const Label& label) const {
    return static_cast<std::size_t>(std::count_if(
        observations_.begin(), observations_.end(),
        [&](const Observation& o) { return o.label == label; }));
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    std::vector<Observation> rows;
    rows.reserve(indices.size());
    for (auto i : indices) rows.push_back(observations_.at(i));
    return Dataset(dimension_, std::move(rows), feature_names_);
}

Dataset Dataset::filter_labels(const std::set<Label>& labels) const {
    std::vector<Observation> rows;
    for (const auto& o : observations_) {
        if (labels.contains(o.label)) rows.push_back(o);
    }
    return Dataset(dimension_, std::move(rows), feature_names_);
}

Dataset Dataset::concat(const Dataset& more) const {
    if (more.dimension() != dimension_) {
        throw DatasetError("cannot concatenate datasets of dimension " + std::to_string(dimension_) +
                           " and " + std::to_string(more.dimension()));
    }
    return append(more.observations_);
}

Dataset Dataset::append(std::vector<Observation> more) const {
    std::vector<Observation> rows;
    rows.reserve(observations_.size() + more.size());
    rows.insert(rows.end(), observations_.begin(), observations_.end());
    std::move(more.begin(), more.end(), std::back_inserter(rows));
    return Dataset(dimension_, std::move(rows), feature_names_);
}

std::map<Label, std::vector<std::size_t>> Dataset::indices_by_label() const {
    std::map<Label, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < observations_.size(); ++i) out[observations_[i].label].push_back(i);
    return out;
}

std::size_t ClassDistribution::total() const {
    std::size_t n = 0;
    for (const auto& [_, c] : counts) n += c;
    return n;
}

ClassDistribution ClassDistribution::from_counts(std::map<Label, std::size_t> counts) {
    if (counts.empty()) throw DatasetError("class distribution of an empty dataset");
    ClassDistribution dist;
    dist.counts = std::move(counts);
    // std::map iterates in label order, so the first maximum wins ties
    std::size_t best = 0;
    for (const auto& [label, c] : dist.counts) {
        if (dist.dominant.empty() || c > best) {
            dist.dominant = label;
            best = c;
        }
    }
    if (best == 0) throw DatasetError("class distribution has no observations");
    for (const auto& [label, c] : dist.counts) {
        if (label == dist.dominant) {
            dist.ratio[label] = 1.0;
            dist.inverse_ratio[label] = 1.0;
            continue;
        }
        dist.ratio[label] = static_cast<double>(c) / static_cast<double>(best);
        if (c > 0) dist.inverse_ratio[label] = static_cast<double>(best) / static_cast<double>(c);
    }
    return dist;
}

ClassDistribution class_distribution(const Dataset& d) {
    if (d.empty()) throw DatasetError("class distribution of an empty dataset");
    std::map<Label, std::size_t> counts;
    for (const auto& o : d) ++counts[o.label];
    return ClassDistribution::from_counts(std::move(counts));
}

std::set<Label> minority_classes(const ClassDistribution& dist, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw std::invalid_argument("minority threshold must lie in (0, 1]");
    }
    std::set<Label> out;
    for (const auto& [label, r] : dist.ratio) {
        if (label != dist.dominant && r < threshold) out.insert(label);
    }
    return out;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw std::invalid_argument("split fraction must lie in (0, 1)");
    }
    Rng rng(seed);
    std::vector<char> in_a(d.size(), 0);
    for (auto& [label, idx] : d.indices_by_label()) {
        const std::size_t n = idx.size();
        auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
        if (n >= 2) take = std::clamp<std::size_t>(take, 1, n - 1);
        auto members = idx;
        rng.shuffle(members);
        for (std::size_t i = 0; i < take; ++i) in_a[members[i]] = 1;
    }
    std::vector<std::size_t> a, b;
    for (std::size_t i = 0; i < d.size(); ++i) (in_a[i] ? a : b).push_back(i);
    if (a.empty() || b.empty()) {
        throw DatasetError("split fraction " + std::to_string(fraction) + " leaves one part empty");
    }
    return {d.subset(a), d.subset(b)};
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(trim(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(trim(cell));
    return cells;
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

Schema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open schema file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError("invalid schema file " + path.string() + ": " + e.what());
    }
    Schema s;
    if (j.contains("label_column")) s.label_column = j.at("label_column").get<std::string>();
    if (j.contains("positive_class")) s.positive_class = j.at("positive_class").get<std::string>();
    return s;
}

Dataset parse_dataset(const std::string& csv_text, const Schema& schema, const std::string& source_name) {
    std::istringstream in(csv_text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_csv_line(line);
            break;
        }
    }
    if (header.empty()) throw DatasetError(source_name + ": empty file");
    if (header.size() < 2) throw DatasetError(source_name + ": need at least one feature and a label column");

    std::size_t label_col = header.size() - 1;
    if (schema.label_column) {
        auto it = std::find(header.begin(), header.end(), *schema.label_column);
        if (it == header.end()) {
            throw DatasetError(source_name + ": unknown label column '" + *schema.label_column +
                               "' (header row " + std::to_string(line_no) + ")");
        }
        label_col = static_cast<std::size_t>(it - header.begin());
    }
    std::vector<std::string> names;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != label_col) names.push_back(header[c]);
    }

    std::vector<Observation> rows;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++row;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw DatasetError(source_name + ": row " + std::to_string(row) + " (line " +
                               std::to_string(line_no) + ") has " + std::to_string(cells.size()) +
                               " cells, expected " + std::to_string(header.size()));
        }
        Observation o;
        o.origin_index = rows.size();
        o.features.reserve(names.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_col) {
                o.label = cells[c];
                continue;
            }
            const auto& cell = cells[c];
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
                throw DatasetError(source_name + ": row " + std::to_string(row) + ", column " +
                                   std::to_string(c + 1) + " ('" + header[c] + "'): non-numeric value '" +
                                   cell + "'");
            }
            if (!std::isfinite(v)) {
                throw DatasetError(source_name + ": row " + std::to_string(row) + ", column " +
                                   std::to_string(c + 1) + " ('" + header[c] + "'): non-finite value '" +
                                   cell + "'");
            }
            o.features.push_back(v);
        }
        if (o.label.empty()) {
            throw DatasetError(source_name + ": row " + std::to_string(row) + ", column " +
                               std::to_string(label_col + 1) + ": empty label");
        }
        rows.push_back(std::move(o));
    }
    if (rows.empty()) throw DatasetError(source_name + ": no data rows");
    const std::size_t dimension = names.size();
    Dataset d(dimension, std::move(rows), std::move(names));
    if (schema.positive_class && !d.has_label(*schema.positive_class)) {
        throw DatasetError(source_name + ": positive class '" + *schema.positive_class + "' not present");
    }
    return d;
}

Dataset load_dataset(const std::filesystem::path& path, const Schema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot open dataset file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str(), schema, path.string());
}

std::string format_dataset(const Dataset& d, const std::string& label_column) {
    std::string out;
    for (const auto& name : d.feature_names()) out += quote_if_needed(name) + ",";
    out += quote_if_needed(label_column) + "\n";
    char buf[64];
    for (const auto& o : d) {
        for (double v : o.features) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
            out.append(buf, ptr);
            out += ',';
        }
        out += quote_if_needed(o.label) + "\n";
    }
    return out;
}

void write_dataset(const Dataset& d, const std::filesystem::path& path, const std::string& label_column) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetError("cannot write dataset file " + path.string());
    out << format_dataset(d, label_column);
}

}  // namespace enrichkit
