#include "enrichkit/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace enrichkit {

ScoreMatrix::ScoreMatrix(std::vector<std::string> methods, std::vector<std::string> datasets,
                         std::vector<std::vector<double>> scores)
    : methods_(std::move(methods)), datasets_(std::move(datasets)), scores_(std::move(scores)) {
    if (methods_.size() < 2 || datasets_.size() < 2) {
        throw std::invalid_argument("score matrix needs at least 2 methods and 2 datasets");
    }
    if (scores_.size() != methods_.size()) throw std::invalid_argument("score matrix: row count mismatch");
    for (std::size_t m = 0; m < scores_.size(); ++m) {
        if (scores_[m].size() != datasets_.size()) {
            throw std::invalid_argument("score matrix: method '" + methods_[m] + "' is missing cells");
        }
        for (std::size_t d = 0; d < datasets_.size(); ++d) {
            const double v = scores_[m][d];
            if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
                throw std::invalid_argument("score matrix: cell (" + methods_[m] + ", " + datasets_[d] +
                                            ") is missing or outside [0, 1]");
            }
        }
    }
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

ScoreMatrix parse_score_matrix(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("score CSV is empty");
    const auto header = split(line);
    auto column = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw std::invalid_argument("score CSV lacks a '" + name + "' column");
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto mc = column("method"), dc = column("dataset"), fc = column("macro_f");

    std::vector<std::string> methods, datasets;
    std::map<std::pair<std::string, std::string>, double> cells;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const auto cells_in = split(line);
        if (cells_in.size() != header.size()) {
            throw std::invalid_argument("score CSV row " + std::to_string(row) + " has the wrong cell count");
        }
        const auto& method = cells_in[mc];
        const auto& dataset = cells_in[dc];
        const auto& text = cells_in[fc];
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size()) {
            throw std::invalid_argument("score CSV row " + std::to_string(row) + ": bad macro_f '" + text + "'");
        }
        if (std::find(methods.begin(), methods.end(), method) == methods.end()) methods.push_back(method);
        if (std::find(datasets.begin(), datasets.end(), dataset) == datasets.end()) datasets.push_back(dataset);
        auto [it, inserted] = cells.try_emplace({method, dataset}, v);
        if (!inserted) it->second = std::max(it->second, v);
    }
    std::vector<std::vector<double>> scores(methods.size(), std::vector<double>(datasets.size()));
    for (std::size_t m = 0; m < methods.size(); ++m) {
        for (std::size_t d = 0; d < datasets.size(); ++d) {
            auto it = cells.find({methods[m], datasets[d]});
            if (it == cells.end()) {
                throw std::invalid_argument("score CSV has no entry for method '" + methods[m] + "' on dataset '" +
                                            datasets[d] + "'");
            }
            scores[m][d] = it->second;
        }
    }
    return ScoreMatrix(std::move(methods), std::move(datasets), std::move(scores));
}

ScoreMatrix load_score_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open score CSV " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_score_matrix(buf.str());
}

namespace {

// ranks[m][d]
std::vector<std::vector<double>> rank_columns(const ScoreMatrix& m) {
    const std::size_t k = m.methods().size();
    const std::size_t n = m.datasets().size();
    std::vector<std::vector<double>> ranks(k, std::vector<double>(n));
    std::vector<std::size_t> order(k);
    for (std::size_t d = 0; d < n; ++d) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return m.at(a, d) > m.at(b, d); });
        for (std::size_t i = 0; i < k;) {
            std::size_t j = i;
            while (j + 1 < k && m.at(order[j + 1], d) == m.at(order[i], d)) ++j;
            // positions i..j tie; ranks are 1-based
            const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
            for (std::size_t t = i; t <= j; ++t) ranks[order[t]][d] = shared;
            i = j + 1;
        }
    }
    return ranks;
}

}  // namespace

std::vector<std::pair<std::string, double>> friedman_ranks(const ScoreMatrix& m) {
    const auto ranks = rank_columns(m);
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        const double sum = std::accumulate(ranks[i].begin(), ranks[i].end(), 0.0);
        out.emplace_back(m.methods()[i], sum / static_cast<double>(ranks[i].size()));
    }
    return out;
}

FriedmanResult friedman_statistic(const ScoreMatrix& m) {
    const auto avg = friedman_ranks(m);
    const double k = static_cast<double>(m.methods().size());
    const double n = static_cast<double>(m.datasets().size());
    double sum_sq = 0.0;
    for (const auto& [_, r] : avg) sum_sq += r * r;
    FriedmanResult out;
    out.chi_square = 12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0);
    // rounding can push an exact zero slightly negative
    if (out.chi_square < 0.0 && out.chi_square > -1e-9) out.chi_square = 0.0;
    out.degrees_of_freedom = m.methods().size() - 1;
    out.p_value = boost::math::gamma_q(static_cast<double>(out.degrees_of_freedom) / 2.0, out.chi_square / 2.0);
    return out;
}

std::string format_rank_csv(const std::vector<std::pair<std::string, double>>& ranks) {
    auto sorted = ranks;
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    std::string out = "method,rank\n";
    char buf[32];
    for (const auto& [method, r] : sorted) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, r, std::chars_format::fixed, 4);
        out += method + "," + std::string(buf, ptr) + "\n";
    }
    return out;
}

}  // namespace enrichkit
