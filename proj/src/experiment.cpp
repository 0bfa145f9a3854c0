#include "enrichkit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "enrichkit/random.hpp"
#include "enrichkit/stats.hpp"

namespace enrichkit {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(StageKind k) {
    switch (k) {
        case StageKind::none: return "none";
        case StageKind::rane: return "rane";
        case StageKind::seme: return "seme";
        case StageKind::supe: return "supe";
        case StageKind::rus: return "rus";
        case StageKind::ros: return "ros";
        case StageKind::smote: return "smote";
        case StageKind::bsmote: return "bsmote";
    }
    return "unknown";
}

StageKind parse_stage_kind(const std::string& s) {
    static const std::map<std::string, StageKind> kinds{
        {"none", StageKind::none}, {"rane", StageKind::rane},   {"seme", StageKind::seme},
        {"supe", StageKind::supe}, {"rus", StageKind::rus},     {"ros", StageKind::ros},
        {"smote", StageKind::smote}, {"bsmote", StageKind::bsmote}};
    auto it = kinds.find(s);
    if (it == kinds.end()) throw ConfigError("unknown method '" + s + "'");
    return it->second;
}

bool is_enrichment(StageKind k) { return k == StageKind::rane || k == StageKind::seme || k == StageKind::supe; }
bool is_smote_family(StageKind k) { return k == StageKind::smote || k == StageKind::bsmote; }

bool MethodSpec::uses_external() const {
    return std::any_of(stages.begin(), stages.end(), [](const auto& s) { return is_enrichment(s.kind); });
}

bool MethodSpec::uses_amount() const {
    return std::any_of(stages.begin(), stages.end(),
                       [](const auto& s) { return s.kind == StageKind::rane || s.kind == StageKind::supe; });
}

bool MethodSpec::needs_smote_sweep() const {
    return std::any_of(stages.begin(), stages.end(),
                       [](const auto& s) { return is_smote_family(s.kind) && !s.smote_k; });
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

DatasetSource parse_source(const json& j, const fs::path& base_dir) {
    DatasetSource s;
    if (j.is_string()) {
        s.path = base_dir / j.get<std::string>();
    } else if (j.is_object()) {
        reject_unknown(j, {"name", "path", "label_column", "positive_class", "schema"}, "dataset");
        if (!j.contains("path")) throw ConfigError("dataset entry needs a 'path'");
        s.path = base_dir / j.at("path").get<std::string>();
        if (j.contains("schema")) s.schema = load_schema(base_dir / j.at("schema").get<std::string>());
        if (j.contains("label_column")) s.schema.label_column = j.at("label_column").get<std::string>();
        if (j.contains("positive_class")) s.schema.positive_class = j.at("positive_class").get<std::string>();
        if (j.contains("name")) s.name = j.at("name").get<std::string>();
    } else {
        throw ConfigError("dataset entry must be a path or an object");
    }
    if (s.name.empty()) s.name = s.path.stem().string();
    return s;
}

StageSpec parse_stage(const json& j) {
    StageSpec st;
    if (j.is_string()) {
        st.kind = parse_stage_kind(j.get<std::string>());
        return st;
    }
    reject_unknown(j, {"method", "amount_percent", "use_seme_prestep", "smote_k", "name"}, "method stage");
    st.kind = parse_stage_kind(j.at("method").get<std::string>());
    if (j.contains("amount_percent")) st.amount_percent = j.at("amount_percent").get<double>();
    if (j.contains("use_seme_prestep")) st.use_seme_prestep = j.at("use_seme_prestep").get<bool>();
    if (j.contains("smote_k")) {
        const auto& k = j.at("smote_k");
        if (k.is_string() && k.get<std::string>() == "sweep") {
            st.smote_k.reset();
        } else {
            st.smote_k = k.get<std::size_t>();
            if (*st.smote_k == 0) throw ConfigError("smote_k must be positive");
        }
    }
    return st;
}

MethodSpec parse_method(const json& j) {
    MethodSpec m;
    if (j.is_string()) {
        m.stages.push_back(parse_stage(j));
        m.name = j.get<std::string>();
        return m;
    }
    if (!j.is_object()) throw ConfigError("method entry must be a string or an object");
    const std::string kind = j.value("method", std::string{});
    if (kind == "pipeline") {
        reject_unknown(j, {"method", "name", "stages"}, "pipeline method");
        if (!j.contains("stages") || !j.at("stages").is_array() || j.at("stages").empty()) {
            throw ConfigError("pipeline method needs a nonempty 'stages' list");
        }
        for (const auto& s : j.at("stages")) m.stages.push_back(parse_stage(s));
        m.name = j.value("name", std::string{});
        if (m.name.empty()) {
            for (const auto& s : m.stages) m.name += (m.name.empty() ? "" : "+") + std::string(to_string(s.kind));
        }
    } else {
        m.stages.push_back(parse_stage(j));
        m.name = j.value("name", kind);
    }
    return m;
}

template <typename T>
std::vector<T> nonempty_axis(const json& sweep, const char* key) {
    std::vector<T> out;
    if (!sweep.contains(key)) return out;
    const auto& axis = sweep.at(key);
    if (!axis.is_array() || axis.empty()) throw ConfigError(std::string("sweep axis '") + key + "' must be a nonempty list");
    for (const auto& v : axis) out.push_back(v.get<T>());
    return out;
}

std::string fixed(double v, int digits = 6) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
    return std::string(buf, ptr);
}

std::string amount_text(const std::optional<double>& a) {
    if (!a) return "";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, *a);
    return std::string(buf, ptr);
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
    return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j, const fs::path& base_dir) {
    try {
        if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
        reject_unknown(j, {"base_dataset", "base_datasets", "external_datasets", "methods", "enrichment", "cv",
                           "classifier", "sweep", "output_dir", "seed"},
                       "config");
        ExperimentConfig cfg;
        if (j.contains("base_dataset")) cfg.bases.push_back(parse_source(j.at("base_dataset"), base_dir));
        if (j.contains("base_datasets")) {
            for (const auto& b : j.at("base_datasets")) cfg.bases.push_back(parse_source(b, base_dir));
        }
        if (cfg.bases.empty()) throw ConfigError("config needs 'base_dataset' or 'base_datasets'");
        if (j.contains("external_datasets")) {
            for (const auto& e : j.at("external_datasets")) cfg.externals.push_back(parse_source(e, base_dir));
        }
        if (j.contains("methods")) {
            for (const auto& m : j.at("methods")) cfg.methods.push_back(parse_method(m));
        }
        std::set<std::string> names;
        for (const auto& m : cfg.methods) {
            if (!names.insert(m.name).second) throw ConfigError("duplicate method name '" + m.name + "'");
        }

        if (j.contains("enrichment")) {
            const auto& e = j.at("enrichment");
            reject_unknown(e, {"minority_threshold", "amount_percent", "k", "seme_split_fraction", "use_seme_prestep",
                               "classifier"},
                           "enrichment");
            cfg.enrichment.minority_threshold = e.value("minority_threshold", cfg.enrichment.minority_threshold);
            cfg.enrichment.amount_percent = e.value("amount_percent", cfg.enrichment.amount_percent);
            cfg.enrichment.k = e.value("k", cfg.enrichment.k);
            cfg.enrichment.seme_split_fraction = e.value("seme_split_fraction", cfg.enrichment.seme_split_fraction);
            cfg.enrichment.use_seme_prestep = e.value("use_seme_prestep", cfg.enrichment.use_seme_prestep);
            if (e.contains("classifier")) {
                cfg.enrichment.classifier = ClassifierSpec::from_json(e.at("classifier"));
                cfg.enrichment_classifier_set = true;
            }
            cfg.enrichment.validate();
        }
        if (j.contains("cv")) {
            const auto& c = j.at("cv");
            reject_unknown(c, {"folds", "repetitions", "smote_sweep_repetitions", "smote_k_candidates"}, "cv");
            cfg.folds = c.value("folds", cfg.folds);
            cfg.repetitions = c.value("repetitions", cfg.repetitions);
            cfg.smote_sweep_repetitions = c.value("smote_sweep_repetitions", cfg.smote_sweep_repetitions);
            if (c.contains("smote_k_candidates")) {
                cfg.smote_k_candidates = c.at("smote_k_candidates").get<std::vector<std::size_t>>();
            }
        }
        if (cfg.folds < 2) throw ConfigError("cv.folds must be at least 2");
        if (cfg.repetitions == 0 || cfg.smote_sweep_repetitions == 0) throw ConfigError("repetitions must be positive");
        if (cfg.smote_k_candidates.empty() ||
            std::find(cfg.smote_k_candidates.begin(), cfg.smote_k_candidates.end(), 0u) != cfg.smote_k_candidates.end()) {
            throw ConfigError("smote_k_candidates must be a nonempty list of positive integers");
        }

        if (j.contains("classifier")) cfg.classifiers.push_back(ClassifierSpec::from_json(j.at("classifier")));
        if (j.contains("sweep")) {
            const auto& s = j.at("sweep");
            reject_unknown(s, {"amount_percent", "external", "classifier"}, "sweep");
            cfg.amounts = nonempty_axis<double>(s, "amount_percent");
            cfg.external_names = nonempty_axis<std::string>(s, "external");
            if (s.contains("classifier")) {
                if (!s.at("classifier").is_array() || s.at("classifier").empty()) {
                    throw ConfigError("sweep axis 'classifier' must be a nonempty list");
                }
                cfg.classifiers.clear();
                for (const auto& c : s.at("classifier")) cfg.classifiers.push_back(ClassifierSpec::from_json(c));
            }
        }
        if (cfg.classifiers.empty()) cfg.classifiers.push_back(ClassifierSpec{});
        for (double a : cfg.amounts) {
            if (!(a >= 0.0 && a <= 100.0)) throw ConfigError("sweep amounts must lie in [0, 100]");
        }
        for (const auto& name : cfg.external_names) {
            if (std::none_of(cfg.externals.begin(), cfg.externals.end(), [&](const auto& e) { return e.name == name; })) {
                throw ConfigError("sweep references unknown external dataset '" + name + "'");
            }
        }
        for (const auto& m : cfg.methods) {
            if (m.uses_external() && cfg.externals.empty()) {
                throw ConfigError("method '" + m.name + "' needs at least one external dataset");
            }
        }
        cfg.output_dir = base_dir / j.value("output_dir", std::string("enrichkit_out"));
        cfg.seed = j.value("seed", std::uint64_t{0});
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config value: ") + e.what());
    } catch (const ClassifierError& e) {
        throw ConfigError(e.what());
    } catch (const EnrichmentError& e) {
        throw ConfigError(e.what());
    } catch (const DatasetError& e) {
        throw ConfigError(e.what());
    }
}

ExperimentConfig load_experiment_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_experiment_config(j, path.parent_path());
}

std::optional<long> gain_percent(double method_f, double baseline_f) {
    if (baseline_f == 0.0) return std::nullopt;
    return std::lround(100.0 * (method_f - baseline_f) / baseline_f);
}

std::size_t select_smote_k(const Dataset& base, ResampleMethod method, const CVConfig& cv,
                           const std::vector<std::size_t>& candidates, std::size_t repetitions) {
    std::optional<std::size_t> best_k;
    double best = -1.0;
    auto sorted = candidates;
    std::sort(sorted.begin(), sorted.end());
    for (auto k : sorted) {
        CVConfig c = cv;
        c.repetitions = repetitions;
        TrainingTransform t = [&](const Dataset& training, std::uint64_t seed) {
            return resample(training, ResampleConfig{method, k, seed, {}}).data;
        };
        double score = 0.0;
        try {
            score = cross_validate(base, c, t).macro_f;
        } catch (const ResampleError&) {
            continue;
        }
        if (!best_k || score > best) {
            best_k = k;
            best = score;
        }
    }
    if (!best_k) throw ResampleError("no candidate SMOTE neighbor count is feasible for this dataset");
    return *best_k;
}

// ---------------------------------------------------------------------------
// Runner

namespace {

struct CellPlan {
    std::string id;
    std::size_t base = 0;
    std::optional<std::size_t> method;  // nullopt: baseline
    std::optional<std::size_t> external;
    std::optional<double> amount;
    std::size_t classifier = 0;
};

std::string classifier_name(const ClassifierSpec& c) { return to_string(c.kind); }

std::vector<CellPlan> plan_cells(const ExperimentConfig& cfg) {
    std::vector<CellPlan> cells;
    std::set<std::string> ids;
    auto add = [&](CellPlan p) {
        std::string id = sanitize(cfg.bases[p.base].name) + "__" +
                         sanitize(p.method ? cfg.methods[*p.method].name : "none");
        if (p.external) id += "__" + sanitize(cfg.externals[*p.external].name);
        if (p.amount) id += "__" + sanitize(amount_text(p.amount));
        if (cfg.classifiers.size() > 1) id += "__" + std::to_string(p.classifier) + "-" +
                                              classifier_name(cfg.classifiers[p.classifier]);
        std::string unique = id;
        for (int n = 2; !ids.insert(unique).second; ++n) unique = id + "-" + std::to_string(n);
        p.id = unique;
        cells.push_back(std::move(p));
    };
    for (std::size_t b = 0; b < cfg.bases.size(); ++b) {
        for (std::size_t c = 0; c < cfg.classifiers.size(); ++c) {
            add(CellPlan{"", b, std::nullopt, std::nullopt, std::nullopt, c});
            for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
                const auto& method = cfg.methods[m];
                if (method.stages.size() == 1 && method.stages[0].kind == StageKind::none) continue;
                std::vector<std::optional<std::size_t>> externals{std::nullopt};
                if (method.uses_external()) {
                    externals.clear();
                    for (std::size_t e = 0; e < cfg.externals.size(); ++e) {
                        const auto& name = cfg.externals[e].name;
                        if (name == cfg.bases[b].name) continue;
                        if (!cfg.external_names.empty() &&
                            std::find(cfg.external_names.begin(), cfg.external_names.end(), name) ==
                                cfg.external_names.end()) {
                            continue;
                        }
                        externals.emplace_back(e);
                    }
                }
                std::vector<std::optional<double>> amounts{std::nullopt};
                if (method.uses_amount() && !cfg.amounts.empty()) amounts.assign(cfg.amounts.begin(), cfg.amounts.end());
                for (const auto& e : externals) {
                    for (const auto& a : amounts) add(CellPlan{"", b, m, e, a, c});
                }
            }
        }
    }
    return cells;
}

struct Inputs {
    std::vector<std::optional<Dataset>> bases;
    std::vector<std::string> base_errors;
    std::vector<std::optional<Dataset>> externals;
    std::vector<std::string> external_errors;
};

void load_all(const std::vector<DatasetSource>& sources, std::vector<std::optional<Dataset>>& data,
              std::vector<std::string>& errors) {
    for (const auto& s : sources) {
        try {
            data.emplace_back(load_dataset(s.path, s.schema));
            errors.emplace_back();
        } catch (const std::exception& e) {
            data.emplace_back(std::nullopt);
            errors.emplace_back(e.what());
        }
    }
}

struct AuditTotals {
    std::size_t runs = 0;
    std::size_t added = 0;
    std::size_t considered = 0;
    std::size_t rejected = 0;
    std::map<Label, std::size_t> per_class_added;
    std::size_t scored_runs = 0;
    double baseline_sum = 0.0;
    double final_sum = 0.0;
    std::size_t improved_runs = 0;
    std::size_t regressed_runs = 0;
    std::set<std::string> warnings;

    void add(const EnrichmentAudit& a) {
        ++runs;
        added += a.added_indices.size();
        considered += a.considered;
        rejected += a.rejected_count;
        for (const auto& [l, n] : a.per_class_added) per_class_added[l] += n;
        if (!a.trajectory.empty()) {
            ++scored_runs;
            baseline_sum += a.baseline_macro_f;
            final_sum += a.final_macro_f;
            improved_runs += a.final_macro_f > a.baseline_macro_f ? 1 : 0;
            regressed_runs += a.final_macro_f < a.baseline_macro_f ? 1 : 0;
        }
        warnings.insert(a.warnings.begin(), a.warnings.end());
    }

    json to_json() const {
        json j{{"runs", runs},
               {"added_total", added},
               {"considered_total", considered},
               {"rejected_total", rejected},
               {"per_class_added_total", per_class_added},
               {"warnings", std::vector<std::string>(warnings.begin(), warnings.end())}};
        if (scored_runs > 0) {
            j["validation_runs"] = scored_runs;
            j["mean_validation_baseline_macro_f"] = baseline_sum / static_cast<double>(scored_runs);
            j["mean_validation_final_macro_f"] = final_sum / static_cast<double>(scored_runs);
            j["improved_runs"] = improved_runs;
            j["regressed_runs"] = regressed_runs;
        }
        return j;
    }
};

CellResult run_cell(const ExperimentConfig& cfg, const CellPlan& plan, const Inputs& in, std::uint64_t seed) {
    CellResult r;
    r.id = plan.id;
    r.dataset = cfg.bases[plan.base].name;
    r.method = plan.method ? cfg.methods[*plan.method].name : "None";
    r.external = plan.external ? cfg.externals[*plan.external].name : "";
    r.amount_percent = plan.amount;
    r.classifier = classifier_name(cfg.classifiers[plan.classifier]);
    r.seed = seed;
    const auto start = std::chrono::steady_clock::now();
    try {
        if (!in.bases[plan.base]) throw DatasetError(in.base_errors[plan.base]);
        const Dataset& base = *in.bases[plan.base];
        const Dataset* external = nullptr;
        if (plan.external) {
            if (!in.externals[*plan.external]) throw DatasetError(in.external_errors[*plan.external]);
            external = &*in.externals[*plan.external];
        }
        CVConfig cv;
        cv.folds = cfg.folds;
        cv.repetitions = cfg.repetitions;
        cv.seed = seed;
        cv.classifier = cfg.classifiers[plan.classifier];
        cv.classifier.seed = seed;

        if (!plan.method) {
            r.report = cross_validate(base, cv, TrainingTransform{});
        } else {
            auto stages = cfg.methods[*plan.method].stages;
            for (auto& st : stages) {
                if (is_smote_family(st.kind) && !st.smote_k) {
                    const auto method = st.kind == StageKind::smote ? ResampleMethod::smote : ResampleMethod::bsmote;
                    st.smote_k = select_smote_k(base, method, cv, cfg.smote_k_candidates, cfg.smote_sweep_repetitions);
                    r.selected_smote_k = st.smote_k;
                }
            }
            AuditTotals totals;
            const Dataset empty(base.dimension(), {});
            TrainingTransform transform = [&](const Dataset& training, std::uint64_t fold_seed) {
                Dataset current = training;
                for (std::size_t i = 0; i < stages.size(); ++i) {
                    const auto& st = stages[i];
                    const auto stage_seed = derive_seed(fold_seed, i);
                    if (is_enrichment(st.kind)) {
                        EnrichmentConfig e = cfg.enrichment;
                        e.seed = stage_seed;
                        e.classifier = cfg.enrichment_classifier_set ? cfg.enrichment.classifier : cv.classifier;
                        e.classifier.seed = stage_seed;
                        if (st.amount_percent) e.amount_percent = *st.amount_percent;
                        if (plan.amount) e.amount_percent = *plan.amount;
                        if (st.use_seme_prestep) e.use_seme_prestep = *st.use_seme_prestep;
                        const Dataset& ext = external ? *external : empty;
                        EnrichmentResult res = st.kind == StageKind::rane   ? rane(current, ext, e)
                                               : st.kind == StageKind::seme ? seme(current, ext, e)
                                                                            : supe(current, ext, e);
                        totals.add(res.audit);
                        current = std::move(res.data);
                    } else if (st.kind != StageKind::none) {
                        ResampleConfig rc;
                        rc.method = parse_resample_method(to_string(st.kind));
                        rc.smote_k = st.smote_k.value_or(5);
                        rc.seed = stage_seed;
                        current = resample(current, rc).data;
                    }
                }
                return current;
            };
            r.report = cross_validate(base, cv, transform);
            if (totals.runs > 0) r.enrichment = totals.to_json();
        }
        r.ok = true;
    } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
    }
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

void write_atomically(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string gain_text(const std::optional<long>& g) { return g ? std::to_string(*g) : "NaN"; }

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg_in, const RunOptions& options) {
    ExperimentConfig cfg = cfg_in;
    if (options.seed_override) cfg.seed = *options.seed_override;
    for (const auto* group : {&cfg.bases, &cfg.externals}) {
        for (const auto& s : *group) {
            if (!fs::exists(s.path)) throw ConfigError("dataset file does not exist: " + s.path.string());
        }
    }

    Inputs in;
    load_all(cfg.bases, in.bases, in.base_errors);
    load_all(cfg.externals, in.externals, in.external_errors);

    const auto plans = plan_cells(cfg);
    RunSummary summary;
    summary.cells.resize(plans.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < plans.size(); i = next++) {
            summary.cells[i] = run_cell(cfg, plans[i], in, cfg.seed);
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, plans.size()));
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
        worker();
    }

    // baseline per (dataset, classifier)
    std::map<std::pair<std::size_t, std::size_t>, const CellResult*> baselines;
    for (std::size_t i = 0; i < plans.size(); ++i) {
        if (!plans[i].method) baselines[{plans[i].base, plans[i].classifier}] = &summary.cells[i];
    }
    auto baseline_of = [&](std::size_t i) -> const CellResult* {
        const auto* b = baselines.at({plans[i].base, plans[i].classifier});
        return b->ok ? b : nullptr;
    };

    fs::create_directories(cfg.output_dir / "cells");
    std::set<Label> all_labels;
    for (const auto& c : summary.cells) {
        if (c.ok) {
            for (const auto& [l, _] : c.report.per_class_f) all_labels.insert(l);
        }
    }

    for (std::size_t i = 0; i < plans.size(); ++i) {
        const auto& c = summary.cells[i];
        if (!c.ok) ++summary.failed;
        json j;
        j["id"] = c.id;
        j["dataset"] = c.dataset;
        j["method"] = c.method;
        j["external"] = c.external;
        j["amount_percent"] = c.amount_percent ? json(*c.amount_percent) : json(nullptr);
        j["classifier"] = cfg.classifiers[plans[i].classifier].to_json();
        j["seed"] = c.seed;
        j["status"] = c.ok ? "ok" : "failed";
        if (!c.ok) j["error"] = c.error;
        if (c.ok) {
            j["report"] = c.report.to_json();
            if (const auto* b = baseline_of(i)) {
                j["baseline_macro_f"] = b->report.macro_f;
                const auto g = gain_percent(c.report.macro_f, b->report.macro_f);
                j["gain_percent"] = g ? json(*g) : json(nullptr);
            }
        }
        if (c.selected_smote_k) j["selected_smote_k"] = *c.selected_smote_k;
        if (!c.enrichment.is_null()) j["enrichment"] = c.enrichment;
        const auto path = cfg.output_dir / "cells" / (c.id + ".json");
        write_atomically(path, j.dump(2) + "\n");
        summary.written.push_back(path);
    }

    // aggregate CSV
    {
        std::string csv = "dataset,method,external,amount_percent,classifier";
        for (const auto& l : all_labels) csv += "," + csv_cell("f_" + l);
        csv += ",macro_f,gain_percent\n";
        for (std::size_t i = 0; i < plans.size(); ++i) {
            const auto& c = summary.cells[i];
            if (!c.ok) continue;
            csv += csv_cell(c.dataset) + "," + csv_cell(c.method) + "," + csv_cell(c.external) + "," +
                   amount_text(c.amount_percent) + "," + c.classifier;
            for (const auto& l : all_labels) {
                auto it = c.report.per_class_f.find(l);
                csv += "," + (it == c.report.per_class_f.end() ? std::string() : fixed(it->second));
            }
            csv += "," + fixed(c.report.macro_f) + ",";
            if (plans[i].method) {
                if (const auto* b = baseline_of(i)) csv += gain_text(gain_percent(c.report.macro_f, b->report.macro_f));
            }
            csv += "\n";
        }
        const auto path = cfg.output_dir / "results.csv";
        write_atomically(path, csv);
        summary.written.push_back(path);
    }

    // pivot tables: amount rows x external columns, per (dataset, method, classifier)
    {
        std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < plans.size(); ++i) {
            if (plans[i].method && summary.cells[i].ok) {
                groups[{plans[i].base, *plans[i].method, plans[i].classifier}].push_back(i);
            }
        }
        for (const auto& [key, members] : groups) {
            if (members.size() < 2) continue;
            std::vector<std::string> externals;
            std::vector<std::optional<double>> amounts;
            for (auto i : members) {
                const auto& c = summary.cells[i];
                if (std::find(externals.begin(), externals.end(), c.external) == externals.end()) {
                    externals.push_back(c.external);
                }
                if (std::find(amounts.begin(), amounts.end(), c.amount_percent) == amounts.end()) {
                    amounts.push_back(c.amount_percent);
                }
            }
            std::string csv = "amount_percent";
            for (const auto& e : externals) csv += "," + csv_cell(e + "_macro_f") + "," + csv_cell(e + "_gain_percent");
            csv += "\n";
            for (const auto& a : amounts) {
                csv += amount_text(a);
                for (const auto& e : externals) {
                    auto it = std::find_if(members.begin(), members.end(), [&](std::size_t i) {
                        return summary.cells[i].external == e && summary.cells[i].amount_percent == a;
                    });
                    if (it == members.end()) {
                        csv += ",,";
                        continue;
                    }
                    const auto& c = summary.cells[*it];
                    csv += "," + fixed(c.report.macro_f) + ",";
                    if (const auto* b = baseline_of(*it)) csv += gain_text(gain_percent(c.report.macro_f, b->report.macro_f));
                }
                csv += "\n";
            }
            const auto& [b, m, cl] = key;
            std::string name = sanitize(cfg.bases[b].name) + "__" + sanitize(cfg.methods[m].name);
            if (cfg.classifiers.size() > 1) name += "__" + std::to_string(cl) + "-" + classifier_name(cfg.classifiers[cl]);
            fs::create_directories(cfg.output_dir / "tables");
            const auto path = cfg.output_dir / "tables" / (name + ".csv");
            write_atomically(path, csv);
            summary.written.push_back(path);
        }
    }

    // Friedman ranks per classifier, best configuration per (method, dataset)
    for (std::size_t cl = 0; cl < cfg.classifiers.size(); ++cl) {
        std::vector<std::string> methods{"None"};
        for (const auto& m : cfg.methods) {
            if (!(m.stages.size() == 1 && m.stages[0].kind == StageKind::none)) methods.push_back(m.name);
        }
        std::vector<std::string> datasets;
        for (const auto& b : cfg.bases) datasets.push_back(b.name);
        std::map<std::pair<std::string, std::string>, double> best;
        for (std::size_t i = 0; i < plans.size(); ++i) {
            const auto& c = summary.cells[i];
            if (plans[i].classifier != cl || !c.ok) continue;
            auto [it, inserted] = best.try_emplace({c.method, c.dataset}, c.report.macro_f);
            if (!inserted) it->second = std::max(it->second, c.report.macro_f);
        }
        std::vector<std::string> complete;
        std::vector<std::vector<double>> scores;
        for (const auto& m : methods) {
            std::vector<double> row;
            for (const auto& d : datasets) {
                auto it = best.find({m, d});
                if (it == best.end()) break;
                row.push_back(it->second);
            }
            if (row.size() == datasets.size()) {
                complete.push_back(m);
                scores.push_back(std::move(row));
            }
        }
        if (complete.size() < 2 || datasets.size() < 2) continue;
        const ScoreMatrix matrix(complete, datasets, scores);
        const auto ranks = friedman_ranks(matrix);
        const auto stat = friedman_statistic(matrix);
        const std::string suffix =
            cfg.classifiers.size() > 1 ? "_" + std::to_string(cl) + "-" + classifier_name(cfg.classifiers[cl]) : "";
        const auto rank_path = cfg.output_dir / ("ranks" + suffix + ".csv");
        write_atomically(rank_path, format_rank_csv(ranks));
        json fj{{"chi_square", stat.chi_square},
                {"degrees_of_freedom", stat.degrees_of_freedom},
                {"p_value", stat.p_value},
                {"methods", complete},
                {"datasets", datasets}};
        const auto fried_path = cfg.output_dir / ("friedman" + suffix + ".json");
        write_atomically(fried_path, fj.dump(2) + "\n");
        summary.written.push_back(rank_path);
        summary.written.push_back(fried_path);
    }

    // manifest: plain text because it carries wall times
    {
        std::string log = "# cell\tstatus\tseed\twall_ms\terror\n";
        for (const auto& c : summary.cells) {
            std::string err = c.error;
            std::replace(err.begin(), err.end(), '\n', ' ');
            std::replace(err.begin(), err.end(), '\t', ' ');
            log += c.id + "\t" + (c.ok ? "ok" : "failed") + "\t" + std::to_string(c.seed) + "\t" + fixed(c.wall_ms, 1) +
                   "\t" + err + "\n";
        }
        const auto path = cfg.output_dir / "run_manifest.log";
        write_atomically(path, log);
        summary.written.push_back(path);
    }
    return summary;
}

}  // namespace enrichkit
