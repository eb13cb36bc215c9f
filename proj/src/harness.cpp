#include "fairrank/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fairrank/audit.hpp"
#include "fairrank/csv.hpp"
#include "fairrank/rng.hpp"

namespace fairrank {

namespace {

constexpr const char* kToolVersion = "1.0.0";

std::string source_to_string(ExperimentConfig::Source s) {
    switch (s) {
        case ExperimentConfig::Source::Synthetic: return "synthetic";
        case ExperimentConfig::Source::Csv: return "csv";
        case ExperimentConfig::Source::GermanCredit: return "german-credit";
    }
    return "synthetic";
}

ExperimentConfig::Source source_from_string(const std::string& s) {
    if (s == "synthetic") return ExperimentConfig::Source::Synthetic;
    if (s == "csv") return ExperimentConfig::Source::Csv;
    if (s == "german-credit") return ExperimentConfig::Source::GermanCredit;
    throw std::runtime_error("unknown dataset source '" + s + "'");
}

}  // namespace

void ExperimentConfig::validate() const {
    if (methods.empty()) throw std::invalid_argument("config: method list is empty");
    if (seeds.empty()) throw std::invalid_argument("config: seed list is empty");
    std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
    if (distinct.size() != seeds.size()) {
        throw std::invalid_argument("config: seeds must be distinct");
    }
    for (const auto& m : methods) {
        if (m != "ours" && m != "logreg-all" && m != "logreg-ftu" && m != "test-labels") {
            throw std::invalid_argument("config: unknown method '" + m + "'");
        }
    }
    if (source == Source::Csv && (csv_path.empty() || schema_path.empty())) {
        throw std::invalid_argument("config: csv source needs csv_path and schema_path");
    }
    if (source == Source::GermanCredit &&
        (german_data_path.empty() || german_mapping_path.empty())) {
        throw std::invalid_argument(
            "config: german-credit source needs german_data_path and german_mapping_path");
    }
    if (test_size == 0) throw std::invalid_argument("config: test_size must be >= 1");
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
    nlohmann::json j;
    j["source"] = source_to_string(config.source);
    j["csv_path"] = config.csv_path;
    j["schema_path"] = config.schema_path;
    j["german_data_path"] = config.german_data_path;
    j["german_mapping_path"] = config.german_mapping_path;
    j["methods"] = config.methods;
    j["alpha_grid"] = config.alpha_grid;
    j["zeta_grid"] = config.zeta_grid;
    j["seeds"] = config.seeds;
    j["cohort_size"] = config.cohort_size;
    j["test_size"] = config.test_size;
    if (config.alpha) j["alpha"] = *config.alpha;
    if (config.synth_zeta) j["synth_zeta"] = *config.synth_zeta;
    j["group_feature"] = config.group_feature;
    j["group_numerator"] = config.group_numerator;
    j["forest"] = {{"n_trees", config.fit.forest.n_trees},
                   {"max_depth", config.fit.forest.max_depth},
                   {"min_samples_split", config.fit.forest.min_samples_split},
                   {"max_features", config.fit.forest.max_features},
                   {"holdout_fraction", config.fit.forest.holdout_fraction}};
    j["importance"] = {{"n_models", config.fit.importance.n_models},
                       {"n_permutations", config.fit.importance.n_permutations},
                       {"gate_margin", config.fit.importance.gate_margin},
                       {"score_on_training", config.fit.importance.score_on_training}};
    j["logreg"] = {{"l2", config.logreg.l2},
                   {"learning_rate", config.logreg.learning_rate},
                   {"max_iterations", config.logreg.max_iterations},
                   {"tolerance", config.logreg.tolerance}};
    j["output_dir"] = config.output_dir;
    return j.dump(2);
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    nlohmann::json j;
    in >> j;

    ExperimentConfig config;
    if (j.contains("source")) config.source = source_from_string(j["source"].get<std::string>());
    config.csv_path = j.value("csv_path", config.csv_path);
    config.schema_path = j.value("schema_path", config.schema_path);
    config.german_data_path = j.value("german_data_path", config.german_data_path);
    config.german_mapping_path = j.value("german_mapping_path", config.german_mapping_path);
    if (j.contains("methods")) config.methods = j["methods"].get<std::vector<std::string>>();
    if (j.contains("alpha_grid")) config.alpha_grid = j["alpha_grid"].get<std::vector<double>>();
    if (j.contains("zeta_grid")) config.zeta_grid = j["zeta_grid"].get<std::vector<double>>();
    if (j.contains("seeds")) config.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    config.cohort_size = j.value("cohort_size", config.cohort_size);
    config.test_size = j.value("test_size", config.test_size);
    if (j.contains("alpha")) config.alpha = j["alpha"].get<double>();
    if (j.contains("synth_zeta")) config.synth_zeta = j["synth_zeta"].get<double>();
    config.group_feature = j.value("group_feature", config.group_feature);
    config.group_numerator = j.value("group_numerator", config.group_numerator);
    if (j.contains("forest")) {
        const auto& f = j["forest"];
        config.fit.forest.n_trees = f.value("n_trees", config.fit.forest.n_trees);
        config.fit.forest.max_depth = f.value("max_depth", config.fit.forest.max_depth);
        config.fit.forest.min_samples_split =
            f.value("min_samples_split", config.fit.forest.min_samples_split);
        config.fit.forest.max_features = f.value("max_features", config.fit.forest.max_features);
        config.fit.forest.holdout_fraction =
            f.value("holdout_fraction", config.fit.forest.holdout_fraction);
    }
    if (j.contains("importance")) {
        const auto& f = j["importance"];
        config.fit.importance.n_models = f.value("n_models", config.fit.importance.n_models);
        config.fit.importance.n_permutations =
            f.value("n_permutations", config.fit.importance.n_permutations);
        config.fit.importance.gate_margin =
            f.value("gate_margin", config.fit.importance.gate_margin);
        config.fit.importance.score_on_training =
            f.value("score_on_training", config.fit.importance.score_on_training);
    }
    if (j.contains("logreg")) {
        const auto& f = j["logreg"];
        config.logreg.l2 = f.value("l2", config.logreg.l2);
        config.logreg.learning_rate = f.value("learning_rate", config.logreg.learning_rate);
        config.logreg.max_iterations = f.value("max_iterations", config.logreg.max_iterations);
        config.logreg.tolerance = f.value("tolerance", config.logreg.tolerance);
    }
    config.output_dir = j.value("output_dir", config.output_dir);
    return config;
}

namespace {

std::string join_vector(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ';';
        out += format_double(values[i]);
    }
    return out;
}

std::vector<double> split_vector(const std::string& cell) {
    std::vector<double> out;
    if (cell.empty()) return out;
    std::istringstream stream(cell);
    std::string token;
    while (std::getline(stream, token, ';')) out.push_back(parse_double(token, "vector cell"));
    return out;
}

std::string format_optional(double v) { return std::isnan(v) ? std::string() : format_double(v); }

double parse_optional(const std::string& cell) {
    return cell.empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(cell, "cell");
}

std::vector<Label> outcomes_in_original_order(const RankedCohort& cohort) {
    std::vector<Label> out(cohort.entries.size(), Label::Negative);
    for (const auto& e : cohort.entries) {
        if (!e.outcome) throw std::logic_error("cohort has unassigned outcomes");
        out[e.original_index] = *e.outcome;
    }
    return out;
}

const ProtectedColumn* find_protected(const Dataset& dataset, const std::string& name) {
    for (const auto& col : dataset.protected_columns()) {
        if (col.name == name) return &col;
    }
    return nullptr;
}

struct PreparedData {
    Dataset train;
    Dataset test;
};

PreparedData prepare_data(const ExperimentConfig& config, std::uint64_t seed,
                          std::optional<double> zeta) {
    switch (config.source) {
        case ExperimentConfig::Source::Synthetic: {
            CohortSpec spec;
            spec.n = config.cohort_size;
            spec.seed = derive_seed(seed, "cohort");
            const Dataset cohort = sample_cohort(spec);
            LabelGenSpec labels;
            if (zeta) {
                labels.variant = LabelGenSpec::Variant::ZetaScore;
                labels.zeta = *zeta;
            } else {
                labels.variant = LabelGenSpec::Variant::RunningExample;
            }
            labels.seed = derive_seed(seed, "labels");
            const Dataset labeled = with_labels(cohort, generate_labels(cohort, labels));
            auto [train, test] = train_test_split(labeled, config.test_size,
                                                  derive_seed(seed, "split"));
            return {std::move(train), std::move(test)};
        }
        case ExperimentConfig::Source::Csv: {
            const Dataset full = load_csv_dataset(config.csv_path, load_schema(config.schema_path));
            auto [train, test] =
                train_test_split(full, config.test_size, derive_seed(seed, "split"));
            return {std::move(train), std::move(test)};
        }
        case ExperimentConfig::Source::GermanCredit: {
            const Dataset full = load_german_credit(
                config.german_data_path, load_german_credit_mapping(config.german_mapping_path));
            auto [train, test] =
                train_test_split(full, config.test_size, derive_seed(seed, "split"));
            return {std::move(train), std::move(test)};
        }
    }
    throw std::logic_error("unreachable");
}

struct MethodEvaluation {
    RankedCohort cohort;           // empty for test-labels
    std::vector<Label> outcomes;   // in original test order
    bool has_ranking = false;
};

struct CellContext {
    const ExperimentConfig& config;
    const Dataset& test;
    const RankModel& model;
    const ScaledMatrix& z_test;
};

void append_rows(std::vector<ResultRow>& rows, const CellContext& ctx, const std::string& method,
                 const MethodEvaluation& eval, double zeta, double alpha, std::uint64_t seed,
                 double runtime_seconds) {
    const auto& psi = ctx.model.psi;

    UnfairnessStats ranking_stats;
    if (eval.has_ranking) {
        ranking_stats = unfairness_of_ranking(eval.cohort, psi);
    } else {
        // label-derived ranking (all (+) above all (-), no intra-class order):
        // case-a pairs are exactly the case-b pairs of the labels themselves
        ranking_stats = unfairness_of_labels(ctx.test.labels(), ctx.z_test, psi);
    }
    const UnfairnessStats label_stats = unfairness_of_labels(eval.outcomes, ctx.z_test, psi);

    ResultRow ranking_row;
    ranking_row.zeta = zeta;
    ranking_row.alpha = alpha;
    ranking_row.seed = seed;
    ranking_row.method = method;
    ranking_row.audit = "ranking";
    ranking_row.s = ranking_stats.share;
    ranking_row.t = ranking_stats.total;
    ranking_row.runtime_seconds = runtime_seconds;
    if (method == "ours") {
        ranking_row.omega = ctx.model.omega.omega;
        ranking_row.rho = ctx.model.penalty.rho;
    }

    ResultRow label_row = ranking_row;
    label_row.audit = "labels";
    label_row.s = label_stats.share;
    label_row.t = label_stats.total;
    if (ctx.test.has_labels()) {
        label_row.accuracy = accuracy(eval.outcomes, ctx.test.labels());
    }
    if (const ProtectedColumn* attr = find_protected(ctx.test, ctx.config.group_feature)) {
        bool group_present = false;
        for (const auto& category : attr->categories) {
            group_present = group_present || category == ctx.config.group_numerator;
        }
        if (attr->kind != ProtectedKind::Categorical) group_present = false;
        if (group_present) {
            const GroupStats stats =
                group_stats(eval.outcomes, *attr, ctx.config.group_numerator);
            label_row.rate_numerator = stats.numerator_rate;
            label_row.rate_denominator = stats.other_rate;
            label_row.ratio = stats.ratio_degenerate && stats.numerator_rate > 0.0
                                  ? std::numeric_limits<double>::quiet_NaN()
                                  : stats.ratio;
        }
    }

    rows.push_back(std::move(ranking_row));
    rows.push_back(std::move(label_row));
}

}  // namespace

std::vector<ResultRow> run_zeta_sweep(const ExperimentConfig& config) {
    config.validate();
    if (config.source != ExperimentConfig::Source::Synthetic) {
        throw std::invalid_argument("zeta sweep requires the synthetic source");
    }
    if (config.zeta_grid.empty()) throw std::invalid_argument("config: zeta grid is empty");

    std::vector<ResultRow> rows;
    for (const double zeta : config.zeta_grid) {
        for (const std::uint64_t seed : config.seeds) {
            const PreparedData data = prepare_data(config, seed, zeta);
            const double alpha =
                config.alpha ? *config.alpha : data.test.positive_share();

            const auto t0 = std::chrono::steady_clock::now();
            const FitResult ours = fit(data.train, std::nullopt, config.fit,
                                       derive_seed(seed, "fit"));
            const ScaledMatrix z_test = apply_scaling(ours.model.scaling, data.test);
            const CellContext ctx{config, data.test, ours.model, z_test};

            const auto elapsed = [&t0]() {
                return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
            };

            for (const auto& method : config.methods) {
                MethodEvaluation eval;
                if (method == "ours") {
                    eval.cohort = rank(ours.model, data.test, alpha);
                    eval.outcomes = outcomes_in_original_order(eval.cohort);
                    eval.has_ranking = true;
                } else if (method == "logreg-all" || method == "logreg-ftu") {
                    const FeatureSubset subset =
                        method == "logreg-all" ? FeatureSubset::All : FeatureSubset::Ftu;
                    const LogRegModel lr = train_logreg(data.train, subset, config.logreg,
                                                        derive_seed(seed, method));
                    eval.cohort = rank_by_probability(lr, data.test, z_test, alpha);
                    eval.outcomes = outcomes_in_original_order(eval.cohort);
                    eval.has_ranking = true;
                } else {  // test-labels
                    eval.outcomes = data.test.labels();
                    eval.has_ranking = false;
                }
                append_rows(rows, ctx, method, eval, zeta, alpha, seed, elapsed());
            }
        }
    }
    return rows;
}

std::vector<ResultRow> run_alpha_sweep(const ExperimentConfig& config) {
    config.validate();
    if (config.alpha_grid.empty()) throw std::invalid_argument("config: alpha grid is empty");

    std::vector<ResultRow> rows;
    for (const std::uint64_t seed : config.seeds) {
        const PreparedData data = prepare_data(config, seed, config.synth_zeta);

        const FitResult ours = fit(data.train, std::nullopt, config.fit, derive_seed(seed, "fit"));
        const ScaledMatrix z_test = apply_scaling(ours.model.scaling, data.test);
        const CellContext ctx{config, data.test, ours.model, z_test};

        // unlabeled rankings, assigned per grid point below
        std::map<std::string, RankedCohort> rankings;
        for (const auto& method : config.methods) {
            if (method == "ours") {
                rankings[method] = rank(ours.model, data.test, std::nullopt);
            } else if (method == "logreg-all" || method == "logreg-ftu") {
                const FeatureSubset subset =
                    method == "logreg-all" ? FeatureSubset::All : FeatureSubset::Ftu;
                const LogRegModel lr =
                    train_logreg(data.train, subset, config.logreg, derive_seed(seed, method));
                rankings[method] = rank_by_probability(lr, data.test, z_test, std::nullopt);
            }
            // test-labels has no alpha-parameterized labeling; skipped here
        }

        for (const double alpha : config.alpha_grid) {
            for (auto& [method, cohort] : rankings) {
                const auto t0 = std::chrono::steady_clock::now();
                MethodEvaluation eval;
                assign_top(cohort, alpha);
                eval.cohort = cohort;
                eval.outcomes = outcomes_in_original_order(cohort);
                eval.has_ranking = true;
                const double runtime =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                append_rows(rows, ctx, method, eval,
                            config.synth_zeta ? *config.synth_zeta
                                              : std::numeric_limits<double>::quiet_NaN(),
                            alpha, seed, runtime);
            }
        }
    }
    return rows;
}

void write_result_rows_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    std::vector<std::vector<std::string>> cells;
    cells.reserve(rows.size());
    for (const auto& r : rows) {
        cells.push_back({format_optional(r.zeta), format_double(r.alpha), std::to_string(r.seed),
                         r.method, r.audit, format_double(r.s), std::to_string(r.t),
                         format_optional(r.accuracy), format_optional(r.rate_numerator),
                         format_optional(r.rate_denominator), format_optional(r.ratio),
                         join_vector(r.omega), join_vector(r.rho),
                         format_double(r.runtime_seconds)});
    }
    write_csv(out,
              {"zeta", "alpha", "seed", "method", "audit", "s", "t", "accuracy",
               "rate_numerator", "rate_denominator", "ratio", "omega", "rho",
               "runtime_seconds"},
              cells);
}

std::vector<ResultRow> read_result_rows_csv(std::istream& in, const std::string& source_name) {
    const CsvTable table = read_csv(in, source_name);
    std::vector<ResultRow> rows;
    rows.reserve(table.rows.size());
    const auto c = [&table](const char* name) { return table.column(name); };
    const std::size_t c_zeta = c("zeta"), c_alpha = c("alpha"), c_seed = c("seed"),
                      c_method = c("method"), c_audit = c("audit"), c_s = c("s"), c_t = c("t"),
                      c_acc = c("accuracy"), c_rn = c("rate_numerator"),
                      c_rd = c("rate_denominator"), c_ratio = c("ratio"), c_omega = c("omega"),
                      c_rho = c("rho"), c_rt = c("runtime_seconds");
    for (const auto& record : table.rows) {
        ResultRow r;
        r.zeta = parse_optional(record[c_zeta]);
        r.alpha = parse_double(record[c_alpha], "alpha");
        r.seed = static_cast<std::uint64_t>(std::stoull(record[c_seed]));
        r.method = record[c_method];
        r.audit = record[c_audit];
        r.s = parse_double(record[c_s], "s");
        r.t = std::stoll(record[c_t]);
        r.accuracy = parse_optional(record[c_acc]);
        r.rate_numerator = parse_optional(record[c_rn]);
        r.rate_denominator = parse_optional(record[c_rd]);
        r.ratio = parse_optional(record[c_ratio]);
        r.omega = split_vector(record[c_omega]);
        r.rho = split_vector(record[c_rho]);
        r.runtime_seconds = parse_double(record[c_rt], "runtime_seconds");
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

struct SeriesKey {
    std::string method;
    double x;
    bool operator<(const SeriesKey& o) const {
        if (method != o.method) return method < o.method;
        return x < o.x;
    }
};

}  // namespace

void emit_figure_data(const std::vector<ResultRow>& rows, const std::string& figure_id,
                      std::ostream& out) {
    if (rows.empty()) throw std::invalid_argument("emit_figure_data: no result rows");

    std::string audit;
    std::string x_name;
    enum class Value { S, Accuracy, Ratio } value;
    if (figure_id == "fig1") {
        audit = "labels";
        x_name = "alpha";
        value = Value::S;
    } else if (figure_id == "fig2") {
        audit = "ranking";
        x_name = "zeta";
        value = Value::S;
    } else if (figure_id == "fig3") {
        audit = "labels";
        x_name = "zeta";
        value = Value::Accuracy;
    } else if (figure_id == "fig4") {
        audit = "labels";
        x_name = "zeta";
        value = Value::Ratio;
    } else {
        throw std::invalid_argument("unknown figure id '" + figure_id + "' (fig1..fig4)");
    }

    std::map<SeriesKey, std::vector<double>> series;
    for (const auto& r : rows) {
        if (r.audit != audit) continue;
        const double x = x_name == "alpha" ? r.alpha : r.zeta;
        if (std::isnan(x)) continue;
        double y = 0.0;
        switch (value) {
            case Value::S: y = r.s; break;
            case Value::Accuracy: y = r.accuracy; break;
            case Value::Ratio: y = r.ratio; break;
        }
        if (std::isnan(y)) continue;
        series[SeriesKey{r.method, x}].push_back(y);
    }
    if (series.empty()) {
        throw std::invalid_argument("emit_figure_data: rows carry no data for " + figure_id);
    }

    // every series must cover the same grid
    std::set<double> grid;
    std::set<std::string> methods;
    for (const auto& [key, values] : series) {
        grid.insert(key.x);
        methods.insert(key.method);
    }
    std::string missing;
    for (const auto& method : methods) {
        for (const double x : grid) {
            if (!series.count(SeriesKey{method, x})) {
                missing += " (" + method + ", " + format_double(x) + ")";
            }
        }
    }
    if (!missing.empty()) {
        throw std::invalid_argument("emit_figure_data: missing grid points:" + missing);
    }

    std::vector<std::vector<std::string>> cells;
    for (const auto& [key, values] : series) {
        double mean = 0.0;
        for (const double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (const double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(values.size());
        cells.push_back({figure_id, key.method, format_double(key.x), format_double(mean),
                         format_double(std::sqrt(var)), std::to_string(values.size())});
    }
    write_csv(out, {"figure", "series", "x", "y", "y_std", "n"}, cells);
}

void write_manifest(const std::string& path, const ExperimentConfig& config,
                    std::size_t result_rows) {
    nlohmann::json manifest;
    manifest["tool"] = "fairrank";
    manifest["version"] = kToolVersion;
    manifest["config"] = nlohmann::json::parse(experiment_config_to_json(config));
    manifest["result_rows"] = result_rows;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << manifest.dump(2) << '\n';
}

}  // namespace fairrank
