// fairrank command line: generate synthetic cohorts, fit and apply ranking
// models, audit rankings/labels, and run the experiment sweeps.
//
// Exit codes: 0 ok, 1 user error (bad flags, bad files), 2 internal error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairrank/audit.hpp"
#include "fairrank/baselines.hpp"
#include "fairrank/csv.hpp"
#include "fairrank/harness.hpp"
#include "fairrank/northstar.hpp"
#include "fairrank/rng.hpp"
#include "fairrank/synthgen.hpp"

namespace fs = std::filesystem;
using namespace fairrank;

namespace {

std::string output_root() {
    const char* root = std::getenv("FAIRRANK_OUTPUT_ROOT");
    return root ? std::string(root) : std::string(".");
}

fs::path resolve_output(const std::string& dir) {
    fs::path p(dir.empty() ? output_root() : dir);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

Dataset load_input_dataset(const std::string& data_path, const std::string& schema_path) {
    return load_csv_dataset(data_path, load_schema(schema_path));
}

struct FitFlags {
    FitConfig config;
    void attach(CLI::App* cmd) {
        cmd->add_option("--trees", config.forest.n_trees, "forest size");
        cmd->add_option("--max-depth", config.forest.max_depth, "tree depth limit");
        cmd->add_option("--max-features", config.forest.max_features,
                        "features per split (0 = sqrt)");
        cmd->add_option("--holdout-fraction", config.forest.holdout_fraction,
                        "holdout share for scoring");
        cmd->add_option("--importance-models", config.importance.n_models, "forest refits");
        cmd->add_option("--importance-permutations", config.importance.n_permutations,
                        "shuffles per feature per refit");
        cmd->add_option("--gate-margin", config.importance.gate_margin,
                        "uniform-weight gate: holdout accuracy must beat majority + margin");
        cmd->add_flag("--importance-on-training", config.importance.score_on_training,
                      "score permutation drops on training rows");
    }
};

std::vector<Label> outcomes_from_cohort_csv(const std::string& path,
                                            const std::vector<std::string>& ids) {
    const CsvTable table = read_csv(path);
    const std::size_t c_id = table.column("id");
    const std::size_t c_outcome = table.column("outcome");
    std::vector<Label> outcomes(ids.size(), Label::Negative);
    std::vector<bool> seen(ids.size(), false);
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (ids[i] == row[c_id]) {
                if (row[c_outcome] == "+") outcomes[i] = Label::Positive;
                else if (row[c_outcome] == "-") outcomes[i] = Label::Negative;
                else throw std::runtime_error("cohort outcome '" + row[c_outcome] + "' is not +/-");
                seen[i] = true;
            }
        }
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!seen[i]) throw std::runtime_error("cohort file lacks an outcome for id " + ids[i]);
    }
    return outcomes;
}

int run(int argc, char** argv) {
    CLI::App app{"fair ranking-based classification toolkit"};
    app.require_subcommand(1);

    // ---- generate ----------------------------------------------------------
    auto* generate = app.add_subcommand("generate", "sample a synthetic admissions cohort");
    std::size_t gen_n = 1000;
    std::uint64_t gen_seed = 1;
    std::string gen_variant = "running-example";
    double gen_zeta = 0.0;
    double gen_noise_sd = 0.1;
    std::string gen_out;
    generate->add_option("--n", gen_n, "cohort size (even)");
    generate->add_option("--seed", gen_seed, "master seed");
    generate->add_option("--variant", gen_variant, "label rule: running-example | zeta")
        ->check(CLI::IsMember({"running-example", "zeta"}));
    generate->add_option("--zeta", gen_zeta, "discrimination strength (zeta variant)");
    generate->add_option("--noise-sd", gen_noise_sd, "label noise std dev (zeta variant)");
    generate->add_option("--out-dir", gen_out, "output directory");

    // ---- fit ---------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "fit a ranking model on a labeled dataset");
    std::string fit_data, fit_schema, fit_model_out, fit_cohort_out, fit_penalty_out;
    double fit_alpha = -1.0;
    std::uint64_t fit_seed = 1;
    FitFlags fit_flags;
    fit_cmd->add_option("--data", fit_data, "dataset CSV")->required();
    fit_cmd->add_option("--schema", fit_schema, "schema annotation file")->required();
    fit_cmd->add_option("--alpha", fit_alpha, "capacity share in (0,1); default: positive share");
    fit_cmd->add_option("--seed", fit_seed, "master seed");
    fit_cmd->add_option("--model", fit_model_out, "model artifact output path")->required();
    fit_cmd->add_option("--cohort", fit_cohort_out, "ranked cohort CSV output path");
    fit_cmd->add_option("--penalty-csv", fit_penalty_out, "penalty matrix CSV output path");
    fit_flags.attach(fit_cmd);

    // ---- rank --------------------------------------------------------------
    auto* rank_cmd = app.add_subcommand("rank", "rank observations under a fitted model");
    std::string rank_model_path, rank_data, rank_schema, rank_out;
    double rank_alpha = -1.0;
    rank_cmd->add_option("--model", rank_model_path, "model artifact")->required();
    rank_cmd->add_option("--data", rank_data, "dataset CSV")->required();
    rank_cmd->add_option("--schema", rank_schema, "schema annotation file")->required();
    rank_cmd->add_option("--alpha", rank_alpha, "assign outcomes at this capacity");
    rank_cmd->add_option("--out", rank_out, "cohort CSV output path")->required();

    // ---- predict -----------------------------------------------------------
    auto* predict_cmd = app.add_subcommand("predict", "classify observations with <= delta");
    std::string pred_model_path, pred_data, pred_schema, pred_out;
    predict_cmd->add_option("--model", pred_model_path, "model artifact")->required();
    predict_cmd->add_option("--data", pred_data, "dataset CSV")->required();
    predict_cmd->add_option("--schema", pred_schema, "schema annotation file")->required();
    predict_cmd->add_option("--out", pred_out, "predictions CSV output path")->required();

    // ---- audit -------------------------------------------------------------
    auto* audit_cmd = app.add_subcommand("audit", "meritocratic unfairness and group statistics");
    std::string audit_model_path, audit_data, audit_schema, audit_outcomes, audit_report;
    std::string audit_group_feature, audit_group;
    double audit_alpha = -1.0;
    audit_cmd->add_option("--model", audit_model_path, "model artifact")->required();
    audit_cmd->add_option("--data", audit_data, "dataset CSV")->required();
    audit_cmd->add_option("--schema", audit_schema, "schema annotation file")->required();
    audit_cmd->add_option("--outcomes", audit_outcomes,
                          "cohort CSV with outcomes to audit (default: rank + assign)");
    audit_cmd->add_option("--alpha", audit_alpha, "capacity used when assigning outcomes");
    audit_cmd->add_option("--group-feature", audit_group_feature, "protected feature for rates");
    audit_cmd->add_option("--group", audit_group, "numerator group for the admission ratio");
    audit_cmd->add_option("--report", audit_report, "JSON report output path");

    // ---- sweeps ------------------------------------------------------------
    const auto attach_sweep_options = [](CLI::App* cmd, std::string& config_path,
                                         ExperimentConfig& config, std::string& out_dir,
                                         std::vector<std::uint64_t>& seeds) {
        cmd->add_option("--config", config_path, "experiment config JSON");
        cmd->add_option("--out-dir", out_dir, "run directory (env FAIRRANK_OUTPUT_ROOT default)");
        cmd->add_option("--seeds", seeds, "master seeds");
        cmd->add_option("--cohort-size", config.cohort_size, "synthetic cohort size");
        cmd->add_option("--test-size", config.test_size, "observations set aside for testing");
        cmd->add_option("--csv", config.csv_path, "dataset CSV (csv source)");
        cmd->add_option("--schema", config.schema_path, "schema file (csv source)");
        cmd->add_option("--german-data", config.german_data_path, "raw UCI file");
        cmd->add_option("--german-mapping", config.german_mapping_path, "mapping config");
    };

    auto* sweep_alpha = app.add_subcommand("sweep-alpha", "label-based S over a capacity grid");
    std::string sa_config_path, sa_out;
    ExperimentConfig sa_config;
    std::vector<std::uint64_t> sa_seeds;
    std::vector<double> sa_alphas;
    double sa_zeta = -1.0;
    std::string sa_source = "synthetic";
    attach_sweep_options(sweep_alpha, sa_config_path, sa_config, sa_out, sa_seeds);
    sweep_alpha->add_option("--alphas", sa_alphas, "alpha grid");
    sweep_alpha->add_option("--zeta", sa_zeta, "synthetic labels: zeta rule with this value");
    sweep_alpha->add_option("--source", sa_source, "synthetic | csv | german-credit")
        ->check(CLI::IsMember({"synthetic", "csv", "german-credit"}));

    auto* sweep_zeta = app.add_subcommand("sweep-zeta", "full comparison over the zeta grid");
    std::string sz_config_path, sz_out;
    ExperimentConfig sz_config;
    std::vector<std::uint64_t> sz_seeds;
    std::vector<double> sz_zetas;
    attach_sweep_options(sweep_zeta, sz_config_path, sz_config, sz_out, sz_seeds);
    sweep_zeta->add_option("--zetas", sz_zetas, "zeta grid");

    // ---- emit-figures ------------------------------------------------------
    auto* emit = app.add_subcommand("emit-figures", "tidy per-figure series from result rows");
    std::string emit_results, emit_figure, emit_out;
    emit->add_option("--results", emit_results, "results CSV from a sweep")->required();
    emit->add_option("--figure", emit_figure, "fig1 | fig2 | fig3 | fig4")->required();
    emit->add_option("--out", emit_out, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    if (generate->parsed()) {
        CohortSpec spec;
        spec.n = gen_n;
        spec.seed = derive_seed(gen_seed, "cohort");
        const Dataset cohort = sample_cohort(spec);
        LabelGenSpec labels;
        labels.seed = derive_seed(gen_seed, "labels");
        labels.noise_sd = gen_noise_sd;
        if (gen_variant == "zeta") {
            labels.variant = LabelGenSpec::Variant::ZetaScore;
            labels.zeta = gen_zeta;
        }
        const Dataset labeled = with_labels(cohort, generate_labels(cohort, labels));

        const fs::path dir = resolve_output(gen_out);
        {
            std::ofstream out(dir / "cohort.csv");
            write_dataset_csv(out, labeled);
        }
        {
            std::ofstream out(dir / "cohort.schema");
            write_schema(out, cohort_schema());
        }
        {
            nlohmann::json provenance;
            provenance["n"] = gen_n;
            provenance["seed"] = gen_seed;
            provenance["variant"] = gen_variant;
            if (gen_variant == "zeta") {
                provenance["zeta"] = gen_zeta;
                provenance["noise_sd"] = gen_noise_sd;
            }
            write_file(dir / "cohort.json", provenance.dump(2) + "\n");
        }
        std::cout << "wrote " << (dir / "cohort.csv").string() << " (" << labeled.n_rows()
                  << " rows)\n";
        return 0;
    }

    if (fit_cmd->parsed()) {
        const Dataset dataset = load_input_dataset(fit_data, fit_schema);
        const std::optional<double> alpha =
            fit_alpha >= 0.0 ? std::optional<double>(fit_alpha) : std::nullopt;
        const FitResult result = fit(dataset, alpha, fit_flags.config, fit_seed);
        save_rank_model(fit_model_out, result.model);
        if (!fit_cohort_out.empty()) {
            std::ofstream out(fit_cohort_out);
            write_cohort_csv(out, result.cohort);
        }
        if (!fit_penalty_out.empty()) {
            std::ofstream out(fit_penalty_out);
            write_penalty_matrix_csv(out, result.model.penalty);
        }
        std::cout << "fit " << dataset.n_rows() << " rows, alpha=" << result.model.alpha
                  << ", cutoff=" << result.model.cutoff << ", delta=" << result.model.delta
                  << "\n";
        return 0;
    }

    if (rank_cmd->parsed()) {
        const RankModel model = load_rank_model(rank_model_path);
        const Dataset dataset = load_input_dataset(rank_data, rank_schema);
        const std::optional<double> alpha =
            rank_alpha >= 0.0 ? std::optional<double>(rank_alpha) : std::nullopt;
        const RankedCohort cohort = rank(model, dataset, alpha);
        std::ofstream out(rank_out);
        if (!out) throw std::runtime_error("cannot write '" + rank_out + "'");
        write_cohort_csv(out, cohort);
        std::cout << "ranked " << cohort.entries.size() << " observations\n";
        return 0;
    }

    if (predict_cmd->parsed()) {
        const RankModel model = load_rank_model(pred_model_path);
        const Dataset dataset = load_input_dataset(pred_data, pred_schema);
        const std::vector<Prediction> predictions = predict(model, dataset);
        std::ofstream out(pred_out);
        if (!out) throw std::runtime_error("cannot write '" + pred_out + "'");
        std::vector<std::vector<std::string>> rows;
        rows.reserve(predictions.size());
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            rows.push_back({dataset.id_of(i), format_double(predictions[i].distance),
                            to_string(predictions[i].outcome)});
        }
        write_csv(out, {"id", "distance", "outcome"}, rows);
        std::cout << "predicted " << predictions.size() << " observations\n";
        return 0;
    }

    if (audit_cmd->parsed()) {
        const RankModel model = load_rank_model(audit_model_path);
        const Dataset dataset = load_input_dataset(audit_data, audit_schema);
        const ScaledMatrix z = apply_scaling(model.scaling, dataset);

        const double alpha = audit_alpha >= 0.0 ? audit_alpha : model.alpha;
        const RankedCohort cohort = rank(model, dataset, alpha);

        std::vector<Label> outcomes;
        if (!audit_outcomes.empty()) {
            std::vector<std::string> ids(dataset.n_rows());
            for (std::size_t i = 0; i < dataset.n_rows(); ++i) ids[i] = dataset.id_of(i);
            outcomes = outcomes_from_cohort_csv(audit_outcomes, ids);
        } else {
            outcomes.assign(dataset.n_rows(), Label::Negative);
            for (const auto& e : cohort.entries) outcomes[e.original_index] = *e.outcome;
        }

        AuditReport ranking_report;
        ranking_report.kind = AuditKind::RankingBased;
        ranking_report.unfairness = unfairness_of_ranking(cohort, model.psi);
        ranking_report.alpha = alpha;

        AuditReport label_report;
        label_report.kind = AuditKind::LabelBased;
        label_report.unfairness = unfairness_of_labels(outcomes, z, model.psi);
        label_report.alpha = alpha;
        if (dataset.has_labels()) {
            label_report.accuracy_vs_labels = accuracy(outcomes, dataset.labels());
        }
        if (!audit_group_feature.empty()) {
            label_report.groups =
                group_stats(outcomes, dataset.protected_column(audit_group_feature), audit_group);
        }

        const std::string report = "[" + audit_report_to_json(ranking_report) + ",\n" +
                                   audit_report_to_json(label_report) + "]\n";
        if (!audit_report.empty()) write_file(audit_report, report);
        std::cout << "ranking audit: S=" << ranking_report.unfairness.share
                  << " T=" << ranking_report.unfairness.total
                  << "; label audit: S=" << label_report.unfairness.share
                  << " T=" << label_report.unfairness.total << "\n";
        return 0;
    }

    const auto finish_sweep = [](const ExperimentConfig& config,
                                 const std::vector<ResultRow>& rows, const std::string& out_dir) {
        const fs::path dir = resolve_output(out_dir);
        {
            std::ofstream out(dir / "results.csv");
            write_result_rows_csv(out, rows);
        }
        write_manifest((dir / "manifest.json").string(), config, rows.size());
        std::cout << "wrote " << rows.size() << " result rows to "
                  << (dir / "results.csv").string() << "\n";
    };

    // base config from --config (when given), CLI flag values override
    const auto merge_sweep_config = [](const std::string& config_path,
                                       const ExperimentConfig& flags,
                                       const std::vector<std::uint64_t>& seeds) {
        ExperimentConfig config =
            config_path.empty() ? ExperimentConfig{} : load_experiment_config(config_path);
        if (!seeds.empty()) config.seeds = seeds;
        if (!flags.csv_path.empty()) config.csv_path = flags.csv_path;
        if (!flags.schema_path.empty()) config.schema_path = flags.schema_path;
        if (!flags.german_data_path.empty()) config.german_data_path = flags.german_data_path;
        if (!flags.german_mapping_path.empty())
            config.german_mapping_path = flags.german_mapping_path;
        if (flags.cohort_size != ExperimentConfig{}.cohort_size)
            config.cohort_size = flags.cohort_size;
        if (flags.test_size != ExperimentConfig{}.test_size) config.test_size = flags.test_size;
        return config;
    };

    if (sweep_alpha->parsed()) {
        ExperimentConfig config = merge_sweep_config(sa_config_path, sa_config, sa_seeds);
        if (sa_config_path.empty()) {
            if (sa_source == "csv") config.source = ExperimentConfig::Source::Csv;
            else if (sa_source == "german-credit")
                config.source = ExperimentConfig::Source::GermanCredit;
            else config.source = ExperimentConfig::Source::Synthetic;
        }
        if (!sa_alphas.empty()) config.alpha_grid = sa_alphas;
        if (config.alpha_grid.empty()) {
            config.alpha_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
        }
        if (sa_zeta >= 0.0) config.synth_zeta = sa_zeta;
        const std::vector<ResultRow> rows = run_alpha_sweep(config);
        finish_sweep(config, rows, sa_out);
        return 0;
    }

    if (sweep_zeta->parsed()) {
        ExperimentConfig config = merge_sweep_config(sz_config_path, sz_config, sz_seeds);
        if (!sz_zetas.empty()) config.zeta_grid = sz_zetas;
        config.source = ExperimentConfig::Source::Synthetic;
        const std::vector<ResultRow> rows = run_zeta_sweep(config);
        finish_sweep(config, rows, sz_out);
        return 0;
    }

    if (emit->parsed()) {
        std::ifstream in(emit_results);
        if (!in) throw std::runtime_error("cannot open '" + emit_results + "'");
        const std::vector<ResultRow> rows = read_result_rows_csv(in, emit_results);
        std::ofstream out(emit_out);
        if (!out) throw std::runtime_error("cannot write '" + emit_out + "'");
        emit_figure_data(rows, emit_figure, out);
        std::cout << "wrote " << emit_out << "\n";
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
