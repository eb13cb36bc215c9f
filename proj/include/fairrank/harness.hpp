#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fairrank/baselines.hpp"
#include "fairrank/northstar.hpp"
#include "fairrank/synthgen.hpp"

namespace fairrank {

/// Experiment orchestration config. Loadable from JSON; CLI flags override.
struct ExperimentConfig {
    enum class Source { Synthetic, Csv, GermanCredit };
    Source source = Source::Synthetic;

    std::string csv_path;
    std::string schema_path;
    std::string german_data_path;
    std::string german_mapping_path;

    std::vector<std::string> methods{"ours", "logreg-all", "logreg-ftu", "test-labels"};
    std::vector<double> alpha_grid;
    std::vector<double> zeta_grid{0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

    std::size_t cohort_size = 1000;
    std::size_t test_size = 200;
    /// Evaluation-time capacity; when unset, the test-set positive share.
    std::optional<double> alpha;
    /// Synthetic label generator for non-zeta runs: a zeta value, or unset
    /// for the running-example rule.
    std::optional<double> synth_zeta;

    std::string group_feature = "gender";
    std::string group_numerator = "female";

    FitConfig fit;
    LogRegHyperparams logreg;

    std::string output_dir;

    void validate() const;  // nonempty grids, distinct seeds
};

ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& config);

/// One tidy result row per (zeta, alpha, seed, method, audit kind).
struct ResultRow {
    double zeta = std::numeric_limits<double>::quiet_NaN();  // NaN outside zeta sweeps
    double alpha = 0.0;
    std::uint64_t seed = 0;
    std::string method;
    std::string audit;  // ranking | labels
    double s = 0.0;
    long long t = 0;
    double accuracy = std::numeric_limits<double>::quiet_NaN();
    double rate_numerator = std::numeric_limits<double>::quiet_NaN();
    double rate_denominator = std::numeric_limits<double>::quiet_NaN();
    double ratio = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> omega;  // fitted weights (ours rows only)
    std::vector<double> rho;
    double runtime_seconds = 0.0;
};

void write_result_rows_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_result_rows_csv(std::istream& in, const std::string& source_name);

/// Label-based S per (method, alpha) over the alpha grid.
std::vector<ResultRow> run_alpha_sweep(const ExperimentConfig& config);

/// Per zeta: generate a cohort, split, fit every method on the training
/// part, rank and label the test part, audit rankings and labels.
std::vector<ResultRow> run_zeta_sweep(const ExperimentConfig& config);

/// Tidy series behind one figure: fig1 (S over alpha), fig2 (S over zeta),
/// fig3 (accuracy over zeta), fig4 (admission ratio over zeta). Values are
/// means over seeds with std deviations.
void emit_figure_data(const std::vector<ResultRow>& rows, const std::string& figure_id,
                      std::ostream& out);

/// JSON manifest (config, version, row count) for a run directory.
void write_manifest(const std::string& path, const ExperimentConfig& config,
                    std::size_t result_rows);

}  // namespace fairrank
