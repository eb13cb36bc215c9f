#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairrank/correlation.hpp"
#include "fairrank/dataset.hpp"
#include "fairrank/importance.hpp"

namespace fairrank {

/// Taxicab distance to the North Star (the all-ones scaled observation):
/// sum(1 - z). Entries must lie in [0, 1].
double distance_plain(std::span<const double> z);

/// Importance-weighted distance: sum(omega * (1 - z)). Callers provide
/// omega with sum(omega) = 1; only the dimension is checked.
double distance_weighted(std::span<const double> z, std::span<const double> omega);

/// Correlation-penalized distance: sum(psi * (1 - z)) with
/// psi = omega * (1 - rho). A feature with psi = 0 cannot move the distance.
double distance_penalized(std::span<const double> z, std::span<const double> psi);

struct RankModelMetadata {
    std::size_t n_fit_rows = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
    /// True when the fit cohort had d''(nu) == d''(nu+1): the cohort
    /// assignment splits a tie that the predictor's <= delta rule does not.
    bool delta_tie_at_cutoff = false;
    double forest_training_accuracy = 0.0;
    double forest_holdout_accuracy = 0.0;
};

/// Fitted artifact: everything needed to rank and classify unseen rows.
/// Immutable after fit; psi is precomputed and frozen so audits and
/// deployment cannot drift apart.
struct RankModel {
    ScalingSpec scaling;
    ImportanceWeights omega;
    PenaltyVector penalty;
    std::vector<double> psi;
    double alpha = 0.0;
    std::size_t cutoff = 0;  // nu = ceil(alpha * N)
    double delta = 0.0;
    RankModelMetadata meta;
};

struct RankedObservation {
    std::string id;
    std::size_t original_index = 0;
    std::vector<double> z;
    double distance = 0.0;
    std::size_t position = 0;  // 1 = smallest distance
    std::optional<Label> outcome;
};

/// Observations sorted by distance, positions 1..N, ties broken by original
/// index (stable sort). When alpha is set, exactly ceil(alpha * N) entries
/// carry the positive outcome.
struct RankedCohort {
    std::vector<RankedObservation> entries;
    std::optional<double> alpha;
    std::size_t admitted = 0;
};

/// ceil(alpha * n) with a guard against floating-point excess (0.1 * 10
/// must give 1, not 2).
std::size_t capacity_cutoff(double alpha, std::size_t n);

/// Build a cohort from per-row ranking keys (smaller = better). Shared by
/// the North-Star ranking and the probability-ranked baselines.
RankedCohort make_ranked_cohort(const std::vector<std::string>& ids, const ScaledMatrix& z,
                                const std::vector<double>& distances,
                                std::optional<double> alpha);

/// Assign the positive outcome to the top ceil(alpha * N) of an existing
/// ranking; alpha in [0, 1].
void assign_top(RankedCohort& cohort, double alpha);

struct FitConfig {
    ForestHyperparams forest;
    ImportanceOptions importance;
};

struct FitResult {
    RankModel model;
    RankedCohort cohort;
};

/// End-to-end fit: scale, learn omega from historical labels, compute the
/// correlation penalties, rank by penalized distance, cut at nu and set the
/// decision threshold delta. When alpha is absent it defaults to the share
/// of positive labels. Labelless or single-class datasets fall back to
/// uniform weights over the non-degenerate features.
FitResult fit(const Dataset& dataset, std::optional<double> alpha, const FitConfig& config,
              std::uint64_t seed);

/// Rank arbitrary raw rows under a fitted model; outcomes are assigned only
/// when alpha is given.
RankedCohort rank(const RankModel& model, const std::vector<std::vector<double>>& raw_rows,
                  const std::vector<std::string>& ids, std::optional<double> alpha);
RankedCohort rank(const RankModel& model, const Dataset& dataset, std::optional<double> alpha);

struct Prediction {
    Label outcome = Label::Negative;
    double distance = 0.0;
};

/// Classify unseen rows: scale with the stored spec (clamped) and admit
/// whenever d'' <= delta.
std::vector<Prediction> predict(const RankModel& model,
                                const std::vector<std::vector<double>>& raw_rows);
std::vector<Prediction> predict(const RankModel& model, const Dataset& dataset);

/// Versioned JSON artifact.
void save_rank_model(const std::string& path, const RankModel& model);
RankModel load_rank_model(const std::string& path);
std::string rank_model_to_json(const RankModel& model);
RankModel rank_model_from_json(const std::string& text);

void write_cohort_csv(std::ostream& out, const RankedCohort& cohort);

}  // namespace fairrank
