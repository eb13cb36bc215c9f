#pragma once

#include <cstdint>
#include <vector>

#include "fairrank/forest.hpp"

namespace fairrank {

/// Feature-importance weights learned from historical labels.
/// Invariants: omega >= 0, sum(omega) = 1, degenerate features get 0.
struct ImportanceWeights {
    std::vector<double> omega;
    std::vector<double> sigma;  // std dev of the drop estimates, on the omega scale
    bool fallback_uniform = false;
    double mean_holdout_accuracy = 0.0;
    double majority_share = 0.0;

    static ImportanceWeights uniform(std::size_t n_features,
                                     const std::vector<bool>& degenerate = {});
};

struct ImportanceOptions {
    int n_models = 5;        // forest refits
    int n_permutations = 10; // shuffles per feature per refit
    /// Usefulness gate: fall back to uniform weights when the mean holdout
    /// accuracy is below majority share + gate_margin.
    double gate_margin = 0.02;
    /// Score permutation drops on the training rows instead of the holdout.
    bool score_on_training = false;
    /// Test hook: per-feature shuffle streams. Defaults to streams derived
    /// from the seed and the column index.
    std::vector<std::uint64_t> feature_stream_seeds;
};

/// Permutation importance over refitted forests: the drop in accuracy when a
/// feature column is shuffled, averaged over n_models x n_permutations
/// estimates, clipped at 0 and normalized to sum 1.
ImportanceWeights permutation_importance(const ForestModel& base, const ScaledMatrix& z,
                                         const std::vector<Label>& y,
                                         const ImportanceOptions& options, std::uint64_t seed,
                                         const std::vector<bool>& degenerate = {});

/// Spec-shaped convenience overload.
ImportanceWeights permutation_importance(const ForestModel& base, const ScaledMatrix& z,
                                         const std::vector<Label>& y, int n_models,
                                         int n_permutations, std::uint64_t seed);

}  // namespace fairrank
