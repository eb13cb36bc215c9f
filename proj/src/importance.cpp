#include "fairrank/importance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fairrank/rng.hpp"

namespace fairrank {

ImportanceWeights ImportanceWeights::uniform(std::size_t n_features,
                                             const std::vector<bool>& degenerate) {
    ImportanceWeights w;
    w.omega.assign(n_features, 0.0);
    w.sigma.assign(n_features, 0.0);
    w.fallback_uniform = true;
    std::size_t active = 0;
    for (std::size_t l = 0; l < n_features; ++l) {
        if (degenerate.empty() || !degenerate[l]) ++active;
    }
    if (active == 0) {
        throw std::invalid_argument("importance: every feature is degenerate");
    }
    for (std::size_t l = 0; l < n_features; ++l) {
        if (degenerate.empty() || !degenerate[l]) {
            w.omega[l] = 1.0 / static_cast<double>(active);
        }
    }
    return w;
}

namespace {

double scored_accuracy(const ForestModel& model, const ScaledMatrix& z,
                       const std::vector<Label>& y, const std::vector<std::size_t>& rows) {
    std::size_t hits = 0;
    for (const std::size_t r : rows) {
        const double p = forest_predict_row(model, z.row(r));
        const Label predicted = (p >= 0.5) ? Label::Positive : Label::Negative;
        hits += static_cast<std::size_t>(predicted == y[r]);
    }
    return static_cast<double>(hits) / static_cast<double>(rows.size());
}

}  // namespace

ImportanceWeights permutation_importance(const ForestModel& base, const ScaledMatrix& z,
                                         const std::vector<Label>& y,
                                         const ImportanceOptions& options, std::uint64_t seed,
                                         const std::vector<bool>& degenerate) {
    if (options.n_models < 1 || options.n_permutations < 1) {
        throw std::invalid_argument("permutation_importance: n_models and n_permutations must be >= 1");
    }
    if (base.n_features != z.cols()) {
        throw std::invalid_argument("permutation_importance: model and data feature counts differ");
    }
    if (!options.feature_stream_seeds.empty() &&
        options.feature_stream_seeds.size() != z.cols()) {
        throw std::invalid_argument("permutation_importance: feature_stream_seeds length mismatch");
    }

    const std::size_t n_features = z.cols();
    const auto is_degenerate = [&](std::size_t l) {
        return !degenerate.empty() && degenerate[l];
    };

    // one drop sample per (model, permutation) pair, per feature
    std::vector<std::vector<double>> drops(n_features);
    double accuracy_sum = 0.0;

    for (int m = 0; m < options.n_models; ++m) {
        const ForestModel model =
            train_forest(z, y, base.params, derive_seed(seed, "refit", static_cast<std::uint64_t>(m)));
        accuracy_sum += model.holdout_accuracy;

        const std::vector<std::size_t>& rows =
            (options.score_on_training || model.holdout_rows.empty()) ? model.train_rows
                                                                      : model.holdout_rows;

        // compact copy of the scoring rows so shuffles stay local
        ScaledMatrix scratch(rows.size(), n_features);
        std::vector<Label> scratch_labels(rows.size());
        std::vector<std::size_t> all(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t l = 0; l < n_features; ++l) scratch.at(i, l) = z.at(rows[i], l);
            scratch_labels[i] = y[rows[i]];
            all[i] = i;
        }
        const double baseline = scored_accuracy(model, scratch, scratch_labels, all);

        std::vector<double> original(rows.size());
        std::vector<std::size_t> shuffled(rows.size());
        for (std::size_t l = 0; l < n_features; ++l) {
            const std::uint64_t feature_seed = options.feature_stream_seeds.empty()
                                                   ? derive_seed(seed, "feature", l)
                                                   : options.feature_stream_seeds[l];
            Rng perm_rng(derive_seed(feature_seed, static_cast<std::uint64_t>(m)));
            for (std::size_t i = 0; i < rows.size(); ++i) original[i] = scratch.at(i, l);

            for (int p = 0; p < options.n_permutations; ++p) {
                for (std::size_t i = 0; i < shuffled.size(); ++i) shuffled[i] = i;
                perm_rng.shuffle(shuffled);
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    scratch.at(i, l) = original[shuffled[i]];
                }
                const double permuted = scored_accuracy(model, scratch, scratch_labels, all);
                drops[l].push_back(baseline - permuted);
            }
            for (std::size_t i = 0; i < rows.size(); ++i) scratch.at(i, l) = original[i];
        }
    }

    const double mean_holdout = accuracy_sum / static_cast<double>(options.n_models);
    std::size_t positives = 0;
    for (const Label l : y) positives += (l == Label::Positive) ? 1 : 0;
    const double majority =
        std::max(positives, y.size() - positives) / static_cast<double>(y.size());

    ImportanceWeights result;
    result.mean_holdout_accuracy = mean_holdout;
    result.majority_share = majority;

    if (mean_holdout < majority + options.gate_margin) {
        auto uniform = ImportanceWeights::uniform(n_features, degenerate);
        uniform.mean_holdout_accuracy = mean_holdout;
        uniform.majority_share = majority;
        return uniform;
    }

    std::vector<double> mean_drop(n_features, 0.0);
    std::vector<double> sd_drop(n_features, 0.0);
    for (std::size_t l = 0; l < n_features; ++l) {
        double sum = 0.0;
        for (const double d : drops[l]) sum += d;
        const double mean = sum / static_cast<double>(drops[l].size());
        double var = 0.0;
        for (const double d : drops[l]) var += (d - mean) * (d - mean);
        var /= static_cast<double>(drops[l].size());
        mean_drop[l] = is_degenerate(l) ? 0.0 : std::max(mean, 0.0);
        sd_drop[l] = is_degenerate(l) ? 0.0 : std::sqrt(var);
    }

    double norm = 0.0;
    for (const double d : mean_drop) norm += d;
    if (norm <= 0.0) {
        auto uniform = ImportanceWeights::uniform(n_features, degenerate);
        uniform.mean_holdout_accuracy = mean_holdout;
        uniform.majority_share = majority;
        return uniform;
    }

    result.omega.resize(n_features);
    result.sigma.resize(n_features);
    for (std::size_t l = 0; l < n_features; ++l) {
        result.omega[l] = mean_drop[l] / norm;
        result.sigma[l] = sd_drop[l] / norm;
    }
    return result;
}

ImportanceWeights permutation_importance(const ForestModel& base, const ScaledMatrix& z,
                                         const std::vector<Label>& y, int n_models,
                                         int n_permutations, std::uint64_t seed) {
    ImportanceOptions options;
    options.n_models = n_models;
    options.n_permutations = n_permutations;
    return permutation_importance(base, z, y, options, seed);
}

}  // namespace fairrank
