#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fairrank/dataset.hpp"

namespace fairrank {

struct ForestHyperparams {
    int n_trees = 100;
    int max_depth = 8;
    int min_samples_split = 2;
    /// Features considered per split; 0 means ceil(sqrt(L)).
    int max_features = 0;
    /// Share of rows held out inside train_forest for scoring.
    double holdout_fraction = 0.25;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double positive_fraction = 0.0;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
    double predict(std::span<const double> row) const;
};

/// Bagged ensemble of Gini decision trees over the scaled features. Tree
/// votes are leaf positive-class fractions; the ensemble prediction is their
/// mean, read as P(+).
struct ForestModel {
    ForestHyperparams params;
    std::vector<DecisionTree> trees;
    std::size_t n_features = 0;
    std::uint64_t seed = 0;
    double training_accuracy = 0.0;
    double holdout_accuracy = 0.0;
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> holdout_rows;  // empty when the holdout rounds to zero rows
};

/// Trains on an internal train/holdout partition of (z, y), deterministic
/// under seed. Throws when y has a single class. When the holdout is empty
/// the reported holdout accuracy equals the training accuracy.
ForestModel train_forest(const ScaledMatrix& z, const std::vector<Label>& y,
                         const ForestHyperparams& params, std::uint64_t seed);

/// Mean of tree votes per row, each in [0, 1]. Throws on width mismatch.
std::vector<double> forest_predict(const ForestModel& model, const ScaledMatrix& rows);

double forest_predict_row(const ForestModel& model, std::span<const double> row);

}  // namespace fairrank
