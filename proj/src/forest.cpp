#include "fairrank/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fairrank/rng.hpp"

namespace fairrank {

double DecisionTree::predict(std::span<const double> row) const {
    int node = 0;
    while (nodes[node].feature >= 0) {
        const auto& n = nodes[node];
        node = (row[static_cast<std::size_t>(n.feature)] <= n.threshold) ? n.left : n.right;
    }
    return nodes[node].positive_fraction;
}

namespace {

struct SplitCandidate {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double impurity_decrease = 0.0;
};

double gini(std::size_t positives, std::size_t total) {
    if (total == 0) return 0.0;
    const double p = static_cast<double>(positives) / static_cast<double>(total);
    return 2.0 * p * (1.0 - p);
}

class TreeBuilder {
public:
    TreeBuilder(const ScaledMatrix& z, const std::vector<int>& y, const ForestHyperparams& params,
                std::size_t mtry, Rng& rng)
        : z_(z), y_(y), params_(params), mtry_(mtry), rng_(rng) {}

    DecisionTree build(std::vector<std::size_t> rows) {
        DecisionTree tree;
        grow(tree, std::move(rows), 0);
        return tree;
    }

private:
    // Depth-first, left child first: expansion order is part of the
    // deterministic contract since feature subsets come from the tree stream.
    int grow(DecisionTree& tree, std::vector<std::size_t> rows, int depth) {
        const int node_index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        std::size_t positives = 0;
        for (const std::size_t r : rows) positives += static_cast<std::size_t>(y_[r]);
        tree.nodes[node_index].positive_fraction =
            rows.empty() ? 0.0 : static_cast<double>(positives) / static_cast<double>(rows.size());

        const bool pure = positives == 0 || positives == rows.size();
        if (pure || depth >= params_.max_depth ||
            rows.size() < static_cast<std::size_t>(params_.min_samples_split)) {
            return node_index;
        }

        const SplitCandidate split = best_split(rows, positives);
        if (!split.found) return node_index;

        std::vector<std::size_t> left_rows, right_rows;
        left_rows.reserve(rows.size());
        right_rows.reserve(rows.size());
        for (const std::size_t r : rows) {
            if (z_.at(r, static_cast<std::size_t>(split.feature)) <= split.threshold) {
                left_rows.push_back(r);
            } else {
                right_rows.push_back(r);
            }
        }
        rows.clear();
        rows.shrink_to_fit();

        tree.nodes[node_index].feature = split.feature;
        tree.nodes[node_index].threshold = split.threshold;
        const int left = grow(tree, std::move(left_rows), depth + 1);
        tree.nodes[node_index].left = left;
        const int right = grow(tree, std::move(right_rows), depth + 1);
        tree.nodes[node_index].right = right;
        return node_index;
    }

    SplitCandidate best_split(const std::vector<std::size_t>& rows, std::size_t positives) {
        // draw the feature subset for this node from the tree stream
        std::vector<std::size_t> features(z_.cols());
        std::iota(features.begin(), features.end(), 0);
        for (std::size_t i = 0; i < mtry_ && i + 1 < features.size(); ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng_.below(features.size() - i));
            std::swap(features[i], features[j]);
        }
        features.resize(std::min(mtry_, features.size()));
        std::sort(features.begin(), features.end());  // deterministic tie-break by feature index

        const double parent_impurity = gini(positives, rows.size());
        SplitCandidate best;

        std::vector<std::pair<double, int>> sorted;  // (value, label)
        sorted.reserve(rows.size());
        for (const std::size_t f : features) {
            sorted.clear();
            for (const std::size_t r : rows) sorted.emplace_back(z_.at(r, f), y_[r]);
            std::sort(sorted.begin(), sorted.end());

            std::size_t left_total = 0, left_pos = 0;
            const std::size_t total = sorted.size();
            for (std::size_t i = 0; i + 1 < total; ++i) {
                left_total += 1;
                left_pos += static_cast<std::size_t>(sorted[i].second);
                if (sorted[i].first == sorted[i + 1].first) continue;

                const std::size_t right_total = total - left_total;
                const double weighted =
                    (static_cast<double>(left_total) * gini(left_pos, left_total) +
                     static_cast<double>(right_total) * gini(positives - left_pos, right_total)) /
                    static_cast<double>(total);
                const double decrease = parent_impurity - weighted;
                if (decrease > best.impurity_decrease) {
                    best.found = true;
                    best.feature = static_cast<int>(f);
                    best.threshold = (sorted[i].first + sorted[i + 1].first) / 2.0;
                    best.impurity_decrease = decrease;
                }
            }
        }
        return best;
    }

    const ScaledMatrix& z_;
    const std::vector<int>& y_;
    const ForestHyperparams& params_;
    std::size_t mtry_;
    Rng& rng_;
};

double accuracy_on_rows(const ForestModel& model, const ScaledMatrix& z,
                        const std::vector<int>& y, const std::vector<std::size_t>& rows) {
    if (rows.empty()) return 0.0;
    std::size_t hits = 0;
    for (const std::size_t r : rows) {
        const double p = forest_predict_row(model, z.row(r));
        const int predicted = (p >= 0.5) ? 1 : 0;
        hits += static_cast<std::size_t>(predicted == y[r]);
    }
    return static_cast<double>(hits) / static_cast<double>(rows.size());
}

}  // namespace

ForestModel train_forest(const ScaledMatrix& z, const std::vector<Label>& y,
                         const ForestHyperparams& params, std::uint64_t seed) {
    if (z.rows() != y.size()) {
        throw std::invalid_argument("train_forest: features and labels differ in length");
    }
    if (z.rows() == 0) throw std::invalid_argument("train_forest: no rows");
    if (params.n_trees < 1) throw std::invalid_argument("train_forest: n_trees must be >= 1");

    std::vector<int> labels(y.size());
    std::size_t positives = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        labels[i] = (y[i] == Label::Positive) ? 1 : 0;
        positives += static_cast<std::size_t>(labels[i]);
    }
    if (positives == 0 || positives == y.size()) {
        throw std::invalid_argument("train_forest: labels contain a single class");
    }

    ForestModel model;
    model.params = params;
    model.n_features = z.cols();
    model.seed = seed;

    // internal holdout split for scoring
    std::vector<std::size_t> order(z.rows());
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng(derive_seed(seed, "forest-holdout"));
    split_rng.shuffle(order);

    std::size_t holdout_count =
        static_cast<std::size_t>(params.holdout_fraction * static_cast<double>(z.rows()));
    holdout_count = std::min(holdout_count, z.rows() - 2);

    model.holdout_rows.assign(order.begin(), order.begin() + holdout_count);
    model.train_rows.assign(order.begin() + holdout_count, order.end());

    // keep both classes in the training part: swap rows in from the holdout
    const auto ensure_class = [&](int needed) {
        const bool present = std::any_of(model.train_rows.begin(), model.train_rows.end(),
                                         [&](std::size_t r) { return labels[r] == needed; });
        if (present) return;
        for (std::size_t h = 0; h < model.holdout_rows.size(); ++h) {
            if (labels[model.holdout_rows[h]] == needed) {
                std::swap(model.holdout_rows[h], model.train_rows.front());
                return;
            }
        }
    };
    ensure_class(0);
    ensure_class(1);

    const std::size_t mtry =
        params.max_features > 0
            ? std::min<std::size_t>(static_cast<std::size_t>(params.max_features), z.cols())
            : static_cast<std::size_t>(
                  std::ceil(std::sqrt(static_cast<double>(z.cols()))));

    model.trees.reserve(static_cast<std::size_t>(params.n_trees));
    for (int t = 0; t < params.n_trees; ++t) {
        Rng tree_rng(derive_seed(seed, "tree", static_cast<std::uint64_t>(t)));
        // bootstrap sample of the training rows
        std::vector<std::size_t> sample(model.train_rows.size());
        for (auto& r : sample) {
            r = model.train_rows[static_cast<std::size_t>(tree_rng.below(model.train_rows.size()))];
        }
        TreeBuilder builder(z, labels, params, mtry, tree_rng);
        model.trees.push_back(builder.build(std::move(sample)));
    }

    model.training_accuracy = accuracy_on_rows(model, z, labels, model.train_rows);
    model.holdout_accuracy = model.holdout_rows.empty()
                                 ? model.training_accuracy
                                 : accuracy_on_rows(model, z, labels, model.holdout_rows);
    return model;
}

double forest_predict_row(const ForestModel& model, std::span<const double> row) {
    if (row.size() != model.n_features) {
        throw std::invalid_argument("forest_predict: row width does not match the model");
    }
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += tree.predict(row);
    return sum / static_cast<double>(model.trees.size());
}

std::vector<double> forest_predict(const ForestModel& model, const ScaledMatrix& rows) {
    std::vector<double> out(rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i) out[i] = forest_predict_row(model, rows.row(i));
    return out;
}

}  // namespace fairrank
