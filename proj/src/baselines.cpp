#include "fairrank/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fairrank {

DesignMatrix build_design_matrix(const Dataset& dataset, FeatureSubset subset) {
    DesignMatrix design;
    design.rows = dataset.n_rows();

    struct Source {
        enum class Kind { Legitimate, ProtectedValue, OneHot } kind;
        std::size_t column;
        std::size_t category;
    };
    std::vector<Source> sources;

    for (std::size_t l = 0; l < dataset.n_legitimate(); ++l) {
        design.column_names.push_back(dataset.legitimate_columns()[l].name);
        sources.push_back({Source::Kind::Legitimate, l, 0});
    }
    if (subset == FeatureSubset::All) {
        for (std::size_t k = 0; k < dataset.n_protected(); ++k) {
            const auto& col = dataset.protected_columns()[k];
            if (col.kind == ProtectedKind::Categorical) {
                for (std::size_t c = 0; c < col.categories.size(); ++c) {
                    design.column_names.push_back(col.name + "=" + col.categories[c]);
                    sources.push_back({Source::Kind::OneHot, k, c});
                }
            } else {
                design.column_names.push_back(col.name);
                sources.push_back({Source::Kind::ProtectedValue, k, 0});
            }
        }
    }

    design.cols = design.column_names.size();
    design.values.resize(design.rows * design.cols);
    for (std::size_t i = 0; i < design.rows; ++i) {
        for (std::size_t c = 0; c < design.cols; ++c) {
            const Source& s = sources[c];
            double v = 0.0;
            switch (s.kind) {
                case Source::Kind::Legitimate:
                    v = dataset.legitimate_columns()[s.column].values[i];
                    break;
                case Source::Kind::ProtectedValue:
                    v = dataset.protected_columns()[s.column].values[i];
                    break;
                case Source::Kind::OneHot:
                    v = dataset.protected_columns()[s.column].values[i] ==
                                static_cast<double>(s.category)
                            ? 1.0
                            : 0.0;
                    break;
            }
            design.values[i * design.cols + c] = v;
        }
    }
    return design;
}

namespace {

double sigmoid(double t) {
    if (t >= 0.0) {
        const double e = std::exp(-t);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double linear_score(const DesignMatrix& x, std::size_t row, const std::vector<double>& weights,
                    double intercept) {
    double t = intercept;
    for (std::size_t c = 0; c < x.cols; ++c) t += weights[c] * x.at(row, c);
    return t;
}

DesignMatrix standardized(const DesignMatrix& x, const std::vector<double>& mean,
                          const std::vector<double>& stddev) {
    DesignMatrix out = x;
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t c = 0; c < x.cols; ++c) {
            const double sd = stddev[c];
            out.values[i * x.cols + c] = sd > 0.0 ? (x.at(i, c) - mean[c]) / sd : 0.0;
        }
    }
    return out;
}

}  // namespace

double logreg_objective(const DesignMatrix& x, const std::vector<Label>& y,
                        const std::vector<double>& weights, double intercept, double l2) {
    double loss = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double t = linear_score(x, i, weights, intercept);
        // -log p(y|t) in a softplus form, stable for large |t|
        const double target = (y[i] == Label::Positive) ? 1.0 : 0.0;
        const double margin = target > 0.5 ? t : -t;
        loss += margin >= 0.0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
    }
    loss /= static_cast<double>(x.rows);
    double penalty = 0.0;
    for (const double w : weights) penalty += w * w;
    return loss + 0.5 * l2 * penalty;
}

void logreg_gradient(const DesignMatrix& x, const std::vector<Label>& y,
                     const std::vector<double>& weights, double intercept, double l2,
                     std::vector<double>& grad_weights, double& grad_intercept) {
    grad_weights.assign(x.cols, 0.0);
    grad_intercept = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double p = sigmoid(linear_score(x, i, weights, intercept));
        const double target = (y[i] == Label::Positive) ? 1.0 : 0.0;
        const double residual = p - target;
        for (std::size_t c = 0; c < x.cols; ++c) grad_weights[c] += residual * x.at(i, c);
        grad_intercept += residual;
    }
    const double inv_n = 1.0 / static_cast<double>(x.rows);
    for (std::size_t c = 0; c < x.cols; ++c) {
        grad_weights[c] = grad_weights[c] * inv_n + l2 * weights[c];
    }
    grad_intercept *= inv_n;
}

LogRegModel train_logreg(const Dataset& dataset, FeatureSubset subset,
                         const LogRegHyperparams& params, std::uint64_t seed) {
    (void)seed;  // zero-initialized descent is already deterministic
    if (dataset.n_rows() == 0) throw std::invalid_argument("train_logreg: empty dataset");
    const auto& y = dataset.labels();
    std::size_t positives = 0;
    for (const Label l : y) positives += (l == Label::Positive) ? 1 : 0;
    if (positives == 0 || positives == y.size()) {
        throw std::invalid_argument("train_logreg: labels contain a single class");
    }

    const DesignMatrix raw = build_design_matrix(dataset, subset);
    if (raw.cols == 0) throw std::invalid_argument("train_logreg: empty feature subset");

    LogRegModel model;
    model.subset = subset;
    model.feature_names = raw.column_names;
    model.params = params;
    model.mean.assign(raw.cols, 0.0);
    model.stddev.assign(raw.cols, 0.0);
    for (std::size_t c = 0; c < raw.cols; ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < raw.rows; ++i) sum += raw.at(i, c);
        model.mean[c] = sum / static_cast<double>(raw.rows);
        double var = 0.0;
        for (std::size_t i = 0; i < raw.rows; ++i) {
            const double d = raw.at(i, c) - model.mean[c];
            var += d * d;
        }
        model.stddev[c] = std::sqrt(var / static_cast<double>(raw.rows));
    }

    const DesignMatrix x = standardized(raw, model.mean, model.stddev);

    model.weights.assign(x.cols, 0.0);
    model.intercept = 0.0;

    std::vector<double> grad(x.cols, 0.0);
    double grad_intercept = 0.0;
    double step = params.learning_rate;
    double objective = logreg_objective(x, y, model.weights, model.intercept, params.l2);

    std::vector<double> trial(x.cols, 0.0);
    for (int it = 0; it < params.max_iterations; ++it) {
        model.iterations = it + 1;
        logreg_gradient(x, y, model.weights, model.intercept, params.l2, grad, grad_intercept);

        double max_grad = std::abs(grad_intercept);
        for (const double g : grad) max_grad = std::max(max_grad, std::abs(g));
        if (max_grad < params.tolerance) {
            model.converged = true;
            break;
        }

        // backtracking on the objective keeps the fixed-rate descent stable
        double trial_intercept = 0.0;
        double trial_objective = 0.0;
        while (true) {
            for (std::size_t c = 0; c < x.cols; ++c) trial[c] = model.weights[c] - step * grad[c];
            trial_intercept = model.intercept - step * grad_intercept;
            trial_objective = logreg_objective(x, y, trial, trial_intercept, params.l2);
            if (trial_objective <= objective || step < 1e-12) break;
            step /= 2.0;
        }
        model.weights = trial;
        model.intercept = trial_intercept;
        objective = trial_objective;
        step = std::min(step * 1.1, params.learning_rate * 8.0);
    }
    return model;
}

std::vector<double> logreg_probabilities(const LogRegModel& model, const Dataset& dataset) {
    const DesignMatrix raw = build_design_matrix(dataset, model.subset);
    if (raw.column_names != model.feature_names) {
        throw std::invalid_argument("logreg_probabilities: dataset schema does not match the model");
    }
    const DesignMatrix x = standardized(raw, model.mean, model.stddev);
    std::vector<double> p(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        p[i] = sigmoid(linear_score(x, i, model.weights, model.intercept));
    }
    return p;
}

RankedCohort rank_by_probability(const LogRegModel& model, const Dataset& dataset,
                                 const ScaledMatrix& z_for_audit, std::optional<double> alpha) {
    const std::vector<double> p = logreg_probabilities(model, dataset);
    std::vector<double> pseudo_distance(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) pseudo_distance[i] = 1.0 - p[i];
    std::vector<std::string> ids(dataset.n_rows());
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) ids[i] = dataset.id_of(i);
    return make_ranked_cohort(ids, z_for_audit, pseudo_distance, alpha);
}

std::vector<Label> label_top_alpha(const RankedCohort& ranking, double alpha) {
    const std::size_t nu = capacity_cutoff(alpha, ranking.entries.size());
    std::vector<Label> outcomes(ranking.entries.size(), Label::Negative);
    for (std::size_t pos = 0; pos < nu; ++pos) {
        outcomes[ranking.entries[pos].original_index] = Label::Positive;
    }
    return outcomes;
}

}  // namespace fairrank
