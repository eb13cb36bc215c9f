#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairrank/dataset.hpp"
#include "fairrank/northstar.hpp"

namespace fairrank {

/// Which columns enter the design matrix: All includes protected features
/// (one-hot for categoricals), Ftu uses the legitimate features only.
enum class FeatureSubset { All, Ftu };

struct LogRegHyperparams {
    double l2 = 1e-3;           // penalty on weights, not the intercept
    double learning_rate = 1.0; // initial step, adapted by backtracking
    int max_iterations = 2000;
    double tolerance = 1e-7;    // max-norm of the gradient
};

/// L2-regularized logistic regression trained by gradient descent on
/// standardized features. The feature subset is recorded so FTU models
/// provably exclude protected columns.
struct LogRegModel {
    FeatureSubset subset = FeatureSubset::All;
    std::vector<std::string> feature_names;  // expanded design columns
    std::vector<double> mean;                // standardization, from training data
    std::vector<double> stddev;              // 0 entries are left unscaled
    std::vector<double> weights;
    double intercept = 0.0;
    bool converged = false;
    int iterations = 0;
    LogRegHyperparams params;
};

/// Expand a dataset into the model's design matrix (row-major). Also used at
/// prediction time so train/predict schemas cannot diverge.
struct DesignMatrix {
    std::vector<std::string> column_names;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

DesignMatrix build_design_matrix(const Dataset& dataset, FeatureSubset subset);

/// Regularized mean negative log-likelihood and its gradient; exposed for
/// finite-difference checks.
double logreg_objective(const DesignMatrix& x, const std::vector<Label>& y,
                        const std::vector<double>& weights, double intercept, double l2);
void logreg_gradient(const DesignMatrix& x, const std::vector<Label>& y,
                     const std::vector<double>& weights, double intercept, double l2,
                     std::vector<double>& grad_weights, double& grad_intercept);

LogRegModel train_logreg(const Dataset& dataset, FeatureSubset subset,
                         const LogRegHyperparams& params, std::uint64_t seed);

/// P(+) per row, in (0, 1).
std::vector<double> logreg_probabilities(const LogRegModel& model, const Dataset& dataset);

/// Rank rows by descending probability (stable tie-break by original index).
/// The cohort's distance column carries 1 - P(+) so the shared CSV format and
/// audits read it as smaller-is-better.
RankedCohort rank_by_probability(const LogRegModel& model, const Dataset& dataset,
                                 const ScaledMatrix& z_for_audit,
                                 std::optional<double> alpha);

/// Assign (+) to the top ceil(alpha * N) of a ranking, alpha in [0, 1].
std::vector<Label> label_top_alpha(const RankedCohort& ranking, double alpha);

}  // namespace fairrank
