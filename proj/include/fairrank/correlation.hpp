#pragma once

#include <span>
#include <string>
#include <vector>

#include "fairrank/dataset.hpp"

namespace fairrank {

/// Spearman's rank correlation with fractional (average) ranks for ties.
/// Returns 0 when either sample is constant; throws on length mismatch or
/// fewer than 2 observations.
double spearman(std::span<const double> a, std::span<const double> x);

/// Correlation ratio eta in [0, 1]: inter-category vs total variability of x
/// across the categories in `categories` (equal values = same category).
/// Returns 0 when the total variance is 0. Throws on length mismatch.
double correlation_ratio(std::span<const double> categories, std::span<const double> x);

/// Fractional (average) ranks, 1-based. Exposed for tests.
std::vector<double> fractional_ranks(std::span<const double> values);

enum class AssociationMethod { Srcc, CorrelationRatio };

std::string to_string(AssociationMethod m);

/// Per-feature penalty: the maximum absolute association between a legitimate
/// feature and any protected feature. |SRCC| for numeric, binary, ordinal and
/// two-category protected features; the correlation ratio for non-binary
/// categorical ones. The full K x L matrix is kept for audit export.
struct PenaltyVector {
    std::vector<double> rho;                  // length L, entries in [0, 1]
    std::vector<std::vector<double>> matrix;  // K x L absolute associations
    std::vector<AssociationMethod> methods;   // per protected feature
    std::vector<std::string> protected_names;
    std::vector<std::string> legitimate_names;
};

/// Associations are computed against the scaled features Z. SRCC is invariant
/// under the monotone min-max map, and the sign flip from Down-direction
/// reversal is absorbed by the absolute value.
PenaltyVector penalty_vector(const Dataset& dataset, const ScaledMatrix& z);

void write_penalty_matrix_csv(std::ostream& out, const PenaltyVector& penalty);

}  // namespace fairrank
