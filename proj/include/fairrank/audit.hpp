#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairrank/dataset.hpp"
#include "fairrank/northstar.hpp"

namespace fairrank {

/// Dominance per the declared directions: on scaled features, i is more
/// qualified than j iff z_i >= z_j componentwise and z_i is strictly larger
/// on at least one feature with psi > 0.
bool more_qualified(std::span<const double> z_i, std::span<const double> z_j,
                    std::span<const double> psi);

/// S: share of observations treated unfairly over at least one other.
/// T: number of unfair ordered (victim, beneficiary) pairs.
struct UnfairnessStats {
    double share = 0.0;       // S
    long long total = 0;      // T
    std::size_t n_rows = 0;
    std::size_t victims = 0;
};

/// Ranking-based audit (Definition of unfairness, case a): a pair counts when
/// the more qualified observation sits at a strictly larger distance. Exact
/// distance ties carry no ranking information and are not counted, matching
/// the convention that intra-class order of label-derived rankings is
/// meaningless.
UnfairnessStats unfairness_of_ranking(const RankedCohort& cohort, std::span<const double> psi);

/// Label-based audit (case b): the more qualified observation is assigned
/// (-) while the beneficiary gets (+). Rank information is not consulted.
UnfairnessStats unfairness_of_labels(const std::vector<Label>& outcomes, const ScaledMatrix& z,
                                     std::span<const double> psi);

/// Weighted taxicab similarity between two observations:
/// sum(psi * |z_i - z_j|). Symmetric pseudometric.
double similarity(std::span<const double> z_i, std::span<const double> z_j,
                  std::span<const double> psi);

struct GroupStats {
    struct Entry {
        std::string group;
        std::size_t count = 0;
        std::size_t admitted = 0;
        double rate = 0.0;
    };
    std::vector<Entry> groups;
    std::string numerator_group;
    double numerator_rate = 0.0;
    double other_rate = 0.0;  // pooled rate of the remaining groups
    /// numerator-group rate over the pooled rate of everyone else.
    double ratio = 0.0;
    bool ratio_degenerate = false;  // set when the denominator rate is 0
};

/// Admission rates per group of a protected feature, plus the ratio for a
/// designated (typically disadvantaged) group. Throws when the designated
/// group does not occur.
GroupStats group_stats(const std::vector<Label>& outcomes, const ProtectedColumn& attribute,
                       const std::string& numerator_group);

/// Fraction of agreeing entries; throws on length mismatch.
double accuracy(const std::vector<Label>& outcomes, const std::vector<Label>& reference);

enum class AuditKind { RankingBased, LabelBased };

std::string to_string(AuditKind k);

struct AuditReport {
    AuditKind kind = AuditKind::RankingBased;
    UnfairnessStats unfairness;
    std::optional<double> accuracy_vs_labels;
    std::optional<GroupStats> groups;
    std::optional<double> alpha;
};

std::string audit_report_to_json(const AuditReport& report);
void write_audit_report_csv(std::ostream& out, const std::vector<AuditReport>& reports);

}  // namespace fairrank
