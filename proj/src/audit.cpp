#include "fairrank/audit.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "fairrank/csv.hpp"

namespace fairrank {

bool more_qualified(std::span<const double> z_i, std::span<const double> z_j,
                    std::span<const double> psi) {
    if (z_i.size() != z_j.size() || z_i.size() != psi.size()) {
        throw std::invalid_argument("more_qualified: dimension mismatch");
    }
    bool strict_on_effective = false;
    for (std::size_t l = 0; l < z_i.size(); ++l) {
        if (z_i[l] < z_j[l]) return false;
        if (z_i[l] > z_j[l] && psi[l] > 0.0) strict_on_effective = true;
    }
    return strict_on_effective;
}

UnfairnessStats unfairness_of_ranking(const RankedCohort& cohort, std::span<const double> psi) {
    const auto& entries = cohort.entries;
    UnfairnessStats stats;
    stats.n_rows = entries.size();
    if (entries.empty()) return stats;

    for (std::size_t i = 0; i < entries.size(); ++i) {
        bool victim = false;
        for (std::size_t j = 0; j < entries.size(); ++j) {
            if (i == j) continue;
            // entries are distance-sorted; only strictly better-ranked j can harm i
            if (!(entries[i].distance > entries[j].distance)) continue;
            if (more_qualified(entries[i].z, entries[j].z, psi)) {
                stats.total += 1;
                victim = true;
            }
        }
        stats.victims += victim ? 1 : 0;
    }
    stats.share = static_cast<double>(stats.victims) / static_cast<double>(entries.size());
    return stats;
}

UnfairnessStats unfairness_of_labels(const std::vector<Label>& outcomes, const ScaledMatrix& z,
                                     std::span<const double> psi) {
    if (outcomes.size() != z.rows()) {
        throw std::invalid_argument("unfairness_of_labels: outcomes and features must align");
    }
    UnfairnessStats stats;
    stats.n_rows = outcomes.size();
    if (outcomes.empty()) return stats;

    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i] == Label::Positive) continue;  // only (-) rows can be victims
        bool victim = false;
        for (std::size_t j = 0; j < outcomes.size(); ++j) {
            if (outcomes[j] == Label::Negative) continue;
            if (more_qualified(z.row(i), z.row(j), psi)) {
                stats.total += 1;
                victim = true;
            }
        }
        stats.victims += victim ? 1 : 0;
    }
    stats.share = static_cast<double>(stats.victims) / static_cast<double>(outcomes.size());
    return stats;
}

double similarity(std::span<const double> z_i, std::span<const double> z_j,
                  std::span<const double> psi) {
    if (z_i.size() != z_j.size() || z_i.size() != psi.size()) {
        throw std::invalid_argument("similarity: dimension mismatch");
    }
    double d = 0.0;
    for (std::size_t l = 0; l < z_i.size(); ++l) d += psi[l] * std::abs(z_i[l] - z_j[l]);
    return d;
}

GroupStats group_stats(const std::vector<Label>& outcomes, const ProtectedColumn& attribute,
                       const std::string& numerator_group) {
    if (outcomes.size() != attribute.values.size()) {
        throw std::invalid_argument("group_stats: outcomes and attribute must align");
    }

    const auto group_name = [&](std::size_t row) -> std::string {
        if (attribute.kind == ProtectedKind::Categorical) {
            return attribute.categories[static_cast<std::size_t>(attribute.values[row])];
        }
        return format_double(attribute.values[row]);
    };

    GroupStats stats;
    stats.numerator_group = numerator_group;
    const auto find_group = [&](const std::string& name) -> GroupStats::Entry& {
        for (auto& g : stats.groups) {
            if (g.group == name) return g;
        }
        stats.groups.push_back(GroupStats::Entry{name, 0, 0, 0.0});
        return stats.groups.back();
    };

    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        auto& g = find_group(group_name(i));
        g.count += 1;
        g.admitted += (outcomes[i] == Label::Positive) ? 1 : 0;
    }
    for (auto& g : stats.groups) {
        g.rate = static_cast<double>(g.admitted) / static_cast<double>(g.count);
    }

    std::size_t numerator_count = 0, numerator_admitted = 0;
    std::size_t other_count = 0, other_admitted = 0;
    bool found = false;
    for (const auto& g : stats.groups) {
        if (g.group == numerator_group) {
            found = true;
            numerator_count = g.count;
            numerator_admitted = g.admitted;
        } else {
            other_count += g.count;
            other_admitted += g.admitted;
        }
    }
    if (!found) {
        throw std::invalid_argument("group_stats: unknown group label '" + numerator_group + "'");
    }

    stats.numerator_rate =
        static_cast<double>(numerator_admitted) / static_cast<double>(numerator_count);
    stats.other_rate = other_count == 0 ? 0.0
                                        : static_cast<double>(other_admitted) /
                                              static_cast<double>(other_count);
    if (stats.other_rate == 0.0) {
        stats.ratio = 0.0;
        stats.ratio_degenerate = true;
    } else {
        stats.ratio = stats.numerator_rate / stats.other_rate;
        stats.ratio_degenerate = false;
    }
    return stats;
}

double accuracy(const std::vector<Label>& outcomes, const std::vector<Label>& reference) {
    if (outcomes.size() != reference.size()) {
        throw std::invalid_argument("accuracy: length mismatch");
    }
    if (outcomes.empty()) throw std::invalid_argument("accuracy: empty vectors");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        hits += (outcomes[i] == reference[i]) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

std::string to_string(AuditKind k) {
    return k == AuditKind::RankingBased ? "ranking-based" : "label-based";
}

std::string audit_report_to_json(const AuditReport& report) {
    nlohmann::json j;
    j["method"] = to_string(report.kind);
    j["s"] = report.unfairness.share;
    j["t"] = report.unfairness.total;
    j["victims"] = report.unfairness.victims;
    j["n"] = report.unfairness.n_rows;
    if (report.accuracy_vs_labels) j["accuracy"] = *report.accuracy_vs_labels;
    if (report.alpha) j["alpha"] = *report.alpha;
    if (report.groups) {
        nlohmann::json groups = nlohmann::json::array();
        for (const auto& g : report.groups->groups) {
            groups.push_back({{"group", g.group},
                              {"count", g.count},
                              {"admitted", g.admitted},
                              {"rate", g.rate}});
        }
        j["groups"] = std::move(groups);
        j["ratio"] = report.groups->ratio;
        j["ratio_numerator_group"] = report.groups->numerator_group;
        j["ratio_degenerate"] = report.groups->ratio_degenerate;
    }
    return j.dump(2);
}

void write_audit_report_csv(std::ostream& out, const std::vector<AuditReport>& reports) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : reports) {
        rows.push_back({to_string(r.kind), format_double(r.unfairness.share),
                        std::to_string(r.unfairness.total),
                        std::to_string(r.unfairness.victims), std::to_string(r.unfairness.n_rows),
                        r.accuracy_vs_labels ? format_double(*r.accuracy_vs_labels) : "",
                        r.alpha ? format_double(*r.alpha) : "",
                        r.groups ? format_double(r.groups->ratio) : ""});
    }
    write_csv(out, {"audit", "s", "t", "victims", "n", "accuracy", "alpha", "group_ratio"}, rows);
}

}  // namespace fairrank
