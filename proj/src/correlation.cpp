#include "fairrank/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "fairrank/csv.hpp"

namespace fairrank {

std::vector<double> fractional_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // tie run [i, j]: average of 1-based ranks
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> a, std::span<const double> x) {
    if (a.size() != x.size()) {
        throw std::invalid_argument("spearman: samples have different lengths");
    }
    if (a.size() < 2) {
        throw std::invalid_argument("spearman: need at least 2 observations");
    }
    const auto rank_a = fractional_ranks(a);
    const auto rank_x = fractional_ranks(x);
    const std::size_t n = a.size();

    const double mean = (static_cast<double>(n) + 1.0) / 2.0;  // mean of 1..n under any ties
    double cross = 0.0, var_a = 0.0, var_x = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = rank_a[i] - mean;
        const double dx = rank_x[i] - mean;
        cross += da * dx;
        var_a += da * da;
        var_x += dx * dx;
    }
    if (var_a == 0.0 || var_x == 0.0) return 0.0;  // constant sample: no association evidence
    return cross / std::sqrt(var_a * var_x);
}

double correlation_ratio(std::span<const double> categories, std::span<const double> x) {
    if (categories.size() != x.size()) {
        throw std::invalid_argument("correlation_ratio: samples have different lengths");
    }
    if (categories.empty()) {
        throw std::invalid_argument("correlation_ratio: empty sample");
    }
    const std::size_t n = x.size();

    double grand_mean = 0.0;
    for (const double v : x) grand_mean += v;
    grand_mean /= static_cast<double>(n);

    struct Group {
        double sum = 0.0;
        std::size_t count = 0;
    };
    std::map<double, Group> groups;
    for (std::size_t i = 0; i < n; ++i) {
        auto& g = groups[categories[i]];
        g.sum += x[i];
        g.count += 1;
    }

    double between = 0.0;
    for (const auto& [key, g] : groups) {
        const double mean = g.sum / static_cast<double>(g.count);
        between += static_cast<double>(g.count) * (mean - grand_mean) * (mean - grand_mean);
    }
    double total = 0.0;
    for (const double v : x) total += (v - grand_mean) * (v - grand_mean);

    if (total == 0.0) return 0.0;
    return std::sqrt(between / total);
}

std::string to_string(AssociationMethod m) {
    return m == AssociationMethod::Srcc ? "srcc" : "correlation-ratio";
}

PenaltyVector penalty_vector(const Dataset& dataset, const ScaledMatrix& z) {
    if (dataset.n_protected() == 0) {
        throw std::invalid_argument("penalty_vector: dataset has no protected features");
    }
    if (z.rows() != dataset.n_rows() || z.cols() != dataset.n_legitimate()) {
        throw std::invalid_argument("penalty_vector: scaled matrix does not match the dataset");
    }

    const std::size_t num_protected = dataset.n_protected();
    const std::size_t num_legitimate = dataset.n_legitimate();

    PenaltyVector penalty;
    penalty.legitimate_names = dataset.legitimate_names();
    penalty.matrix.assign(num_protected, std::vector<double>(num_legitimate, 0.0));
    penalty.rho.assign(num_legitimate, 0.0);

    std::vector<double> column(dataset.n_rows());
    for (std::size_t k = 0; k < num_protected; ++k) {
        const auto& attr = dataset.protected_columns()[k];
        penalty.protected_names.push_back(attr.name);
        const bool use_eta =
            attr.kind == ProtectedKind::Categorical && attr.categories.size() > 2;
        penalty.methods.push_back(use_eta ? AssociationMethod::CorrelationRatio
                                          : AssociationMethod::Srcc);
        for (std::size_t l = 0; l < num_legitimate; ++l) {
            for (std::size_t i = 0; i < dataset.n_rows(); ++i) column[i] = z.at(i, l);
            const double assoc = use_eta ? correlation_ratio(attr.values, column)
                                         : std::abs(spearman(attr.values, column));
            penalty.matrix[k][l] = assoc;
            penalty.rho[l] = std::max(penalty.rho[l], assoc);
        }
    }
    return penalty;
}

void write_penalty_matrix_csv(std::ostream& out, const PenaltyVector& penalty) {
    std::vector<std::string> header{"protected_feature", "method"};
    for (const auto& name : penalty.legitimate_names) header.push_back(name);

    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < penalty.matrix.size(); ++k) {
        std::vector<std::string> row{penalty.protected_names[k], to_string(penalty.methods[k])};
        for (const double v : penalty.matrix[k]) row.push_back(format_double(v));
        rows.push_back(std::move(row));
    }
    std::vector<std::string> max_row{"max_abs", ""};
    for (const double v : penalty.rho) max_row.push_back(format_double(v));
    rows.push_back(std::move(max_row));
    write_csv(out, header, rows);
}

}  // namespace fairrank
