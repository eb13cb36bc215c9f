#include "fairrank/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fairrank/rng.hpp"

namespace fairrank {

namespace {

// Lower-triangular Cholesky factor of a symmetric positive-definite 3x3.
std::array<std::array<double, 3>, 3> cholesky3(const std::array<std::array<double, 3>, 3>& m) {
    std::array<std::array<double, 3>, 3> chol{};
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = m[i][j];
            for (std::size_t k = 0; k < j; ++k) sum -= chol[i][k] * chol[j][k];
            if (i == j) {
                if (sum <= 0.0) {
                    throw std::invalid_argument("covariance matrix is not positive definite");
                }
                chol[i][j] = std::sqrt(sum);
            } else {
                chol[i][j] = sum / chol[j][j];
            }
        }
    }
    return chol;
}

double round_to_step(double x, double step) { return std::round(x / step) * step; }

}  // namespace

Dataset sample_cohort(const CohortSpec& spec) {
    if (spec.n == 0) throw std::invalid_argument("sample_cohort: n must be >= 1");
    if (spec.male_share == 0.5 && spec.n % 2 != 0) {
        throw std::invalid_argument("sample_cohort: n must be even for an exact 50/50 split");
    }

    const auto chol_male = cholesky3(spec.sigma_male);
    const auto chol_female = cholesky3(spec.sigma_female);

    ProtectedColumn gender{"gender", ProtectedKind::Categorical, {}, {"male", "female"}};
    LegitimateColumn verbal{"GRE_V", Direction::Up, {}};
    LegitimateColumn quant{"GRE_Q", Direction::Up, {}};
    LegitimateColumn writing{"GRE_AW", Direction::Up, {}};
    gender.values.reserve(spec.n);
    verbal.values.reserve(spec.n);
    quant.values.reserve(spec.n);
    writing.values.reserve(spec.n);

    std::size_t males_so_far = 0;
    for (std::size_t i = 0; i < spec.n; ++i) {
        // proportional assignment, prefix-stable in n
        const auto target = static_cast<std::size_t>(
            std::llround(static_cast<double>(i + 1) * spec.male_share));
        const bool male = target > males_so_far;
        males_so_far += male ? 1 : 0;

        const auto& mu = male ? spec.mu_male : spec.mu_female;
        const auto& chol = male ? chol_male : chol_female;

        Rng rng(derive_seed(spec.seed, "cohort", i));
        const std::array<double, 3> raw{rng.normal(), rng.normal(), rng.normal()};
        std::array<double, 3> score{};
        for (std::size_t r = 0; r < 3; ++r) {
            double v = mu[r];
            for (std::size_t c = 0; c <= r; ++c) v += chol[r][c] * raw[c];
            score[r] = v;
        }

        // round to the official increments first, then truncate to the ranges
        gender.values.push_back(male ? 0.0 : 1.0);
        verbal.values.push_back(
            std::clamp(round_to_step(score[0], 1.0), spec.verbal_quant_min, spec.verbal_quant_max));
        quant.values.push_back(
            std::clamp(round_to_step(score[1], 1.0), spec.verbal_quant_min, spec.verbal_quant_max));
        writing.values.push_back(
            std::clamp(round_to_step(score[2], 0.5), spec.writing_min, spec.writing_max));
    }

    return Dataset::make({}, {std::move(gender)}, {std::move(verbal), std::move(quant), std::move(writing)},
                         std::nullopt);
}

namespace {

struct ScaledCohort {
    std::vector<bool> male;
    ScaledMatrix z;
};

ScaledCohort scale_for_labels(const Dataset& cohort) {
    const auto& gender = cohort.protected_column("gender");
    std::size_t male_index = gender.categories.size();
    for (std::size_t c = 0; c < gender.categories.size(); ++c) {
        if (gender.categories[c] == "male") male_index = c;
    }
    if (male_index == gender.categories.size()) {
        throw std::invalid_argument("cohort has no 'male' category");
    }

    ScaledCohort out;
    out.male.resize(cohort.n_rows());
    for (std::size_t i = 0; i < cohort.n_rows(); ++i) {
        out.male[i] = gender.values[i] == static_cast<double>(male_index);
    }
    // cohort-internal min-max scaling
    out.z = apply_scaling(fit_scaling(cohort), cohort);
    return out;
}

}  // namespace

std::vector<Label> label_running_example(const Dataset& cohort, std::uint64_t seed) {
    const ScaledCohort scaled = scale_for_labels(cohort);
    if (scaled.z.cols() != 3) {
        throw std::invalid_argument("running-example labels need the 3 GRE features");
    }
    std::vector<Label> labels(cohort.n_rows());
    for (std::size_t i = 0; i < cohort.n_rows(); ++i) {
        Rng rng(derive_seed(seed, "labels", i));
        const double eps = rng.uniform(0.0, 0.1);
        const double score = 0.1 * (scaled.male[i] ? 1.0 : 0.0) + 0.2 * scaled.z.at(i, 0) +
                             0.5 * scaled.z.at(i, 1) + 0.2 * scaled.z.at(i, 2) + eps;
        labels[i] = score > 0.5 ? Label::Positive : Label::Negative;
    }
    return labels;
}

std::array<double, 4> zeta_weights(double zeta) {
    if (zeta < 0.0) throw std::invalid_argument("zeta must be >= 0");
    const double denom = zeta + 4.0;
    return {zeta / denom, 1.0 / denom, 2.0 / denom, 1.0 / denom};
}

std::vector<Label> label_zeta(const Dataset& cohort, double zeta, std::uint64_t seed,
                              double noise_sd) {
    const auto weights = zeta_weights(zeta);
    const ScaledCohort scaled = scale_for_labels(cohort);
    if (scaled.z.cols() != 3) {
        throw std::invalid_argument("zeta labels need the 3 GRE features");
    }
    std::vector<Label> labels(cohort.n_rows());
    for (std::size_t i = 0; i < cohort.n_rows(); ++i) {
        Rng rng(derive_seed(seed, "labels", i));
        const double eps = rng.normal(0.0, noise_sd);
        const double r = weights[0] * (scaled.male[i] ? 1.0 : 0.0) + weights[1] * scaled.z.at(i, 0) +
                         weights[2] * scaled.z.at(i, 1) + weights[3] * scaled.z.at(i, 2) + eps;
        labels[i] = r > 0.5 ? Label::Positive : Label::Negative;
    }
    return labels;
}

std::vector<Label> generate_labels(const Dataset& cohort, const LabelGenSpec& spec) {
    if (spec.variant == LabelGenSpec::Variant::RunningExample) {
        return label_running_example(cohort, spec.seed);
    }
    return label_zeta(cohort, spec.zeta, spec.seed, spec.noise_sd);
}

Dataset with_labels(const Dataset& cohort, std::vector<Label> labels) {
    std::vector<std::string> ids;
    if (cohort.has_ids()) ids = cohort.ids();
    return Dataset::make(std::move(ids), cohort.protected_columns(), cohort.legitimate_columns(),
                         std::move(labels));
}

SchemaAnnotation cohort_schema() {
    std::istringstream text(
        "id id\n"
        "gender protected categorical\n"
        "GRE_V legitimate up\n"
        "GRE_Q legitimate up\n"
        "GRE_AW legitimate up\n"
        "Y label\n");
    return parse_schema(text, "cohort-schema");
}

}  // namespace fairrank
