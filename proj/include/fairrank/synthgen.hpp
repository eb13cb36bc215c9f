#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fairrank/dataset.hpp"

namespace fairrank {

/// Synthetic graduate-admissions cohort: gender-balanced GRE scores drawn
/// from per-gender trivariate Gaussians, rounded to the official score grids
/// and truncated to the official ranges.
struct CohortSpec {
    std::size_t n = 1000;  // must be even for an exact 50/50 split
    double male_share = 0.5;
    std::array<double, 3> mu_male{150.7, 156.1, 3.5};
    std::array<double, 3> mu_female{150.3, 151.2, 3.7};
    std::array<std::array<double, 3>, 3> sigma_male{
        {{81.00, 28.15, 5.43}, {28.15, 84.64, 1.16}, {5.43, 1.16, 0.81}}};
    std::array<std::array<double, 3>, 3> sigma_female{
        {{65.61, 24.51, 4.34}, {24.51, 79.21, 1.00}, {4.34, 1.00, 0.64}}};
    double verbal_quant_min = 130.0;
    double verbal_quant_max = 170.0;
    double writing_min = 0.0;
    double writing_max = 6.0;
    std::uint64_t seed = 0;
};

/// Label generator variants: the running-example rule (uniform noise, fixed
/// male bonus) and the zeta-parameterized score (Gaussian noise, tunable
/// direct discrimination).
struct LabelGenSpec {
    enum class Variant { RunningExample, ZetaScore };
    Variant variant = Variant::RunningExample;
    double zeta = 0.0;       // ZetaScore only
    double noise_sd = 0.1;   // ZetaScore: N(0, noise_sd^2); 0.1 read as std dev
    std::uint64_t seed = 0;
};

/// Unlabeled cohort draw. Per-observation substreams: regenerating with a
/// different n shares the common prefix of rows.
Dataset sample_cohort(const CohortSpec& spec);

/// Historical labels of the running example: positive iff
/// 0.1*male + 0.2*zV + 0.5*zQ + 0.2*zAW + eps > 0.5, eps ~ U(0, 0.1),
/// with features min-max scaled inside the cohort.
std::vector<Label> label_running_example(const Dataset& cohort, std::uint64_t seed);

/// Zeta score labels: positive iff R > 0.5 where
/// R = zeta/(zeta+4)*male + 1/(zeta+4)*zV + 2/(zeta+4)*zQ + 1/(zeta+4)*zAW + eps,
/// eps ~ N(0, noise_sd^2). zeta >= 0.
std::vector<Label> label_zeta(const Dataset& cohort, double zeta, std::uint64_t seed,
                              double noise_sd = 0.1);

std::vector<Label> generate_labels(const Dataset& cohort, const LabelGenSpec& spec);

/// Weights of the zeta score in feature order (male, V, Q, AW); they sum to 1.
std::array<double, 4> zeta_weights(double zeta);

Dataset with_labels(const Dataset& cohort, std::vector<Label> labels);

/// Schema annotation matching the emitted cohort CSV.
SchemaAnnotation cohort_schema();

}  // namespace fairrank
