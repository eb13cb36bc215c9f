#include "fairrank/northstar.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fairrank/csv.hpp"
#include "fairrank/rng.hpp"

namespace fairrank {

double distance_plain(std::span<const double> z) {
    double d = 0.0;
    for (const double v : z) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("distance_plain: entry " + format_double(v) +
                                        " outside [0, 1]");
        }
        d += 1.0 - v;
    }
    return d;
}

double distance_weighted(std::span<const double> z, std::span<const double> omega) {
    if (z.size() != omega.size()) {
        throw std::invalid_argument("distance_weighted: dimension mismatch");
    }
    double d = 0.0;
    for (std::size_t l = 0; l < z.size(); ++l) d += omega[l] * (1.0 - z[l]);
    return d;
}

double distance_penalized(std::span<const double> z, std::span<const double> psi) {
    if (z.size() != psi.size()) {
        throw std::invalid_argument("distance_penalized: dimension mismatch");
    }
    double d = 0.0;
    for (std::size_t l = 0; l < z.size(); ++l) d += psi[l] * (1.0 - z[l]);
    return d;
}

std::size_t capacity_cutoff(double alpha, std::size_t n) {
    if (alpha < 0.0 || alpha > 1.0) {
        throw std::invalid_argument("alpha must lie in [0, 1]");
    }
    if (alpha == 0.0 || n == 0) return 0;
    // guard: products like 0.1 * 10 overshoot the integer by one ulp
    const double product = alpha * static_cast<double>(n);
    auto nu = static_cast<std::size_t>(std::ceil(product - 1e-9));
    nu = std::max<std::size_t>(nu, 1);
    return std::min(nu, n);
}

RankedCohort make_ranked_cohort(const std::vector<std::string>& ids, const ScaledMatrix& z,
                                const std::vector<double>& distances,
                                std::optional<double> alpha) {
    if (ids.size() != z.rows() || distances.size() != z.rows()) {
        throw std::invalid_argument("make_ranked_cohort: ids, features and distances must align");
    }
    const std::size_t n = z.rows();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // stable: ties keep original-index order
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return distances[a] < distances[b]; });

    RankedCohort cohort;
    cohort.entries.reserve(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
        const std::size_t r = order[pos];
        RankedObservation obs;
        obs.id = ids[r];
        obs.original_index = r;
        obs.z.assign(z.row(r).begin(), z.row(r).end());
        obs.distance = distances[r];
        obs.position = pos + 1;
        cohort.entries.push_back(std::move(obs));
    }
    if (alpha) assign_top(cohort, *alpha);
    return cohort;
}

void assign_top(RankedCohort& cohort, double alpha) {
    const std::size_t nu = capacity_cutoff(alpha, cohort.entries.size());
    for (std::size_t pos = 0; pos < cohort.entries.size(); ++pos) {
        cohort.entries[pos].outcome = (pos < nu) ? Label::Positive : Label::Negative;
    }
    cohort.alpha = alpha;
    cohort.admitted = nu;
}

namespace {

std::vector<double> penalized_distances(const RankModel& model, const ScaledMatrix& z) {
    std::vector<double> d(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) d[i] = distance_penalized(z.row(i), model.psi);
    return d;
}

std::vector<std::string> default_ids(const Dataset& dataset) {
    std::vector<std::string> ids(dataset.n_rows());
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) ids[i] = dataset.id_of(i);
    return ids;
}

std::uint64_t hash_fit_config(const FitConfig& config) {
    std::ostringstream text;
    text << config.forest.n_trees << '|' << config.forest.max_depth << '|'
         << config.forest.min_samples_split << '|' << config.forest.max_features << '|'
         << config.forest.holdout_fraction << '|' << config.importance.n_models << '|'
         << config.importance.n_permutations << '|' << config.importance.gate_margin << '|'
         << config.importance.score_on_training;
    return detail::fnv1a64(text.str());
}

std::string to_hex(std::uint64_t value) {
    static const char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

}  // namespace

FitResult fit(const Dataset& dataset, std::optional<double> alpha, const FitConfig& config,
              std::uint64_t seed) {
    if (dataset.n_rows() == 0) throw std::invalid_argument("fit: dataset is empty");
    if (alpha && (*alpha <= 0.0 || *alpha >= 1.0)) {
        throw std::invalid_argument("fit: alpha must lie in (0, 1)");
    }
    if (!alpha && !dataset.has_labels()) {
        throw std::invalid_argument("fit: need either alpha or labels to set the capacity");
    }

    RankModel model;
    model.scaling = fit_scaling(dataset);
    const ScaledMatrix z = apply_scaling(model.scaling, dataset);

    std::vector<bool> degenerate(model.scaling.size());
    for (std::size_t l = 0; l < model.scaling.size(); ++l) {
        degenerate[l] = model.scaling.features[l].degenerate;
    }

    bool trainable = dataset.has_labels();
    if (trainable) {
        const double share = dataset.positive_share();
        trainable = share > 0.0 && share < 1.0;
    }
    if (trainable) {
        const ForestModel forest =
            train_forest(z, dataset.labels(), config.forest, derive_seed(seed, "forest"));
        model.meta.forest_training_accuracy = forest.training_accuracy;
        model.meta.forest_holdout_accuracy = forest.holdout_accuracy;
        model.omega = permutation_importance(forest, z, dataset.labels(), config.importance,
                                             derive_seed(seed, "importance"), degenerate);
    } else {
        // no usable historical labels: every non-degenerate feature weighs the same
        model.omega = ImportanceWeights::uniform(model.scaling.size(), degenerate);
    }

    model.penalty = penalty_vector(dataset, z);

    model.psi.resize(model.scaling.size());
    for (std::size_t l = 0; l < model.psi.size(); ++l) {
        model.psi[l] = model.omega.omega[l] * (1.0 - model.penalty.rho[l]);
    }

    model.alpha = alpha ? *alpha : dataset.positive_share();
    if (model.alpha <= 0.0 || model.alpha >= 1.0) {
        throw std::invalid_argument("fit: derived alpha " + format_double(model.alpha) +
                                    " lies outside (0, 1); supply alpha explicitly");
    }

    RankedCohort cohort = make_ranked_cohort(default_ids(dataset), z, penalized_distances(model, z),
                                             model.alpha);

    const std::size_t nu = cohort.admitted;
    model.cutoff = nu;
    if (nu < cohort.entries.size()) {
        model.delta =
            (cohort.entries[nu - 1].distance + cohort.entries[nu].distance) / 2.0;
        model.meta.delta_tie_at_cutoff =
            cohort.entries[nu - 1].distance == cohort.entries[nu].distance;
    } else {
        // alpha rounded up to the whole cohort: no observation nu+1 exists
        model.delta = cohort.entries[nu - 1].distance;
        model.meta.delta_tie_at_cutoff = false;
    }

    model.meta.n_fit_rows = dataset.n_rows();
    model.meta.seed = seed;
    model.meta.config_hash = to_hex(hash_fit_config(config));

    return FitResult{std::move(model), std::move(cohort)};
}

RankedCohort rank(const RankModel& model, const std::vector<std::vector<double>>& raw_rows,
                  const std::vector<std::string>& ids, std::optional<double> alpha) {
    const ScaledMatrix z = apply_scaling(model.scaling, raw_rows);
    std::vector<std::string> row_ids = ids;
    if (row_ids.empty()) {
        row_ids.resize(raw_rows.size());
        for (std::size_t i = 0; i < raw_rows.size(); ++i) row_ids[i] = std::to_string(i + 1);
    }
    return make_ranked_cohort(row_ids, z, penalized_distances(model, z), alpha);
}

RankedCohort rank(const RankModel& model, const Dataset& dataset, std::optional<double> alpha) {
    const ScaledMatrix z = apply_scaling(model.scaling, dataset);
    return make_ranked_cohort(default_ids(dataset), z, penalized_distances(model, z), alpha);
}

std::vector<Prediction> predict(const RankModel& model,
                                const std::vector<std::vector<double>>& raw_rows) {
    const ScaledMatrix z = apply_scaling(model.scaling, raw_rows);
    std::vector<Prediction> out(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const double d = distance_penalized(z.row(i), model.psi);
        out[i] = Prediction{d <= model.delta ? Label::Positive : Label::Negative, d};
    }
    return out;
}

std::vector<Prediction> predict(const RankModel& model, const Dataset& dataset) {
    const ScaledMatrix z = apply_scaling(model.scaling, dataset);
    std::vector<Prediction> out(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const double d = distance_penalized(z.row(i), model.psi);
        out[i] = Prediction{d <= model.delta ? Label::Positive : Label::Negative, d};
    }
    return out;
}

namespace {

constexpr int kModelFormatVersion = 1;

}  // namespace

std::string rank_model_to_json(const RankModel& model) {
    nlohmann::json j;
    j["format"] = "fairrank-model";
    j["version"] = kModelFormatVersion;
    j["alpha"] = model.alpha;
    j["cutoff"] = model.cutoff;
    j["delta"] = model.delta;

    nlohmann::json scaling = nlohmann::json::array();
    for (const auto& f : model.scaling.features) {
        scaling.push_back({{"name", f.name},
                           {"min", f.min},
                           {"max", f.max},
                           {"direction", to_string(f.direction)},
                           {"degenerate", f.degenerate}});
    }
    j["scaling"] = std::move(scaling);

    j["omega"] = model.omega.omega;
    j["sigma"] = model.omega.sigma;
    j["omega_fallback_uniform"] = model.omega.fallback_uniform;
    j["psi"] = model.psi;

    nlohmann::json penalty;
    penalty["rho"] = model.penalty.rho;
    penalty["matrix"] = model.penalty.matrix;
    penalty["protected"] = model.penalty.protected_names;
    penalty["legitimate"] = model.penalty.legitimate_names;
    nlohmann::json methods = nlohmann::json::array();
    for (const auto m : model.penalty.methods) methods.push_back(to_string(m));
    penalty["methods"] = std::move(methods);
    j["penalty"] = std::move(penalty);

    j["metadata"] = {{"n_fit_rows", model.meta.n_fit_rows},
                     {"seed", model.meta.seed},
                     {"config_hash", model.meta.config_hash},
                     {"delta_tie_at_cutoff", model.meta.delta_tie_at_cutoff},
                     {"forest_training_accuracy", model.meta.forest_training_accuracy},
                     {"forest_holdout_accuracy", model.meta.forest_holdout_accuracy}};
    return j.dump(2);
}

RankModel rank_model_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("format", "") != "fairrank-model") {
        throw std::runtime_error("not a fairrank model artifact");
    }
    if (j.value("version", -1) != kModelFormatVersion) {
        throw std::runtime_error("unsupported model artifact version");
    }
    RankModel model;
    model.alpha = j.at("alpha").get<double>();
    model.cutoff = j.at("cutoff").get<std::size_t>();
    model.delta = j.at("delta").get<double>();

    for (const auto& f : j.at("scaling")) {
        FeatureScaling s;
        s.name = f.at("name").get<std::string>();
        s.min = f.at("min").get<double>();
        s.max = f.at("max").get<double>();
        s.direction = direction_from_string(f.at("direction").get<std::string>());
        s.degenerate = f.at("degenerate").get<bool>();
        model.scaling.features.push_back(std::move(s));
    }

    model.omega.omega = j.at("omega").get<std::vector<double>>();
    model.omega.sigma = j.at("sigma").get<std::vector<double>>();
    model.omega.fallback_uniform = j.at("omega_fallback_uniform").get<bool>();
    model.psi = j.at("psi").get<std::vector<double>>();

    const auto& penalty = j.at("penalty");
    model.penalty.rho = penalty.at("rho").get<std::vector<double>>();
    model.penalty.matrix = penalty.at("matrix").get<std::vector<std::vector<double>>>();
    model.penalty.protected_names = penalty.at("protected").get<std::vector<std::string>>();
    model.penalty.legitimate_names = penalty.at("legitimate").get<std::vector<std::string>>();
    for (const auto& m : penalty.at("methods")) {
        model.penalty.methods.push_back(m.get<std::string>() == "srcc"
                                            ? AssociationMethod::Srcc
                                            : AssociationMethod::CorrelationRatio);
    }

    const auto& meta = j.at("metadata");
    model.meta.n_fit_rows = meta.at("n_fit_rows").get<std::size_t>();
    model.meta.seed = meta.at("seed").get<std::uint64_t>();
    model.meta.config_hash = meta.at("config_hash").get<std::string>();
    model.meta.delta_tie_at_cutoff = meta.at("delta_tie_at_cutoff").get<bool>();
    model.meta.forest_training_accuracy = meta.value("forest_training_accuracy", 0.0);
    model.meta.forest_holdout_accuracy = meta.value("forest_holdout_accuracy", 0.0);
    return model;
}

void save_rank_model(const std::string& path, const RankModel& model) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << rank_model_to_json(model) << '\n';
}

RankModel load_rank_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return rank_model_from_json(buffer.str());
}

void write_cohort_csv(std::ostream& out, const RankedCohort& cohort) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(cohort.entries.size());
    for (const auto& e : cohort.entries) {
        rows.push_back({e.id, format_double(e.distance), std::to_string(e.position),
                        e.outcome ? to_string(*e.outcome) : std::string()});
    }
    write_csv(out, {"id", "distance", "rank", "outcome"}, rows);
}

}  // namespace fairrank
