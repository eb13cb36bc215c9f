#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "fairrank/correlation.hpp"
#include "fairrank/rng.hpp"

using namespace fairrank;

namespace {

// Textbook oracle for tie-free data: 1 - 6*sum(d^2) / (n(n^2-1)).
double spearman_rank_formula(const std::vector<double>& a, const std::vector<double>& x) {
    const auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
        std::vector<double> r(v.size());
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            r[order[pos]] = static_cast<double>(pos + 1);
        }
        return r;
    };
    const auto ra = ranks(a);
    const auto rx = ranks(x);
    const double n = static_cast<double>(a.size());
    double sum_d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum_d2 += (ra[i] - rx[i]) * (ra[i] - rx[i]);
    // 1 - 6*sum(d^2)/D written over the common denominator: a single exact
    // division, so the oracle and the covariance route round identically
    const double denom = n * (n * n - 1.0);
    return (denom - 6.0 * sum_d2) / denom;
}

}  // namespace

TEST_CASE("spearman hits +/-1 on perfect monotone relationships") {
    const std::vector<double> a{1, 2, 3, 4, 5};
    std::vector<double> x;
    for (const double v : a) x.push_back(std::exp(v));  // increasing, nonlinear
    CHECK(spearman(a, x) == doctest::Approx(1.0));
    for (auto& v : x) v = -v;
    CHECK(spearman(a, x) == doctest::Approx(-1.0));
}

TEST_CASE("spearman of a constant sample is zero") {
    const std::vector<double> a{1, 2, 3};
    const std::vector<double> x{7, 7, 7};
    CHECK(spearman(a, x) == 0.0);
    CHECK(spearman(x, a) == 0.0);
}

TEST_CASE("spearman validates its inputs") {
    const std::vector<double> a{1, 2, 3};
    const std::vector<double> x{1, 2};
    CHECK_THROWS(spearman(a, x));
    const std::vector<double> one{1};
    CHECK_THROWS(spearman(one, one));
}

TEST_CASE("spearman equals the rank formula on all permutations up to n=6") {
    for (std::size_t n = 2; n <= 6; ++n) {
        std::vector<double> x(n);
        std::iota(x.begin(), x.end(), 1.0);
        std::vector<double> a(x);
        do {
            CHECK(spearman(a, x) == spearman_rank_formula(a, x));
        } while (std::next_permutation(a.begin(), a.end()));
    }
}

TEST_CASE("spearman is symmetric and transform-invariant") {
    Rng rng(42);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> a(20), x(20);
        for (auto& v : a) v = rng.uniform01();
        for (auto& v : x) v = rng.uniform01();
        const double rho = spearman(a, x);
        CHECK(spearman(x, a) == rho);

        // strictly increasing transform leaves ranks, hence rho, unchanged
        std::vector<double> ax(a);
        for (auto& v : ax) v = std::atan(5.0 * v - 2.0);
        CHECK(spearman(ax, x) == doctest::Approx(rho).epsilon(1e-12));

        // strictly decreasing transform negates
        std::vector<double> neg(a);
        for (auto& v : neg) v = -v;
        CHECK(spearman(neg, x) == doctest::Approx(-rho).epsilon(1e-12));

        CHECK(std::abs(rho) <= 1.0);
    }
}

TEST_CASE("fractional ranks average over tie runs") {
    const std::vector<double> v{10, 20, 20, 30};
    const auto r = fractional_ranks(v);
    CHECK(r == std::vector<double>{1.0, 2.5, 2.5, 4.0});
}

TEST_CASE("spearman stays within [-1, 1] under heavy ties") {
    Rng rng(7);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> a(15), x(15);
        for (auto& v : a) v = static_cast<double>(rng.below(3));
        for (auto& v : x) v = static_cast<double>(rng.below(4));
        bool const_a = std::all_of(a.begin(), a.end(), [&](double v) { return v == a[0]; });
        bool const_x = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
        const double rho = spearman(a, x);
        if (const_a || const_x) {
            CHECK(rho == 0.0);
        } else {
            CHECK(std::abs(rho) <= 1.0 + 1e-15);
        }
    }
}

TEST_CASE("correlation ratio separates inter- from intra-category variability") {
    // three categories, three observations each
    const std::vector<double> gender{0, 0, 0, 1, 1, 1, 2, 2, 2};
    const std::vector<double> verbal{130, 130, 130, 150, 150, 150, 170, 170, 170};
    const std::vector<double> quant{140, 150, 160, 140, 150, 160, 140, 150, 160};
    CHECK(correlation_ratio(gender, verbal) == 1.0);
    CHECK(correlation_ratio(gender, quant) == 0.0);
}

TEST_CASE("correlation ratio edge cases") {
    const std::vector<double> one_category{0, 0, 0};
    const std::vector<double> x{1, 2, 3};
    CHECK(correlation_ratio(one_category, x) == 0.0);

    const std::vector<double> constant{5, 5, 5};
    CHECK(correlation_ratio(x, constant) == 0.0);

    const std::vector<double> shorter{0, 1};
    CHECK_THROWS(correlation_ratio(shorter, x));

    Rng rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> cats(12), vals(12);
        for (auto& v : cats) v = static_cast<double>(rng.below(4));
        for (auto& v : vals) v = rng.uniform01();
        const double eta = correlation_ratio(cats, vals);
        CHECK(eta >= 0.0);
        CHECK(eta <= 1.0 + 1e-15);
    }
}

namespace {

Dataset penalty_fixture(std::vector<ProtectedColumn> prot,
                        std::vector<LegitimateColumn> legit) {
    return Dataset::make({}, std::move(prot), std::move(legit), std::nullopt);
}

}  // namespace

TEST_CASE("penalty_vector takes the max absolute association per feature") {
    // legitimate feature identical to a protected feature -> penalty 1
    std::vector<double> values{1, 2, 3, 4, 5, 6};
    ProtectedColumn a{"a", ProtectedKind::Numeric, values, {}};
    ProtectedColumn b{"b", ProtectedKind::Numeric, {6, 5, 4, 3, 2, 1}, {}};
    LegitimateColumn x{"x", Direction::Up, values};
    const Dataset d = penalty_fixture({a, b}, {x});
    const auto z = apply_scaling(fit_scaling(d), d);

    const PenaltyVector p = penalty_vector(d, z);
    CHECK(p.rho.size() == 1);
    CHECK(p.rho[0] == doctest::Approx(1.0));
    CHECK(p.matrix.size() == 2);
    CHECK(p.methods[0] == AssociationMethod::Srcc);
}

TEST_CASE("penalty_vector is invariant to protected-column order") {
    Rng rng(11);
    std::vector<double> a1(40), a2(40), x1(40), x2(40);
    for (auto& v : a1) v = rng.uniform01();
    for (auto& v : a2) v = rng.uniform01();
    for (std::size_t i = 0; i < 40; ++i) {
        x1[i] = a1[i] + 0.3 * rng.uniform01();
        x2[i] = rng.uniform01();
    }
    ProtectedColumn pa{"a1", ProtectedKind::Numeric, a1, {}};
    ProtectedColumn pb{"a2", ProtectedKind::Numeric, a2, {}};
    LegitimateColumn lx{"x1", Direction::Up, x1};
    LegitimateColumn ly{"x2", Direction::Down, x2};

    const Dataset d1 = penalty_fixture({pa, pb}, {lx, ly});
    const Dataset d2 = penalty_fixture({pb, pa}, {lx, ly});
    const auto z1 = apply_scaling(fit_scaling(d1), d1);
    const auto z2 = apply_scaling(fit_scaling(d2), d2);
    CHECK(penalty_vector(d1, z1).rho == penalty_vector(d2, z2).rho);
}

TEST_CASE("penalty_vector uses eta for non-binary categorical protected features") {
    ProtectedColumn gender{"gender", ProtectedKind::Categorical, {0, 0, 0, 1, 1, 1, 2, 2, 2},
                           {"F", "M", "O"}};
    LegitimateColumn verbal{"GRE_V", Direction::Up, {130, 130, 130, 150, 150, 150, 170, 170, 170}};
    LegitimateColumn quant{"GRE_Q", Direction::Up, {140, 150, 160, 140, 150, 160, 140, 150, 160}};
    const Dataset d = penalty_fixture({gender}, {verbal, quant});
    const auto z = apply_scaling(fit_scaling(d), d);
    const PenaltyVector p = penalty_vector(d, z);
    CHECK(p.methods[0] == AssociationMethod::CorrelationRatio);
    CHECK(p.rho[0] == 1.0);
    CHECK(p.rho[1] == 0.0);
}

TEST_CASE("independent protected noise yields a small penalty") {
    // Monte Carlo: |SRCC| of independent samples concentrates below ~2/sqrt(N)
    const std::size_t n = 4000;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed);
        std::vector<double> a(n), x(n);
        for (auto& v : a) v = rng.uniform01();
        for (auto& v : x) v = rng.uniform01();
        ProtectedColumn pa{"a", ProtectedKind::Numeric, a, {}};
        LegitimateColumn lx{"x", Direction::Up, x};
        const Dataset d = penalty_fixture({pa}, {lx});
        const auto z = apply_scaling(fit_scaling(d), d);
        worst = std::max(worst, penalty_vector(d, z).rho[0]);
    }
    CHECK(worst < 2.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("penalty_vector requires a protected feature") {
    LegitimateColumn lx{"x", Direction::Up, {1, 2, 3}};
    const Dataset d = penalty_fixture({}, {lx});
    const auto z = apply_scaling(fit_scaling(d), d);
    CHECK_THROWS(penalty_vector(d, z));
}

TEST_CASE("penalty matrix CSV export") {
    ProtectedColumn pa{"a", ProtectedKind::Numeric, {1, 2, 3, 4}, {}};
    LegitimateColumn lx{"x", Direction::Up, {1, 2, 3, 4}};
    const Dataset d = penalty_fixture({pa}, {lx});
    const auto z = apply_scaling(fit_scaling(d), d);
    const PenaltyVector p = penalty_vector(d, z);
    std::ostringstream out;
    write_penalty_matrix_csv(out, p);
    CHECK(out.str() == "protected_feature,method,x\na,srcc,1\nmax_abs,,1\n");
}
