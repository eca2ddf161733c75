// test_km.cpp
//
// Unit tests for the Kaplan-Meier censoring-survival fit:
//  - hand-evaluated product-formula cases, including the terminal zero branch
//  - brute-force oracle equivalence on random censoring patterns
//  - tie handling (uncensored first at equal y)
//  - step-function evaluation, left limits, clamped inverses
//  - input validation errors

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <censreg/errors.hpp>
#include <censreg/km.hpp>

using Catch::Approx;
using namespace censreg;

namespace {

// Literal evaluation of the product formula, kept independent of fit_km:
// sorts (y, delta) with uncensored first on ties, then multiplies the
// factors for every order statistic <= t. Zero at and beyond the largest y.
double product_formula(std::vector<double> y, std::vector<int> delta, double t) {
    const std::size_t n = y.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (y[a] != y[b]) return y[a] < y[b];
        return delta[a] > delta[b];
    });
    const double y_max = y[idx.back()];
    if (t >= y_max) return 0.0;
    double prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (y[idx[i]] > t) break;
        prod *= 1.0 - (1.0 - delta[idx[i]]) / double(n - i);
    }
    return prod;
}

}  // namespace

TEST_CASE("fit_km: hand-evaluated product cases", "[km]") {
    SECTION("all uncensored: survival is 1 everywhere below y_max") {
        auto fit = fit_km({1, 2, 3, 4}, {1, 1, 1, 1});
        REQUIRE(survival_at(fit, 0.0) == 1.0);
        REQUIRE(survival_at(fit, 2.5) == 1.0);
        REQUIRE(survival_at(fit, 3.999) == 1.0);
        REQUIRE(survival_at(fit, 4.0) == 0.0);
        REQUIRE(survival_at(fit, 100.0) == 0.0);
    }

    SECTION("one censored point at the second order statistic") {
        auto fit = fit_km({1, 2, 3, 4}, {1, 0, 1, 1});
        REQUIRE(survival_at(fit, 1.5) == 1.0);
        REQUIRE(survival_at(fit, 2.5) == Approx(2.0 / 3.0).margin(1e-15));
        REQUIRE(survival_at(fit, 3.5) == Approx(2.0 / 3.0).margin(1e-15));
        REQUIRE(survival_at(fit, 4.0) == 0.0);
    }

    SECTION("single censored observation: factor never activates below y_max") {
        auto fit = fit_km({5}, {0});
        REQUIRE(survival_at(fit, 4.999) == 1.0);
        REQUIRE(survival_at(fit, 5.0) == 0.0);
    }

    SECTION("all censored: plain empirical survival product") {
        std::vector<double> y = {1, 2, 3, 4};
        std::vector<int> delta = {0, 0, 0, 0};
        auto fit = fit_km(y, delta);
        REQUIRE(survival_at(fit, 1.5) == Approx(3.0 / 4.0).margin(1e-15));
        REQUIRE(survival_at(fit, 2.5) == Approx(3.0 / 4.0 * 2.0 / 3.0).margin(1e-15));
        REQUIRE(survival_at(fit, 3.5) == Approx(3.0 / 4.0 * 2.0 / 3.0 * 1.0 / 2.0).margin(1e-15));
        REQUIRE(survival_at(fit, 4.0) == 0.0);
    }
}

TEST_CASE("fit_km: ties place uncensored observations first", "[km]") {
    // y = (2, 2) with one censored: uncensored sorts first, so the censored
    // copy sits at rank 2 and its factor is 1 - 1/(2-2+1) = 0. Both orderings
    // of the input rows must give the same fit.
    auto fit_a = fit_km({2, 2}, {0, 1});
    auto fit_b = fit_km({2, 2}, {1, 0});
    for (double t : {1.0, 1.999, 2.0, 3.0}) {
        REQUIRE(survival_at(fit_a, t) == survival_at(fit_b, t));
    }
    REQUIRE(survival_at(fit_a, 1.9) == 1.0);
    REQUIRE(survival_at(fit_a, 2.0) == 0.0);
}

TEST_CASE("fit_km: permutation invariance", "[km]") {
    std::mt19937_64 rng(42);
    std::vector<double> y = {0.7, 1.3, 1.3, 2.2, 3.8, 5.1};
    std::vector<int> delta = {1, 0, 1, 0, 1, 0};
    auto base = fit_km(y, delta);
    std::vector<std::size_t> idx(y.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (int rep = 0; rep < 20; ++rep) {
        std::shuffle(idx.begin(), idx.end(), rng);
        std::vector<double> ys;
        std::vector<int> ds;
        for (auto i : idx) {
            ys.push_back(y[i]);
            ds.push_back(delta[i]);
        }
        auto fit = fit_km(ys, ds);
        REQUIRE(fit.jump_times == base.jump_times);
        REQUIRE(fit.survival_values == base.survival_values);
        REQUIRE(fit.y_max == base.y_max);
    }
}

TEST_CASE("fit_km: brute-force oracle on random censoring patterns", "[km]") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unif(0.0, 10.0);
    for (int rep = 0; rep < 200; ++rep) {
        const int n = 1 + int(rng() % 7);
        std::vector<double> y(n);
        std::vector<int> delta(n);
        for (int i = 0; i < n; ++i) {
            y[i] = unif(rng);
            delta[i] = int(rng() % 2);
        }
        auto fit = fit_km(y, delta);
        for (int q = 0; q < 25; ++q) {
            const double t = unif(rng) * 1.2 - 1.0;
            REQUIRE(survival_at(fit, t) ==
                    Approx(product_formula(y, delta, t)).margin(1e-12));
        }
        for (double t : y) {
            REQUIRE(survival_at(fit, t) == Approx(product_formula(y, delta, t)).margin(1e-12));
        }
    }
}

TEST_CASE("survival_at: non-increasing step function", "[km]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 5.0);
    std::vector<double> y(30);
    std::vector<int> delta(30);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = unif(rng);
        delta[i] = int(rng() % 2);
    }
    auto fit = fit_km(y, delta);
    double prev = 1.0;
    for (double t = -0.5; t < 6.0; t += 0.01) {
        double s = survival_at(fit, t);
        REQUIRE(s <= prev + 1e-15);
        REQUIRE(s >= 0.0);
        REQUIRE(s <= 1.0);
        prev = s;
    }
}

TEST_CASE("survival_before: left limit keeps the mass below t", "[km]") {
    auto fit = fit_km({1, 2, 3, 4}, {1, 0, 1, 1});

    // At the censored jump itself the left limit excludes the factor.
    REQUIRE(survival_before(fit, 2.0) == 1.0);
    REQUIRE(survival_at(fit, 2.0) == Approx(2.0 / 3.0).margin(1e-15));

    // At y_max the right-continuous value is 0 but the left limit keeps the
    // accumulated product, which is what division-by-G(Y-) needs at the
    // largest uncensored time.
    REQUIRE(survival_at(fit, 4.0) == 0.0);
    REQUIRE(survival_before(fit, 4.0) == Approx(2.0 / 3.0).margin(1e-15));

    // Strictly between jumps the two evaluations agree.
    REQUIRE(survival_before(fit, 2.5) == survival_at(fit, 2.5));
}

TEST_CASE("clamped_inverse_survival: clamping and floor validation", "[km]") {
    auto fit = fit_km({1, 2, 3, 4}, {1, 0, 1, 1});

    SECTION("no clamp when survival is above the floor") {
        REQUIRE(clamped_inverse_survival(fit, 0.5, 0.05) == 1.0);
        REQUIRE(clamped_inverse_survival(fit, 2.5, 0.05) == Approx(1.5).margin(1e-15));
    }

    SECTION("clamp active at the terminal zero") {
        REQUIRE(clamped_inverse_survival(fit, 4.0, 0.05) == Approx(20.0).margin(1e-12));
        REQUIRE(clamped_inverse_survival(fit, 10.0, 0.01) == Approx(100.0).margin(1e-12));
    }

    SECTION("floor outside (0,1) rejected") {
        REQUIRE_THROWS_AS(clamped_inverse_survival(fit, 1.0, 0.0), InvalidFloor);
        REQUIRE_THROWS_AS(clamped_inverse_survival(fit, 1.0, 1.0), InvalidFloor);
        REQUIRE_THROWS_AS(clamped_inverse_survival(fit, 1.0, -0.2), InvalidFloor);
    }
}

TEST_CASE("fit_km: input validation", "[km]") {
    REQUIRE_THROWS_AS(fit_km(std::vector<double>{}, std::vector<int>{}), EmptyData);
    REQUIRE_THROWS_AS(fit_km({1.0, std::nan("")}, {1, 1}), InvalidObservation);
    REQUIRE_THROWS_AS(fit_km({1.0, std::numeric_limits<double>::infinity()}, {1, 0}),
                      InvalidObservation);
}

TEST_CASE("fit_km: dataset overload matches the vector form", "[km]") {
    Dataset data;
    data.push_back({{0.1}, 2.0, 1});
    data.push_back({{0.2}, 1.0, 0});
    data.push_back({{0.3}, 3.0, 1});
    auto fit_a = fit_km(data);
    auto fit_b = fit_km({2.0, 1.0, 3.0}, {1, 0, 1});
    REQUIRE(fit_a.jump_times == fit_b.jump_times);
    REQUIRE(fit_a.survival_values == fit_b.survival_values);
}
