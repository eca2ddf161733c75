// test_kernel_psi.cpp
//
// Unit tests for the kernel and psi families:
//  - radial profile values and density normalization over R^d
//  - moment integrals against a midpoint-rule quadrature oracle
//  - spherical symmetry and the moment admissibility bound
//  - psi values, closed-form derivatives vs. finite differences, monotonicity
//  - name parsing round-trips

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <censreg/errors.hpp>
#include <censreg/kernel.hpp>
#include <censreg/psi.hpp>

using Catch::Approx;
using namespace censreg;

namespace {

// Midpoint-rule integral of k^j(u) u^{d-1} over [0, hi].
double moment_quadrature(const KernelSpec& spec, int j, double hi, int panels) {
    double sum = 0.0;
    const double w = hi / panels;
    for (int i = 0; i < panels; ++i) {
        const double u = (i + 0.5) * w;
        sum += std::pow(radial_profile(spec, u), j) * std::pow(u, spec.dimension - 1) * w;
    }
    return sum;
}

// Midpoint-rule mass of K over R^d via the polar shell formula
// vol(S^{d-1}) * integral of k(r) r^{d-1}.
double total_mass(const KernelSpec& spec, double hi, int panels) {
    const double d = spec.dimension;
    const double shell = 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
    return shell * moment_quadrature(spec, 1, hi, panels);
}

}  // namespace

TEST_CASE("radial_profile: hand values at d=1", "[kernel]") {
    REQUIRE(radial_profile({KernelFamily::Indicator, 1}, 0.0) == 1.0);
    REQUIRE(radial_profile({KernelFamily::Indicator, 1}, 1.5) == 0.0);
    REQUIRE(radial_profile({KernelFamily::Epanechnikov, 1}, 0.5) ==
            Approx(0.75 * (1.0 - 0.25)).margin(1e-15));
    REQUIRE(radial_profile({KernelFamily::Triweight, 1}, 0.0) ==
            Approx(35.0 / 32.0).margin(1e-15));
    REQUIRE(radial_profile({KernelFamily::Gaussian, 1}, 1.0) ==
            Approx(std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi)).margin(1e-15));
}

TEST_CASE("radial_profile: density normalization over R^d", "[kernel]") {
    for (auto family : {KernelFamily::Epanechnikov, KernelFamily::Triweight,
                        KernelFamily::Gaussian}) {
        for (int d = 1; d <= 3; ++d) {
            KernelSpec spec{family, d};
            const double hi = bounded_support(family) ? 1.0 : 10.0;
            REQUIRE(total_mass(spec, hi, 200000) == Approx(1.0).margin(1e-6));
        }
    }
}

TEST_CASE("eval_kernel: radial evaluation and dimension checks", "[kernel]") {
    KernelSpec spec{KernelFamily::Epanechnikov, 2};

    SECTION("K(u) = k(||u||_2)") {
        std::vector<double> u = {0.3, 0.4};
        REQUIRE(eval_kernel(spec, u) == Approx(radial_profile(spec, 0.5)).margin(1e-15));
    }

    SECTION("outside the unit ball") {
        std::vector<double> u = {1.2, 0.9};
        REQUIRE(eval_kernel(spec, u) == 0.0);
    }

    SECTION("dimension mismatch") {
        std::vector<double> u = {0.1};
        REQUIRE_THROWS_AS(eval_kernel(spec, u), DimensionError);
    }
}

TEST_CASE("eval_kernel: spherical symmetry under rotations", "[kernel]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (auto family : {KernelFamily::Indicator, KernelFamily::Epanechnikov,
                        KernelFamily::Triweight, KernelFamily::Gaussian}) {
        KernelSpec spec{family, 2};
        for (int rep = 0; rep < 50; ++rep) {
            const double a = unif(rng), b = unif(rng);
            const double phi = unif(rng) * std::numbers::pi;
            std::vector<double> u = {a, b};
            std::vector<double> ru = {std::cos(phi) * a - std::sin(phi) * b,
                                      std::sin(phi) * a + std::cos(phi) * b};
            REQUIRE(eval_kernel(spec, u) == Approx(eval_kernel(spec, ru)).margin(1e-12));
        }
    }
}

TEST_CASE("kernel_moment: indicator closed forms", "[kernel]") {
    for (int j : {1, 2, 3}) {
        REQUIRE(kernel_moment({KernelFamily::Indicator, 1}, j) == Approx(1.0).margin(1e-15));
        REQUIRE(kernel_moment({KernelFamily::Indicator, 2}, j) == Approx(0.5).margin(1e-15));
        REQUIRE(kernel_moment({KernelFamily::Indicator, 3}, j) ==
                Approx(1.0 / 3.0).margin(1e-15));
    }
}

TEST_CASE("kernel_moment: quadrature oracle across families", "[kernel]") {
    for (auto family : {KernelFamily::Indicator, KernelFamily::Epanechnikov,
                        KernelFamily::Triweight, KernelFamily::Gaussian}) {
        for (int d = 1; d <= 3; ++d) {
            KernelSpec spec{family, d};
            const double hi = bounded_support(family) ? 1.0 : 12.0;
            for (int j : {1, 2}) {
                const double oracle = moment_quadrature(spec, j, hi, 1000000);
                REQUIRE(kernel_moment(spec, j) == Approx(oracle).margin(1e-6));
            }
        }
    }
}

TEST_CASE("kernel_moment: admissibility bound for bounded families", "[kernel]") {
    for (auto family : {KernelFamily::Indicator, KernelFamily::Epanechnikov,
                        KernelFamily::Triweight}) {
        for (int d = 1; d <= 3; ++d) {
            for (int j = 1; j <= 3; ++j) {
                REQUIRE(kernel_moment({family, d}, j) <= 1.0 / d + 1e-12);
            }
        }
    }
}

TEST_CASE("bounded_support flags", "[kernel]") {
    REQUIRE(bounded_support(KernelFamily::Indicator));
    REQUIRE(bounded_support(KernelFamily::Epanechnikov));
    REQUIRE(bounded_support(KernelFamily::Triweight));
    REQUIRE_FALSE(bounded_support(KernelFamily::Gaussian));
}

TEST_CASE("kernel names: parse and format round-trip", "[kernel]") {
    for (auto family : {KernelFamily::Indicator, KernelFamily::Epanechnikov,
                        KernelFamily::Triweight, KernelFamily::Gaussian}) {
        REQUIRE(kernel_from_name(kernel_name(family)) == family);
    }
    REQUIRE(kernel_from_name("gaussian") == KernelFamily::Gaussian);
    REQUIRE_THROWS_AS(kernel_from_name("box"), InvalidConfig);
}

TEST_CASE("eval_psi: hand values", "[psi]") {
    PsiSpec sigmoid{PsiFamily::AlgebraicSigmoid};
    REQUIRE(eval_psi(sigmoid, 0.0) == 0.0);
    REQUIRE(eval_psi_prime(sigmoid, 0.0) == 1.0);
    REQUIRE(eval_psi(sigmoid, 1.0) == Approx(1.0 / std::sqrt(2.0)).margin(1e-15));
    REQUIRE(eval_psi(sigmoid, -1.0) == Approx(-1.0 / std::sqrt(2.0)).margin(1e-15));

    PsiSpec identity{PsiFamily::Identity};
    REQUIRE(eval_psi(identity, 3.7) == 3.7);
    REQUIRE(eval_psi(identity, -12.0) == -12.0);
    REQUIRE(eval_psi_prime(identity, 5.0) == 1.0);

    PsiSpec huber{PsiFamily::Huber, 1.345};
    REQUIRE(eval_psi(huber, 0.5) == 0.5);
    REQUIRE(eval_psi(huber, 3.0) == Approx(1.345).margin(1e-15));
    REQUIRE(eval_psi(huber, -3.0) == Approx(-1.345).margin(1e-15));
    REQUIRE(eval_psi_prime(huber, 0.5) == 1.0);
    REQUIRE(eval_psi_prime(huber, 3.0) == 0.0);
}

TEST_CASE("eval_psi: boundedness and saturation", "[psi]") {
    PsiSpec sigmoid{PsiFamily::AlgebraicSigmoid};
    for (double u : {-1e6, -50.0, -1.0, 0.0, 1.0, 50.0, 1e6}) {
        REQUIRE(std::fabs(eval_psi(sigmoid, u)) <= 1.0);
    }
    REQUIRE(eval_psi(sigmoid, 1e8) == Approx(1.0).margin(1e-10));
    REQUIRE(eval_psi(sigmoid, -1e8) == Approx(-1.0).margin(1e-10));
}

TEST_CASE("eval_psi: monotone nondecreasing on random grids", "[psi]") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-20.0, 20.0);
    std::vector<PsiSpec> specs = {{PsiFamily::Identity},
                                  {PsiFamily::AlgebraicSigmoid},
                                  {PsiFamily::Huber, 1.345},
                                  {PsiFamily::Huber, 0.4}};
    for (const auto& spec : specs) {
        std::vector<double> grid(200);
        for (auto& u : grid) u = unif(rng);
        std::sort(grid.begin(), grid.end());
        for (std::size_t i = 1; i < grid.size(); ++i) {
            REQUIRE(eval_psi(spec, grid[i]) >= eval_psi(spec, grid[i - 1]));
        }
    }
}

TEST_CASE("eval_psi_prime: central finite-difference audit", "[psi]") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-8.0, 8.0);
    std::vector<PsiSpec> specs = {{PsiFamily::Identity},
                                  {PsiFamily::AlgebraicSigmoid},
                                  {PsiFamily::Huber, 1.345}};
    const double eps = 1e-6;
    for (const auto& spec : specs) {
        int checked = 0;
        while (checked < 1000) {
            const double u = unif(rng);
            if (spec.family == PsiFamily::Huber &&
                std::fabs(std::fabs(u) - spec.huber_c) < 1e-3) {
                continue;  // keep clear of the kinks
            }
            const double fd = (eval_psi(spec, u + eps) - eval_psi(spec, u - eps)) / (2 * eps);
            REQUIRE(eval_psi_prime(spec, u) == Approx(fd).margin(1e-6));
            ++checked;
        }
    }
}

TEST_CASE("psi names: parse and format round-trip", "[psi]") {
    REQUIRE(psi_from_name("identity").family == PsiFamily::Identity);
    REQUIRE(psi_from_name("algebraic_sigmoid").family == PsiFamily::AlgebraicSigmoid);

    auto huber = psi_from_name("huber:2.5");
    REQUIRE(huber.family == PsiFamily::Huber);
    REQUIRE(huber.huber_c == Approx(2.5).margin(1e-15));

    REQUIRE(psi_name(PsiSpec{PsiFamily::Identity}) == "identity");
    REQUIRE(psi_name(PsiSpec{PsiFamily::AlgebraicSigmoid}) == "algebraic_sigmoid");
    REQUIRE(psi_from_name(psi_name(PsiSpec{PsiFamily::Huber, 0.9})).huber_c ==
            Approx(0.9).margin(1e-12));

    REQUIRE_THROWS_AS(psi_from_name("tukey"), InvalidConfig);
    REQUIRE_THROWS_AS(psi_from_name("huber:-1"), InvalidConfig);
}
