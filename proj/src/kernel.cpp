#include "censreg/kernel.hpp"

#include <cmath>

#include "censreg/errors.hpp"

namespace censreg {

namespace {

void check_spec(const KernelSpec& spec) {
    if (spec.dimension < 1) throw InvalidConfig("kernel dimension must be >= 1");
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

//! Surface area of the unit sphere in R^d.
double sphere_area(int d) {
    return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

//! Normalization constant for the polynomial profile (1 - u^2)^p on [0,1],
//! chosen so that K integrates to 1 over R^d.
double poly_norm(int d, int p) {
    return 2.0 / (sphere_area(d) * std::exp(log_beta(0.5 * d, p + 1.0)));
}

}  // namespace

double radial_profile(const KernelSpec& spec, double r) {
    check_spec(spec);
    if (r < 0.0) r = -r;
    const int d = spec.dimension;
    switch (spec.family) {
        case KernelFamily::Indicator:
            return r <= 1.0 ? 1.0 : 0.0;
        case KernelFamily::Epanechnikov:
            return r <= 1.0 ? poly_norm(d, 1) * (1.0 - r * r) : 0.0;
        case KernelFamily::Triweight: {
            if (r > 1.0) return 0.0;
            const double s = 1.0 - r * r;
            return poly_norm(d, 3) * s * s * s;
        }
        case KernelFamily::Gaussian:
            return std::pow(2.0 * M_PI, -0.5 * d) * std::exp(-0.5 * r * r);
    }
    throw InvalidConfig("unknown kernel family");
}

double eval_kernel(const KernelSpec& spec, std::span<const double> u) {
    check_spec(spec);
    if (u.size() != static_cast<std::size_t>(spec.dimension))
        throw DimensionError("eval_kernel: point dimension " + std::to_string(u.size()) +
                             " does not match kernel dimension " +
                             std::to_string(spec.dimension));
    double ss = 0.0;
    for (double v : u) ss += v * v;
    return radial_profile(spec, std::sqrt(ss));
}

double kernel_moment(const KernelSpec& spec, int j) {
    check_spec(spec);
    if (j < 1) throw InvalidConfig("kernel_moment: j must be >= 1");
    const double d = spec.dimension;
    switch (spec.family) {
        case KernelFamily::Indicator:
            return 1.0 / d;
        case KernelFamily::Epanechnikov:
            return std::pow(poly_norm(spec.dimension, 1), j) * 0.5 *
                   std::exp(log_beta(0.5 * d, j + 1.0));
        case KernelFamily::Triweight:
            return std::pow(poly_norm(spec.dimension, 3), j) * 0.5 *
                   std::exp(log_beta(0.5 * d, 3.0 * j + 1.0));
        case KernelFamily::Gaussian:
            // int_0^inf e^{-j u^2/2} u^{d-1} du = Gamma(d/2) / (2 (j/2)^{d/2})
            return std::pow(2.0 * M_PI, -0.5 * j * d) * std::tgamma(0.5 * d) /
                   (2.0 * std::pow(0.5 * j, 0.5 * d));
    }
    throw InvalidConfig("unknown kernel family");
}

bool bounded_support(KernelFamily family) { return family != KernelFamily::Gaussian; }

KernelFamily kernel_from_name(const std::string& name) {
    if (name == "indicator") return KernelFamily::Indicator;
    if (name == "epanechnikov") return KernelFamily::Epanechnikov;
    if (name == "triweight") return KernelFamily::Triweight;
    if (name == "gaussian") return KernelFamily::Gaussian;
    throw InvalidConfig("unknown kernel name: " + name);
}

std::string kernel_name(KernelFamily family) {
    switch (family) {
        case KernelFamily::Indicator: return "indicator";
        case KernelFamily::Epanechnikov: return "epanechnikov";
        case KernelFamily::Triweight: return "triweight";
        case KernelFamily::Gaussian: return "gaussian";
    }
    return "unknown";
}

}  // namespace censreg
