#ifndef CENSREG_KERNEL_HPP
#define CENSREG_KERNEL_HPP

#include <span>
#include <string>

namespace censreg {

//! Spherically symmetric kernel families K(x) = k(||x||_2).
//! Epanechnikov, Triweight and Gaussian profiles are normalized so that K
//! integrates to 1 over R^d. Indicator is the raw ball indicator (k = 1 on
//! [0,1]); its moment integral 1/d sits exactly on the admissibility bound.
enum class KernelFamily { Indicator, Epanechnikov, Triweight, Gaussian };

struct KernelSpec {
    KernelFamily family = KernelFamily::Gaussian;
    int dimension = 1;
};

//! Radial profile k(r) at r >= 0, including the family's normalization.
double radial_profile(const KernelSpec& spec, double r);

//! K(u) = k(||u||_2); u must have the spec's dimension.
double eval_kernel(const KernelSpec& spec, std::span<const double> u);

//! The variance constant integral of k^j(u) u^{d-1}: over [0,1] for the
//! bounded-support families, over [0,inf) for Gaussian.
double kernel_moment(const KernelSpec& spec, int j);

//! True when k vanishes outside the unit ball.
bool bounded_support(KernelFamily family);

//! Parse / format CLI identifiers: "indicator", "epanechnikov", "triweight",
//! "gaussian". Unknown names throw InvalidConfig.
KernelFamily kernel_from_name(const std::string& name);
std::string kernel_name(KernelFamily family);

}  // namespace censreg

#endif
