#ifndef CENSREG_PSI_HPP
#define CENSREG_PSI_HPP

#include <string>

namespace censreg {

//! Nondecreasing score functions with closed-form derivatives.
//! AlgebraicSigmoid is psi(u) = u / sqrt(1 + u^2); Huber clips u to [-c, c].
enum class PsiFamily { Identity, AlgebraicSigmoid, Huber };

struct PsiSpec {
    PsiFamily family = PsiFamily::AlgebraicSigmoid;
    double huber_c = 1.345;
};

double eval_psi(const PsiSpec& spec, double u);
double eval_psi_prime(const PsiSpec& spec, double u);

//! Parse / format CLI identifiers: "identity", "algebraic_sigmoid",
//! "huber:<c>". Unknown names throw InvalidConfig.
PsiSpec psi_from_name(const std::string& name);
std::string psi_name(const PsiSpec& spec);

}  // namespace censreg

#endif
