#include "censreg/psi.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "censreg/errors.hpp"

namespace censreg {

namespace {

void check_spec(const PsiSpec& spec) {
    if (spec.family == PsiFamily::Huber && !(spec.huber_c > 0.0))
        throw InvalidConfig("huber constant must be > 0");
}

}  // namespace

double eval_psi(const PsiSpec& spec, double u) {
    check_spec(spec);
    switch (spec.family) {
        case PsiFamily::Identity:
            return u;
        case PsiFamily::AlgebraicSigmoid:
            return u / std::sqrt(1.0 + u * u);
        case PsiFamily::Huber:
            return std::clamp(u, -spec.huber_c, spec.huber_c);
    }
    throw InvalidConfig("unknown psi family");
}

double eval_psi_prime(const PsiSpec& spec, double u) {
    check_spec(spec);
    switch (spec.family) {
        case PsiFamily::Identity:
            return 1.0;
        case PsiFamily::AlgebraicSigmoid: {
            const double s = 1.0 + u * u;
            return 1.0 / (s * std::sqrt(s));
        }
        case PsiFamily::Huber:
            return std::fabs(u) <= spec.huber_c ? 1.0 : 0.0;
    }
    throw InvalidConfig("unknown psi family");
}

PsiSpec psi_from_name(const std::string& name) {
    if (name == "identity") return {PsiFamily::Identity};
    if (name == "algebraic_sigmoid") return {PsiFamily::AlgebraicSigmoid};
    if (name.rfind("huber", 0) == 0) {
        PsiSpec spec{PsiFamily::Huber};
        if (name.size() > 5) {
            if (name[5] != ':') throw InvalidConfig("unknown psi name: " + name);
            const char* first = name.data() + 6;
            const char* last = name.data() + name.size();
            auto res = std::from_chars(first, last, spec.huber_c);
            if (res.ec != std::errc() || res.ptr != last)
                throw InvalidConfig("bad huber constant in: " + name);
        }
        check_spec(spec);
        return spec;
    }
    throw InvalidConfig("unknown psi name: " + name);
}

std::string psi_name(const PsiSpec& spec) {
    switch (spec.family) {
        case PsiFamily::Identity: return "identity";
        case PsiFamily::AlgebraicSigmoid: return "algebraic_sigmoid";
        case PsiFamily::Huber: {
            char buf[48];
            auto res = std::to_chars(buf, buf + sizeof buf, spec.huber_c);
            return "huber:" + std::string(buf, res.ptr);
        }
    }
    return "unknown";
}

}  // namespace censreg
