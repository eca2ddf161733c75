#ifndef CENSREG_KM_HPP
#define CENSREG_KM_HPP

#include <vector>

#include "censreg/observation.hpp"

namespace censreg {

//! Kaplan-Meier estimate of the censoring survival function, stored as a
//! right-continuous step function. survival_values[i] is the value on
//! [jump_times[i], jump_times[i+1]); evaluation at t >= y_max returns 0
//! regardless of the stored products.
struct KMFit {
    std::vector<double> jump_times;       // order statistics, ascending
    std::vector<double> survival_values;  // running products, non-increasing
    double y_max = 0.0;
};

//! Fit the product-form estimator
//!   G(t) = prod_i (1 - (1-delta_(i))/(n-i+1))^{1l{Y_(i) <= t}}  for t < Y_(n),
//! and 0 for t >= Y_(n). delta_(i) is the concomitant of the order statistic
//! Y_(i); ties place uncensored observations first.
KMFit fit_km(const std::vector<double>& y, const std::vector<int>& delta);
KMFit fit_km(const Dataset& data);

//! Step-function evaluation, right-continuous, 0 for t >= y_max.
double survival_at(const KMFit& fit, double t);

//! Left limit G(t-): the product over order statistics strictly below t.
//! This is the conventional evaluation point when G appears under an
//! uncensored observation in a denominator: the largest uncensored time keeps
//! the weight accumulated below it instead of hitting the terminal 0.
double survival_before(const KMFit& fit, double t);

//! 1 / max(survival_at(fit, t), floor). floor must lie in (0, 1).
double clamped_inverse_survival(const KMFit& fit, double t, double floor);

}  // namespace censreg

#endif
