#ifndef CENSREG_ESTIMATOR_HPP
#define CENSREG_ESTIMATOR_HPP

#include <functional>
#include <span>
#include <vector>

#include "censreg/kernel.hpp"
#include "censreg/km.hpp"
#include "censreg/observation.hpp"
#include "censreg/psi.hpp"

namespace censreg {

struct EstimatorConfig {
    KernelSpec kernel{KernelFamily::Gaussian, 1};
    PsiSpec psi{PsiFamily::AlgebraicSigmoid};
    double bandwidth = 0.1;
    double km_floor = 0.01;
    double root_tol = 1e-8;
    int max_iter = 200;
    double bracket_pad = 1.0;
    bool mhat_with_delta = false;  // sensitivity variant of the variance plug-in

    void validate(std::size_t dimension) const;
};

//! One evaluation of the censoring-corrected local score.
//! numerator and denominator are both normalized by n, so
//! score = numerator / denominator and effective_weight = n * denominator.
struct ScoreValue {
    double score = 0.0;
    double numerator = 0.0;
    double denominator = 0.0;
    double effective_weight = 0.0;
};

struct CIResult {
    double theta_hat = 0.0;
    double half_width = 0.0;
    double level = 0.0;
    double m_hat = 0.0;
    double gamma1_hat = 0.0;
    double ball_prob = 0.0;
    std::size_t n_used = 0;  // sample size entering the pivot
};

//! Unnormalized kernel weights K((X_i - x)/h) for every observation.
std::vector<double> local_weights(const Dataset& data, std::span<const double> x,
                                  const EstimatorConfig& cfg);

//! Local score at theta:
//!   sum_i w_i(x) * delta_i * psi(Y_i - theta) / max(G(Y_i-), floor) / sum_i w_i(x)
//! where G is the Kaplan-Meier censoring survival evaluated as a left limit,
//! so that uncensored data reproduce the plain kernel average exactly.
//! Censored rows contribute 0 to the numerator but full weight below.
ScoreValue psi_score(const Dataset& data, const KMFit& km, std::span<const double> x,
                     double theta, const EstimatorConfig& cfg);

//! Same score with a known censoring survival function in place of the
//! Kaplan-Meier fit (available in simulation only).
ScoreValue psi_score_oracle(const Dataset& data, const std::function<double(double)>& true_g,
                            std::span<const double> x, double theta,
                            const EstimatorConfig& cfg);

//! Analytic d(score)/d(theta); used by derivative audits, not by estimation.
double psi_score_derivative(const Dataset& data, const KMFit& km, std::span<const double> x,
                            double theta, const EstimatorConfig& cfg);

//! Root of the local score in theta. The score is non-increasing, so the
//! solver brackets [min Y - pad, max Y + pad], grows the bracket
//! geometrically until the sign changes (NoSignChange once the bracket spans
//! 10x the local data range), then refines by a bisection/secant hybrid down
//! to root_tol. A score identically 0 across the bracket yields its midpoint.
double solve_m_estimator(const Dataset& data, const KMFit& km, std::span<const double> x,
                         const EstimatorConfig& cfg);

//! Synthetic-data Nadaraya-Watson comparator:
//!   sum_i w_i(x) * delta_i * Y_i / max(G(Y_i-), floor) / sum_i w_i(x).
double nw_estimator(const Dataset& data, const KMFit& km, std::span<const double> x,
                    const EstimatorConfig& cfg);

//! Variance plug-in sum_i psi^2(Y_i - theta) / max(G(Y_i-), floor) * w_i / sum w_i.
//! With cfg.mhat_with_delta the censored terms are dropped (delta_i inserted).
double estimate_m_hat(const Dataset& data, const KMFit& km, std::span<const double> x,
                      double theta, const EstimatorConfig& cfg);

//! Slope plug-in sum_i psi'(Y_i - theta) w_i / sum w_i (no censoring correction).
double estimate_gamma1(const Dataset& data, std::span<const double> x, double theta,
                       const EstimatorConfig& cfg);

//! Fraction of covariates within the sup-norm ball of radius bandwidth.
double ball_probability(const Dataset& data, std::span<const double> x,
                        const EstimatorConfig& cfg);

//! Pivot-inverted half width: q_{alpha/2} divided by
//! gamma1 * sqrt(n * ball_prob * d / (m_hat * mom2)) * mom1,
//! with mom_j the kernel moment integrals.
double ci_half_width(double level, double gamma1, double m_hat, double ball_prob,
                     std::size_t n, const KernelSpec& kernel);

//! Point estimate plus plug-in confidence interval at the given level.
CIResult confidence_interval(const Dataset& data, const KMFit& km, std::span<const double> x,
                             const EstimatorConfig& cfg, double level);

namespace detail {

//! Per-observation inverse-survival factors, shared by every query point of
//! one dataset. ipcw[i] = delta_i / max(G(Y_i-), floor); ginv[i] drops the
//! delta factor. Study loops build this once per replication.
struct CensorWeights {
    std::vector<double> ipcw;
    std::vector<double> ginv;
};

CensorWeights censor_weights(const Dataset& data, const KMFit& km, double floor);
CensorWeights censor_weights(const Dataset& data, const std::function<double(double)>& true_g,
                             double floor);

ScoreValue score_with(const Dataset& data, const CensorWeights& cw, std::span<const double> x,
                      double theta, const EstimatorConfig& cfg);
double solve_with(const Dataset& data, const CensorWeights& cw, std::span<const double> x,
                  const EstimatorConfig& cfg);
double nw_with(const Dataset& data, const CensorWeights& cw, std::span<const double> x,
               const EstimatorConfig& cfg);
double m_hat_with(const Dataset& data, const CensorWeights& cw, std::span<const double> x,
                  double theta, const EstimatorConfig& cfg);

//! Score assembled from caller-supplied weights and inverse-survival factors;
//! exposed for term-level tests (weight-rescaling invariance and the like).
ScoreValue score_from_terms(const std::vector<double>& weights, const std::vector<double>& y,
                            const std::vector<double>& ipcw, double theta, const PsiSpec& psi,
                            std::size_t n_total);

}  // namespace detail

}  // namespace censreg

#endif
