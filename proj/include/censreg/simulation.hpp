#ifndef CENSREG_SIMULATION_HPP
#define CENSREG_SIMULATION_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "censreg/estimator.hpp"
#include "censreg/observation.hpp"

namespace censreg {

enum class Model { M1, M2, M3 };

//! m(x) for the three study models: x + 2 e^{-16 x^2}, x, x^2 + 1.
double regression_model(Model model, double x);

Model model_from_name(const std::string& name);
std::string model_name(Model model);

struct Contamination {
    double fraction = 0.3;
    double factor = 5.0;
    bool multiply_observed = false;  // multiply Y instead of the latent T
};

struct BandwidthPolicy {
    enum class Kind { Fixed, GridSelect, RateRule };
    Kind kind = Kind::RateRule;
    double fixed_h = 0.0;            // Fixed
    std::vector<double> grid;        // GridSelect; empty means the default grid
};

//! Default selection grid: 0.05 to 1.0 in steps of 0.02 (48 values).
std::vector<double> default_bandwidth_grid();

struct Scenario {
    Model model = Model::M2;
    int n = 300;
    std::optional<double> target_cr;
    std::optional<double> fixed_rate;  // exponential censoring rate lambda
    double sigma = 0.01;
    std::optional<Contamination> contamination;
    BandwidthPolicy bandwidth_policy;
    int replications = 100;
    std::uint64_t seed = 1;

    void validate() const;  // exactly one censoring field, ranges
};

struct SimulatedData {
    Dataset obs;
    std::vector<double> t_true;
    std::vector<double> c_true;
};

//! AR(1) recursion X_i = 0.4 X_{i-1} + eta_i with caller-supplied innovations;
//! the recursion runs burn_in steps from x0 before the n recorded values.
std::vector<double> covariate_path(int n, const std::function<double()>& innovation,
                                   double x0 = 0.0, int burn_in = 500);

//! Stationary-start path with Bernoulli(0.5) innovations (500-step burn-in).
std::vector<double> gen_covariate_path(int n, std::mt19937_64& rng);

//! Exponential censoring rate hitting target_cr for the model, found by
//! bisection over [1e-4, 1e4] against a pilot sample of size n_pilot.
double calibrate_censoring_rate(Model model, double target_cr, int n_pilot,
                                std::mt19937_64& rng, double sigma = 0.01);

//! The scenario's censoring rate: fixed_rate verbatim, or calibrated from
//! target_cr on a dedicated child stream of the scenario seed.
double resolve_censoring_rate(const Scenario& scenario);

//! One dataset draw: T = m(X) + sigma * eps, C ~ Exp(lambda), Y = min(T, C).
SimulatedData gen_dataset(const Scenario& scenario, double lambda, std::mt19937_64& rng);
SimulatedData gen_dataset(const Scenario& scenario, std::mt19937_64& rng);

//! Multiply a random ceil(fraction * n) subset of responses by factor.
//! Default form scales the latent T and re-censors against the same C;
//! multiply_observed scales the recorded Y without touching delta.
void contaminate(SimulatedData& data, double fraction, double factor, std::mt19937_64& rng,
                 bool multiply_observed = false);

struct GmseReport {
    Scenario scenario;
    double bandwidth = 0.0;
    double lambda = 0.0;
    double gmse_m = 0.0;
    double gmse_nw = 0.0;
    std::vector<double> per_replication_mse_m;
    std::vector<double> per_replication_mse_nw;
    std::vector<int> skipped_m;          // per replication, points the root solve skipped
    std::vector<int> skipped_nw;
    std::vector<std::uint8_t> flagged;   // replication had > 5% skipped points
    double realized_cr = 0.0;            // censored fraction of delivered data
};

//! In-sample GMSE of both estimators over scenario.replications datasets.
//! Replication b draws everything from child stream (seed, b), so results do
//! not depend on `jobs`.
GmseReport run_gmse_study(const Scenario& scenario, double bandwidth,
                          const EstimatorConfig& base = {}, int jobs = 1);

struct BandwidthRow {
    double h = 0.0;
    double gmse_m = 0.0;
    double gmse_nw = 0.0;
};

struct BandwidthSelection {
    double selected_h = 0.0;     // argmin of gmse_m, ties toward smaller h
    double selected_h_nw = 0.0;  // argmin of gmse_nw
    std::vector<BandwidthRow> table;
};

BandwidthSelection select_bandwidth(const Scenario& scenario, const std::vector<double>& grid,
                                    const EstimatorConfig& base = {}, int jobs = 1);

//! Fixed -> h; RateRule -> n^{-1/3}; GridSelect -> select_bandwidth argmin.
double resolve_bandwidth(const Scenario& scenario, const EstimatorConfig& base = {},
                         int jobs = 1);

struct CoveragePoint {
    double x = 0.0;
    int evaluated = 0;
    int covered = 0;
    int degenerate = 0;
    double coverage = 0.0;
    double pivot_mean = 0.0;
    double pivot_sd = 0.0;
    bool flagged = false;          // > 5% degenerate intervals
    std::vector<double> pivots;    // standardized pivot samples
};

struct CoverageReport {
    Scenario scenario;
    double level = 0.0;
    double bandwidth = 0.0;
    double lambda = 0.0;
    std::vector<CoveragePoint> points;
};

//! Per x: CI coverage of the true m(x) across replications, plus the
//! standardized pivot (theta_hat - m(x)) / (half_width / q) samples.
CoverageReport run_coverage_study(const Scenario& scenario, const std::vector<double>& x_points,
                                  double level, const EstimatorConfig& base = {}, int jobs = 1);

struct CurvePoint {
    double x = 0.0;
    double m_true = 0.0;
    double theta_m = 0.0;   // NaN when missing
    double theta_nw = 0.0;  // NaN when missing
    bool missing = false;
};

struct CurveTable {
    Scenario scenario;
    double bandwidth = 0.0;
    double lambda = 0.0;
    std::vector<CurvePoint> points;
};

//! One fitted replication over a fixed x grid; grid points outside the
//! realized covariate range (or failing locally) are recorded as missing.
CurveTable emit_curve_data(const Scenario& scenario, const std::vector<double>& x_grid,
                           double bandwidth, const EstimatorConfig& base = {});

}  // namespace censreg

#endif
