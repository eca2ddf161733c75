#include "censreg/simulation.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "censreg/errors.hpp"
#include "censreg/km.hpp"
#include "censreg/stats.hpp"

namespace censreg {

namespace {

constexpr std::uint64_t kCalibrationStream = 0x63616c6962ULL;

//! Runs body(0..count-1); worker threads pull indices from a shared counter,
//! results land in index-addressed slots so the schedule cannot matter.
void run_indexed(int count, int jobs, const std::function<void(int)>& body) {
    if (jobs <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    const int workers = std::min(jobs, count);
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

EstimatorConfig study_config(const EstimatorConfig& base, double bandwidth) {
    EstimatorConfig cfg = base;
    cfg.bandwidth = bandwidth;
    cfg.kernel.dimension = 1;
    cfg.validate(1);
    return cfg;
}

double censored_fraction(const Dataset& obs) {
    std::size_t censored = 0;
    for (const auto& o : obs) censored += (o.delta == 0);
    return static_cast<double>(censored) / static_cast<double>(obs.size());
}

}  // namespace

double regression_model(Model model, double x) {
    switch (model) {
        case Model::M1: return x + 2.0 * std::exp(-16.0 * x * x);
        case Model::M2: return x;
        case Model::M3: return x * x + 1.0;
    }
    throw InvalidConfig("unknown model");
}

Model model_from_name(const std::string& name) {
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "m1") return Model::M1;
    if (s == "m2") return Model::M2;
    if (s == "m3") return Model::M3;
    throw InvalidConfig("unknown model name: " + name);
}

std::string model_name(Model model) {
    switch (model) {
        case Model::M1: return "m1";
        case Model::M2: return "m2";
        case Model::M3: return "m3";
    }
    throw InvalidConfig("unknown model");
}

std::vector<double> default_bandwidth_grid() {
    std::vector<double> grid;
    for (int i = 0; i < 48; ++i) grid.push_back(0.05 + 0.02 * i);
    return grid;
}

void Scenario::validate() const {
    if (n < 1) throw InvalidConfig("scenario n must be >= 1");
    if (replications < 1) throw InvalidConfig("scenario replications must be >= 1");
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw InvalidConfig("scenario sigma must be finite and >= 0");
    if (target_cr.has_value() == fixed_rate.has_value())
        throw InvalidConfig("scenario needs exactly one of target_cr / fixed_rate");
    if (target_cr && !(*target_cr > 0.0 && *target_cr < 1.0))
        throw InvalidConfig("target_cr must lie in (0, 1)");
    if (fixed_rate && !(*fixed_rate > 0.0))
        throw InvalidConfig("fixed_rate must be > 0");
    if (contamination) {
        if (!(contamination->fraction > 0.0 && contamination->fraction < 1.0))
            throw InvalidConfig("contamination fraction must lie in (0, 1)");
        if (!(contamination->factor > 1.0))
            throw InvalidConfig("contamination factor must be > 1");
    }
    if (bandwidth_policy.kind == BandwidthPolicy::Kind::Fixed &&
        !(bandwidth_policy.fixed_h > 0.0))
        throw InvalidConfig("fixed bandwidth must be > 0");
    for (double h : bandwidth_policy.grid)
        if (!(h > 0.0)) throw InvalidConfig("bandwidth grid entries must be > 0");
}

std::vector<double> covariate_path(int n, const std::function<double()>& innovation, double x0,
                                   int burn_in) {
    if (n < 1) throw InvalidConfig("path length must be >= 1");
    if (burn_in < 0) throw InvalidConfig("burn-in must be >= 0");
    double x = x0;
    for (int i = 0; i < burn_in; ++i) x = 0.4 * x + innovation();
    std::vector<double> path(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        x = 0.4 * x + innovation();
        path[static_cast<std::size_t>(i)] = x;
    }
    return path;
}

std::vector<double> gen_covariate_path(int n, std::mt19937_64& rng) {
    std::bernoulli_distribution innov(0.5);
    return covariate_path(n, [&] { return innov(rng) ? 1.0 : 0.0; });
}

double calibrate_censoring_rate(Model model, double target_cr, int n_pilot, std::mt19937_64& rng,
                                double sigma) {
    if (n_pilot < 1) throw InvalidConfig("pilot size must be >= 1");
    if (!(target_cr > 0.0 && target_cr < 1.0)) throw UnreachableCR(target_cr);

    std::bernoulli_distribution innov(0.5);
    const auto xs = covariate_path(n_pilot, [&] { return innov(rng) ? 1.0 : 0.0; });
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> t(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        t[i] = regression_model(model, xs[i]) + sigma * noise(rng);

    // Censored means C < T; averaging P(C < T | T) = 1 - e^{-lambda T+} over the
    // pilot responses gives a smooth monotone curve for the bisection.
    const auto cr_at = [&](double lambda) {
        double acc = 0.0;
        for (double ti : t)
            if (ti > 0.0) acc += 1.0 - std::exp(-lambda * ti);
        return acc / static_cast<double>(t.size());
    };

    double lo = 1e-4;
    double hi = 1e4;
    if (cr_at(lo) > target_cr || cr_at(hi) < target_cr) throw UnreachableCR(target_cr);
    for (int iter = 0; iter < 200 && (hi - lo) > 1e-12 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (cr_at(mid) < target_cr)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double resolve_censoring_rate(const Scenario& scenario) {
    scenario.validate();
    if (scenario.fixed_rate) return *scenario.fixed_rate;
    auto rng = child_rng(scenario.seed, kCalibrationStream);
    return calibrate_censoring_rate(scenario.model, *scenario.target_cr, 100000, rng,
                                    scenario.sigma);
}

SimulatedData gen_dataset(const Scenario& scenario, double lambda, std::mt19937_64& rng) {
    scenario.validate();
    if (!(lambda > 0.0)) throw InvalidConfig("censoring rate must be > 0");
    const auto xs = gen_covariate_path(scenario.n, rng);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::exponential_distribution<double> censor(lambda);

    SimulatedData data;
    data.obs.resize(xs.size());
    data.t_true.resize(xs.size());
    data.c_true.resize(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double t = regression_model(scenario.model, xs[i]) + scenario.sigma * noise(rng);
        const double c = censor(rng);
        data.t_true[i] = t;
        data.c_true[i] = c;
        data.obs[i].x = {xs[i]};
        data.obs[i].y = std::min(t, c);
        data.obs[i].delta = t <= c ? 1 : 0;
    }
    return data;
}

SimulatedData gen_dataset(const Scenario& scenario, std::mt19937_64& rng) {
    return gen_dataset(scenario, resolve_censoring_rate(scenario), rng);
}

void contaminate(SimulatedData& data, double fraction, double factor, std::mt19937_64& rng,
                 bool multiply_observed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw InvalidConfig("contamination fraction must lie in (0, 1)");
    if (!(factor > 0.0)) throw InvalidConfig("contamination factor must be > 0");
    const std::size_t n = data.obs.size();
    if (n == 0) throw EmptyData();

    const auto k = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(n) - 1e-12));
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = idx[i];
        if (multiply_observed) {
            data.obs[j].y *= factor;
        } else {
            data.t_true[j] *= factor;
            data.obs[j].y = std::min(data.t_true[j], data.c_true[j]);
            data.obs[j].delta = data.t_true[j] <= data.c_true[j] ? 1 : 0;
        }
    }
}

namespace {

struct ReplicationResult {
    double mse_m = 0.0;
    double mse_nw = 0.0;
    int skipped_m = 0;
    int skipped_nw = 0;
    double censored = 0.0;
};

ReplicationResult one_gmse_replication(const Scenario& scenario, double lambda,
                                       const EstimatorConfig& cfg, int b) {
    auto rng = child_rng(scenario.seed, static_cast<std::uint64_t>(b));
    SimulatedData data = gen_dataset(scenario, lambda, rng);
    if (scenario.contamination)
        contaminate(data, scenario.contamination->fraction, scenario.contamination->factor, rng,
                    scenario.contamination->multiply_observed);

    const KMFit km = fit_km(data.obs);
    const auto cw = detail::censor_weights(data.obs, km, cfg.km_floor);

    ReplicationResult out;
    out.censored = censored_fraction(data.obs);
    double sum_m = 0.0;
    double sum_nw = 0.0;
    for (const auto& o : data.obs) {
        const double truth = regression_model(scenario.model, o.x[0]);
        try {
            const double est = detail::solve_with(data.obs, cw, o.x, cfg);
            sum_m += (est - truth) * (est - truth);
        } catch (const NoLocalData&) {
            ++out.skipped_m;
        }
        try {
            const double est = detail::nw_with(data.obs, cw, o.x, cfg);
            sum_nw += (est - truth) * (est - truth);
        } catch (const NoLocalData&) {
            ++out.skipped_nw;
        }
    }
    const auto n = static_cast<int>(data.obs.size());
    out.mse_m = n > out.skipped_m ? sum_m / (n - out.skipped_m)
                                  : std::numeric_limits<double>::quiet_NaN();
    out.mse_nw = n > out.skipped_nw ? sum_nw / (n - out.skipped_nw)
                                    : std::numeric_limits<double>::quiet_NaN();
    return out;
}

}  // namespace

GmseReport run_gmse_study(const Scenario& scenario, double bandwidth, const EstimatorConfig& base,
                          int jobs) {
    scenario.validate();
    const EstimatorConfig cfg = study_config(base, bandwidth);
    const double lambda = resolve_censoring_rate(scenario);
    const int B = scenario.replications;

    std::vector<ReplicationResult> results(static_cast<std::size_t>(B));
    run_indexed(B, jobs,
                [&](int b) { results[static_cast<std::size_t>(b)] =
                                 one_gmse_replication(scenario, lambda, cfg, b); });

    GmseReport report;
    report.scenario = scenario;
    report.bandwidth = bandwidth;
    report.lambda = lambda;
    double cr_acc = 0.0;
    for (const auto& r : results) {
        report.per_replication_mse_m.push_back(r.mse_m);
        report.per_replication_mse_nw.push_back(r.mse_nw);
        report.skipped_m.push_back(r.skipped_m);
        report.skipped_nw.push_back(r.skipped_nw);
        const int worst = std::max(r.skipped_m, r.skipped_nw);
        report.flagged.push_back(worst * 20 > scenario.n ? 1 : 0);
        cr_acc += r.censored;
    }
    report.gmse_m = mean_of(report.per_replication_mse_m);
    report.gmse_nw = mean_of(report.per_replication_mse_nw);
    report.realized_cr = cr_acc / static_cast<double>(B);
    return report;
}

BandwidthSelection select_bandwidth(const Scenario& scenario, const std::vector<double>& grid,
                                    const EstimatorConfig& base, int jobs) {
    if (grid.empty()) throw InvalidConfig("bandwidth grid must be non-empty");
    BandwidthSelection sel;
    for (double h : grid) {
        const GmseReport rep = run_gmse_study(scenario, h, base, jobs);
        sel.table.push_back({h, rep.gmse_m, rep.gmse_nw});
    }
    const auto better = [](double a, double b) { return a < b; };
    sel.selected_h = sel.table.front().h;
    sel.selected_h_nw = sel.table.front().h;
    double best_m = sel.table.front().gmse_m;
    double best_nw = sel.table.front().gmse_nw;
    for (const auto& row : sel.table) {
        if (better(row.gmse_m, best_m)) {
            best_m = row.gmse_m;
            sel.selected_h = row.h;
        }
        if (better(row.gmse_nw, best_nw)) {
            best_nw = row.gmse_nw;
            sel.selected_h_nw = row.h;
        }
    }
    return sel;
}

double resolve_bandwidth(const Scenario& scenario, const EstimatorConfig& base, int jobs) {
    scenario.validate();
    switch (scenario.bandwidth_policy.kind) {
        case BandwidthPolicy::Kind::Fixed:
            return scenario.bandwidth_policy.fixed_h;
        case BandwidthPolicy::Kind::RateRule:
            return std::pow(static_cast<double>(scenario.n), -1.0 / 3.0);
        case BandwidthPolicy::Kind::GridSelect: {
            const auto& grid = scenario.bandwidth_policy.grid.empty()
                                   ? default_bandwidth_grid()
                                   : scenario.bandwidth_policy.grid;
            return select_bandwidth(scenario, grid, base, jobs).selected_h;
        }
    }
    throw InvalidConfig("unknown bandwidth policy");
}

CoverageReport run_coverage_study(const Scenario& scenario, const std::vector<double>& x_points,
                                  double level, const EstimatorConfig& base, int jobs) {
    scenario.validate();
    if (x_points.empty()) throw InvalidConfig("coverage study needs at least one x point");
    if (!(level > 0.0 && level < 1.0)) throw InvalidConfig("level must lie in (0, 1)");

    const double bandwidth = resolve_bandwidth(scenario, base, jobs);
    const EstimatorConfig cfg = study_config(base, bandwidth);
    const double lambda = resolve_censoring_rate(scenario);
    const double q = normal_quantile(1.0 - 0.5 * (1.0 - level));
    const int B = scenario.replications;
    const std::size_t nx = x_points.size();

    struct Cell {
        bool ok = false;
        bool covered = false;
        double pivot = 0.0;
    };
    std::vector<std::vector<Cell>> cells(static_cast<std::size_t>(B),
                                         std::vector<Cell>(nx));

    run_indexed(B, jobs, [&](int b) {
        auto rng = child_rng(scenario.seed, static_cast<std::uint64_t>(b));
        SimulatedData data = gen_dataset(scenario, lambda, rng);
        if (scenario.contamination)
            contaminate(data, scenario.contamination->fraction, scenario.contamination->factor,
                        rng, scenario.contamination->multiply_observed);
        const KMFit km = fit_km(data.obs);
        for (std::size_t j = 0; j < nx; ++j) {
            const double truth = regression_model(scenario.model, x_points[j]);
            const std::array<double, 1> x{x_points[j]};
            Cell& cell = cells[static_cast<std::size_t>(b)][j];
            try {
                const CIResult ci = confidence_interval(data.obs, km, x, cfg, level);
                cell.ok = true;
                cell.covered = std::abs(ci.theta_hat - truth) <= ci.half_width;
                cell.pivot = (ci.theta_hat - truth) / (ci.half_width / q);
            } catch (const DegenerateCI&) {
            } catch (const NoLocalData&) {
            } catch (const NoSignChange&) {
            }
        }
    });

    CoverageReport report;
    report.scenario = scenario;
    report.level = level;
    report.bandwidth = bandwidth;
    report.lambda = lambda;
    for (std::size_t j = 0; j < nx; ++j) {
        CoveragePoint pt;
        pt.x = x_points[j];
        for (int b = 0; b < B; ++b) {
            const Cell& cell = cells[static_cast<std::size_t>(b)][j];
            if (!cell.ok) {
                ++pt.degenerate;
                continue;
            }
            ++pt.evaluated;
            pt.covered += cell.covered ? 1 : 0;
            pt.pivots.push_back(cell.pivot);
        }
        pt.coverage = pt.evaluated > 0
                          ? static_cast<double>(pt.covered) / pt.evaluated
                          : std::numeric_limits<double>::quiet_NaN();
        pt.pivot_mean = pt.pivots.empty() ? std::numeric_limits<double>::quiet_NaN()
                                          : mean_of(pt.pivots);
        pt.pivot_sd = pt.pivots.size() > 1 ? sample_sd(pt.pivots)
                                           : std::numeric_limits<double>::quiet_NaN();
        pt.flagged = pt.degenerate * 20 > B;
        report.points.push_back(std::move(pt));
    }
    return report;
}

CurveTable emit_curve_data(const Scenario& scenario, const std::vector<double>& x_grid,
                           double bandwidth, const EstimatorConfig& base) {
    scenario.validate();
    if (x_grid.empty()) throw InvalidConfig("curve emission needs a non-empty x grid");
    const EstimatorConfig cfg = study_config(base, bandwidth);
    const double lambda = resolve_censoring_rate(scenario);

    auto rng = child_rng(scenario.seed, 0);
    SimulatedData data = gen_dataset(scenario, lambda, rng);
    if (scenario.contamination)
        contaminate(data, scenario.contamination->fraction, scenario.contamination->factor, rng,
                    scenario.contamination->multiply_observed);
    const KMFit km = fit_km(data.obs);
    const auto cw = detail::censor_weights(data.obs, km, cfg.km_floor);

    double x_lo = std::numeric_limits<double>::infinity();
    double x_hi = -std::numeric_limits<double>::infinity();
    for (const auto& o : data.obs) {
        x_lo = std::min(x_lo, o.x[0]);
        x_hi = std::max(x_hi, o.x[0]);
    }

    CurveTable table;
    table.scenario = scenario;
    table.bandwidth = bandwidth;
    table.lambda = lambda;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double x : x_grid) {
        CurvePoint pt;
        pt.x = x;
        pt.m_true = regression_model(scenario.model, x);
        pt.theta_m = nan;
        pt.theta_nw = nan;
        pt.missing = true;
        if (x >= x_lo && x <= x_hi) {
            const std::array<double, 1> q{x};
            try {
                pt.theta_m = detail::solve_with(data.obs, cw, q, cfg);
                pt.theta_nw = detail::nw_with(data.obs, cw, q, cfg);
                pt.missing = false;
            } catch (const NoLocalData&) {
            }
        }
        table.points.push_back(pt);
    }
    return table;
}

}  // namespace censreg
