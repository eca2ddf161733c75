#include <array>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "censreg/errors.hpp"
#include "censreg/estimator.hpp"
#include "censreg/io.hpp"
#include "censreg/km.hpp"
#include "censreg/observation.hpp"
#include "censreg/simulation.hpp"
#include "censreg/stats.hpp"

namespace {

using namespace censreg;
using ordered_json = nlohmann::ordered_json;

std::string g_errors_mode = "text";

struct CliExit {
    int code;
};

void emit_error(const std::string& type, const std::string& message, int code,
                ordered_json extra = ordered_json::object()) {
    if (g_errors_mode == "json") {
        ordered_json j;
        j["error"] = ordered_json{{"type", type}, {"message", message}, {"exit_code", code}};
        for (auto it = extra.begin(); it != extra.end(); ++it) j["error"][it.key()] = it.value();
        std::cerr << j.dump() << "\n";
    } else {
        std::cerr << "error: " << message << "\n";
    }
}

struct CommonOpts {
    std::string data_path;
    std::string scenario_path;
    std::string output;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
    int jobs = 1;

    std::string psi = "algebraic_sigmoid";
    std::string kernel = "gaussian";
    std::optional<double> bandwidth;
    double km_floor = 0.01;
    double root_tol = 1e-8;
    int max_iter = 200;
    double bracket_pad = 1.0;
};

void add_common(CLI::App* sub, CommonOpts& o, bool data_allowed) {
    if (data_allowed)
        sub->add_option("--data", o.data_path, "CSV dataset with header x1,..,xd,y,delta");
    sub->add_option("--scenario", o.scenario_path, "scenario JSON file");
    sub->add_option("--seed", o.seed, "overrides the scenario seed");
    sub->add_option("--output", o.output, "output path (default: stdout)");
    sub->add_option("--format", o.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--jobs", o.jobs, "parallel replications")->check(CLI::PositiveNumber);
    sub->add_option("--psi", o.psi, "identity, algebraic_sigmoid, or huber[:c]");
    sub->add_option("--kernel", o.kernel, "indicator, epanechnikov, triweight, or gaussian");
    sub->add_option("--bandwidth", o.bandwidth, "kernel bandwidth (default: policy or n^-1/3)");
    sub->add_option("--km-floor", o.km_floor, "clamp floor for inverse survival");
    sub->add_option("--root-tol", o.root_tol, "root bracket tolerance");
    sub->add_option("--max-iter", o.max_iter, "root iteration cap");
    sub->add_option("--bracket-pad", o.bracket_pad, "initial bracket padding");
    sub->fallthrough();
}

EstimatorConfig base_config(const CommonOpts& o, int dimension) {
    EstimatorConfig cfg;
    cfg.psi = psi_from_name(o.psi);
    cfg.kernel = KernelSpec{kernel_from_name(o.kernel), dimension};
    cfg.km_floor = o.km_floor;
    cfg.root_tol = o.root_tol;
    cfg.max_iter = o.max_iter;
    cfg.bracket_pad = o.bracket_pad;
    if (o.bandwidth) cfg.bandwidth = *o.bandwidth;
    return cfg;
}

ReportMeta make_meta(const std::string& command, const EstimatorConfig& cfg) {
    return ReportMeta{command, psi_name(cfg.psi), kernel_name(cfg.kernel.family)};
}

void require_one_source(const CommonOpts& o, bool data_allowed) {
    const bool has_data = !o.data_path.empty();
    const bool has_scenario = !o.scenario_path.empty();
    if (!data_allowed) {
        if (!has_scenario) throw InvalidConfig("this subcommand requires --scenario");
        return;
    }
    if (has_data == has_scenario)
        throw InvalidConfig("exactly one of --data or --scenario is required");
}

Scenario load_scenario(const CommonOpts& o) {
    Scenario sc = read_scenario(o.scenario_path);
    if (o.seed) sc.seed = *o.seed;
    return sc;
}

//! Dataset for fit/ci/km: the file verbatim, or replication 0 of the scenario.
Dataset load_input_data(const CommonOpts& o, std::optional<Scenario>& sc_out) {
    if (!o.data_path.empty()) return read_dataset(o.data_path);
    Scenario sc = load_scenario(o);
    auto rng = child_rng(sc.seed, 0);
    SimulatedData sim = gen_dataset(sc, rng);
    if (sc.contamination)
        contaminate(sim, sc.contamination->fraction, sc.contamination->factor, rng,
                    sc.contamination->multiply_observed);
    sc_out = sc;
    return std::move(sim.obs);
}

std::vector<std::vector<double>> parse_points(const std::vector<std::string>& tokens,
                                              std::size_t d) {
    std::vector<std::vector<double>> pts;
    for (const auto& tok : tokens) {
        std::vector<double> x;
        std::size_t start = 0;
        while (start <= tok.size()) {
            const std::size_t comma = tok.find(',', start);
            const std::string piece =
                comma == std::string::npos ? tok.substr(start) : tok.substr(start, comma - start);
            try {
                x.push_back(std::stod(piece));
            } catch (const std::exception&) {
                throw InvalidConfig("bad --x value '" + tok + "'");
            }
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (x.size() != d)
            throw InvalidConfig("--x point '" + tok + "' has dimension " +
                                std::to_string(x.size()) + ", data has " + std::to_string(d));
        pts.push_back(std::move(x));
    }
    return pts;
}

std::vector<std::vector<double>> default_grid(const Dataset& data, int points) {
    double lo = data.front().x[0];
    double hi = lo;
    for (const auto& o : data) {
        lo = std::min(lo, o.x[0]);
        hi = std::max(hi, o.x[0]);
    }
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < points; ++i)
        pts.push_back({lo + (hi - lo) * i / static_cast<double>(points - 1)});
    return pts;
}

double bandwidth_for(const CommonOpts& o, const std::optional<Scenario>& sc,
                     const EstimatorConfig& cfg, std::size_t n) {
    if (o.bandwidth) return *o.bandwidth;
    if (sc) return resolve_bandwidth(*sc, cfg, o.jobs);
    return std::pow(static_cast<double>(n), -1.0 / 3.0);
}

struct FitOpts {
    std::vector<std::string> x_tokens;
    int grid_points = 101;
};

void run_fit(const CommonOpts& o, const FitOpts& fo) {
    require_one_source(o, true);
    std::optional<Scenario> sc;
    const Dataset data = load_input_data(o, sc);
    const std::size_t d = dimension_of(data);
    EstimatorConfig cfg = base_config(o, static_cast<int>(d));
    cfg.bandwidth = bandwidth_for(o, sc, cfg, data.size());

    std::vector<std::vector<double>> pts;
    if (!fo.x_tokens.empty())
        pts = parse_points(fo.x_tokens, d);
    else if (d == 1)
        pts = default_grid(data, fo.grid_points);
    else
        throw InvalidConfig("--x is required for multi-dimensional covariates");

    const KMFit km = fit_km(data);
    std::vector<FitRow> rows;
    for (const auto& x : pts) {
        FitRow row;
        row.x = x;
        try {
            row.theta_m = solve_m_estimator(data, km, x, cfg);
            row.theta_nw = nw_estimator(data, km, x, cfg);
        } catch (const NoLocalData& e) {
            emit_error("no_local_data", e.what(), 4,
                       ordered_json{{"x", e.x}, {"bandwidth", e.bandwidth}});
            throw CliExit{4};
        }
        rows.push_back(std::move(row));
    }
    write_fit_table(rows, o.output, format_from_name(o.format), make_meta("fit", cfg));
}

struct CiOpts {
    std::vector<std::string> x_tokens;
    double level = 0.95;
    int grid_points = 101;
};

void run_ci(const CommonOpts& o, const CiOpts& co) {
    require_one_source(o, true);
    std::optional<Scenario> sc;
    const Dataset data = load_input_data(o, sc);
    const std::size_t d = dimension_of(data);
    EstimatorConfig cfg = base_config(o, static_cast<int>(d));
    cfg.bandwidth = bandwidth_for(o, sc, cfg, data.size());

    std::vector<std::vector<double>> pts;
    if (!co.x_tokens.empty())
        pts = parse_points(co.x_tokens, d);
    else if (d == 1)
        pts = default_grid(data, co.grid_points);
    else
        throw InvalidConfig("--x is required for multi-dimensional covariates");

    const KMFit km = fit_km(data);
    std::vector<CIRow> rows;
    for (const auto& x : pts) {
        try {
            rows.push_back(CIRow{x, confidence_interval(data, km, x, cfg, co.level)});
        } catch (const Error& e) {
            std::string type = "estimation";
            if (dynamic_cast<const DegenerateCI*>(&e)) type = "degenerate_ci";
            if (dynamic_cast<const NoLocalData*>(&e)) type = "no_local_data";
            if (dynamic_cast<const NoSignChange*>(&e)) type = "no_sign_change";
            emit_error(type, std::string(e.what()) + " at x = " + dtos(x[0]), 4,
                       ordered_json{{"x", x}});
            throw CliExit{4};
        }
    }
    write_ci_table(rows, o.output, format_from_name(o.format), make_meta("ci", cfg));
}

void run_km(const CommonOpts& o) {
    require_one_source(o, true);
    std::optional<Scenario> sc;
    const Dataset data = load_input_data(o, sc);
    const EstimatorConfig cfg = base_config(o, static_cast<int>(dimension_of(data)));
    write_km_report(fit_km(data), o.output, format_from_name(o.format), make_meta("km", cfg));
}

void run_simulate(const CommonOpts& o) {
    require_one_source(o, false);
    Scenario sc = load_scenario(o);
    auto rng = child_rng(sc.seed, 0);
    SimulatedData sim = gen_dataset(sc, rng);
    if (sc.contamination)
        contaminate(sim, sc.contamination->fraction, sc.contamination->factor, rng,
                    sc.contamination->multiply_observed);
    write_dataset(sim.obs, o.output, format_from_name(o.format));
}

void run_gmse(const CommonOpts& o) {
    require_one_source(o, false);
    const Scenario sc = load_scenario(o);
    EstimatorConfig cfg = base_config(o, 1);
    const double h = o.bandwidth ? *o.bandwidth : resolve_bandwidth(sc, cfg, o.jobs);
    const GmseReport report = run_gmse_study(sc, h, cfg, o.jobs);
    write_report(report, o.output, format_from_name(o.format), make_meta("gmse", cfg));
}

struct BandwidthOpts {
    std::vector<double> grid;
};

void run_bandwidth(const CommonOpts& o, const BandwidthOpts& bo) {
    require_one_source(o, false);
    const Scenario sc = load_scenario(o);
    EstimatorConfig cfg = base_config(o, 1);
    std::vector<double> grid = bo.grid;
    if (grid.empty()) grid = sc.bandwidth_policy.grid;
    if (grid.empty()) grid = default_bandwidth_grid();
    const BandwidthSelection sel = select_bandwidth(sc, grid, cfg, o.jobs);
    write_report(sel, sc, o.output, format_from_name(o.format), make_meta("bandwidth", cfg));
}

struct RobustnessOpts {
    std::vector<double> factors{5.0, 10.0, 20.0};
};

void run_robustness(const CommonOpts& o, const RobustnessOpts& ro) {
    require_one_source(o, false);
    Scenario sc = load_scenario(o);
    if (!sc.contamination) sc.contamination = Contamination{0.3, ro.factors.front(), false};
    EstimatorConfig cfg = base_config(o, 1);
    const double h = o.bandwidth ? *o.bandwidth : resolve_bandwidth(sc, cfg, o.jobs);

    std::vector<RobustnessRow> rows;
    for (double k : ro.factors) {
        Scenario swept = sc;
        swept.contamination->factor = k;
        const GmseReport rep = run_gmse_study(swept, h, cfg, o.jobs);
        rows.push_back(RobustnessRow{k, rep.gmse_m, rep.gmse_nw, rep.gmse_nw / rep.gmse_m});
    }
    write_robustness_table(rows, sc, o.output, format_from_name(o.format),
                           make_meta("robustness", cfg));
}

struct CoverageOpts {
    std::vector<double> x_points;
    double level = 0.95;
};

void run_coverage(const CommonOpts& o, const CoverageOpts& co) {
    require_one_source(o, false);
    const Scenario sc = load_scenario(o);
    EstimatorConfig cfg = base_config(o, 1);
    std::vector<double> xs = co.x_points;
    if (xs.empty()) xs = {0.3, 0.5, 5.0 / 6.0, 1.1, 1.3};
    Scenario effective = sc;
    if (o.bandwidth) {
        effective.bandwidth_policy.kind = BandwidthPolicy::Kind::Fixed;
        effective.bandwidth_policy.fixed_h = *o.bandwidth;
    }
    const CoverageReport report = run_coverage_study(effective, xs, co.level, cfg, o.jobs);
    write_report(report, o.output, format_from_name(o.format), make_meta("coverage", cfg));
}

struct CurveOpts {
    double grid_from = 0.0;
    double grid_to = 5.0 / 3.0;
    int grid_points = 201;
};

void run_curves(const CommonOpts& o, const CurveOpts& co) {
    require_one_source(o, false);
    const Scenario sc = load_scenario(o);
    EstimatorConfig cfg = base_config(o, 1);
    const double h = o.bandwidth ? *o.bandwidth : resolve_bandwidth(sc, cfg, o.jobs);
    if (co.grid_points < 2) throw InvalidConfig("--grid-points must be >= 2");
    std::vector<double> grid;
    for (int i = 0; i < co.grid_points; ++i)
        grid.push_back(co.grid_from +
                       (co.grid_to - co.grid_from) * i / static_cast<double>(co.grid_points - 1));
    const CurveTable table = emit_curve_data(sc, grid, h, cfg);
    write_report(table, o.output, format_from_name(o.format), make_meta("curves", cfg));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernel-weighted M-estimation for right-censored responses"};
    app.require_subcommand(1);
    app.add_option("--errors", g_errors_mode, "error reporting: text or json")
        ->check(CLI::IsMember({"text", "json"}));

    CommonOpts fit_o, ci_o, km_o, sim_o, gmse_o, bw_o, rob_o, cov_o, cur_o;
    FitOpts fit_x;
    CiOpts ci_x;
    BandwidthOpts bw_x;
    RobustnessOpts rob_x;
    CoverageOpts cov_x;
    CurveOpts cur_x;

    auto* fit = app.add_subcommand("fit", "evaluate both estimators on an x grid");
    add_common(fit, fit_o, true);
    fit->add_option("--x", fit_x.x_tokens, "query point (repeatable; comma-separated for d>1)");
    fit->add_option("--grid-points", fit_x.grid_points, "default grid size over the data range");

    auto* ci = app.add_subcommand("ci", "fit plus confidence intervals");
    add_common(ci, ci_o, true);
    ci->add_option("--x", ci_x.x_tokens, "query point (repeatable)");
    ci->add_option("--level", ci_x.level, "confidence level (default 0.95)");
    ci->add_option("--grid-points", ci_x.grid_points, "default grid size over the data range");

    auto* km = app.add_subcommand("km", "dump the censoring survival step function");
    add_common(km, km_o, true);

    auto* sim = app.add_subcommand("simulate", "write one generated dataset");
    add_common(sim, sim_o, false);

    auto* gmse = app.add_subcommand("gmse", "replication study of in-sample GMSE");
    add_common(gmse, gmse_o, false);

    auto* bw = app.add_subcommand("bandwidth", "GMSE over a bandwidth grid with argmin");
    add_common(bw, bw_o, false);
    bw->add_option("--grid", bw_x.grid, "explicit bandwidth grid values");

    auto* rob = app.add_subcommand("robustness", "GMSE sweep over contamination factors");
    add_common(rob, rob_o, false);
    rob->add_option("--factors", rob_x.factors, "contamination factors (default 5 10 20)");

    auto* cov = app.add_subcommand("coverage", "CI coverage and pivot study");
    add_common(cov, cov_o, false);
    cov->add_option("--x", cov_x.x_points, "evaluation points (default interior set)");
    cov->add_option("--level", cov_x.level, "confidence level (default 0.95)");

    auto* cur = app.add_subcommand("curves", "fitted curves over an x grid, one replication");
    add_common(cur, cur_o, false);
    cur->add_option("--grid-from", cur_x.grid_from, "grid start (default 0)");
    cur->add_option("--grid-to", cur_x.grid_to, "grid end (default 5/3)");
    cur->add_option("--grid-points", cur_x.grid_points, "grid size (default 201)");

    fit->callback([&] { run_fit(fit_o, fit_x); });
    ci->callback([&] { run_ci(ci_o, ci_x); });
    km->callback([&] { run_km(km_o); });
    sim->callback([&] { run_simulate(sim_o); });
    gmse->callback([&] { run_gmse(gmse_o); });
    bw->callback([&] { run_bandwidth(bw_o, bw_x); });
    rob->callback([&] { run_robustness(rob_o, rob_x); });
    cov->callback([&] { run_coverage(cov_o, cov_x); });
    cur->callback([&] { run_curves(cur_o, cur_x); });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const CliExit& e) {
        return e.code;
    } catch (const NoLocalData& e) {
        emit_error("no_local_data", e.what(), 4,
                   ordered_json{{"x", e.x}, {"bandwidth", e.bandwidth}});
        return 4;
    } catch (const NoSignChange& e) {
        emit_error("no_sign_change", e.what(), 4, ordered_json{{"score_sign", e.score_sign}});
        return 4;
    } catch (const MaxIterExceeded& e) {
        emit_error("max_iter_exceeded", e.what(), 4);
        return 4;
    } catch (const DegenerateCI& e) {
        emit_error("degenerate_ci", e.what(), 4, ordered_json{{"which", e.which}});
        return 4;
    } catch (const InvalidFloor& e) {
        emit_error("invalid_floor", e.what(), 2);
        return 2;
    } catch (const InvalidConfig& e) {
        emit_error("invalid_config", e.what(), 2);
        return 2;
    } catch (const MalformedRow& e) {
        emit_error("malformed_row", e.what(), 3, ordered_json{{"line", e.line}});
        return 3;
    } catch (const BadDelta& e) {
        emit_error("bad_delta", e.what(), 3, ordered_json{{"line", e.line}});
        return 3;
    } catch (const Error& e) {
        emit_error("data", e.what(), 3);
        return 3;
    } catch (const std::exception& e) {
        emit_error("internal", e.what(), 3);
        return 3;
    }
}
