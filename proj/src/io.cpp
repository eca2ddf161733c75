#include "censreg/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>

#include "censreg/errors.hpp"

namespace censreg {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trimmed(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(trimmed(line.substr(start)));
            return out;
        }
        out.push_back(trimmed(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

bool parse_double(const std::string& tok, double& out) {
    const char* begin = tok.data();
    const char* end = begin + tok.size();
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc{} && res.ptr == end && !tok.empty();
}

bool to_stdout(const std::string& path) { return path.empty() || path == "-"; }

void with_output(const std::string& path, const std::function<void(std::ostream&)>& body) {
    if (to_stdout(path)) {
        body(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    body(out);
    out.flush();
    if (!out) throw IoError("write to " + path + " failed");
}

//! Blank field for NaN so missing values stay missing in CSV.
std::string csv_num(double v) { return std::isnan(v) ? std::string() : dtos(v); }

void write_meta(std::ostream& out, const ReportMeta& meta) {
    out << "# command: " << meta.command << "\n";
    out << "# psi: " << meta.psi << "\n";
    out << "# kernel: " << meta.kernel << "\n";
}

void write_scenario_meta(std::ostream& out, const Scenario& sc) {
    out << "# model: " << model_name(sc.model) << "\n";
    out << "# n: " << sc.n << "\n";
    if (sc.target_cr) out << "# target_cr: " << dtos(*sc.target_cr) << "\n";
    if (sc.fixed_rate) out << "# fixed_rate: " << dtos(*sc.fixed_rate) << "\n";
    out << "# sigma: " << dtos(sc.sigma) << "\n";
    if (sc.contamination)
        out << "# contamination: fraction=" << dtos(sc.contamination->fraction)
            << " factor=" << dtos(sc.contamination->factor)
            << (sc.contamination->multiply_observed ? " multiply_observed" : "") << "\n";
    out << "# replications: " << sc.replications << "\n";
    out << "# seed: " << sc.seed << "\n";
}

ordered_json meta_to_json(const ReportMeta& meta) {
    return ordered_json{{"command", meta.command}, {"psi", meta.psi}, {"kernel", meta.kernel}};
}

double json_double(const nlohmann::json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

void dump_json(const ordered_json& j, const std::string& path) {
    with_output(path, [&](std::ostream& out) { out << j.dump(2) << "\n"; });
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path + ": " + e.what());
    }
    return j;
}

std::string summary_sidecar_path(const std::string& path) {
    const std::string ext = ".csv";
    if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0)
        return path.substr(0, path.size() - ext.size()) + ".summary.json";
    return path + ".summary.json";
}

ordered_json gmse_summary_json(const GmseReport& r, const ReportMeta& meta) {
    ordered_json j;
    j["schema_version"] = 1;
    j["report"] = "gmse";
    j["meta"] = meta_to_json(meta);
    j["scenario"] = scenario_to_json(r.scenario);
    j["bandwidth"] = r.bandwidth;
    j["lambda"] = r.lambda;
    j["realized_cr"] = r.realized_cr;
    j["gmse_m"] = r.gmse_m;
    j["gmse_nw"] = r.gmse_nw;
    return j;
}

}  // namespace

ReportFormat format_from_name(const std::string& name) {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    throw InvalidConfig("unknown format: " + name + " (expected csv or json)");
}

std::string format_name(ReportFormat format) {
    return format == ReportFormat::Csv ? "csv" : "json";
}

std::string dtos(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

Dataset read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw EmptyFile(path);
    const auto header = split_csv(line);
    if (header.size() < 3 || header[header.size() - 2] != "y" || header.back() != "delta")
        throw MalformedRow(1, "header must be x1,..,xd,y,delta with at least one covariate");
    const std::size_t d = header.size() - 2;

    Dataset data;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;
        const auto toks = split_csv(line);
        if (toks.size() != header.size())
            throw MalformedRow(line_no, "expected " + std::to_string(header.size()) +
                                            " fields, got " + std::to_string(toks.size()));
        CensoredObservation o;
        o.x.resize(d);
        for (std::size_t i = 0; i < d; ++i)
            if (!parse_double(toks[i], o.x[i]) || !std::isfinite(o.x[i]))
                throw MalformedRow(line_no, "bad covariate value '" + toks[i] + "'");
        if (!parse_double(toks[d], o.y) || !std::isfinite(o.y))
            throw MalformedRow(line_no, "bad response value '" + toks[d] + "'");
        const std::string& dtok = toks[d + 1];
        if (dtok == "0")
            o.delta = 0;
        else if (dtok == "1")
            o.delta = 1;
        else
            throw BadDelta(line_no);
        data.push_back(std::move(o));
    }
    if (data.empty()) throw EmptyFile(path);
    return data;
}

void write_dataset(const Dataset& data, const std::string& path, ReportFormat format) {
    const std::size_t d = dimension_of(data);
    if (format == ReportFormat::Csv) {
        with_output(path, [&](std::ostream& out) {
            for (std::size_t i = 1; i <= d; ++i) out << "x" << i << ",";
            out << "y,delta\n";
            for (const auto& o : data) {
                for (double xi : o.x) out << dtos(xi) << ",";
                out << dtos(o.y) << "," << o.delta << "\n";
            }
        });
        return;
    }
    ordered_json j;
    j["schema_version"] = 1;
    ordered_json rows = ordered_json::array();
    for (const auto& o : data)
        rows.push_back(ordered_json{{"x", o.x}, {"y", o.y}, {"delta", o.delta}});
    j["observations"] = std::move(rows);
    dump_json(j, path);
}

nlohmann::ordered_json scenario_to_json(const Scenario& sc) {
    ordered_json j;
    j["schema_version"] = 1;
    j["model"] = model_name(sc.model);
    j["n"] = sc.n;
    if (sc.target_cr) j["target_cr"] = *sc.target_cr;
    if (sc.fixed_rate) j["fixed_rate"] = *sc.fixed_rate;
    j["sigma"] = sc.sigma;
    if (sc.contamination)
        j["contamination"] =
            ordered_json{{"fraction", sc.contamination->fraction},
                         {"factor", sc.contamination->factor},
                         {"multiply_observed", sc.contamination->multiply_observed}};
    ordered_json policy;
    switch (sc.bandwidth_policy.kind) {
        case BandwidthPolicy::Kind::Fixed:
            policy["kind"] = "fixed";
            policy["fixed_h"] = sc.bandwidth_policy.fixed_h;
            break;
        case BandwidthPolicy::Kind::GridSelect:
            policy["kind"] = "grid_select";
            if (!sc.bandwidth_policy.grid.empty()) policy["grid"] = sc.bandwidth_policy.grid;
            break;
        case BandwidthPolicy::Kind::RateRule:
            policy["kind"] = "rate_rule";
            break;
    }
    j["bandwidth_policy"] = std::move(policy);
    j["replications"] = sc.replications;
    j["seed"] = sc.seed;
    return j;
}

Scenario scenario_from_json(const nlohmann::json& j) {
    try {
        if (j.contains("schema_version") && j.at("schema_version").get<int>() != 1)
            throw InvalidConfig("unsupported scenario schema_version");
        Scenario sc;
        sc.model = model_from_name(j.at("model").get<std::string>());
        sc.n = j.at("n").get<int>();
        if (j.contains("target_cr")) sc.target_cr = j.at("target_cr").get<double>();
        if (j.contains("fixed_rate")) sc.fixed_rate = j.at("fixed_rate").get<double>();
        if (j.contains("sigma")) sc.sigma = j.at("sigma").get<double>();
        if (j.contains("contamination") && !j.at("contamination").is_null()) {
            const auto& c = j.at("contamination");
            Contamination cont;
            cont.fraction = c.at("fraction").get<double>();
            cont.factor = c.at("factor").get<double>();
            if (c.contains("multiply_observed"))
                cont.multiply_observed = c.at("multiply_observed").get<bool>();
            sc.contamination = cont;
        }
        if (j.contains("bandwidth_policy")) {
            const auto& p = j.at("bandwidth_policy");
            const auto kind = p.at("kind").get<std::string>();
            if (kind == "fixed") {
                sc.bandwidth_policy.kind = BandwidthPolicy::Kind::Fixed;
                sc.bandwidth_policy.fixed_h = p.at("fixed_h").get<double>();
            } else if (kind == "grid_select") {
                sc.bandwidth_policy.kind = BandwidthPolicy::Kind::GridSelect;
                if (p.contains("grid"))
                    sc.bandwidth_policy.grid = p.at("grid").get<std::vector<double>>();
            } else if (kind == "rate_rule") {
                sc.bandwidth_policy.kind = BandwidthPolicy::Kind::RateRule;
            } else {
                throw InvalidConfig("unknown bandwidth_policy kind: " + kind);
            }
        }
        if (j.contains("replications")) sc.replications = j.at("replications").get<int>();
        if (j.contains("seed")) sc.seed = j.at("seed").get<std::uint64_t>();
        sc.validate();
        return sc;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig(std::string("scenario json: ") + e.what());
    }
}

Scenario read_scenario(const std::string& path) { return scenario_from_json(load_json(path)); }

void write_scenario(const Scenario& scenario, const std::string& path) {
    dump_json(scenario_to_json(scenario), path);
}

void write_report(const GmseReport& r, const std::string& path, ReportFormat format,
                  const ReportMeta& meta) {
    if (format == ReportFormat::Csv) {
        with_output(path, [&](std::ostream& out) {
            write_meta(out, meta);
            write_scenario_meta(out, r.scenario);
            out << "# bandwidth: " << dtos(r.bandwidth) << "\n";
            out << "# lambda: " << dtos(r.lambda) << "\n";
            out << "# realized_cr: " << dtos(r.realized_cr) << "\n";
            out << "# gmse_m: " << dtos(r.gmse_m) << "\n";
            out << "# gmse_nw: " << dtos(r.gmse_nw) << "\n";
            out << "replication,mse_m,mse_nw,skipped_m,skipped_nw,flagged\n";
            for (std::size_t b = 0; b < r.per_replication_mse_m.size(); ++b)
                out << b << "," << csv_num(r.per_replication_mse_m[b]) << ","
                    << csv_num(r.per_replication_mse_nw[b]) << "," << r.skipped_m[b] << ","
                    << r.skipped_nw[b] << "," << int(r.flagged[b]) << "\n";
        });
        if (!to_stdout(path)) dump_json(gmse_summary_json(r, meta), summary_sidecar_path(path));
        return;
    }
    ordered_json j = gmse_summary_json(r, meta);
    j["per_replication_mse_m"] = r.per_replication_mse_m;
    j["per_replication_mse_nw"] = r.per_replication_mse_nw;
    j["skipped_m"] = r.skipped_m;
    j["skipped_nw"] = r.skipped_nw;
    j["flagged"] = std::vector<int>(r.flagged.begin(), r.flagged.end());
    dump_json(j, path);
}

GmseReport read_gmse_report(const std::string& path) {
    const auto j = load_json(path);
    try {
        GmseReport r;
        r.scenario = scenario_from_json(j.at("scenario"));
        r.bandwidth = json_double(j.at("bandwidth"));
        r.lambda = json_double(j.at("lambda"));
        r.realized_cr = json_double(j.at("realized_cr"));
        r.gmse_m = json_double(j.at("gmse_m"));
        r.gmse_nw = json_double(j.at("gmse_nw"));
        for (const auto& v : j.at("per_replication_mse_m"))
            r.per_replication_mse_m.push_back(json_double(v));
        for (const auto& v : j.at("per_replication_mse_nw"))
            r.per_replication_mse_nw.push_back(json_double(v));
        r.skipped_m = j.at("skipped_m").get<std::vector<int>>();
        r.skipped_nw = j.at("skipped_nw").get<std::vector<int>>();
        for (const auto& v : j.at("flagged"))
            r.flagged.push_back(static_cast<std::uint8_t>(v.get<int>()));
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
}

void write_report(const BandwidthSelection& sel, const Scenario& scenario,
                  const std::string& path, ReportFormat format, const ReportMeta& meta) {
    if (format == ReportFormat::Csv) {
        with_output(path, [&](std::ostream& out) {
            write_meta(out, meta);
            write_scenario_meta(out, scenario);
            out << "# selected_h: " << dtos(sel.selected_h) << "\n";
            out << "# selected_h_nw: " << dtos(sel.selected_h_nw) << "\n";
            out << "h,gmse_m,gmse_nw\n";
            for (const auto& row : sel.table)
                out << dtos(row.h) << "," << csv_num(row.gmse_m) << "," << csv_num(row.gmse_nw)
                    << "\n";
        });
        return;
    }
    ordered_json j;
    j["schema_version"] = 1;
    j["report"] = "bandwidth";
    j["meta"] = meta_to_json(meta);
    j["scenario"] = scenario_to_json(scenario);
    j["selected_h"] = sel.selected_h;
    j["selected_h_nw"] = sel.selected_h_nw;
    ordered_json rows = ordered_json::array();
    for (const auto& row : sel.table)
        rows.push_back(
            ordered_json{{"h", row.h}, {"gmse_m", row.gmse_m}, {"gmse_nw", row.gmse_nw}});
    j["table"] = std::move(rows);
    dump_json(j, path);
}

void write_report(const CoverageReport& r, const std::string& path, ReportFormat format,
                  const ReportMeta& meta) {
    if (format == ReportFormat::Csv) {
        with_output(path, [&](std::ostream& out) {
            write_meta(out, meta);
            write_scenario_meta(out, r.scenario);
            out << "# level: " << dtos(r.level) << "\n";
            out << "# bandwidth: " << dtos(r.bandwidth) << "\n";
            out << "# lambda: " << dtos(r.lambda) << "\n";
            out << "x,evaluated,covered,degenerate,coverage,pivot_mean,pivot_sd,flagged\n";
            for (const auto& pt : r.points)
                out << dtos(pt.x) << "," << pt.evaluated << "," << pt.covered << ","
                    << pt.degenerate << "," << csv_num(pt.coverage) << ","
                    << csv_num(pt.pivot_mean) << "," << csv_num(pt.pivot_sd) << ","
                    << int(pt.flagged) << "\n";
        });
        return;
    }
    ordered_json j;
    j["schema_version"] = 1;
    j["report"] = "coverage";
    j["meta"] = meta_to_json(meta);
    j["scenario"] = scenario_to_json(r.scenario);
    j["level"] = r.level;
    j["bandwidth"] = r.bandwidth;
    j["lambda"] = r.lambda;
    ordered_json rows = ordered_json::array();
    for (const auto& pt : r.points)
        rows.push_back(ordered_json{{"x", pt.x},
                                    {"evaluated", pt.evaluated},
                                    {"covered", pt.covered},
                                    {"degenerate", pt.degenerate},
                                    {"coverage", pt.coverage},
                                    {"pivot_mean", pt.pivot_mean},
                                    {"pivot_sd", pt.pivot_sd},
                                    {"flagged", pt.flagged},
                                    {"pivots", pt.pivots}});
    j["points"] = std::move(rows);
    dump_json(j, path);
}

void write_report(const CurveTable& t, const std::string& path, ReportFormat format,
                  const ReportMeta& meta) {
    if (format == ReportFormat::Csv) {
        with_output(path, [&](std::ostream& out) {
            write_meta(out, meta);
            write_scenario_meta(out, t.scenario);
            out << "# bandwidth: " << dtos(t.bandwidth) << "\n";
            out << "# lambda: " << dtos(t.lambda) << "\n";
            out << "x,m_true,theta_m,theta_nw\n";
            for (const auto& pt : t.points)
                out << dtos(pt.x) << "," << dtos(pt.m_true) << "," << csv_num(pt.theta_m) << ","
                    << csv_num(pt.theta_nw) << "\n";
        });
        return;
    }
    ordered_json j;
    j["schema_version"] = 1;
    j["report"] = "curves";
    j["meta"] = meta_to_json(meta);
    j["scenario"] = scenario_to_json(t.scenario);
    j["bandwidth"] = t.bandwidth;
    j["lambda"] = t.lambda;
    ordered_json rows = ordered_json::array();
    for (const auto& pt : t.points)
        rows.push_back(ordered_json{{"x", pt.x},
                                    {"m_true", pt.m_true},
                                    {"theta_m", pt.theta_m},
                                    {"theta_nw", pt.theta_nw},
                                    {"missing", pt.missing}});
    j["points"] = std::move(rows);
    dump_json(j, path);
}

void write_km_report(const KMFit& fit, const std::string& path, ReportFormat format,
                     const ReportMeta& meta) {
    // Rows show the function as evaluated, so the terminal time reads 0 even
    // when the last observation is uncensored.
    std::vector<double> values(fit.jump_times.size());
    for (std::size_t i = 0; i < fit.jump_times.size(); ++i)
        values[i] = survival_at(fit, fit.jump_times[i]);
    if (format == ReportFormat::Csv) {
        with_output(path, [&](std::ostream& out) {
            write_meta(out, meta);
            out << "# y_max: " << dtos(fit.y_max) << "\n";
            out << "jump_time,survival_value\n";
            for (std::size_t i = 0; i < fit.jump_times.size(); ++i)
                out << dtos(fit.jump_times[i]) << "," << dtos(values[i]) << "\n";
        });
        return;
    }
    ordered_json j;
    j["schema_version"] = 1;
    j["report"] = "km";
    j["meta"] = meta_to_json(meta);
    j["jump_times"] = fit.jump_times;
    j["survival_values"] = values;
    j["y_max"] = fit.y_max;
    dump_json(j, path);
}

void write_fit_table(const std::vector<FitRow>& rows, const std::string& path,
                     ReportFormat format, const ReportMeta& meta) {
    const std::size_t d = rows.empty() ? 1 : rows.front().x.size();
    if (format == ReportFormat::Csv) {
        with_output(path, [&](std::ostream& out) {
            write_meta(out, meta);
            if (d == 1)
                out << "x,";
            else
                for (std::size_t i = 1; i <= d; ++i) out << "x" << i << ",";
            out << "theta_m,theta_nw\n";
            for (const auto& row : rows) {
                for (double xi : row.x) out << dtos(xi) << ",";
                out << csv_num(row.theta_m) << "," << csv_num(row.theta_nw) << "\n";
            }
        });
        return;
    }
    ordered_json j;
    j["schema_version"] = 1;
    j["report"] = "fit";
    j["meta"] = meta_to_json(meta);
    ordered_json arr = ordered_json::array();
    for (const auto& row : rows)
        arr.push_back(
            ordered_json{{"x", row.x}, {"theta_m", row.theta_m}, {"theta_nw", row.theta_nw}});
    j["points"] = std::move(arr);
    dump_json(j, path);
}

void write_ci_table(const std::vector<CIRow>& rows, const std::string& path, ReportFormat format,
                    const ReportMeta& meta) {
    const std::size_t d = rows.empty() ? 1 : rows.front().x.size();
    if (format == ReportFormat::Csv) {
        with_output(path, [&](std::ostream& out) {
            write_meta(out, meta);
            if (d == 1)
                out << "x,";
            else
                for (std::size_t i = 1; i <= d; ++i) out << "x" << i << ",";
            out << "theta_hat,lo,hi,level\n";
            for (const auto& row : rows) {
                for (double xi : row.x) out << dtos(xi) << ",";
                out << dtos(row.ci.theta_hat) << "," << dtos(row.ci.theta_hat - row.ci.half_width)
                    << "," << dtos(row.ci.theta_hat + row.ci.half_width) << ","
                    << dtos(row.ci.level) << "\n";
            }
        });
        return;
    }
    ordered_json j;
    j["schema_version"] = 1;
    j["report"] = "ci";
    j["meta"] = meta_to_json(meta);
    ordered_json arr = ordered_json::array();
    for (const auto& row : rows)
        arr.push_back(ordered_json{{"x", row.x},
                                   {"theta_hat", row.ci.theta_hat},
                                   {"lo", row.ci.theta_hat - row.ci.half_width},
                                   {"hi", row.ci.theta_hat + row.ci.half_width},
                                   {"level", row.ci.level},
                                   {"half_width", row.ci.half_width},
                                   {"m_hat", row.ci.m_hat},
                                   {"gamma1_hat", row.ci.gamma1_hat},
                                   {"ball_prob", row.ci.ball_prob},
                                   {"n_used", row.ci.n_used}});
    j["points"] = std::move(arr);
    dump_json(j, path);
}

void write_robustness_table(const std::vector<RobustnessRow>& rows, const Scenario& scenario,
                            const std::string& path, ReportFormat format,
                            const ReportMeta& meta) {
    if (format == ReportFormat::Csv) {
        with_output(path, [&](std::ostream& out) {
            write_meta(out, meta);
            write_scenario_meta(out, scenario);
            out << "factor,gmse_m,gmse_nw,ratio\n";
            for (const auto& row : rows)
                out << dtos(row.factor) << "," << csv_num(row.gmse_m) << ","
                    << csv_num(row.gmse_nw) << "," << csv_num(row.ratio) << "\n";
        });
        return;
    }
    ordered_json j;
    j["schema_version"] = 1;
    j["report"] = "robustness";
    j["meta"] = meta_to_json(meta);
    j["scenario"] = scenario_to_json(scenario);
    ordered_json arr = ordered_json::array();
    for (const auto& row : rows)
        arr.push_back(ordered_json{{"factor", row.factor},
                                   {"gmse_m", row.gmse_m},
                                   {"gmse_nw", row.gmse_nw},
                                   {"ratio", row.ratio}});
    j["table"] = std::move(arr);
    dump_json(j, path);
}

}  // namespace censreg
