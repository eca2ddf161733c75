#ifndef CENSREG_IO_HPP
#define CENSREG_IO_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "censreg/estimator.hpp"
#include "censreg/km.hpp"
#include "censreg/observation.hpp"
#include "censreg/simulation.hpp"

namespace censreg {

enum class ReportFormat { Csv, Json };

ReportFormat format_from_name(const std::string& name);
std::string format_name(ReportFormat format);

//! Shortest decimal string that parses back to exactly v.
std::string dtos(double v);

//! CSV with a required header whose last two columns are "y","delta";
//! the covariate dimension is the number of preceding columns.
Dataset read_dataset(const std::string& path);
void write_dataset(const Dataset& data, const std::string& path, ReportFormat format);

//! Scenario JSON uses the field names of the Scenario type verbatim;
//! bandwidth_policy is {"kind": "fixed"|"grid_select"|"rate_rule", ...}.
nlohmann::ordered_json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& j);
Scenario read_scenario(const std::string& path);
void write_scenario(const Scenario& scenario, const std::string& path);

//! Provenance echoed into every report header.
struct ReportMeta {
    std::string command;
    std::string psi;
    std::string kernel;
};

//! CSV form writes one row per replication plus a JSON summary sidecar
//! (path with .csv swapped for .summary.json); JSON form is self-contained.
void write_report(const GmseReport& report, const std::string& path, ReportFormat format,
                  const ReportMeta& meta);
GmseReport read_gmse_report(const std::string& path);

void write_report(const BandwidthSelection& sel, const Scenario& scenario,
                  const std::string& path, ReportFormat format, const ReportMeta& meta);
void write_report(const CoverageReport& report, const std::string& path, ReportFormat format,
                  const ReportMeta& meta);
void write_report(const CurveTable& table, const std::string& path, ReportFormat format,
                  const ReportMeta& meta);
void write_km_report(const KMFit& fit, const std::string& path, ReportFormat format,
                     const ReportMeta& meta);

struct FitRow {
    std::vector<double> x;
    double theta_m = 0.0;
    double theta_nw = 0.0;
};

void write_fit_table(const std::vector<FitRow>& rows, const std::string& path,
                     ReportFormat format, const ReportMeta& meta);

struct CIRow {
    std::vector<double> x;
    CIResult ci;
};

void write_ci_table(const std::vector<CIRow>& rows, const std::string& path, ReportFormat format,
                    const ReportMeta& meta);

struct RobustnessRow {
    double factor = 0.0;
    double gmse_m = 0.0;
    double gmse_nw = 0.0;
    double ratio = 0.0;  // gmse_nw / gmse_m
};

void write_robustness_table(const std::vector<RobustnessRow>& rows, const Scenario& scenario,
                            const std::string& path, ReportFormat format,
                            const ReportMeta& meta);

}  // namespace censreg

#endif
