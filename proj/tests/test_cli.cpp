// test_cli.cpp
//
// End-to-end tests of the command line binary: exit codes, error channel,
// output layout, and agreement with direct library calls. The binary path
// arrives through the CENSREG_CLI_PATH compile definition.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <censreg/estimator.hpp>
#include <censreg/io.hpp>
#include <censreg/km.hpp>

using namespace censreg;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const std::string tag = std::to_string(counter++);
    const std::string out_path = "/tmp/censreg_cli_out_" + tag;
    const std::string err_path = "/tmp/censreg_cli_err_" + tag;
    const std::string cmd =
        std::string(CENSREG_CLI_PATH) + " " + args + " >" + out_path + " 2>" + err_path;
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return r;
}

//! Small deterministic dataset shared by most cases, written once per test.
std::string write_toy_dataset(const std::string& path) {
    std::ofstream f(path);
    f << "x1,y,delta\n";
    // 20 points on a line y = 1 + x with a mix of censoring flags.
    for (int i = 0; i < 20; ++i) {
        const double x = 0.05 * i;
        const double y = 1.0 + x;
        const int delta = (i % 4 == 2) ? 0 : 1;
        f << x << "," << y << "," << delta << "\n";
    }
    return path;
}

std::string write_toy_scenario(const std::string& path, int n, int B) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["model"] = "m2";
    j["n"] = n;
    j["target_cr"] = 0.2;
    j["sigma"] = 0.01;
    j["bandwidth_policy"] = {{"kind", "fixed"}, {"fixed_h", 0.3}};
    j["replications"] = B;
    j["seed"] = 5;
    std::ofstream f(path);
    f << j.dump(2) << "\n";
    return path;
}

std::vector<std::string> data_lines(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#') lines.push_back(line);
    }
    return lines;
}

}  // namespace

TEST_CASE("cli: fit happy path writes the expected table", "[cli]") {
    const std::string data = write_toy_dataset("/tmp/censreg_cli_toy.csv");
    auto r = run_cli("fit --data " + data + " --x 0.5 --bandwidth 0.5 --output " +
                     "/tmp/censreg_cli_fit.csv");
    REQUIRE(r.exit_code == 0);
    const auto lines = data_lines(slurp("/tmp/censreg_cli_fit.csv"));
    REQUIRE(lines.size() == 2);
    REQUIRE(lines[0] == "x,theta_m,theta_nw");
    REQUIRE(lines[1].rfind("0.5,", 0) == 0);
    std::remove("/tmp/censreg_cli_fit.csv");
    std::remove(data.c_str());
}

TEST_CASE("cli: fit output matches direct library evaluation bit for bit", "[cli]") {
    const std::string path = write_toy_dataset("/tmp/censreg_cli_toy2.csv");
    auto r = run_cli("fit --data " + path + " --x 0.5 --bandwidth 0.2 --output " +
                     "/tmp/censreg_cli_fit2.csv");
    REQUIRE(r.exit_code == 0);

    // Rebuild the CLI defaults by hand and compare the formatted values.
    const Dataset data = read_dataset(path);
    EstimatorConfig cfg;
    cfg.psi = psi_from_name("algebraic_sigmoid");
    cfg.kernel = KernelSpec{KernelFamily::Gaussian, 1};
    cfg.bandwidth = 0.2;
    cfg.km_floor = 0.01;
    cfg.root_tol = 1e-8;
    cfg.max_iter = 200;
    cfg.bracket_pad = 1.0;
    const KMFit km = fit_km(data);
    const std::vector<double> x{0.5};
    const double theta_m = solve_m_estimator(data, km, x, cfg);
    const double theta_nw = nw_estimator(data, km, x, cfg);

    const auto lines = data_lines(slurp("/tmp/censreg_cli_fit2.csv"));
    REQUIRE(lines.size() == 2);
    REQUIRE(lines[1] == "0.5," + dtos(theta_m) + "," + dtos(theta_nw));
    std::remove("/tmp/censreg_cli_fit2.csv");
    std::remove(path.c_str());
}

TEST_CASE("cli: usage errors exit 2", "[cli]") {
    const std::string data = write_toy_dataset("/tmp/censreg_cli_toy3.csv");

    SECTION("unknown flag") {
        auto r = run_cli("fit --data " + data + " --bogus 1");
        REQUIRE(r.exit_code == 2);
    }

    SECTION("unknown subcommand") {
        auto r = run_cli("frobnicate");
        REQUIRE(r.exit_code == 2);
    }

    SECTION("neither data nor scenario") {
        auto r = run_cli("fit --x 0.5");
        REQUIRE(r.exit_code == 2);
        REQUIRE(r.err.find("--data or --scenario") != std::string::npos);
    }

    SECTION("both data and scenario") {
        const std::string sc = write_toy_scenario("/tmp/censreg_cli_sc0.json", 30, 2);
        auto r = run_cli("fit --data " + data + " --scenario " + sc + " --x 0.5");
        REQUIRE(r.exit_code == 2);
        std::remove(sc.c_str());
    }

    SECTION("bad psi name") {
        auto r = run_cli("fit --data " + data + " --x 0.5 --psi tukey");
        REQUIRE(r.exit_code == 2);
    }

    std::remove(data.c_str());
}

TEST_CASE("cli: malformed data exits 3 with a line number", "[cli]") {
    {
        std::ofstream f("/tmp/censreg_cli_bad.csv");
        f << "x1,y,delta\n0.5,1.2,1\n0.6,1.3,2\n";
    }

    SECTION("text errors") {
        auto r = run_cli("fit --data /tmp/censreg_cli_bad.csv --x 0.5");
        REQUIRE(r.exit_code == 3);
        REQUIRE(!r.err.empty());
    }

    SECTION("json errors carry a type and the line") {
        auto r = run_cli("--errors json fit --data /tmp/censreg_cli_bad.csv --x 0.5");
        REQUIRE(r.exit_code == 3);
        auto j = nlohmann::json::parse(r.err);
        REQUIRE(j.at("error").at("type") == "bad_delta");
        REQUIRE(j.at("error").at("line") == 3);
        REQUIRE(j.at("error").at("exit_code") == 3);
    }

    std::remove("/tmp/censreg_cli_bad.csv");
}

TEST_CASE("cli: estimation failures exit 4", "[cli]") {
    const std::string data = write_toy_dataset("/tmp/censreg_cli_toy4.csv");
    auto r = run_cli("--errors json fit --data " + data +
                     " --x 99 --kernel indicator --bandwidth 0.1");
    REQUIRE(r.exit_code == 4);
    auto j = nlohmann::json::parse(r.err);
    REQUIRE(j.at("error").at("type") == "no_local_data");
    std::remove(data.c_str());
}

TEST_CASE("cli: km table lists every order statistic", "[cli]") {
    {
        std::ofstream f("/tmp/censreg_cli_km.csv");
        f << "x1,y,delta\n0.1,1,1\n0.2,2,0\n0.3,3,1\n";
    }
    auto r = run_cli("km --data /tmp/censreg_cli_km.csv");
    REQUIRE(r.exit_code == 0);
    const auto lines = data_lines(r.out);
    REQUIRE(lines.size() == 4);
    REQUIRE(lines[0] == "jump_time,survival_value");
    REQUIRE(lines[1] == "1,1");
    REQUIRE(lines[2] == "2,0.5");
    REQUIRE(lines[3] == "3,0");
    std::remove("/tmp/censreg_cli_km.csv");
}

TEST_CASE("cli: simulate writes a dataset the reader accepts", "[cli]") {
    const std::string sc = write_toy_scenario("/tmp/censreg_cli_sc1.json", 60, 2);
    auto r = run_cli("simulate --scenario " + sc + " --output /tmp/censreg_cli_sim.csv");
    REQUIRE(r.exit_code == 0);
    auto data = read_dataset("/tmp/censreg_cli_sim.csv");
    REQUIRE(data.size() == 60);
    std::remove("/tmp/censreg_cli_sim.csv");
    std::remove(sc.c_str());
}

TEST_CASE("cli: gmse runs are byte-identical across reruns and --jobs", "[cli][slow]") {
    const std::string sc = write_toy_scenario("/tmp/censreg_cli_sc2.json", 60, 3);

    auto a = run_cli("gmse --scenario " + sc + " --output /tmp/censreg_cli_g1.csv");
    auto b = run_cli("gmse --scenario " + sc + " --output /tmp/censreg_cli_g2.csv");
    auto c = run_cli("gmse --scenario " + sc + " --jobs 3 --output /tmp/censreg_cli_g3.csv");
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    REQUIRE(c.exit_code == 0);

    const std::string g1 = slurp("/tmp/censreg_cli_g1.csv");
    REQUIRE(!g1.empty());
    REQUIRE(g1 == slurp("/tmp/censreg_cli_g2.csv"));
    REQUIRE(g1 == slurp("/tmp/censreg_cli_g3.csv"));

    for (const char* p : {"/tmp/censreg_cli_g1.csv", "/tmp/censreg_cli_g2.csv",
                          "/tmp/censreg_cli_g3.csv", "/tmp/censreg_cli_g1.summary.json",
                          "/tmp/censreg_cli_g2.summary.json",
                          "/tmp/censreg_cli_g3.summary.json", sc.c_str()})
        std::remove(p);
}

TEST_CASE("cli: default output goes to stdout", "[cli]") {
    const std::string data = write_toy_dataset("/tmp/censreg_cli_toy5.csv");
    auto r = run_cli("fit --data " + data + " --x 0.25 --bandwidth 0.5");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.find("theta_m,theta_nw") != std::string::npos);
    std::remove(data.c_str());
}

TEST_CASE("cli: study subcommands run end to end", "[cli][slow]") {
    const std::string sc = write_toy_scenario("/tmp/censreg_cli_sc4.json", 60, 2);

    SECTION("bandwidth") {
        auto r = run_cli("bandwidth --scenario " + sc + " --grid 0.2 --grid 0.4");
        REQUIRE(r.exit_code == 0);
        const auto lines = data_lines(r.out);
        REQUIRE(lines[0] == "h,gmse_m,gmse_nw");
        REQUIRE(lines.size() == 3);
        REQUIRE(r.out.find("# selected_h: ") != std::string::npos);
    }

    SECTION("robustness") {
        auto r = run_cli("robustness --scenario " + sc + " --factors 5 --factors 10");
        REQUIRE(r.exit_code == 0);
        const auto lines = data_lines(r.out);
        REQUIRE(lines[0] == "factor,gmse_m,gmse_nw,ratio");
        REQUIRE(lines.size() == 3);
        REQUIRE(lines[1].rfind("5,", 0) == 0);
        REQUIRE(lines[2].rfind("10,", 0) == 0);
    }

    SECTION("coverage") {
        auto r = run_cli("coverage --scenario " + sc + " --x 0.3 --level 0.9");
        REQUIRE(r.exit_code == 0);
        const auto lines = data_lines(r.out);
        REQUIRE(lines[0] ==
                "x,evaluated,covered,degenerate,coverage,pivot_mean,pivot_sd,flagged");
        REQUIRE(lines.size() == 2);
        REQUIRE(lines[1].rfind("0.3,", 0) == 0);
    }

    SECTION("curves") {
        auto r = run_cli("curves --scenario " + sc +
                         " --grid-from 0.1 --grid-to 0.5 --grid-points 5");
        REQUIRE(r.exit_code == 0);
        const auto lines = data_lines(r.out);
        REQUIRE(lines[0] == "x,m_true,theta_m,theta_nw");
        REQUIRE(lines.size() == 6);
    }

    std::remove(sc.c_str());
}

TEST_CASE("cli: seed override changes simulate output", "[cli]") {
    const std::string sc = write_toy_scenario("/tmp/censreg_cli_sc3.json", 40, 2);
    auto a = run_cli("simulate --scenario " + sc + " --output /tmp/censreg_cli_s1.csv");
    auto b = run_cli("simulate --scenario " + sc +
                     " --seed 77 --output /tmp/censreg_cli_s2.csv");
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    REQUIRE(slurp("/tmp/censreg_cli_s1.csv") != slurp("/tmp/censreg_cli_s2.csv"));
    std::remove("/tmp/censreg_cli_s1.csv");
    std::remove("/tmp/censreg_cli_s2.csv");
    std::remove(sc.c_str());
}
