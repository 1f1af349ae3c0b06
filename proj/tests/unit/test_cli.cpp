#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "delaybif_cli/artifacts.hpp"
#include "delaybif_cli/config.hpp"
#include "delaybif_cli/run.hpp"

using namespace delaybif;
using namespace delaybif::cli;
namespace fs = std::filesystem;

namespace {

const char* kHeader = R"("schema_version": 1, "dimensionless": {"a": 0.025, "atilde": 0.0625, "w": 0.125, "tau": 0})";

std::string config_with(const std::string& body) { return std::string("{") + kHeader + ", " + body + "}"; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("delaybif_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

int run_exe(const std::string& args) {
    const std::string cmd = std::string(DELAYBIF_EXE) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / ("delaybif_cli_test_" + name + ".json");
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST(CliConfig, ParsesMinimalHopfTable) {
    const RunConfig c = parse_config(config_with(R"("hopf-table": {"n_max": 3})"));
    EXPECT_EQ(job_name(c.job), "hopf-table");
    EXPECT_EQ(std::get<HopfTableJob>(c.job).n_max, 3);
    EXPECT_DOUBLE_EQ(c.params.atilde, 0.0625);
    EXPECT_FALSE(c.physical);
}

TEST(CliConfig, PhysicalBlockIsScaled) {
    const RunConfig c = parse_config(
        R"({"schema_version": 1, "physical": {"a_hat": 0.1, "atilde_hat": 0.25, "ks_hat": 16, "w_hat": 2, "tau_hat": 0.5},
            "hopf-table": {}})");
    EXPECT_TRUE(c.physical);
    EXPECT_DOUBLE_EQ(c.params.a, 0.025);
    EXPECT_DOUBLE_EQ(c.params.tau, 2.0);
}

TEST(CliConfig, RejectsSchemaViolations) {
    EXPECT_THROW(parse_config(config_with(R"("hopf-table": {"n_max": 3, "bogus": 1})")), ConfigError);
    EXPECT_THROW(parse_config(config_with(R"("hopf-table": {}, "colour": "red")")), ConfigError);
    EXPECT_THROW(parse_config(config_with(R"("hopf-table": {}, "cascade": {})")), ConfigError);
    EXPECT_THROW(parse_config(std::string("{") + kHeader + "}"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema_version": 2, "dimensionless": {"a": 0.025, "atilde": 0.0625, "w": 0.125, "tau": 0},
                                  "hopf-table": {}})"),
                 ConfigError);
    EXPECT_THROW(parse_config(R"({"dimensionless": {"a": 0.025, "atilde": 0.0625, "w": 0.125, "tau": 0},
                                  "hopf-table": {}})"),
                 ConfigError);
    EXPECT_THROW(parse_config(config_with(R"("physical": {"a_hat": 0.1, "atilde_hat": 0.25, "ks_hat": 16, "w_hat": 2,
                                              "tau_hat": 0}, "hopf-table": {})")),
                 ConfigError);
    EXPECT_THROW(parse_config(config_with(R"("tolerances": {"integration": 0.5}, "hopf-table": {})")), ConfigError);
    EXPECT_THROW(parse_config(config_with(R"("spectrum-sweep": {"tau": [3, 1]})")), ConfigError);
    EXPECT_THROW(parse_config("{not json"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema_version": 1, "dimensionless": {"a": 0.025, "atilde": 0.0625, "w": 1.5, "tau": 0},
                                  "hopf-table": {}})"),
                 ConfigError);
}

TEST(CliConfig, SeedCoversFullRange) {
    const RunConfig c = parse_config(config_with(R"("seed": 18446744073709551615, "hopf-table": {})"));
    EXPECT_EQ(c.seed, std::numeric_limits<std::uint64_t>::max());
}

TEST(CliArtifacts, FormatDoubleRoundTrips) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 10000; ++i) {
        const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        EXPECT_EQ(std::stod(format_double(x)), x);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(3.0), "3");
}

TEST(CliArtifacts, CsvHasHeaderAndShortestFloats) {
    Table t({"tau", "kind", "n"});
    t.add({0.1, std::string("fold"), 3LL});
    EXPECT_EQ(t.to_csv(), "tau,kind,n\n0.1,fold,3\n");
    EXPECT_EQ(t.numeric("tau").at(0), 0.1);
    EXPECT_THROW(t.numeric("missing"), std::out_of_range);
}

TEST(CliArtifacts, EmptyPlotCarriesWarning) {
    Table t({"x", "y"});
    PlotStyle s;
    s.series.push_back({"x", "y", "data"});
    const std::string svg = emit_plot(t, s);
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("warning: no data to plot"), std::string::npos);
}

TEST(CliArtifacts, Sha256KnownVector) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(CliRun, HopfTableHasTwelveRows) {
    const fs::path out = scratch("hopf");
    std::ostringstream log;
    EXPECT_EQ(run(parse_config(config_with(R"("hopf-table": {"n_max": 5})")), out, log), kExitOk);
    const std::string csv = slurp(out / "hopf_table.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 13);
    EXPECT_TRUE(fs::exists(out / "manifest.json"));
}

TEST(CliRun, ArtifactsAreByteIdentical) {
    const std::string text = config_with(
        R"("seed": 42, "spectrum-sweep": {"tau": [0, 6], "points": 25, "roots": 3})");
    const fs::path a = scratch("sweep_a"), b = scratch("sweep_b");
    std::ostringstream log;
    ASSERT_EQ(run(parse_config(text), a, log), kExitOk);
    ASSERT_EQ(run(parse_config(text), b, log), kExitOk);
    for (const char* name : {"spectrum_sweep.csv", "spectrum_sweep.svg", "manifest.json"})
        EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;

    const std::string sim = config_with(
        R"("seed": 5, "simulate": {"t_end": 20, "dt": 0.5, "initial": [0.2, 0], "perturbation": 0.01})");
    const fs::path c = scratch("sim_a"), d = scratch("sim_b");
    ASSERT_EQ(run(parse_config(sim), c, log), kExitOk);
    ASSERT_EQ(run(parse_config(sim), d, log), kExitOk);
    EXPECT_EQ(slurp(c / "trajectory.csv"), slurp(d / "trajectory.csv"));
}

TEST(CliExe, ExitCodes) {
    const fs::path good = write_config("good", config_with(R"("hopf-table": {"n_max": 2})"));
    const fs::path bad = write_config("bad", config_with(R"("hopf-table": {"n_max": 2, "extra": true})"));
    const fs::path out = scratch("exe");
    EXPECT_EQ(run_exe("hopf-table --config " + good.string() + " --out " + out.string()), 0);
    EXPECT_TRUE(fs::exists(out / "hopf_table.csv"));
    EXPECT_EQ(run_exe("hopf-table --config " + bad.string() + " --out " + out.string()), 2);
    EXPECT_EQ(run_exe("cascade --config " + good.string() + " --out " + out.string()), 2);
    EXPECT_EQ(run_exe("hopf-table --config /nonexistent/config.json"), 2);
    EXPECT_NE(run_exe("no-such-command"), 0);
}

TEST(CliExe, NumericalFailureKeepsPartialOutput) {
    // A Newton budget of zero iterations cannot correct the first orbit.
    const fs::path cfg = write_config(
        "fail", config_with(R"("tolerances": {"newton": 1e-14}, "branch": {"delta": 0.9, "tau": [0, 3], "intervals": 4,
                                "max_intervals": 4, "plot": false})"));
    const fs::path out = scratch("fail");
    const int rc = run_exe("branch --config " + cfg.string() + " --out " + out.string());
    if (rc == 0) GTEST_SKIP() << "configuration converged";
    EXPECT_EQ(rc, 3);
    EXPECT_TRUE(fs::exists(out / "failure.json"));
    EXPECT_TRUE(fs::exists(out / "manifest.json"));
}
