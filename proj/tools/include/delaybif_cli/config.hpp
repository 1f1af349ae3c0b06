#pragma once

// Run configuration for the delaybif tool.
//
//   {
//     "schema_version": 1,
//     "dimensionless": {"a": 0.025, "atilde": 0.0625, "w": 0.125, "tau": 0},
//     "output": "out/hopf",
//     "seed": 7,
//     "tolerances": {"integration": 1e-9},
//     "hopf-table": {"n_max": 5}
//   }
//
// A physical block {"a_hat", "atilde_hat", "ks_hat", "w_hat", "tau_hat"} may
// replace the dimensionless one. Unknown keys anywhere are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "delaybif/model.hpp"
#include "delaybif/dde_sim.hpp"

namespace delaybif::cli {

inline constexpr int kSchemaVersion = 1;

/// Schema or value violation; maps to exit status 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

struct Tolerances {
    double integration = 1e-8;  ///< [1e-12, 1e-3]
    double newton = 1e-9;       ///< [1e-14, 1e-4]
    double defect = 1e-5;       ///< [1e-10, 1e-2]
    double event_tau = 1e-3;    ///< [1e-8, 1e-1]
};

struct StabilityChartJob {
    Range tau{0.0, 50.0};
    Range atilde{0.03, 0.25};
    int tau_points = 251;
    int atilde_points = 111;
    int n_max = 12;        ///< Hopf index bound for the curves
    int curve_points = 400;
};

struct HopfTableJob {
    int n_max = 5;
};

struct SpectrumSweepJob {
    Range tau{0.0, 12.0};
    int points = 241;
    int roots = 4;
    bool plot = true;
};

struct SimulateJob {
    double t_end = 200.0;
    double dt = 0.05;
    State initial{0.1, 0.0};
    double perturbation = 0.0;  ///< seeded uniform noise added to the initial state
};

struct PoincareJob {
    double t_end = 2000.0;
    double transient = 500.0;
    State initial{0.1, 0.0};
    double perturbation = 0.0;
    State normal{0.0, 1.0};
    double offset = 0.0;
    int direction = -1;
    std::optional<HalfPlane> within;
};

struct HopfSelector {
    int family = 1;
    int n = 0;
};

struct BranchJob {
    HopfSelector hopf;
    double delta = 0.05;  ///< distance of the first orbit from the Hopf delay
    Range tau{0.0, 20.0};
    int max_steps = 4000;
    int intervals = 40;
    int max_intervals = 320;
    bool follow_doubling = false;  ///< also continue the first period-doubled branch
    bool plot = true;
};

struct CascadeJob {
    HopfSelector hopf;
    double delta = 0.05;
    Range tau{5.0, 12.22};
    int max_doublings = 6;
    int intervals = 40;
    int max_intervals = 640;
};

using Job = std::variant<StabilityChartJob, HopfTableJob, SpectrumSweepJob, SimulateJob, PoincareJob, BranchJob,
                         CascadeJob>;

struct RunConfig {
    SwingParams params;
    bool physical = false;
    PhysicalParams physical_params;  ///< set when physical
    std::optional<std::filesystem::path> output;
    std::uint64_t seed = 0;
    Tolerances tolerances;
    Job job;
};

/// Names of the subcommand blocks, in the order listed by --help.
const std::vector<std::string>& subcommands();

/// Subcommand name of a job.
std::string job_name(const Job& job);

/// Parses and validates a configuration document. Throws ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace delaybif::cli
