#include "delaybif_cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "delaybif/error.hpp"

namespace delaybif::cli {

namespace {

using nlohmann::json;

// Object reader that remembers which keys were consumed so leftovers can be
// reported as unknown.
class Block {
public:
    Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    void consume(const std::string& key) { take(key); }

    double number(const std::string& key, double fallback) {
        if (!take(key)) return fallback;
        return as_number(j_.at(key), key);
    }

    double required_number(const std::string& key) {
        if (!take(key)) throw ConfigError(path_ + ": missing '" + key + "'");
        return as_number(j_.at(key), key);
    }

    int integer(const std::string& key, int fallback, int lo, int hi) {
        if (!take(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
        const auto x = v.get<long long>();
        if (x < lo || x > hi)
            throw ConfigError(where(key) + ": must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return static_cast<int>(x);
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!take(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key) {
        take(key);
        const json& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
        return v.get<std::string>();
    }

    State pair(const std::string& key, State fallback) {
        if (!take(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_array() || v.size() != 2) throw ConfigError(where(key) + ": expected [x1, x2]");
        return {as_number(v[0], key), as_number(v[1], key)};
    }

    Range range(const std::string& key, Range fallback) {
        if (!take(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_array() || v.size() != 2) throw ConfigError(where(key) + ": expected [lo, hi]");
        Range r{as_number(v[0], key), as_number(v[1], key)};
        if (!(r.lo < r.hi)) throw ConfigError(where(key) + ": range must satisfy lo < hi");
        return r;
    }

    Block child(const std::string& key) {
        take(key);
        return Block(j_.at(key), where(key));
    }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key)) throw ConfigError(where(key) + ": unknown key");
    }

    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    bool take(const std::string& key) {
        if (!j_.contains(key)) return false;
        seen_.insert(key);
        return true;
    }

    double as_number(const json& v, const std::string& key) const {
        if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(where(key) + ": must be finite");
        return x;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void check(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

double bounded(Block& b, const std::string& key, double fallback, double lo, double hi) {
    const double v = b.number(key, fallback);
    if (v < lo || v > hi) {
        std::ostringstream os;
        os << b.where(key) << ": must lie in [" << lo << ", " << hi << "]";
        throw ConfigError(os.str());
    }
    return v;
}

HopfSelector hopf_selector(Block& parent) {
    HopfSelector h;
    if (!parent.has("hopf")) return h;
    Block b = parent.child("hopf");
    h.family = b.integer("family", 1, 1, 2);
    h.n = b.integer("n", 0, 0, 1000);
    b.finish();
    return h;
}

std::optional<HalfPlane> half_plane(Block& parent) {
    if (!parent.has("within")) return std::nullopt;
    Block b = parent.child("within");
    HalfPlane hp;
    hp.normal = b.pair("normal", {1.0, 0.0});
    hp.offset = b.number("offset", 0.0);
    b.finish();
    check(hp.normal[0] != 0.0 || hp.normal[1] != 0.0, b.where("normal") + ": must be non-zero");
    return hp;
}

Job parse_job(const std::string& name, Block b) {
    if (name == "stability-chart") {
        StabilityChartJob j;
        j.tau = b.range("tau", j.tau);
        j.atilde = b.range("atilde", j.atilde);
        j.tau_points = b.integer("tau_points", j.tau_points, 2, 20000);
        j.atilde_points = b.integer("atilde_points", j.atilde_points, 2, 20000);
        j.n_max = b.integer("n_max", j.n_max, 0, 200);
        j.curve_points = b.integer("curve_points", j.curve_points, 2, 100000);
        check(j.tau.lo >= 0.0, b.where("tau") + ": delays must be non-negative");
        check(j.atilde.lo > 0.0, b.where("atilde") + ": atilde must be positive");
        b.finish();
        return j;
    }
    if (name == "hopf-table") {
        HopfTableJob j;
        j.n_max = b.integer("n_max", j.n_max, 0, 200);
        b.finish();
        return j;
    }
    if (name == "spectrum-sweep") {
        SpectrumSweepJob j;
        j.tau = b.range("tau", j.tau);
        j.points = b.integer("points", j.points, 2, 100000);
        j.roots = b.integer("roots", j.roots, 1, 64);
        j.plot = b.boolean("plot", j.plot);
        check(j.tau.lo >= 0.0, b.where("tau") + ": delays must be non-negative");
        b.finish();
        return j;
    }
    if (name == "simulate") {
        SimulateJob j;
        j.t_end = bounded(b, "t_end", j.t_end, 1e-9, 1e7);
        j.dt = bounded(b, "dt", j.dt, 1e-6, 1e6);
        j.initial = b.pair("initial", j.initial);
        j.perturbation = bounded(b, "perturbation", j.perturbation, 0.0, 10.0);
        b.finish();
        return j;
    }
    if (name == "poincare") {
        PoincareJob j;
        j.t_end = bounded(b, "t_end", j.t_end, 1e-9, 1e7);
        j.transient = bounded(b, "transient", j.transient, 0.0, 1e7);
        j.initial = b.pair("initial", j.initial);
        j.perturbation = bounded(b, "perturbation", j.perturbation, 0.0, 10.0);
        j.normal = b.pair("normal", j.normal);
        j.offset = b.number("offset", j.offset);
        j.direction = b.integer("direction", j.direction, -1, 1);
        j.within = half_plane(b);
        check(j.normal[0] != 0.0 || j.normal[1] != 0.0, b.where("normal") + ": must be non-zero");
        check(j.transient < j.t_end, b.where("transient") + ": must be shorter than t_end");
        b.finish();
        return j;
    }
    if (name == "branch") {
        BranchJob j;
        j.hopf = hopf_selector(b);
        j.delta = bounded(b, "delta", j.delta, 1e-6, 1.0);
        j.tau = b.range("tau", j.tau);
        j.max_steps = b.integer("max_steps", j.max_steps, 1, 1000000);
        j.intervals = b.integer("intervals", j.intervals, 4, 10000);
        j.max_intervals = b.integer("max_intervals", j.max_intervals, 4, 10000);
        j.follow_doubling = b.boolean("follow_doubling", j.follow_doubling);
        j.plot = b.boolean("plot", j.plot);
        check(j.max_intervals >= j.intervals, b.where("max_intervals") + ": must be at least intervals");
        b.finish();
        return j;
    }
    if (name == "cascade") {
        CascadeJob j;
        j.hopf = hopf_selector(b);
        j.delta = bounded(b, "delta", j.delta, 1e-6, 1.0);
        j.tau = b.range("tau", j.tau);
        j.max_doublings = b.integer("max_doublings", j.max_doublings, 1, 20);
        j.intervals = b.integer("intervals", j.intervals, 4, 10000);
        j.max_intervals = b.integer("max_intervals", j.max_intervals, 4, 10000);
        check(j.max_intervals >= j.intervals, b.where("max_intervals") + ": must be at least intervals");
        b.finish();
        return j;
    }
    throw ConfigError("unknown subcommand '" + name + "'");
}

bool needs_equilibrium_params(const Job& job) {
    return !std::holds_alternative<SimulateJob>(job) && !std::holds_alternative<PoincareJob>(job);
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"stability-chart", "hopf-table", "spectrum-sweep", "simulate",
                                                "poincare",        "branch",     "cascade"};
    return names;
}

std::string job_name(const Job& job) { return subcommands().at(job.index()); }

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    Block root(doc, "");
    RunConfig cfg;

    if (!root.has("schema_version")) throw ConfigError("missing 'schema_version'");
    const int version = root.integer("schema_version", 0, 0, 1 << 20);
    if (version != kSchemaVersion)
        throw ConfigError("unsupported schema_version " + std::to_string(version) + " (expected " +
                          std::to_string(kSchemaVersion) + ")");

    const bool has_dimless = root.has("dimensionless"), has_phys = root.has("physical");
    if (has_dimless && has_phys) throw ConfigError("both 'dimensionless' and 'physical' parameter blocks given");
    if (!has_dimless && !has_phys) throw ConfigError("a 'dimensionless' or 'physical' parameter block is required");

    if (has_dimless) {
        Block p = root.child("dimensionless");
        cfg.params.a = p.required_number("a");
        cfg.params.atilde = p.required_number("atilde");
        cfg.params.w = p.required_number("w");
        cfg.params.tau = p.number("tau", 0.0);
        p.finish();
    } else {
        Block p = root.child("physical");
        PhysicalParams q;
        q.a_hat = p.required_number("a_hat");
        q.atilde_hat = p.required_number("atilde_hat");
        q.ks_hat = p.required_number("ks_hat");
        q.w_hat = p.required_number("w_hat");
        q.tau_hat = p.number("tau_hat", 0.0);
        p.finish();
        try {
            validate(q);
            cfg.params = to_dimensionless(q);
        } catch (const Error& e) {
            throw ConfigError(std::string("physical: ") + e.what());
        }
        cfg.physical = true;
        cfg.physical_params = q;
    }

    if (root.has("output")) {
        const std::string out = root.string("output");
        if (out.empty()) throw ConfigError("output: must not be empty");
        cfg.output = out;
    }
    if (root.has("seed")) {
        // Read separately so the full unsigned range is accepted.
        const json& s = doc.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            throw ConfigError("seed: expected a non-negative integer");
        cfg.seed = s.get<std::uint64_t>();
        root.consume("seed");
    }
    if (root.has("tolerances")) {
        Block t = root.child("tolerances");
        cfg.tolerances.integration = bounded(t, "integration", cfg.tolerances.integration, 1e-12, 1e-3);
        cfg.tolerances.newton = bounded(t, "newton", cfg.tolerances.newton, 1e-14, 1e-4);
        cfg.tolerances.defect = bounded(t, "defect", cfg.tolerances.defect, 1e-10, 1e-2);
        cfg.tolerances.event_tau = bounded(t, "event_tau", cfg.tolerances.event_tau, 1e-8, 1e-1);
        t.finish();
    }

    std::optional<std::string> job;
    for (const std::string& name : subcommands()) {
        if (!root.has(name)) continue;
        if (job) throw ConfigError("more than one subcommand block ('" + *job + "', '" + name + "')");
        job = name;
    }
    if (!job) throw ConfigError("no subcommand block given");
    cfg.job = parse_job(*job, root.child(*job));
    root.finish();

    try {
        if (needs_equilibrium_params(cfg.job)) {
            SwingParams p = cfg.params;
            if (std::holds_alternative<StabilityChartJob>(cfg.job)) p.atilde = std::max(p.atilde, 1e-300);
            validate_for_equilibria(p);
        } else {
            validate_for_simulation(cfg.params);
        }
    } catch (const Error& e) {
        throw ConfigError(std::string("parameters: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace delaybif::cli
