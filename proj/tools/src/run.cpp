#include "delaybif_cli/run.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include <nlohmann/json.hpp>

#include "delaybif/analytic_stability.hpp"
#include "delaybif/continuation.hpp"
#include "delaybif/dde_sim.hpp"
#include "delaybif/error.hpp"
#include "delaybif/lyapunov.hpp"
#include "delaybif/spectrum.hpp"
#include "delaybif_cli/artifacts.hpp"

namespace delaybif::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Partial artifacts are already on disk when this is thrown.
struct JobFailure {
    std::string message;
};

double restoring(const SwingParams& p) { return std::sqrt(std::max(0.0, 1.0 - p.w * p.w)); }

std::vector<double> grid(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

ContinuationOptions continuation_options(const RunConfig& cfg, int intervals, int max_intervals) {
    ContinuationOptions o;
    o.min_intervals = intervals;
    o.max_intervals = max_intervals;
    o.defect_tol = cfg.tolerances.defect;
    o.event_tau_tol = cfg.tolerances.event_tau;
    o.newton.step_tol = cfg.tolerances.newton;
    o.newton.residual_tol = cfg.tolerances.newton;
    return o;
}

State perturbed(State x, double amplitude, std::uint64_t seed) {
    if (amplitude <= 0.0) return x;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    x[0] += u(rng);
    x[1] += u(rng);
    return x;
}

Trajectory simulate_config(const RunConfig& cfg, State x0, double t_end) {
    IntegrationOptions io;
    io.tol = cfg.tolerances.integration;
    const SwingField field = cfg.physical ? SwingField::from(cfg.physical_params) : SwingField::from(cfg.params);
    return integrate(field, InitialFunction::constant(x0), t_end, io);
}

PeriodicOrbit hopf_orbit(const RunConfig& cfg, const HopfSelector& sel, double delta, int intervals, int& direction) {
    const HopfPointTable table = hopf_points(cfg.params.a, cfg.params.atilde, restoring(cfg.params), sel.n);
    const auto& list = sel.family == 1 ? table.tau1 : table.tau2;
    if (static_cast<int>(list.size()) <= sel.n)
        throw ConfigError("no Hopf point with family " + std::to_string(sel.family) + " and n = " +
                          std::to_string(sel.n) + " for these parameters");
    const HopfPoint hp = list[sel.n];
    HopfStartOptions ho;
    ho.intervals = intervals;
    for (int side : {+1, -1}) {
        SwingParams p = cfg.params;
        p.tau = hp.tau + side * delta;
        try {
            PeriodicOrbit o = orbit_from_hopf(p, hp, ho);
            direction = side;
            return o;
        } catch (const InvalidParameter&) {
            continue;
        }
    }
    throw NumericalFailure("no periodic orbit could be started at the selected Hopf point");
}

void stability_chart(const RunConfig& cfg, const StabilityChartJob& job, ArtifactWriter& out) {
    const double a = cfg.params.a, w = cfg.params.w, c = restoring(cfg.params);
    const std::vector<double> taus = grid(job.tau.lo, job.tau.hi, job.tau_points);
    const std::vector<double> atildes = grid(job.atilde.lo, job.atilde.hi, job.atilde_points);

    Table chart({"tau", "atilde", "n_u"});
    for (double at : atildes) {
        const HopfPointTable t = hopf_points(a, at, c, 0);
        for (double tau : taus) chart.add({tau, at, static_cast<long long>(unstable_count(t, tau))});
    }
    out.write_csv("stability_grid.csv", chart);

    Table curves({"family", "n", "atilde", "tau"});
    Table plot({"curve", "tau", "atilde_family1", "atilde_family2"});
    const std::vector<double> samples = grid(std::max(job.atilde.lo, a), job.atilde.hi, job.curve_points);
    for (int family : {1, 2})
        for (int n = 0; n <= job.n_max; ++n) {
            const double curve = family * 1000 + n;
            for (double at : samples) {
                if (at <= a) continue;
                const double tau = hopf_points(a, at, c, 0).tau_of(family, n);
                if (!std::isfinite(tau) || tau < job.tau.lo || tau > job.tau.hi) {
                    plot.add({curve, kNaN, kNaN, kNaN});
                    continue;
                }
                curves.add({static_cast<long long>(family), static_cast<long long>(n), at, tau});
                plot.add({curve, tau, family == 1 ? at : kNaN, family == 2 ? at : kNaN});
            }
        }
    out.write_csv("hopf_curves.csv", curves);

    Table points({"kind", "tau", "atilde", "n", "m", "residual"});
    for (const Codim2Point& p :
         codim2_points(a, w, job.atilde.lo, job.atilde.hi, job.tau.lo, job.tau.hi, job.n_max, job.n_max))
        points.add({std::string(to_string(p.kind)), p.tau, p.value, static_cast<long long>(p.n),
                    static_cast<long long>(p.m), p.residual});
    out.write_csv("codim2_points.csv", points);

    PlotStyle style;
    style.title = "Hopf curves";
    style.x_label = "tau";
    style.y_label = "atilde";
    style.series = {{"tau", "atilde_family1", "destabilising", false, "#d62728", "curve"},
                    {"tau", "atilde_family2", "restabilising", false, "#1f77b4", "curve"}};
    out.write("stability_chart.svg", emit_plot(plot, style));
}

void hopf_table(const RunConfig& cfg, const HopfTableJob& job, ArtifactWriter& out) {
    Table t({"n", "family", "tau", "omega", "sign_L", "criticality", "branch_side"});
    for (const ClassifiedHopf& h : classify_all_hopf(cfg.params, job.n_max))
        t.add({static_cast<long long>(h.point.n), static_cast<long long>(h.point.family), h.point.tau, h.point.omega,
               static_cast<long long>(h.report.sign), std::string(to_string(h.report.criticality)),
               std::string(to_string(h.report.branch_side))});
    out.write_csv("hopf_table.csv", t);
}

void spectrum_sweep(const RunConfig& cfg, const SpectrumSweepJob& job, ArtifactWriter& out) {
    SpectrumOptions so;
    so.count = job.roots;
    const auto rows =
        abscissa_sweep(cfg.params.a, cfg.params.atilde, restoring(cfg.params), grid(job.tau.lo, job.tau.hi, job.points), so);
    std::vector<std::string> cols{"tau"};
    for (int k = 1; k <= job.roots; ++k) cols.push_back("re_" + std::to_string(k));
    cols.push_back("n_u");
    Table t(cols);
    for (const SweepRow& r : rows) {
        std::vector<Table::Cell> row{r.tau};
        for (int k = 0; k < job.roots; ++k) row.push_back(k < static_cast<int>(r.re.size()) ? r.re[k] : kNaN);
        row.push_back(static_cast<long long>(r.n_u));
        t.add(std::move(row));
    }
    out.write_csv("spectrum_sweep.csv", t);
    if (job.plot) {
        PlotStyle style;
        style.title = "Rightmost characteristic roots";
        style.x_label = "tau";
        style.y_label = "Re lambda";
        style.mark_zero = true;
        static const char* colors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
        for (int k = 1; k <= job.roots; ++k)
            style.series.push_back({"tau", "re_" + std::to_string(k), k <= 6 ? "root " + std::to_string(k) : "",
                                    false, colors[(k - 1) % 6], std::nullopt});
        out.write("spectrum_sweep.svg", emit_plot(t, style));
    }
}

void simulate(const RunConfig& cfg, const SimulateJob& job, ArtifactWriter& out) {
    const Trajectory traj = simulate_config(cfg, perturbed(job.initial, job.perturbation, cfg.seed), job.t_end);
    Table t({"t", "x1", "x2"});
    for (const auto& [time, x] : traj.sample(0.0, job.t_end, job.dt)) t.add({time, x[0], x[1]});
    out.write_csv("trajectory.csv", t);
}

void poincare(const RunConfig& cfg, const PoincareJob& job, ArtifactWriter& out) {
    const Trajectory traj = simulate_config(cfg, perturbed(job.initial, job.perturbation, cfg.seed), job.t_end);
    Section sec;
    sec.normal = job.normal;
    sec.offset = job.offset;
    sec.direction = job.direction;
    sec.within = job.within;
    Table t({"t", "x1", "x2", "ambiguous"});
    for (const Crossing& c : poincare_section(traj, sec))
        if (c.t >= job.transient) t.add({c.t, c.x[0], c.x[1], static_cast<long long>(c.ambiguous)});
    out.write_csv("poincare.csv", t);
}

Table branch_table(const ContinuationBranch& br, int multipliers) {
    std::vector<std::string> cols{"tau", "period", "min_x1", "max_x1"};
    for (int k = 1; k < multipliers; ++k) cols.push_back("mu_abs_" + std::to_string(k));
    cols.insert(cols.end(), {"unstable", "stability", "saddle_distance"});
    Table t(cols);
    for (const BranchPoint& p : br.points) {
        std::vector<Table::Cell> row{p.orbit.params.tau, p.orbit.period, p.orbit.min_x1(), p.orbit.max_x1()};
        std::vector<Complex> mu;
        if (p.floquet) mu = p.floquet->nontrivial();
        for (int k = 0; k + 1 < multipliers; ++k)
            row.push_back(k < static_cast<int>(mu.size()) ? std::abs(mu[k]) : kNaN);
        row.push_back(static_cast<long long>(p.floquet ? p.floquet->unstable_count : -1));
        row.push_back(std::string(!p.floquet                                              ? "unknown"
                                  : p.floquet->stability == OrbitStability::Stable ? "stable"
                                                                                    : "unstable"));
        row.push_back(p.saddle_distance);
        t.add(std::move(row));
    }
    return t;
}

Table event_table(const ContinuationBranch& br) {
    Table t({"kind", "tau", "tau_lo", "tau_hi", "mu_re", "mu_im", "period", "saddle_distance", "period_slope"});
    for (const BifurcationEvent& e : br.events)
        t.add({std::string(to_string(e.kind)), e.tau_at, e.tau_lo, e.tau_hi, e.multiplier.real(), e.multiplier.imag(),
               e.period, e.saddle_distance, e.period_slope});
    return t;
}

PlotStyle extent_style(const std::string& title) {
    PlotStyle style;
    style.title = title;
    style.x_label = "tau";
    style.y_label = "x1";
    style.series = {{"tau", "max_x1", "max x1", false, "#d62728", std::nullopt},
                    {"tau", "min_x1", "min x1", false, "#1f77b4", std::nullopt}};
    return style;
}

void write_branch(const ContinuationBranch& br, const std::string& stem, int multipliers, bool plot,
                  ArtifactWriter& out) {
    const Table t = branch_table(br, multipliers);
    out.write_csv(stem + ".csv", t);
    out.write_csv(stem + "_events.csv", event_table(br));
    if (plot) out.write(stem + ".svg", emit_plot(t, extent_style("Periodic orbit extent")));
}

void branch(const RunConfig& cfg, const BranchJob& job, ArtifactWriter& out, std::ostream& log) {
    ContinuationOptions opts = continuation_options(cfg, job.intervals, job.max_intervals);
    opts.max_steps = job.max_steps;
    int dir = +1;
    const PeriodicOrbit start = hopf_orbit(cfg, job.hopf, job.delta, job.intervals, dir);
    opts.direction = dir;
    if (start.params.tau < job.tau.lo || start.params.tau > job.tau.hi)
        throw ConfigError("branch.tau does not contain the starting delay " + format_double(start.params.tau));
    const ContinuationBranch br = continue_branch(start, job.tau.lo, job.tau.hi, opts);
    write_branch(br, "branch", opts.multipliers, job.plot, out);
    log << "branch: " << br.points.size() << " orbits, " << br.events.size() << " events, stop "
        << to_string(br.stop) << "\n";
    if (br.stop == StopReason::Failure) throw JobFailure{"branch truncated: " + br.stop_detail};

    if (job.follow_doubling) {
        const BifurcationEvent* pd = nullptr;
        for (const BifurcationEvent& e : br.events)
            if (e.kind == EventKind::PeriodDoubling && e.orbit) {
                pd = &e;
                break;
            }
        if (!pd) return;
        ContinuationOptions od = opts;
        od.direction = +1;
        od.min_intervals = std::max(opts.min_intervals, 2 * pd->orbit->intervals());
        od.max_intervals = std::max(opts.max_intervals, od.min_intervals);
        ContinuationBranch doubled;
        try {
            doubled = continue_doubled(*pd, job.tau.lo, job.tau.hi, od);
        } catch (const NumericalFailure& e) {
            throw JobFailure{std::string("period-doubling switch failed: ") + e.what()};
        }
        write_branch(doubled, "doubled", od.multipliers, job.plot, out);
        log << "doubled branch: " << doubled.points.size() << " orbits, " << doubled.events.size()
            << " events, stop " << to_string(doubled.stop) << "\n";
        if (doubled.stop == StopReason::Failure) throw JobFailure{"doubled branch truncated: " + doubled.stop_detail};
    }
}

void cascade(const RunConfig& cfg, const CascadeJob& job, ArtifactWriter& out, std::ostream& log) {
    const ContinuationOptions opts = continuation_options(cfg, job.intervals, job.max_intervals);
    int dir = +1;
    const PeriodicOrbit start = hopf_orbit(cfg, job.hopf, job.delta, job.intervals, dir);
    if (start.params.tau < job.tau.lo || start.params.tau > job.tau.hi)
        throw ConfigError("cascade.tau does not contain the starting delay " + format_double(start.params.tau));
    const CascadeResult res = cascade_scan(start, job.tau.lo, job.tau.hi, job.max_doublings, opts);
    Table t({"index", "tau_pd", "period"});
    for (const CascadeEntry& e : res.entries) t.add({static_cast<long long>(e.index), e.tau_pd, e.period});
    out.write_csv("cascade.csv", t);
    log << "cascade: " << res.entries.size() << " period doublings";
    if (res.partial) log << " (" << res.detail << ")";
    log << "\n";
    if (res.failure) throw JobFailure{res.detail};
}

}  // namespace

int run(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
    std::optional<ArtifactWriter> out;
    try {
        out.emplace(out_dir);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    const std::string name = job_name(cfg.job);
    auto fail = [&](const std::string& kind, const std::string& message) {
        nlohmann::ordered_json report;
        report["subcommand"] = name;
        report["error"] = kind;
        report["message"] = message;
        out->write("failure.json", report.dump(2) + "\n");
        out->write_manifest(name, kind, cfg.seed);
        log << "error: " << message << "\n";
    };
    try {
        std::visit(
            [&](const auto& job) {
                using J = std::decay_t<decltype(job)>;
                if constexpr (std::is_same_v<J, StabilityChartJob>) stability_chart(cfg, job, *out);
                else if constexpr (std::is_same_v<J, HopfTableJob>) hopf_table(cfg, job, *out);
                else if constexpr (std::is_same_v<J, SpectrumSweepJob>) spectrum_sweep(cfg, job, *out);
                else if constexpr (std::is_same_v<J, SimulateJob>) simulate(cfg, job, *out);
                else if constexpr (std::is_same_v<J, PoincareJob>) poincare(cfg, job, *out);
                else if constexpr (std::is_same_v<J, BranchJob>) branch(cfg, job, *out, log);
                else cascade(cfg, job, *out, log);
            },
            cfg.job);
    } catch (const JobFailure& f) {
        fail("numerical_failure", f.message);
        return kExitNumerical;
    } catch (const ConfigError& e) {
        fail("invalid_configuration", e.what());
        return kExitInvalid;
    } catch (const InvalidParameter& e) {
        fail("invalid_configuration", e.what());
        return kExitInvalid;
    } catch (const Error& e) {
        fail("numerical_failure", e.what());
        return kExitNumerical;
    }
    out->write_manifest(name, "ok", cfg.seed);
    return kExitOk;
}

}  // namespace delaybif::cli
