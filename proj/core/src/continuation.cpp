#include "delaybif/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "delaybif/error.hpp"

namespace delaybif {

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::Fold: return "Fold";
        case EventKind::PeriodDoubling: return "PeriodDoubling";
        case EventKind::NeimarkSacker: return "NeimarkSacker";
        case EventKind::HomoclinicApproach: return "HomoclinicApproach";
    }
    return "?";
}

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::Completed: return "completed";
        case StopReason::RangeLeft: return "range-left";
        case StopReason::MaxSteps: return "max-steps";
        case StopReason::MinStep: return "min-step";
        case StopReason::Homoclinic: return "homoclinic";
        case StopReason::Failure: return "failure";
    }
    return "?";
}

namespace {

// Inner product on (profile, T, tau): profile by its mean square over the
// representation points, T and tau unweighted.
double wdot(const BranchDirection& a, const BranchDirection& b) {
    double s = 0.0;
    for (std::size_t p = 0; p < a.du.size(); ++p) s += a.du[p][0] * b.du[p][0] + a.du[p][1] * b.du[p][1];
    return s / static_cast<double>(std::max<std::size_t>(a.du.size(), 1)) + a.dT * b.dT + a.dtau * b.dtau;
}

double wnorm(const BranchDirection& a) { return std::sqrt(wdot(a, a)); }

BranchDirection as_vector(const PeriodicOrbit& o) {
    return BranchDirection{o.values, o.period, o.params.tau};
}

BranchDirection difference(const PeriodicOrbit& a, const PeriodicOrbit& b) {
    BranchDirection d;
    d.du.resize(a.values.size());
    for (std::size_t p = 0; p < a.values.size(); ++p)
        d.du[p] = {a.values[p][0] - b.values[p][0], a.values[p][1] - b.values[p][1]};
    d.dT = a.period - b.period;
    d.dtau = a.params.tau - b.params.tau;
    return d;
}

BranchDirection scaled(BranchDirection d, double f) {
    for (State& v : d.du) v = {v[0] * f, v[1] * f};
    d.dT *= f;
    d.dtau *= f;
    return d;
}

PeriodicOrbit step(const PeriodicOrbit& x, double h, const BranchDirection& t) {
    PeriodicOrbit y = x;
    for (std::size_t p = 0; p < y.values.size(); ++p) {
        y.values[p][0] += h * t.du[p][0];
        y.values[p][1] += h * t.du[p][1];
    }
    y.period += h * t.dT;
    y.params.tau += h * t.dtau;
    return y;
}

// Row of  <t, X> = <t, X_pred>  in solver coordinates.
ExtraCondition arclength_row(const BranchDirection& t, const PeriodicOrbit& pred) {
    const std::size_t L = t.du.size();
    ExtraCondition e;
    e.row.assign(2 * L + 2, 0.0);
    const double w = 1.0 / static_cast<double>(L);
    for (std::size_t p = 0; p < L; ++p) {
        e.row[2 * p] = w * t.du[p][0];
        e.row[2 * p + 1] = w * t.du[p][1];
    }
    e.row[2 * L] = t.dT;
    e.row[2 * L + 1] = t.dtau;
    e.value = wdot(t, as_vector(pred));
    return e;
}

BranchDirection remesh_direction(const BranchDirection& d, const PeriodicOrbit& from, const PeriodicMesh& mesh) {
    PeriodicOrbit tmp = from;
    tmp.values = d.du;
    const PeriodicOrbit r = remesh(tmp, mesh);
    return BranchDirection{r.values, d.dT, d.dtau};
}

double homoclinic_threshold(const PeriodicOrbit& o, const ContinuationOptions& opts) {
    if (opts.homoclinic_period > 0.0) return opts.homoclinic_period;
    const double c = std::sqrt(std::max(0.0, 1.0 - o.params.w * o.params.w));
    double base = 2.0 * kPi;
    if (o.params.atilde > o.params.a && c > 0.0) base = 2.0 * kPi / hopf_frequencies(o.params.a, o.params.atilde, c).omega1;
    return opts.homoclinic_factor * base;
}

double period_slope(const BranchPoint& pa, const BranchPoint& pb) {
    const double dtau = pb.orbit.params.tau - pa.orbit.params.tau;
    const double dT = pb.orbit.period - pa.orbit.period;
    return dtau != 0.0 ? dT / dtau : std::copysign(std::numeric_limits<double>::infinity(), dT);
}

bool near_homoclinic(const BranchPoint& pa, const BranchPoint& pb, double t_hom, const ContinuationOptions& opts) {
    return pb.orbit.period >= t_hom && pb.saddle_distance <= opts.homoclinic_distance &&
           std::abs(period_slope(pa, pb)) >= opts.homoclinic_slope;
}

// Mesh adaptation followed by a fixed-delay correction; doubles the mesh
// while the off-node defect is too large.
PeriodicOrbit refine_mesh(const PeriodicOrbit& o, const ContinuationOptions& opts, bool force_double = false) {
    int M = std::max(o.intervals(), opts.min_intervals);
    if (force_double) M = std::min(2 * M, opts.max_intervals);
    PeriodicOrbit cur = o;
    for (int attempt = 0; attempt < 4; ++attempt) {
        try {
            PeriodicOrbit cand = newton_correct(remesh(cur, adapted_mesh(cur, M)), cur.params, opts.newton);
            cur = std::move(cand);
        } catch (const NumericalFailure&) {
            return cur;
        }
        if (collocation_defect(cur) <= opts.defect_tol || M >= opts.max_intervals) break;
        M = std::min(2 * M, opts.max_intervals);
    }
    return cur;
}

std::optional<FloquetSpectrum> spectrum_of(PeriodicOrbit& orbit, const ContinuationOptions& opts) {
    if (!opts.floquet) return std::nullopt;
    FloquetOptions fo;
    fo.count = opts.multipliers;
    for (int attempt = 0; attempt < 3; ++attempt) {
        try {
            return floquet_multipliers(orbit, fo);
        } catch (const NumericalFailure&) {
            if (orbit.intervals() >= opts.max_intervals) throw;
            orbit = refine_mesh(orbit, opts, true);
        }
    }
    return floquet_multipliers(orbit, fo);
}

BranchPoint make_point(PeriodicOrbit orbit, const ContinuationOptions& opts, double arclength, int iters) {
    BranchPoint bp;
    bp.floquet = spectrum_of(orbit, opts);
    bp.saddle_distance = saddle_distance(orbit);
    bp.arclength = arclength;
    bp.newton_iterations = iters;
    bp.orbit = std::move(orbit);
    return bp;
}

bool is_real(Complex z) { return std::abs(z.imag()) <= 1e-9 * std::max(1.0, std::abs(z)); }

struct UnitCrossing {
    Complex before, after, at;
    EventKind kind;
};

// Nontrivial multipliers of b matched to those of a by minimal distance.
std::vector<UnitCrossing> unit_crossings(const FloquetSpectrum& a, const FloquetSpectrum& b) {
    const std::vector<Complex> ma = a.nontrivial();
    const std::vector<Complex> mb = b.nontrivial();
    struct Pair {
        double d;
        std::size_t i, j;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < ma.size(); ++i)
        for (std::size_t j = 0; j < mb.size(); ++j) pairs.push_back({std::abs(ma[i] - mb[j]), i, j});
    std::sort(pairs.begin(), pairs.end(), [](const Pair& l, const Pair& r) { return l.d < r.d; });
    std::vector<bool> used_a(ma.size()), used_b(mb.size());
    std::vector<UnitCrossing> out;
    for (const Pair& p : pairs) {
        if (used_a[p.i] || used_b[p.j]) continue;
        used_a[p.i] = used_b[p.j] = true;
        const Complex u = ma[p.i], v = mb[p.j];
        const double ru = std::abs(u) - 1.0, rv = std::abs(v) - 1.0;
        if (ru * rv >= 0.0 && !(ru == 0.0 && rv != 0.0)) continue;
        if (u.imag() < 0.0 && v.imag() < 0.0) continue;  // conjugate partner reported once
        const double th = ru / (ru - rv);
        const Complex z = u + th * (v - u);
        // A pair may collide on the real axis and cross within one step; the
        // real endpoint then decides the type.
        EventKind kind = EventKind::NeimarkSacker;
        if (is_real(u) || is_real(v)) {
            const Complex r = is_real(v) ? v : u;
            kind = r.real() < 0.0 ? EventKind::PeriodDoubling : EventKind::Fold;
        }
        if (kind == EventKind::NeimarkSacker && (u.imag() < 0.0 || v.imag() < 0.0)) continue;
        out.push_back({u, v, z, kind});
    }
    return out;
}

double vertex_tau(const BranchPoint& p0, const BranchPoint& p1, const BranchPoint& p2) {
    const double s0 = p0.arclength, s1 = p1.arclength, s2 = p2.arclength;
    const double t0 = p0.orbit.params.tau, t1 = p1.orbit.params.tau, t2 = p2.orbit.params.tau;
    const double d1 = (t1 - t0) / (s1 - s0), d2 = (t2 - t1) / (s2 - s1);
    const double a = (d2 - d1) / (s2 - s0);
    if (a == 0.0) return t1;
    const double b = d1 - a * (s0 + s1);
    const double sv = -b / (2.0 * a);
    return t0 + (sv - s0) * (b + a * (sv + s0));
}

// Bisection in arclength between two branch points for a multiplier crossing.
void refine_crossing(const BranchPoint& pa, const BranchPoint& pb, const UnitCrossing& cr, BifurcationEvent& ev,
                     const ContinuationOptions& opts) {
    const PeriodicOrbit& xb = pb.orbit;
    const PeriodicOrbit xa = remesh(pa.orbit, xb.mesh);
    const BranchDirection chord = difference(xb, xa);
    FloquetOptions fo;
    fo.count = opts.multipliers;

    auto critical = [&](const FloquetSpectrum& s, Complex near) {
        Complex best = near;
        if (cr.kind == EventKind::PeriodDoubling) {
            // Leftmost multiplier; a complex pair there is still inside the circle.
            double left = std::numeric_limits<double>::infinity();
            for (Complex m : s.nontrivial())
                if (m.real() < left) {
                    left = m.real();
                    best = m;
                }
            return best;
        }
        double dist = std::numeric_limits<double>::infinity();
        for (Complex m : s.nontrivial()) {
            if (cr.kind != EventKind::NeimarkSacker && !is_real(m)) continue;
            if (cr.kind == EventKind::NeimarkSacker && m.imag() < 0.0) continue;
            if (std::abs(m - near) < dist) {
                dist = std::abs(m - near);
                best = m;
            }
        }
        return best;
    };

    double th_lo = 0.0, th_hi = 1.0;
    double g_lo = std::abs(cr.before) - 1.0, g_hi = std::abs(cr.after) - 1.0;
    double tau_lo = xa.params.tau, tau_hi = xb.params.tau;
    Complex mu_lo = cr.before, mu_hi = cr.after;
    std::optional<PeriodicOrbit> orb_lo, orb_hi;
    orb_hi = xb;
    orb_lo = xa;

    for (int it = 0; it < 40; ++it) {
        if (std::abs(tau_hi - tau_lo) <= opts.event_tau_tol && th_hi - th_lo <= 1.0 / 64.0) break;
        const double th = 0.5 * (th_lo + th_hi);
        const PeriodicOrbit pred = step(xa, th, chord);
        PeriodicOrbit x;
        try {
            x = newton_correct_extended(pred, xb, arclength_row(chord, pred), opts.newton);
        } catch (const NumericalFailure&) {
            break;
        }
        FloquetSpectrum s;
        try {
            s = floquet_multipliers(x, fo);
        } catch (const NumericalFailure&) {
            break;
        }
        const Complex mu = critical(s, 0.5 * (mu_lo + mu_hi));
        const double g = std::abs(mu) - 1.0;
        if ((g < 0.0) == (g_lo < 0.0)) {
            th_lo = th;
            g_lo = g;
            tau_lo = x.params.tau;
            mu_lo = mu;
            orb_lo = x;
        } else {
            th_hi = th;
            g_hi = g;
            tau_hi = x.params.tau;
            mu_hi = mu;
            orb_hi = x;
        }
    }
    const double w = (g_lo != g_hi) ? g_lo / (g_lo - g_hi) : 0.5;
    ev.tau_at = tau_lo + w * (tau_hi - tau_lo);
    ev.tau_lo = std::min(tau_lo, tau_hi);
    ev.tau_hi = std::max(tau_lo, tau_hi);
    const bool use_lo = std::abs(g_lo) <= std::abs(g_hi);
    ev.multiplier = use_lo ? mu_lo : mu_hi;
    ev.orbit = use_lo ? orb_lo : orb_hi;
    ev.period = ev.orbit->period;
}

}  // namespace

std::vector<BifurcationEvent> detect_events(const ContinuationBranch& branch, const ContinuationOptions& opts) {
    std::vector<BifurcationEvent> events;
    const auto& pts = branch.points;
    if (pts.empty()) return events;
    const double t_hom = homoclinic_threshold(pts.front().orbit, opts);

    for (std::size_t k = 1; k < pts.size(); ++k) {
        const BranchPoint& pa = pts[k - 1];
        const BranchPoint& pb = pts[k];
        const double ta = pa.orbit.params.tau, tb = pb.orbit.params.tau;

        if (pa.floquet && pb.floquet) {
            for (const UnitCrossing& cr : unit_crossings(*pa.floquet, *pb.floquet)) {
                if (cr.kind == EventKind::Fold) continue;  // folds are read off tau reversals
                if (cr.kind == EventKind::NeimarkSacker) {
                    bool resonant = false;
                    const double phi = std::arg(cr.at);
                    for (int q = 1; q <= 4; ++q)
                        if (std::abs(std::remainder(q * phi, 2.0 * kPi)) < 1e-2) resonant = true;
                    if (resonant) continue;
                }
                BifurcationEvent ev;
                ev.kind = cr.kind;
                ev.after = k - 1;
                ev.tau_lo = std::min(ta, tb);
                ev.tau_hi = std::max(ta, tb);
                const double ru = std::abs(cr.before) - 1.0, rv = std::abs(cr.after) - 1.0;
                ev.tau_at = ta + ru / (ru - rv) * (tb - ta);
                ev.multiplier = cr.at;
                ev.period = pa.orbit.period + ru / (ru - rv) * (pb.orbit.period - pa.orbit.period);
                ev.saddle_distance = std::min(pa.saddle_distance, pb.saddle_distance);
                if (opts.refine_events) refine_crossing(pa, pb, cr, ev, opts);
                events.push_back(std::move(ev));
            }
        }

        if (k >= 2) {
            const double tp = pts[k - 2].orbit.params.tau;
            const double d1 = ta - tp, d2 = tb - ta;
            if (d1 * d2 < 0.0) {
                BifurcationEvent ev;
                ev.kind = EventKind::Fold;
                ev.after = k - 1;
                ev.tau_lo = std::min({tp, ta, tb});
                ev.tau_hi = std::max({tp, ta, tb});
                ev.tau_at = std::clamp(vertex_tau(pts[k - 2], pa, pb), ev.tau_lo, ev.tau_hi);
                ev.period = pa.orbit.period;
                ev.saddle_distance = pa.saddle_distance;
                if (pa.floquet) {
                    double best = std::numeric_limits<double>::infinity();
                    for (Complex m : pa.floquet->nontrivial())
                        if (std::abs(m - 1.0) < best) {
                            best = std::abs(m - 1.0);
                            ev.multiplier = m;
                        }
                }
                ev.orbit = pa.orbit;
                events.push_back(std::move(ev));
            }
        }

        if (near_homoclinic(pa, pb, t_hom, opts)) {
            BifurcationEvent ev;
            ev.kind = EventKind::HomoclinicApproach;
            ev.after = k - 1;
            ev.tau_lo = std::min(ta, tb);
            ev.tau_hi = std::max(ta, tb);
            ev.tau_at = tb;
            ev.period = pb.orbit.period;
            ev.saddle_distance = pb.saddle_distance;
            ev.period_slope = period_slope(pa, pb);
            events.push_back(std::move(ev));
            break;
        }
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const BifurcationEvent& l, const BifurcationEvent& r) { return l.after < r.after; });
    return events;
}

ContinuationBranch continue_branch(const PeriodicOrbit& origin, double tau_lo, double tau_hi,
                                   const ContinuationOptions& opts, const std::optional<BranchDirection>& direction) {
    if (!(tau_lo <= tau_hi)) throw InvalidParameter("tau range must be ordered");
    if (!(opts.min_step > 0.0) || opts.initial_step < opts.min_step || opts.max_step < opts.initial_step)
        throw InvalidParameter("steplengths must satisfy 0 < min <= initial <= max");
    const double tau0 = origin.params.tau;
    if (tau0 < tau_lo - 1e-12 || tau0 > tau_hi + 1e-12) throw InvalidParameter("origin lies outside the tau range");

    ContinuationBranch br;
    br.points.push_back(make_point(origin, opts, 0.0, 0));
    if (tau_lo == tau_hi) return br;
    const double t_hom = homoclinic_threshold(origin, opts);

    double h = opts.initial_step;
    BranchDirection t;
    if (direction) {
        if (direction->du.size() != origin.values.size()) throw InvalidParameter("direction does not match the orbit mesh");
        t = *direction;
    } else {
        // Natural-parameter first step.
        const int dir = opts.direction >= 0 ? 1 : -1;
        double dt = std::min(h, opts.max_tau_step);
        std::optional<PeriodicOrbit> second;
        while (dt >= opts.min_step) {
            SwingParams p = origin.params;
            p.tau = tau0 + dir * dt;
            try {
                second = newton_correct(origin, p, opts.newton);
                break;
            } catch (const NumericalFailure&) {
                dt *= 0.5;
            }
        }
        if (!second) {
            br.stop = StopReason::MinStep;
            br.stop_detail = "first natural-parameter step failed";
            return br;
        }
        t = difference(*second, origin);
    }
    const double tn = wnorm(t);
    if (!(tn > 0.0)) throw InvalidParameter("zero continuation direction");
    t = scaled(t, 1.0 / tn);

    double arclength = 0.0;
    PeriodicOrbit x = br.points.front().orbit;
    if (x.mesh.points() != origin.mesh.points()) t = remesh_direction(t, origin, x.mesh);

    for (int stepno = 0; stepno < opts.max_steps; ++stepno) {
        double hs = h;
        if (std::abs(t.dtau) > 0.0) hs = std::min(hs, opts.max_tau_step / std::abs(t.dtau));
        const PeriodicOrbit pred = step(x, hs, t);
        NewtonReport rep;
        std::optional<PeriodicOrbit> y;
        try {
            y = newton_correct_extended(pred, x, arclength_row(t, pred), opts.newton, &rep);
        } catch (const NumericalFailure&) {
        }
        bool ok = y.has_value();
        if (ok) {
            const BranchDirection dy = difference(*y, x);
            const double len = wnorm(dy);
            ok = len > 0.0 && wdot(dy, t) >= 0.5 * len && std::abs(dy.dtau) <= 2.0 * opts.max_tau_step;
        }
        if (!ok) {
            h *= 0.5;
            if (h < opts.min_step) {
                br.stop = StopReason::MinStep;
                br.stop_detail = "steplength fell below the minimum at tau = " + std::to_string(x.params.tau);
                break;
            }
            continue;
        }

        PeriodicOrbit z = refine_mesh(*y, opts);
        BranchPoint bp;
        try {
            bp = make_point(z, opts, 0.0, rep.iterations);
        } catch (const NumericalFailure& e) {
            br.stop = StopReason::Failure;
            br.stop_detail = e.what();
            break;
        }
        const PeriodicOrbit xr = remesh(x, bp.orbit.mesh);
        BranchDirection secant = difference(bp.orbit, xr);
        const double len = wnorm(secant);
        arclength += len;
        bp.arclength = arclength;
        t = scaled(secant, 1.0 / len);
        x = bp.orbit;
        br.points.push_back(std::move(bp));

        if (rep.iterations <= 3) h = std::min(1.5 * h, opts.max_step);
        else if (rep.iterations >= 6) h = std::max(0.7 * h, opts.min_step);

        if (near_homoclinic(br.points[br.points.size() - 2], br.points.back(), t_hom, opts)) {
            br.stop = StopReason::Homoclinic;
            br.stop_detail = "period beyond threshold near a saddle";
            break;
        }
        const double tau = x.params.tau;
        if (tau < tau_lo || tau > tau_hi) {
            br.stop = StopReason::RangeLeft;
            break;
        }
        if (stepno + 1 == opts.max_steps) br.stop = StopReason::MaxSteps;
    }
    br.events = detect_events(br, opts);
    return br;
}

DoubledStart switch_period_doubling(const BifurcationEvent& event, const ContinuationOptions& opts,
                                    double perturbation) {
    if (event.kind != EventKind::PeriodDoubling || !event.orbit)
        throw InvalidParameter("branch switching needs a refined period-doubling event");
    const PeriodicOrbit& o = *event.orbit;
    FloquetOptions fo;
    fo.count = opts.multipliers;
    const FloquetMode mode = floquet_mode(o, Complex(-1.0, 0.0), fo);

    std::vector<double> pts;
    for (double s : o.mesh.points()) pts.push_back(0.5 * s);
    for (std::size_t i = 1; i < o.mesh.points().size(); ++i) pts.push_back(0.5 + 0.5 * o.mesh.points()[i]);
    pts.back() = 1.0;
    DoubledStart ds;
    ds.base = o;
    ds.base.mesh = PeriodicMesh(pts);
    ds.base.period = 2.0 * o.period;
    const std::size_t L = o.values.size();
    ds.base.values.resize(2 * L);
    BranchDirection dir;
    dir.du.resize(2 * L);
    const double mu = mode.multiplier.real();
    for (std::size_t p = 0; p < 2 * L; ++p) {
        ds.base.values[p] = o.values[p % L];
        const State& w = mode.values[p % L];
        dir.du[p] = p < L ? w : State{mu * w[0], mu * w[1]};
    }
    dir = scaled(dir, 1.0 / wnorm(dir));

    std::vector<double> trials{perturbation, 0.5 * perturbation, 2.0 * perturbation};
    for (double h = 0.25 * perturbation; h >= 1e-3 * perturbation; h *= 0.5) trials.push_back(h);
    for (double h : trials) {
        const PeriodicOrbit pred = step(ds.base, h, dir);
        try {
            PeriodicOrbit y = newton_correct_extended(pred, ds.base, arclength_row(dir, pred), opts.newton);
            // Reject a return to the base orbit traversed twice.
            double asym = 0.0;
            for (std::size_t p = 0; p < L; ++p)
                asym = std::max({asym, std::abs(y.values[p][0] - y.values[p + L][0]),
                                 std::abs(y.values[p][1] - y.values[p + L][1])});
            if (asym > 0.1 * h && std::abs(y.params.tau - o.params.tau) <= opts.max_tau_step) {
                ds.first = std::move(y);
                return ds;
            }
        } catch (const NumericalFailure&) {
        }
    }
    throw NumericalFailure("period-doubling branch switch did not converge");
}

ContinuationBranch continue_doubled(const BifurcationEvent& event, double tau_lo, double tau_hi,
                                    const ContinuationOptions& opts) {
    const DoubledStart ds = switch_period_doubling(event, opts);
    PeriodicOrbit first = ds.first;
    first.params.tau = std::clamp(first.params.tau, tau_lo, tau_hi);
    if (first.params.tau != ds.first.params.tau) first = newton_correct(first, first.params, opts.newton);
    BranchDirection dir = difference(first, ds.base);
    return continue_branch(first, tau_lo, tau_hi, opts, dir);
}

CascadeResult cascade_scan(const PeriodicOrbit& seed, double tau_lo, double tau_hi, int max_doublings,
                           const ContinuationOptions& opts) {
    if (max_doublings < 0) throw InvalidParameter("max_doublings must be non-negative");
    CascadeResult out;
    if (max_doublings == 0) return out;
    ContinuationOptions o = opts;
    o.direction = +1;
    ContinuationBranch br;
    try {
        br = continue_branch(seed, tau_lo, tau_hi, o);
    } catch (const NumericalFailure& e) {
        out.partial = true;
        out.failure = true;
        out.detail = e.what();
        return out;
    }
    while (static_cast<int>(out.entries.size()) < max_doublings) {
        const BifurcationEvent* pd = nullptr;
        for (const BifurcationEvent& ev : br.events)
            if (ev.kind == EventKind::PeriodDoubling && ev.orbit && ev.tau_at >= tau_lo && ev.tau_at <= tau_hi) {
                pd = &ev;
                break;
            }
        if (!pd) {
            out.partial = true;
            out.failure = br.stop == StopReason::Failure;
            out.detail = "no further period doubling on the branch (" + std::string(to_string(br.stop)) + ")";
            break;
        }
        out.entries.push_back(CascadeEntry{static_cast<int>(out.entries.size()), pd->tau_at, pd->period});
        if (static_cast<int>(out.entries.size()) == max_doublings) break;
        const BifurcationEvent event = *pd;
        try {
            ContinuationOptions od = o;
            od.max_intervals = std::max(o.max_intervals, 2 * event.orbit->intervals());
            od.min_intervals = std::max(o.min_intervals, 2 * event.orbit->intervals());
            if (out.entries.size() >= 2) {
                // Resolve the next doubling relative to the shrinking spacing.
                const double gap = std::abs(out.entries.back().tau_pd - out.entries[out.entries.size() - 2].tau_pd);
                od.max_tau_step = std::min(od.max_tau_step, gap / 16.0);
                od.initial_step = std::min(od.initial_step, od.max_tau_step);
                od.min_step = std::min(od.min_step, 1e-3 * od.initial_step);
                od.event_tau_tol = std::min(od.event_tau_tol, gap / 100.0);
            }
            br = continue_doubled(event, tau_lo, tau_hi, od);
            o = od;
        } catch (const NumericalFailure& e) {
            out.partial = true;
            out.failure = true;
            out.detail = std::string("branch switch failed: ") + e.what();
            break;
        }
    }
    return out;
}

}  // namespace delaybif
