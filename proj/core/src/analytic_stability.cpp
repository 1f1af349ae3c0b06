#include "delaybif/analytic_stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "delaybif/error.hpp"
#include "delaybif/spectrum.hpp"

namespace delaybif {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

double boundary_tol(double tau) { return 1e-12 * std::max(1.0, std::abs(tau)); }

double c_of_w(double w) { return std::sqrt((1.0 - w) * (1.0 + w)); }

// Bisection on a continuous function with f(lo), f(hi) of opposite sign.
template <typename F>
double bisect(F&& f, double lo, double hi, double flo) {
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

Complex imag_axis_residual(double a, double atilde, double c, double tau, double omega) {
    return Quasipolynomial{a, atilde, c, tau}(Complex(0.0, omega));
}

}  // namespace

const char* to_string(HopfRegime r) {
    switch (r) {
        case HopfRegime::Switching: return "switching";
        case HopfRegime::DelayIndependentStable: return "delay-independent-stable";
        case HopfRegime::BautinBoundary: return "bautin-boundary";
        case HopfRegime::NonHyperbolic: return "non-hyperbolic";
        case HopfRegime::Unstable: return "unstable";
    }
    return "?";
}

const char* to_string(Stability s) {
    switch (s) {
        case Stability::AsymptoticallyStable: return "asymptotically-stable";
        case Stability::Unstable: return "unstable";
        case Stability::NonHyperbolic: return "non-hyperbolic";
    }
    return "?";
}

const char* to_string(Codim2Kind k) {
    switch (k) {
        case Codim2Kind::HopfHopf: return "hopf-hopf";
        case Codim2Kind::Bautin: return "bautin";
        case Codim2Kind::FoldHopf: return "fold-hopf";
    }
    return "?";
}

HopfFrequencies hopf_frequencies(double a, double atilde, double c) {
    const double d = atilde * atilde - a * a;
    if (d < 0.0) throw InvalidParameter("hopf frequencies need atilde >= a");
    const double inner = c + 0.25 * d;
    if (inner < 0.0) throw InvalidParameter("no imaginary-axis crossing for these coefficients");
    const double half = 0.5 * std::sqrt(d);
    const double root = std::sqrt(inner);
    return HopfFrequencies{root + half, root - half};
}

double HopfPointTable::tau_of(int family, int n) const {
    if (family == 1) return (phase + kTwoPi * n) / omega.omega1;
    return (-phase + kTwoPi * (n + 1)) / omega.omega2;
}

HopfPointTable hopf_points(double a, double atilde, double c, int n_upper) {
    if (!std::isfinite(a) || !std::isfinite(atilde) || !std::isfinite(c))
        throw InvalidParameter("coefficients must be finite");
    if (!(a > 0.0) || !(atilde > 0.0)) throw InvalidParameter("a and atilde must be positive");
    if (n_upper < 0) throw InvalidParameter("n_upper must be non-negative");

    HopfPointTable t;
    t.a = a;
    t.atilde = atilde;
    t.c = c;
    if (c < 0.0) {
        t.regime = HopfRegime::Unstable;
        return t;
    }
    if (c == 0.0) {
        t.regime = HopfRegime::NonHyperbolic;
        return t;
    }
    if (atilde < a) {
        t.regime = HopfRegime::DelayIndependentStable;
        return t;
    }
    t.regime = (atilde == a) ? HopfRegime::BautinBoundary : HopfRegime::Switching;
    t.omega = hopf_frequencies(a, atilde, c);
    t.phase = std::acos(-a / atilde);
    for (int n = 0; n <= n_upper; ++n) {
        t.tau1.push_back(HopfPoint{n, 1, t.tau_of(1, n), t.omega.omega1, +1});
        t.tau2.push_back(HopfPoint{n, 2, t.tau_of(2, n), t.omega.omega2, -1});
    }
    return t;
}

bool UnstableDelaySet::contains(double tau) const {
    return std::any_of(intervals.begin(), intervals.end(),
                       [tau](const DelayInterval& iv) { return tau > iv.lo && tau < iv.hi; });
}

UnstableDelaySet unstable_set(const HopfPointTable& table) {
    UnstableDelaySet out;
    if (table.regime != HopfRegime::Switching) return out;

    // tau_1(n+1) - tau_2n decreases strictly in n because omega_2 < omega_1.
    int n = 0;
    while (table.tau_of(2, n) < table.tau_of(1, n + 1)) ++n;
    out.n_max = n - 1;
    for (int k = 0; k <= out.n_max; ++k) out.intervals.push_back({table.tau_of(1, k), table.tau_of(2, k)});
    out.intervals.push_back({table.tau_of(1, out.n_max + 1), std::numeric_limits<double>::infinity()});
    return out;
}

int crossings_below(const HopfPointTable& table, int family, double tau) {
    if (table.regime != HopfRegime::Switching && table.regime != HopfRegime::BautinBoundary) return 0;
    const double om = table.omega_of(family);
    const double shift = (family == 1) ? table.phase : kTwoPi - table.phase;
    int k = std::max(0, static_cast<int>(std::floor((om * tau - shift) / kTwoPi)));
    while (table.tau_of(family, k) < tau) ++k;
    while (k > 0 && table.tau_of(family, k - 1) >= tau) --k;
    return k;
}

int unstable_count(const HopfPointTable& table, double tau) {
    switch (table.regime) {
        case HopfRegime::Switching:
            return 2 * (crossings_below(table, 1, tau) - crossings_below(table, 2, tau));
        case HopfRegime::DelayIndependentStable:
        case HopfRegime::BautinBoundary:
            return 0;
        case HopfRegime::NonHyperbolic:
            return 0;
        case HopfRegime::Unstable: {
            // One positive real root at tau = 0; further roots can only enter
            // through i*omega with omega^2 -+ k omega + |c| = 0, k^2 = atilde^2 - a^2.
            const double k2 = table.atilde * table.atilde - table.a * table.a;
            if (k2 < 4.0 * std::abs(table.c)) return 1;
            return -1;
        }
    }
    return -1;
}

namespace {

bool on_hopf_delay(const HopfPointTable& table, double tau) {
    for (int family = 1; family <= 2; ++family) {
        const int k = crossings_below(table, family, tau);
        for (int n : {k - 1, k, k + 1}) {
            if (n < 0) continue;
            if (std::abs(table.tau_of(family, n) - tau) <= boundary_tol(tau)) return true;
        }
    }
    return false;
}

Stability from_count(int n_u) { return n_u > 0 ? Stability::Unstable : Stability::AsymptoticallyStable; }

}  // namespace

StabilityVerdict classify_delay(const HopfPointTable& table, double tau) {
    StabilityVerdict v;
    switch (table.regime) {
        case HopfRegime::DelayIndependentStable:
            v.kind = Stability::AsymptoticallyStable;
            v.delay_independent = true;
            return v;
        case HopfRegime::NonHyperbolic:
            v.kind = Stability::NonHyperbolic;
            v.delay_independent = true;
            v.n_u = 0;
            return v;
        case HopfRegime::Unstable:
            v.kind = Stability::Unstable;
            v.delay_independent = true;
            v.n_u = unstable_count(table, tau);
            return v;
        case HopfRegime::BautinBoundary:
            v.kind = on_hopf_delay(table, tau) ? Stability::NonHyperbolic : Stability::AsymptoticallyStable;
            if (v.kind == Stability::NonHyperbolic) {
                v.below = Stability::AsymptoticallyStable;
                v.above = Stability::AsymptoticallyStable;
            }
            return v;
        case HopfRegime::Switching:
            break;
    }
    if (on_hopf_delay(table, tau)) {
        const double eps = 4.0 * boundary_tol(tau);
        v.kind = Stability::NonHyperbolic;
        v.n_u = unstable_count(table, tau - eps);
        v.below = from_count(v.n_u);
        v.above = from_count(unstable_count(table, tau + eps));
        return v;
    }
    v.n_u = unstable_count(table, tau);
    v.kind = from_count(v.n_u);
    return v;
}

StabilityVerdict classify_equilibrium(const SwingParams& params, const Equilibrium& eq) {
    validate_for_equilibria(params);
    const double c = c_of_w(params.w);
    switch (eq.kind) {
        case Branch::Upper: {
            StabilityVerdict v;
            v.kind = Stability::Unstable;
            v.delay_independent = true;
            v.n_u = unstable_count(hopf_points(params.a, params.atilde, -c, 0), params.tau);
            return v;
        }
        case Branch::Fold: {
            StabilityVerdict v;
            v.kind = Stability::NonHyperbolic;
            v.delay_independent = true;
            return v;
        }
        case Branch::Lower:
            break;
    }
    return classify_delay(hopf_points(params.a, params.atilde, c, 0), params.tau);
}

// --- codimension two ----------------------------------------------------------

namespace {

struct FamilyDelay {
    double a;
    int n;
    int m;
    // tau_1n - tau_2m as a function of (atilde, c)
    double operator()(double atilde, double c) const {
        const HopfFrequencies om = hopf_frequencies(a, atilde, c);
        const double phase = std::acos(-a / atilde);
        return (phase + kTwoPi * n) / om.omega1 - (-phase + kTwoPi * (m + 1)) / om.omega2;
    }
};

Codim2Point make_hopf_hopf(double a, double atilde, double c, int n, int m, SecondParameter which,
                           double value) {
    const HopfFrequencies om = hopf_frequencies(a, atilde, c);
    const double phase = std::acos(-a / atilde);
    Codim2Point p;
    p.kind = Codim2Kind::HopfHopf;
    p.tau = (phase + kTwoPi * n) / om.omega1;
    p.which = which;
    p.value = value;
    p.omegas = {om.omega1, om.omega2};
    p.n = n;
    p.m = m;
    p.residual = std::max(std::abs(imag_axis_residual(a, atilde, c, p.tau, om.omega1)),
                          std::abs(imag_axis_residual(a, atilde, c, p.tau, om.omega2)));
    return p;
}

template <typename Diff, typename Make>
void scan_intersections(const HopfHopfQuery& q, double lo, double hi, Diff&& diff, Make&& make,
                        std::vector<Codim2Point>& out) {
    if (!(hi > lo) || q.grid < 2) return;
    for (int n = 0; n <= q.n_max; ++n) {
        for (int m = 0; m <= q.m_max; ++m) {
            auto f = [&](double x) { return diff(x, n, m); };
            double x_prev = lo;
            double f_prev = f(lo);
            for (int i = 1; i <= q.grid; ++i) {
                const double x = lo + (hi - lo) * i / q.grid;
                const double fx = f(x);
                if (f_prev != 0.0 && (fx < 0.0) != (f_prev < 0.0)) {
                    const double root = bisect(f, x_prev, x, f_prev);
                    Codim2Point p = make(root, n, m);
                    if (p.tau >= q.tau_lo && p.tau <= q.tau_hi) out.push_back(p);
                }
                x_prev = x;
                f_prev = fx;
            }
        }
    }
}

void sort_points(std::vector<Codim2Point>& v) {
    std::sort(v.begin(), v.end(), [](const Codim2Point& l, const Codim2Point& r) {
        if (l.tau != r.tau) return l.tau < r.tau;
        return l.value < r.value;
    });
}

}  // namespace

std::vector<Codim2Point> hopf_hopf_points_atilde(const HopfHopfQuery& q) {
    std::vector<Codim2Point> out;
    if (!(q.c > 0.0) || !(q.a > 0.0)) return out;
    // Exclude the atilde = a end, where both families coincide (Bautin locus).
    const double lo = std::max(q.lo, q.a * (1.0 + 1e-9));
    scan_intersections(
        q, lo, q.hi,
        [&](double at, int n, int m) { return FamilyDelay{q.a, n, m}(at, q.c); },
        [&](double at, int n, int m) {
            return make_hopf_hopf(q.a, at, q.c, n, m, SecondParameter::Atilde, at);
        },
        out);
    sort_points(out);
    return out;
}

std::vector<Codim2Point> hopf_hopf_points_w(const HopfHopfQuery& q) {
    std::vector<Codim2Point> out;
    if (!(q.atilde > q.a) || !(q.a > 0.0)) return out;
    const double lo = std::max(q.lo, 1e-12);
    const double hi = std::min(q.hi, 1.0 - 1e-12);
    scan_intersections(
        q, lo, hi,
        [&](double w, int n, int m) { return FamilyDelay{q.a, n, m}(q.atilde, c_of_w(w)); },
        [&](double w, int n, int m) {
            return make_hopf_hopf(q.a, q.atilde, c_of_w(w), n, m, SecondParameter::W, w);
        },
        out);
    sort_points(out);
    return out;
}

std::vector<Codim2Point> bautin_points(double a, double w, int count) {
    std::vector<Codim2Point> out;
    if (!(a > 0.0) || !(w > 0.0) || !(w < 1.0)) return out;
    const double c = c_of_w(w);
    const double omega = std::sqrt(c);
    for (int n = 0; n < count; ++n) {
        Codim2Point p;
        p.kind = Codim2Kind::Bautin;
        p.which = SecondParameter::Atilde;
        p.value = a;
        p.n = n;
        p.omegas = {omega};
        // At atilde = a the crossing satisfies cos(omega tau) = -1 and omega^2 = c.
        p.tau = kPi * (2 * n + 1) / omega;
        p.tau_alternative = kPi * (2 * n + 1) / c;
        p.residual = std::abs(imag_axis_residual(a, a, c, p.tau, omega));
        out.push_back(p);
    }
    return out;
}

std::vector<Codim2Point> fold_hopf_points(double a, double atilde, double tau_lo, double tau_hi) {
    std::vector<Codim2Point> out;
    if (!(atilde > a) || !(a > 0.0)) return out;
    const double omega = std::sqrt(atilde * atilde - a * a);
    const double phase = std::acos(-a / atilde);
    for (int n = 0;; ++n) {
        const double tau = (phase + kTwoPi * n) / omega;
        if (tau > tau_hi) break;
        if (tau < tau_lo) continue;
        Codim2Point p;
        p.kind = Codim2Kind::FoldHopf;
        p.tau = tau;
        p.which = SecondParameter::W;
        p.value = 1.0;
        p.omegas = {omega};
        p.n = n;
        p.residual = std::abs(imag_axis_residual(a, atilde, 0.0, tau, omega));
        out.push_back(p);
    }
    return out;
}

std::vector<Codim2Point> codim2_points(double a, double w, double atilde_lo, double atilde_hi,
                                       double tau_lo, double tau_hi, int n_max, int m_max) {
    std::vector<Codim2Point> out;
    if (!(atilde_hi > atilde_lo) || !(tau_hi > tau_lo)) return out;
    HopfHopfQuery q;
    q.a = a;
    q.c = c_of_w(w);
    q.lo = atilde_lo;
    q.hi = atilde_hi;
    q.tau_lo = tau_lo;
    q.tau_hi = tau_hi;
    q.n_max = n_max;
    q.m_max = m_max;
    out = hopf_hopf_points_atilde(q);
    if (a >= atilde_lo && a <= atilde_hi) {
        for (const auto& p : bautin_points(a, w, std::max(n_max, m_max) + 1))
            if (p.tau >= tau_lo && p.tau <= tau_hi) out.push_back(p);
    }
    sort_points(out);
    return out;
}

}  // namespace delaybif
