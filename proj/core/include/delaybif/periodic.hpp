#pragma once

// Periodic solutions of the delayed swing equation by piecewise-polynomial
// collocation on the rescaled period s = t / T:
//
//   u'(s) = T f(u(s), u2(s - tau/T mod 1)),   u(0) = u(1),
//
// with an integral phase condition against a reference profile. Unknowns are
// the profile values at the representation points, the period T and the delay.

#include <optional>
#include <vector>

#include "delaybif/analytic_stability.hpp"
#include "delaybif/collocation.hpp"
#include "delaybif/dde_sim.hpp"
#include "delaybif/model.hpp"

namespace delaybif {

struct PeriodicOrbit {
    SwingParams params;   ///< params.tau is the delay of this orbit
    double period = 0.0;
    int degree = 4;
    PeriodicMesh mesh;
    /// Values at the M * degree periodic representation points
    /// s_i + (j / degree) h_i, i = 0..M-1, j = 0..degree-1.
    std::vector<State> values;

    int intervals() const { return mesh.intervals(); }
    std::size_t points() const { return values.size(); }
    double rep_point(std::size_t p) const;

    /// Profile at rescaled time s (taken modulo 1).
    State operator()(double s) const;
    /// Derivative with respect to s.
    State ds(double s) const;
    /// State at physical time t (taken modulo T).
    State at_time(double t) const { return (*this)(t / period); }

    double min_x1() const;
    double max_x1() const;
    double amplitude() const { return 0.5 * (max_x1() - min_x1()); }
};

/// Builds an orbit with the given mesh by sampling a profile.
template <class Profile>
PeriodicOrbit sample_orbit(const SwingParams& params, double period, const PeriodicMesh& mesh, int degree,
                           Profile&& profile);

/// Same orbit re-represented on another mesh (and degree) by interpolation.
PeriodicOrbit remesh(const PeriodicOrbit& orbit, const PeriodicMesh& mesh);

/// Equidistributing mesh with `intervals` intervals for the orbit's profile.
PeriodicMesh adapted_mesh(const PeriodicOrbit& orbit, int intervals);

/// Sup-norm of the residual u' - T f(u, u_delayed) at `per_interval` equally
/// spaced interior points of every interval; off the collocation nodes this
/// is the discretisation defect.
double collocation_defect(const PeriodicOrbit& orbit, int per_interval = 2);

/// Largest residual at the collocation nodes themselves.
double collocation_residual(const PeriodicOrbit& orbit);

/// Orbit as the history segment on [-tau, 0] ending at rescaled phase s0.
InitialFunction history_from_orbit(const PeriodicOrbit& orbit, double s0 = 0.0, int samples = 400);

struct NewtonOptions {
    double step_tol = 1e-9;      ///< sup-norm of the last Newton update
    double residual_tol = 1e-9;  ///< sup-norm of the collocation residual
    int max_iter = 12;
};

struct NewtonReport {
    bool converged = false;
    int iterations = 0;
    std::vector<double> step_norms;
    std::vector<double> residual_norms;
};

/// Extra scalar equation  row . (u, T, tau) = value  closing the system. The
/// default pins the delay at its current value.
struct ExtraCondition {
    std::vector<double> row;  ///< length 2 L + 2
    double value = 0.0;
};

/// Collocation residual and Jacobian at X = (u, T, tau), phase condition against
/// `reference` (same mesh). Exposed for tests.
struct CollocationSystem {
    std::vector<double> residual;  ///< 2 L collocation equations followed by the phase condition
    struct Entry {
        int row, col;
        double value;
    };
    std::vector<Entry> jacobian;
};

CollocationSystem collocation_system(const PeriodicOrbit& orbit, const PeriodicOrbit& reference);

/// Corrects the profile and period at fixed delay. Throws NumericalFailure on
/// non-convergence or singular Jacobian.
PeriodicOrbit newton_correct(const PeriodicOrbit& guess, const SwingParams& params, const NewtonOptions& opts = {},
                             NewtonReport* report = nullptr);

/// General corrector with the delay free and a caller-supplied extra
/// equation. The phase condition uses `reference`.
PeriodicOrbit newton_correct_extended(const PeriodicOrbit& guess, const PeriodicOrbit& reference,
                                      const ExtraCondition& extra, const NewtonOptions& opts = {},
                                      NewtonReport* report = nullptr);

struct HopfStartOptions {
    int intervals = 40;
    int degree = 4;
    int retries = 6;
    NewtonOptions newton{};
};

/// Small-amplitude orbit near the Hopf point `hopf`; params.tau = hopf.tau + delta.
/// Throws InvalidParameter if delta lies on the side where the theory rules
/// out the branch, NumericalFailure when every amplitude guess fails.
PeriodicOrbit orbit_from_hopf(const SwingParams& params, const HopfPoint& hopf, const HopfStartOptions& opts = {});

/// Minimum distance from the orbit to a saddle equilibrium (UpperBranch) in the
/// (x1, x2) plane.
double saddle_distance(const PeriodicOrbit& orbit, int samples_per_interval = 8);

// ---------------------------------------------------------------------------

template <class Profile>
PeriodicOrbit sample_orbit(const SwingParams& params, double period, const PeriodicMesh& mesh, int degree,
                           Profile&& profile) {
    PeriodicOrbit o;
    o.params = params;
    o.period = period;
    o.degree = degree;
    o.mesh = mesh;
    o.values.resize(static_cast<std::size_t>(mesh.intervals()) * degree);
    for (std::size_t p = 0; p < o.values.size(); ++p) o.values[p] = profile(o.rep_point(p));
    return o;
}

}  // namespace delaybif
