#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <gtest/gtest.h>

#include "delaybif/dde_sim.hpp"
#include "delaybif/error.hpp"
#include "delaybif/periodic.hpp"

using namespace delaybif;
namespace odeint = boost::numeric::odeint;

namespace {

using Vec = std::vector<double>;

// Delay-free reference: x2' = -(a + atilde) x2 - sin(x1 + y_ref) + w.
State ode_reference(const SwingParams& p, State x0, double t_end, double tol = 1e-13) {
    const double yr = std::asin(p.w);
    Vec x{x0[0], x0[1]};
    auto rhs = [&](const Vec& s, Vec& d, double) {
        d[0] = s[1];
        d[1] = -(p.a + p.atilde) * s[1] - std::sin(s[0] + yr) + p.w;
    };
    odeint::integrate_adaptive(odeint::make_controlled<odeint::runge_kutta_dopri5<Vec>>(tol, tol), rhs, x, 0.0, t_end,
                               1e-3);
    return {x[0], x[1]};
}

}  // namespace

TEST(DdeSim, MatchesOdeOracleWithoutDelay) {
    const SwingParams p = reference_params(0.0);
    IntegrationOptions io;
    io.tol = 1e-10;
    const Trajectory tr = integrate(p, InitialFunction::constant({0.1, 0.0}), 60.0, io);
    for (double t : {5.0, 20.0, 60.0}) {
        const State ref = ode_reference(p, {0.1, 0.0}, t);
        EXPECT_NEAR(tr.at(t)[0], ref[0], 1e-6) << t;
        EXPECT_NEAR(tr.at(t)[1], ref[1], 1e-6) << t;
    }
    // Damped pendulum settles at the equilibrium.
    EXPECT_LT(std::abs(integrate(p, InitialFunction::constant({0.1, 0.0}), 400.0, io).at(400.0)[0]), 1e-5);
}

TEST(DdeSim, ObservedOrderWithFixedSteps) {
    const SwingParams p = reference_params(0.0);
    const State ref = ode_reference(p, {0.8, 0.0}, 10.0, 1e-14);
    std::vector<double> err;
    for (double h : {0.2, 0.1, 0.05}) {
        IntegrationOptions io;
        io.fixed_step = h;
        const State x = integrate(p, InitialFunction::constant({0.8, 0.0}), 10.0, io).at(10.0);
        err.push_back(std::max(std::abs(x[0] - ref[0]), std::abs(x[1] - ref[1])));
    }
    EXPECT_GE(std::log2(err[0] / err[1]), 3.5);
    EXPECT_GE(std::log2(err[1] / err[2]), 3.5);
}

TEST(DdeSim, ObservedOrderWithTolerance) {
    const SwingParams p = reference_params(0.0);
    const State ref = ode_reference(p, {0.8, 0.0}, 10.0, 1e-14);
    auto run = [&](double tol) {
        IntegrationOptions io;
        io.tol = tol;
        const Trajectory tr = integrate(p, InitialFunction::constant({0.8, 0.0}), 10.0, io);
        const State x = tr.at(10.0);
        return std::pair{std::max(std::abs(x[0] - ref[0]), std::abs(x[1] - ref[1])), tr.steps().size()};
    };
    const auto [e1, n1] = run(1e-6);
    const auto [e2, n2] = run(1e-9);
    // Error against step count follows at least the nominal order.
    const double order = std::log(e1 / e2) / std::log(static_cast<double>(n2) / static_cast<double>(n1));
    EXPECT_GE(order, 3.5);
}

TEST(DdeSim, MethodOfStepsOracle) {
    // On [0, tau] the delayed term is the known history, on [tau, 2 tau] it is
    // the reference solution of the first interval; both are ODEs for odeint.
    const SwingParams p = reference_params(2.5);
    const double yr = std::asin(p.w), tau = p.tau;
    auto hist = [](double th) { return State{0.4 * std::cos(th), -0.4 * std::sin(th)}; };
    std::vector<double> times;
    std::vector<State> vals, ders;
    for (int i = 0; i <= 2000; ++i) {
        const double th = -tau + tau * i / 2000;
        times.push_back(th);
        vals.push_back(hist(th));
        ders.push_back({-0.4 * std::sin(th), -0.4 * std::cos(th)});
    }
    const InitialFunction phi = InitialFunction::sampled(times, vals, ders);

    const int N = 20000;
    const double dt = tau / N;
    std::vector<double> x2_first(N + 1);
    Vec x{vals.back()[0], vals.back()[1]};
    auto stepper = odeint::make_dense_output(1e-13, 1e-13, odeint::runge_kutta_dopri5<Vec>());
    auto rhs1 = [&](const Vec& s, Vec& d, double t) {
        d[0] = s[1];
        d[1] = -p.a * s[1] - p.atilde * hist(t - tau)[1] - std::sin(s[0] + yr) + p.w;
    };
    std::size_t k = 0;
    odeint::integrate_const(stepper, rhs1, x, 0.0, tau, dt, [&](const Vec& s, double) {
        if (k <= static_cast<std::size_t>(N)) x2_first[k++] = s[1];
    });
    ASSERT_EQ(k, static_cast<std::size_t>(N + 1));
    const State at_tau{x[0], x[1]};

    // Linear interpolation of a 2e4-point table is accurate to ~1e-9 here.
    auto x2_lag = [&](double t) {
        const double u = (t - tau) / dt;
        const int i = std::clamp(static_cast<int>(u), 0, N - 1);
        const double f = u - i;
        return (1 - f) * x2_first[i] + f * x2_first[i + 1];
    };
    auto rhs2 = [&](const Vec& s, Vec& d, double t) {
        d[0] = s[1];
        d[1] = -p.a * s[1] - p.atilde * x2_lag(t) - std::sin(s[0] + yr) + p.w;
    };
    auto stepper2 = odeint::make_controlled<odeint::runge_kutta_dopri5<Vec>>(1e-12, 1e-12);
    odeint::integrate_adaptive(stepper2, rhs2, x, tau, 2 * tau, 1e-3);

    IntegrationOptions io;
    io.tol = 1e-11;
    const Trajectory tr = integrate(p, phi, 2 * tau, io);
    EXPECT_NEAR(tr.at(tau)[0], at_tau[0], 1e-8);
    EXPECT_NEAR(tr.at(tau)[1], at_tau[1], 1e-8);
    EXPECT_NEAR(tr.at(2 * tau)[0], x[0], 1e-7);
    EXPECT_NEAR(tr.at(2 * tau)[1], x[1], 1e-7);
}

TEST(DdeSim, EquilibriumResidence) {
    for (double tau : {0.0, 1.0, 2.5, 7.0}) {
        const SwingParams p = reference_params(tau);
        IntegrationOptions io;
        io.tol = 1e-9;
        const double t_end = 200.0;
        const Trajectory tr = integrate(p, InitialFunction::constant({0.0, 0.0}), t_end, io);
        double drift = 0;
        for (const auto& [t, x] : tr.sample(0.0, t_end, 0.5)) drift = std::max({drift, std::abs(x[0]), std::abs(x[1])});
        EXPECT_LE(drift, 10 * io.tol * t_end) << tau;
    }
}

TEST(DdeSim, BreakpointsAndAccuracyNearThem) {
    const SwingParams p = reference_params(1.5);
    IntegrationOptions io;
    io.tol = 1e-8;
    const Trajectory tr = integrate(p, InitialFunction::constant({0.5, 0.0}), 10.0, io);
    for (int k = 1; k <= 6; ++k) {
        const double bp = k * 1.5;
        if (bp > 10.0) break;
        EXPECT_TRUE(std::any_of(tr.breakpoints().begin(), tr.breakpoints().end(),
                                [&](double b) { return std::abs(b - bp) < 1e-12; }))
            << bp;
    }
    IntegrationOptions fine;
    fine.tol = 1e-12;
    const Trajectory ref = integrate(p, InitialFunction::constant({0.5, 0.0}), 10.0, fine);
    for (double t : {1.5 - 1e-3, 1.5 + 1e-3, 3.0 - 1e-4, 3.0 + 1e-4, 4.5 + 1e-2}) {
        EXPECT_NEAR(tr.at(t)[0], ref.at(t)[0], 1e-6) << t;
        EXPECT_NEAR(tr.at(t)[1], ref.at(t)[1], 1e-6) << t;
    }
}

TEST(DdeSim, Contracts) {
    const SwingParams p = reference_params(1.0);
    EXPECT_THROW(integrate(p, InitialFunction::constant({0, 0}), -1.0), InvalidParameter);
    IntegrationOptions io;
    io.tol = 1.0;
    EXPECT_THROW(integrate(p, InitialFunction::constant({0, 0}), 1.0, io), InvalidParameter);
    const Trajectory tr = integrate(p, InitialFunction::constant({0.1, 0}), 2.0);
    EXPECT_THROW(tr.at(3.0), ContractViolation);
    EXPECT_THROW(tr.at(-1.5), ContractViolation);
    EXPECT_EQ(tr.at(-0.5)[0], 0.1);
    const InitialFunction short_segment = InitialFunction::sampled({-0.5, 0.0}, {{0, 0}, {0, 0}}, {{0, 0}, {0, 0}});
    EXPECT_THROW(integrate(p, short_segment, 1.0), InvalidParameter);
    EXPECT_THROW(InitialFunction::sampled({0.0, -1.0}, {{0, 0}, {0, 0}}, {{0, 0}, {0, 0}}), InvalidParameter);
}

TEST(DdeSim, PoincareOfConstantTrajectoryIsEmpty) {
    const Trajectory tr = integrate(reference_params(1.0), InitialFunction::constant({0, 0}), 50.0);
    Section s;
    s.normal = {0, 1};
    s.offset = 0.5;
    EXPECT_TRUE(poincare_section(tr, s).empty());
}

TEST(DdeSim, PoincareReturnTimesEqualPeriod) {
    SwingParams p = reference_params();
    const HopfPoint hp = hopf_points(p.a, p.atilde, std::sqrt(1 - p.w * p.w), 0).tau1[0];
    p.tau = 2.5;
    PeriodicOrbit o = orbit_from_hopf(SwingParams{p.a, p.atilde, p.w, hp.tau + 0.05}, hp);
    // Walk the orbit to tau = 2.5 at fixed-delay steps.
    for (double tau = hp.tau + 0.1; tau < 2.5; tau += 0.05) {
        SwingParams q = p;
        q.tau = tau;
        o = newton_correct(o, q);
    }
    o = newton_correct(remesh(o, adapted_mesh(o, 80)), p);
    IntegrationOptions io;
    io.tol = 1e-11;
    const Trajectory tr = integrate(p, history_from_orbit(o, 0.0, 2000), 6 * o.period, io);
    Section s;
    s.normal = {0, 1};
    s.direction = -1;
    const auto cr = poincare_section(tr, s);
    ASSERT_GE(cr.size(), 4u);
    for (std::size_t i = 1; i < cr.size(); ++i) EXPECT_NEAR(cr[i].t - cr[i - 1].t, o.period, 1e-6);
}

TEST(DdeSim, PerturbationSettlesOnLimitCycle) {
    SwingParams p = reference_params();
    const HopfPoint hp = hopf_points(p.a, p.atilde, std::sqrt(1 - p.w * p.w), 0).tau1[0];
    PeriodicOrbit o = orbit_from_hopf(SwingParams{p.a, p.atilde, p.w, hp.tau + 0.05}, hp);
    for (double tau = hp.tau + 0.1; tau < 2.5; tau += 0.05) {
        SwingParams q = p;
        q.tau = tau;
        o = newton_correct(o, q);
    }
    p.tau = 2.5;
    o = newton_correct(o, p);
    IntegrationOptions io;
    io.tol = 1e-9;
    const Trajectory tr = integrate(p, InitialFunction::constant({0.01, 0.0}), 3000.0, io);
    // Hausdorff distance between the late loop and the orbit profile.
    std::vector<State> loop, prof;
    for (const auto& [t, x] : tr.sample(3000.0 - 2 * o.period, 3000.0, 0.01)) loop.push_back(x);
    for (int i = 0; i < 2000; ++i) prof.push_back(o(i / 2000.0));
    auto directed = [](const std::vector<State>& A, const std::vector<State>& B) {
        double h = 0;
        for (const State& a : A) {
            double best = 1e9;
            for (const State& b : B) best = std::min(best, std::hypot(a[0] - b[0], a[1] - b[1]));
            h = std::max(h, best);
        }
        return h;
    };
    EXPECT_LE(std::max(directed(loop, prof), directed(prof, loop)), 1e-2);
}
