#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "delaybif/dde_sim.hpp"
#include "delaybif/error.hpp"
#include "delaybif/model.hpp"

using namespace delaybif;

namespace {

// Root of sin(y) - w on [lo, hi] by plain bisection.
double bisect_sin(double w, double lo, double hi) {
    double flo = std::sin(lo) - w;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = std::sin(mid) - w;
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST(Model, ScalesReferenceParameters) {
    const SwingParams p = to_dimensionless(PhysicalParams{0.1, 0.25, 16.0, 2.0, 0.0});
    EXPECT_DOUBLE_EQ(p.a, 0.025);
    EXPECT_DOUBLE_EQ(p.atilde, 0.0625);
    EXPECT_DOUBLE_EQ(p.w, 0.125);
    EXPECT_DOUBLE_EQ(p.tau, 0.0);
    EXPECT_DOUBLE_EQ(to_dimensionless(PhysicalParams{0.1, 0.25, 16.0, 2.0, 10.0}).tau, 40.0);
}

TEST(Model, IdentityScaling) {
    const SwingParams p = to_dimensionless(PhysicalParams{0.0, 0.0, 1.0, 0.0, 5.0});
    EXPECT_EQ(p.a, 0.0);
    EXPECT_EQ(p.atilde, 0.0);
    EXPECT_EQ(p.w, 0.0);
    EXPECT_EQ(p.tau, 5.0);
}

TEST(Model, RejectsBadPhysicalParameters) {
    EXPECT_THROW(to_dimensionless(PhysicalParams{0.1, 0.2, 0.0, 1.0, 0.0}), InvalidParameter);
    EXPECT_THROW(to_dimensionless(PhysicalParams{0.1, 0.2, 1.0, 1.0, -1.0}), InvalidParameter);
    EXPECT_THROW(to_dimensionless(PhysicalParams{NAN, 0.2, 1.0, 1.0, 0.0}), InvalidParameter);
}

TEST(Model, EquilibriaMatchBisection) {
    SwingParams p = reference_params();
    const EquilibriumSet set = equilibria(p, -kPi, 3 * kPi);
    ASSERT_EQ(set.points.size(), 4u);
    const double lower = bisect_sin(0.125, -kPi / 2, kPi / 2);
    EXPECT_NEAR(set.points[0].y_e, lower, 1e-13);
    EXPECT_EQ(set.points[0].kind, Branch::Lower);
    EXPECT_NEAR(set.points[1].y_e, bisect_sin(0.125, 3 * kPi / 2, kPi / 2), 1e-13);
    EXPECT_NEAR(set.points[1].y_e, 3.01626, 1e-5);
    EXPECT_EQ(set.points[1].kind, Branch::Upper);
    EXPECT_NEAR(set.points[2].y_e, lower + 2 * kPi, 1e-13);
    EXPECT_EQ(set.points[2].k, 1);
    EXPECT_NEAR(set.points[3].y_e, set.points[1].y_e + 2 * kPi, 1e-13);
    EXPECT_EQ(set.points[3].kind, Branch::Upper);
}

TEST(Model, FoldAndEmptyEquilibria) {
    SwingParams p = reference_params();
    p.w = 1.0;
    const EquilibriumSet fold = equilibria(p, 0.0, 2 * kPi);
    ASSERT_EQ(fold.points.size(), 1u);
    EXPECT_NEAR(fold.points[0].y_e, kPi / 2, 1e-12);
    EXPECT_EQ(fold.points[0].kind, Branch::Fold);
    p.w = 1.5;
    const EquilibriumSet none = equilibria(p, 0.0, 2 * kPi);
    EXPECT_TRUE(none.points.empty());
    EXPECT_TRUE(none.none_exist);
}

TEST(Model, JetValues) {
    const SwingParams p = reference_params();
    const EquilibriumSet set = equilibria(p, 0.0, 2 * kPi);
    const NonlinearityJet lo = swing_jet(p, set.points[0]);
    // cos(arcsin w) = sqrt(1 - w^2) in closed form.
    EXPECT_NEAR(lo.h1, std::sqrt(1.0 - 0.015625), 1e-15);
    EXPECT_NEAR(lo.h1, 0.9921567, 1e-7);
    EXPECT_DOUBLE_EQ(lo.h2, -0.125);
    EXPECT_NEAR(lo.h3, -0.9921567, 1e-7);
    EXPECT_NEAR(swing_jet(p, set.points[1]).h1, -0.9921567, 1e-7);

    SwingParams f = p;
    f.w = 1.0;
    const NonlinearityJet fj = swing_jet(f, equilibria(f, 0.0, 2 * kPi).points[0]);
    EXPECT_EQ(fj.h1, 0.0);
    EXPECT_EQ(fj.h2, -1.0);
    EXPECT_EQ(fj.h3, 0.0);
}

TEST(Model, RoundTripAndBranchSignProperty) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.01, 2.0), wd(0.01, 0.999);
    for (int i = 0; i < 500; ++i) {
        const PhysicalParams q{u(rng), u(rng), 4.0 * u(rng), 0.0, 10.0 * u(rng)};
        PhysicalParams qq = q;
        qq.w_hat = wd(rng) * q.ks_hat;
        const PhysicalParams back = to_physical(to_dimensionless(qq), qq.ks_hat);
        EXPECT_NEAR(back.a_hat, qq.a_hat, 1e-14 * qq.a_hat);
        EXPECT_NEAR(back.atilde_hat, qq.atilde_hat, 1e-14 * qq.atilde_hat);
        EXPECT_NEAR(back.w_hat, qq.w_hat, 1e-14 * qq.w_hat);
        EXPECT_NEAR(back.tau_hat, qq.tau_hat, 1e-14 * qq.tau_hat);

        const SwingParams p = to_dimensionless(qq);
        for (const Equilibrium& e : equilibria(p, -4 * kPi, 4 * kPi).points) {
            EXPECT_LE(std::abs(std::sin(e.y_e) - p.w), 1e-12);
            EXPECT_EQ(e.kind == Branch::Lower, e.c >= 0.0);
        }
    }
}

TEST(Model, DimensionalAndDimensionlessRunsAgree) {
    const PhysicalParams q{0.1, 0.25, 16.0, 2.0, 0.5};
    const SwingParams p = to_dimensionless(q);
    const double root = std::sqrt(q.ks_hat);
    IntegrationOptions io;
    io.tol = 1e-10;
    const State x0{0.3, 0.0};
    const Trajectory dimless = integrate(p, InitialFunction::constant(x0), 40.0, io);
    const Trajectory dim = integrate(SwingField::from(q), InitialFunction::constant(x0), 40.0 / root, io);
    for (double th : {0.5, 1.7, 4.0, 9.9}) {
        const State a = dim.at(th), b = dimless.at(th * root);
        EXPECT_NEAR(a[0], b[0], 1e-7);
        EXPECT_NEAR(a[1], root * b[1], 1e-6);
    }
}
