#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "delaybif/analytic_stability.hpp"
#include "delaybif/continuation.hpp"
#include "delaybif/error.hpp"
#include "delaybif/lyapunov.hpp"

using namespace delaybif;

namespace {

const double kC = std::sqrt(1.0 - 0.125 * 0.125);
const HopfPointTable kTable = hopf_points(0.025, 0.0625, kC, 3);

PeriodicOrbit first_orbit() {
    return orbit_from_hopf(reference_params(kTable.tau1[0].tau + 0.05), kTable.tau1[0]);
}

}  // namespace

TEST(Continuation, ZeroLengthRangeKeepsOrigin) {
    const PeriodicOrbit o = first_orbit();
    const ContinuationBranch br = continue_branch(o, o.params.tau, o.params.tau);
    ASSERT_EQ(br.points.size(), 1u);
    EXPECT_TRUE(br.events.empty());
    EXPECT_EQ(br.stop, StopReason::Completed);
}

TEST(Continuation, RejectsBadArguments) {
    const PeriodicOrbit o = first_orbit();
    EXPECT_THROW(continue_branch(o, 3.0, 2.0), InvalidParameter);
    EXPECT_THROW(continue_branch(o, 2.5, 3.0), InvalidParameter);
    ContinuationOptions bad;
    bad.min_step = 0.0;
    EXPECT_THROW(continue_branch(o, 1.9, 3.0, bad), InvalidParameter);
    EXPECT_THROW(cascade_scan(o, 1.9, 3.0, -1), InvalidParameter);
    EXPECT_TRUE(cascade_scan(o, 1.9, 3.0, 0).entries.empty());
}

TEST(Continuation, FirstBranchStableThenPeriodDoubles) {
    const PeriodicOrbit o = first_orbit();
    const ContinuationBranch br = continue_branch(o, o.params.tau, 3.4);
    EXPECT_EQ(br.stop, StopReason::RangeLeft);
    for (std::size_t i = 1; i < br.points.size(); ++i) {
        EXPECT_GT(br.points[i].orbit.params.tau, br.points[i - 1].orbit.params.tau);
        EXPECT_LE(collocation_residual(br.points[i].orbit), 1e-8);
        ASSERT_TRUE(br.points[i].floquet.has_value());
        EXPECT_LE(br.points[i].floquet->trivial_error(), 1e-3);
    }
    const auto pd = std::find_if(br.events.begin(), br.events.end(),
                                 [](const BifurcationEvent& e) { return e.kind == EventKind::PeriodDoubling; });
    ASSERT_NE(pd, br.events.end());
    EXPECT_NEAR(pd->tau_at, 3.26, 0.01);
    EXPECT_NEAR(pd->multiplier.real(), -1.0, 1e-2);
    EXPECT_NEAR(pd->multiplier.imag(), 0.0, 1e-6);
    // Before the doubling the branch is stable.
    for (const BranchPoint& p : br.points)
        if (p.orbit.params.tau < pd->tau_lo) EXPECT_EQ(p.floquet->stability, OrbitStability::Stable);
}

TEST(Continuation, DoubledBranchStartsWithTwicePeriod) {
    const PeriodicOrbit o = first_orbit();
    const ContinuationBranch br = continue_branch(o, o.params.tau, 3.4);
    const auto pd = std::find_if(br.events.begin(), br.events.end(),
                                 [](const BifurcationEvent& e) { return e.kind == EventKind::PeriodDoubling; });
    ASSERT_NE(pd, br.events.end());
    const DoubledStart ds = switch_period_doubling(*pd);
    EXPECT_NEAR(ds.base.period, 2 * pd->period, 1e-12);
    EXPECT_NEAR(ds.first.period, 2 * pd->period, 0.05 * pd->period);
    // The doubled orbit is not a double cover: its halves differ.
    double asym = 0;
    for (int i = 0; i < 200; ++i) {
        const double s = i / 400.0;
        asym = std::max(asym, std::abs(ds.first(s)[0] - ds.first(s + 0.5)[0]));
    }
    EXPECT_GT(asym, 1e-3);
}

TEST(Continuation, FoldAtLargerDrive) {
    // The first-family branch at w = 0.8 turns back in tau.
    SwingParams p{0.025, 0.0625, 0.8, 0.0};
    const double c = std::sqrt(1 - p.w * p.w);
    const HopfPointTable t = hopf_points(p.a, p.atilde, c, 1);
    p.tau = t.tau1[0].tau + 0.02;
    const LyapunovReport lr = sign_first_lyapunov(swing_jet(p, equilibria(p, 0.0, 2 * kPi).points.front()), p.a,
                                                  p.atilde, t.tau1[0].omega, t.tau1[0].tau);
    if (lr.branch_side != BranchSide::SmallerDelay) GTEST_SKIP() << "no turning branch for this drive";
    p.tau = t.tau1[0].tau - 0.02;
    const PeriodicOrbit o = orbit_from_hopf(p, t.tau1[0]);
    ContinuationOptions opts;
    opts.direction = -1;
    opts.max_steps = 400;
    const ContinuationBranch br = continue_branch(o, 0.0, t.tau1[0].tau + 5.0, opts);
    const bool fold = std::any_of(br.events.begin(), br.events.end(),
                                  [](const BifurcationEvent& e) { return e.kind == EventKind::Fold; });
    EXPECT_TRUE(fold);
}
