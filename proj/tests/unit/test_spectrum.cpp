#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "delaybif/analytic_stability.hpp"
#include "delaybif/error.hpp"
#include "delaybif/spectrum.hpp"

using namespace delaybif;
using cd = std::complex<double>;

namespace {
const double kC = std::sqrt(1.0 - 0.125 * 0.125);
const HopfPointTable kTable = hopf_points(0.025, 0.0625, kC, 10);
}  // namespace

TEST(Spectrum, EvaluatorBasics) {
    const Quasipolynomial q{0.025, 0.0625, kC, kTable.tau1[0].tau};
    EXPECT_LE(std::abs(q(cd(0, kTable.omega.omega1))), 1e-10);
    EXPECT_EQ(q(0.0), cd(kC, 0));
    const Quasipolynomial q0{0.025, 0.0625, kC, 0.0};
    const cd l(0.3, -1.2);
    EXPECT_LE(std::abs(q0(l) - (l * l + 0.0875 * l + kC)), 1e-15);
}

TEST(Spectrum, DerivativesMatchFiniteDifferences) {
    const Quasipolynomial q{0.025, 0.0625, kC, 3.3};
    const cd l(0.2, 0.9);
    const double h = 1e-6;
    const cd dl = (q(l + h) - q(l - h)) / (2 * h);
    EXPECT_LE(std::abs(dl - q.dlambda(l)), 1e-8);
    Quasipolynomial qp = q, qm = q;
    qp.tau += h;
    qm.tau -= h;
    EXPECT_LE(std::abs((qp(l) - qm(l)) / (2 * h) - q.dtau(l)), 1e-8);
}

TEST(Spectrum, DelayFreeQuadratic) {
    const RootSet r = approximate_spectrum(Quasipolynomial{0.025, 0.0625, kC, 0.0});
    ASSERT_FALSE(r.roots.empty());
    EXPECT_NEAR(r.roots[0].value.real(), -0.04375, 1e-12);
    EXPECT_NEAR(r.roots[0].value.imag(), std::sqrt(kC - 0.04375 * 0.04375), 1e-12);
    EXPECT_TRUE(r.roots[0].conjugate_pair);
    EXPECT_EQ(r.n_u, 0);
}

TEST(Spectrum, RightmostPairAtHopfDelays) {
    for (int n = 0; n <= 5; ++n)
        for (const HopfPoint* h : {&kTable.tau1[n], &kTable.tau2[n]}) {
            const RootSet r = approximate_spectrum(Quasipolynomial{0.025, 0.0625, kC, h->tau});
            // The crossing pair is on the axis; other pairs may lie to its right.
            double best = 1e9;
            for (const Root& root : r.roots) best = std::min(best, std::abs(root.value - cd(0, h->omega)));
            EXPECT_LE(best, 1e-8) << h->family << " " << n;
        }
    const RootSet r = approximate_spectrum(Quasipolynomial{0.025, 0.0625, kC, kTable.tau1[0].tau});
    EXPECT_NEAR(r.roots[0].value.real(), 0.0, 1e-8);
    EXPECT_NEAR(r.roots[0].value.imag(), kTable.omega.omega1, 1e-8);
}

TEST(Spectrum, RootsSatisfyResidualAndDrift) {
    SpectrumOptions o;
    o.count = 10;
    const Quasipolynomial q{0.025, 0.0625, kC, 7.3};
    const RootSet r = approximate_spectrum(q, o);
    ASSERT_FALSE(r.partial);
    for (const Root& root : r.roots) {
        EXPECT_LE(std::abs(q(root.value)), 1e-10 * std::max(1.0, std::norm(root.value)));
        EXPECT_GE(root.value.imag(), 0.0);
    }
    // Rightmost root is stable under node doubling.
    const auto coarse = generator_eigenvalues(q, r.collocation_nodes);
    const auto fine = generator_eigenvalues(q, 2 * r.collocation_nodes);
    auto nearest = [&](const std::vector<cd>& ev) {
        double best = 1e9;
        for (cd z : ev) best = std::min(best, std::abs(z - r.roots[0].value));
        return best;
    };
    EXPECT_LE(nearest(coarse), 1e-8);
    EXPECT_LE(nearest(fine), 1e-8);
}

TEST(Spectrum, UnstableCountMatchesCrossingFormula) {
    EXPECT_EQ(approximate_spectrum(Quasipolynomial{0.025, 0.0625, kC, 3.0}).n_u, 2);
    for (int i = 0; i < 60; ++i) {
        const double tau = 0.37 + 0.61 * i;
        const RootSet r = approximate_spectrum(Quasipolynomial{0.025, 0.0625, kC, tau});
        EXPECT_EQ(r.n_u, unstable_count(kTable, tau)) << tau;
    }
}

TEST(Spectrum, SweepCrossesZeroAtHopfDelays) {
    std::vector<double> taus;
    for (int i = 0; i < 600; ++i) taus.push_back(30.0 * i / 599);
    const auto rows = abscissa_sweep(0.025, 0.0625, kC, taus);
    ASSERT_EQ(rows.size(), taus.size());
    std::vector<double> zeros;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if ((rows[i - 1].abscissa < 0) != (rows[i].abscissa < 0)) zeros.push_back(0.5 * (taus[i - 1] + taus[i]));
    ASSERT_GE(zeros.size(), 2u);
    EXPECT_NEAR(zeros[0], kTable.tau1[0].tau, 30.0 / 599);
    EXPECT_NEAR(zeros[1], kTable.tau2[0].tau, 30.0 / 599);
}

TEST(Spectrum, LargeDelayedDampingStaircase) {
    // n_u switches between one and two unstable pairs beyond the bounded windows.
    const HopfPointTable t = hopf_points(0.025, 0.225, kC, 10);
    std::vector<double> taus;
    for (int i = 0; i < 400; ++i) taus.push_back(40.0 * i / 399);
    const auto rows = abscissa_sweep(0.025, 0.225, kC, taus);
    bool saw_four = false;
    for (const SweepRow& row : rows) {
        if (unstable_count(t, row.tau) >= 0) EXPECT_EQ(row.n_u, unstable_count(t, row.tau)) << row.tau;
        saw_four |= row.n_u == 4;
    }
    EXPECT_TRUE(saw_four);
}

TEST(Spectrum, StableWithoutSwitching) {
    std::vector<double> taus;
    for (int i = 0; i < 50; ++i) taus.push_back(0.8 * i);
    for (const SweepRow& row : abscissa_sweep(0.025, 0.02, 1.0, taus)) EXPECT_LT(row.abscissa, 0.0) << row.tau;
}

TEST(Spectrum, CrossingDirections) {
    for (int n = 0; n <= 5; ++n) {
        const Quasipolynomial q1{0.025, 0.0625, kC, kTable.tau1[n].tau};
        const Quasipolynomial q2{0.025, 0.0625, kC, kTable.tau2[n].tau};
        EXPECT_EQ(crossing_direction(q1, cd(0, kTable.omega.omega1)), +1);
        EXPECT_EQ(crossing_direction(q2, cd(0, kTable.omega.omega2)), -1);
        EXPECT_EQ(crossing_direction_fd(q1, cd(0, kTable.omega.omega1)), +1);
        EXPECT_EQ(crossing_direction_fd(q2, cd(0, kTable.omega.omega2)), -1);
    }
}

TEST(Spectrum, RefineRootConverges) {
    const Quasipolynomial q{0.025, 0.0625, kC, kTable.tau1[0].tau};
    cd l(0.01, 1.0);
    ASSERT_TRUE(refine_root(q, l));
    EXPECT_NEAR(l.imag(), kTable.omega.omega1, 1e-12);
    EXPECT_NEAR(l.real(), 0.0, 1e-12);
}
