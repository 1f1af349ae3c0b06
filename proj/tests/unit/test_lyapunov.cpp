#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "delaybif/error.hpp"
#include "delaybif/lyapunov.hpp"

using namespace delaybif;
using cd = std::complex<double>;

namespace {

struct Reference {
    SwingParams p = reference_params();
    NonlinearityJet jet;
    HopfPointTable table;
    Reference() {
        jet = swing_jet(p, equilibria(p, 0.0, 2 * kPi).points.front());
        table = hopf_points(p.a, p.atilde, jet.h1, 10);
    }
};

// Characteristic function evaluated from its definition.
cd direct_det(double a, double atilde, double c, double tau, cd l) {
    return l * l + a * l + atilde * l * std::exp(-l * tau) + c;
}

}  // namespace

TEST(Lyapunov, BetaSignPerFamily) {
    Reference s;
    for (int n = 0; n <= 10; ++n) {
        EXPECT_EQ(beta(s.table.tau1[n].omega, s.table.tau1[n].tau, s.p.a, s.jet.h1).re_inverse_sign, -1);
        EXPECT_EQ(beta(s.table.tau2[n].omega, s.table.tau2[n].tau, s.p.a, s.jet.h1).re_inverse_sign, +1);
    }
    const double w = 0.8;
    EXPECT_EQ(beta(w, 2.0, 0.1, w * w).re, 0.0);
    EXPECT_EQ(beta(w, 2.0, 0.1, w * w).re_inverse_sign, 0);
}

TEST(Lyapunov, DetDelta2iwMatchesDirectEvaluation) {
    Reference s;
    for (const auto* list : {&s.table.tau1, &s.table.tau2})
        for (const HopfPoint& h : *list) {
            const cd closed = det_delta_2iw(h.omega, s.p.a, s.p.atilde, s.jet.h1);
            const cd direct = direct_det(s.p.a, s.p.atilde, s.jet.h1, h.tau, cd(0, 2 * h.omega));
            EXPECT_LE(std::abs(closed - direct), 1e-10 * std::abs(direct));
        }
    const double a = 0.1, w = 0.7;
    EXPECT_LE(std::abs(det_delta_2iw(w, a, a, w * w) - cd(-3 * w * w, 2 * w * 2 * a)), 1e-15);
}

TEST(Lyapunov, ReferenceSigns) {
    Reference s;
    const LyapunovReport f1 = sign_first_lyapunov(s.jet, s.p.a, s.p.atilde, s.table.tau1[0].omega, s.table.tau1[0].tau);
    EXPECT_EQ(f1.sign, -1);
    EXPECT_EQ(f1.criticality, Criticality::Supercritical);
    const LyapunovReport f2 = sign_first_lyapunov(s.jet, s.p.a, s.p.atilde, s.table.tau2[0].omega, s.table.tau2[0].tau);
    EXPECT_EQ(f2.sign, +1);
    EXPECT_EQ(f2.criticality, Criticality::Subcritical);
    const LyapunovReport f3 = sign_first_lyapunov(s.jet, s.p.a, s.p.atilde, s.table.tau1[3].omega, s.table.tau1[3].tau);
    EXPECT_EQ(f3.sign, -1);
}

TEST(Lyapunov, BracketPolynomialCoefficients) {
    Reference s;
    const BracketPolynomial b1 = bracket_polynomial(s.jet, s.p.a, s.p.atilde, 1);
    EXPECT_NEAR(b1.first_slope, 0.692, 5e-4);
    EXPECT_NEAR(b1.first_intercept, 0.260, 5e-4);
    EXPECT_NEAR(b1.second_slope, -149.155, 5e-4);
    EXPECT_NEAR(b1.second_intercept, -47.0575, 5e-5);
    EXPECT_NEAR(b1.den_linear, 4.691, 5e-4);
    EXPECT_NEAR(b1.den_const, 27.137, 5e-4);
    const BracketPolynomial b2 = bracket_polynomial(s.jet, s.p.a, s.p.atilde, 2);
    EXPECT_NEAR(b2.first_slope, -0.899, 5e-4);
    EXPECT_NEAR(b2.first_intercept, -0.552, 5e-4);
    EXPECT_NEAR(b2.second_slope, 157.982, 5e-4);
    EXPECT_NEAR(b2.second_intercept, 108.140, 5e-4);
    EXPECT_NEAR(b2.den_linear, 5.429, 5e-4);
    EXPECT_NEAR(b2.den_const, 29.004, 5e-4);
}

TEST(Lyapunov, BracketPolynomialReproducesBracket) {
    Reference s;
    for (int family : {1, 2}) {
        const BracketPolynomial b = bracket_polynomial(s.jet, s.p.a, s.p.atilde, family);
        const auto& list = family == 1 ? s.table.tau1 : s.table.tau2;
        for (int n = 0; n <= 10; ++n) {
            const LyapunovReport r = sign_first_lyapunov(s.jet, s.p.a, s.p.atilde, list[n].omega, list[n].tau);
            const double den = n * n + b.den_linear * n + b.den_const;
            EXPECT_NEAR((b.first_slope * n + b.first_intercept) / den, r.first_term, 1e-12);
            EXPECT_NEAR((b.second_slope * n + b.second_intercept) / den, r.second_term, 1e-12);
        }
    }
}

TEST(Lyapunov, OracleAgreesOnReferenceParameters) {
    Reference s;
    for (const auto* list : {&s.table.tau1, &s.table.tau2})
        for (const HopfPoint& h : *list) {
            const LyapunovReport r = sign_first_lyapunov(s.jet, s.p.a, s.p.atilde, h.omega, h.tau);
            const GeneralLyapunovResult g = lyapunov_general_oracle(s.jet, s.p.a, s.p.atilde, h.omega, h.tau);
            EXPECT_EQ(r.sign, (g.L > 0) - (g.L < 0)) << h.family << " " << h.n;
            EXPECT_LE(g.inputs.left_residual, 1e-10);
            EXPECT_LE(g.inputs.right_residual, 1e-10);
            EXPECT_LE(g.inputs.normalization_residual, 1e-10);
            // alpha_p alpha_q = 1 / beta
            const cd inv = 1.0 / r.beta_value.value();
            EXPECT_LE(std::abs(g.inputs.alpha_product - inv), 1e-10 * std::abs(inv));
        }
}

TEST(Lyapunov, SimplificationIdentity) {
    Reference s;
    for (const auto* list : {&s.table.tau1, &s.table.tau2})
        for (const HopfPoint& h : *list) {
            const cd lhs = s.p.a + s.p.atilde * std::exp(cd(0, -h.omega * h.tau));
            const cd rhs = cd(0, -h.omega) + cd(0, s.jet.h1 / h.omega);
            EXPECT_LE(std::abs(lhs - rhs), 1e-10);
        }
}

TEST(Lyapunov, ScalingChangesMagnitudeNotSign) {
    Reference s;
    const HopfPoint& h = s.table.tau1[0];
    const double L1 = lyapunov_general_oracle(s.jet, s.p.a, s.p.atilde, h.omega, h.tau, 1.0).L;
    const double L2 = lyapunov_general_oracle(s.jet, s.p.a, s.p.atilde, h.omega, h.tau, 2.0).L;
    EXPECT_NEAR(L2, 4.0 * L1, 1e-12 * std::abs(L1));
    for (double f : {0.5, 2.0, 10.0})
        EXPECT_EQ(std::signbit(lyapunov_general_oracle(s.jet, s.p.a, s.p.atilde, h.omega, h.tau, f).L),
                  std::signbit(L1));
}

TEST(Lyapunov, LinearSystemIsDegenerate) {
    Reference s;
    NonlinearityJet lin{s.jet.h1, 0.0, 0.0};
    const HopfPoint& h = s.table.tau1[0];
    EXPECT_EQ(lyapunov_general_oracle(lin, s.p.a, s.p.atilde, h.omega, h.tau).L, 0.0);
    EXPECT_THROW(sign_first_lyapunov(lin, s.p.a, s.p.atilde, h.omega, h.tau), Degeneracy);
}

TEST(Lyapunov, ClassificationAlternatesOnLargerDelaySide) {
    const auto all = classify_all_hopf(reference_params(), 5);
    ASSERT_EQ(all.size(), 12u);
    for (std::size_t i = 0; i < all.size(); ++i) {
        EXPECT_EQ(all[i].report.criticality, i % 2 == 0 ? Criticality::Supercritical : Criticality::Subcritical);
        EXPECT_EQ(all[i].report.branch_side, BranchSide::LargerDelay);
    }
    SwingParams stable = reference_params();
    stable.atilde = 0.02;
    EXPECT_TRUE(classify_all_hopf(stable, 5).empty());
}

TEST(Lyapunov, RandomParameterOracleAgreement) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ua(0.005, 0.3), ur(1.05, 6.0), uw(0.02, 0.95);
    int tested = 0;
    while (tested < 20) {
        SwingParams p;
        p.a = ua(rng);
        p.atilde = p.a * ur(rng);
        p.w = uw(rng);
        const NonlinearityJet jet = swing_jet(p, equilibria(p, 0.0, 2 * kPi).points.front());
        const HopfPointTable t = hopf_points(p.a, p.atilde, jet.h1, 10);
        for (const auto* list : {&t.tau1, &t.tau2})
            for (const HopfPoint& h : *list) {
                const LyapunovReport r = sign_first_lyapunov(jet, p.a, p.atilde, h.omega, h.tau);
                if (r.sign == 0) continue;
                const double L = lyapunov_general_oracle(jet, p.a, p.atilde, h.omega, h.tau).L;
                EXPECT_EQ(r.sign, (L > 0) - (L < 0)) << p.a << " " << p.atilde << " " << p.w;
            }
        ++tested;
    }
}
