#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "delaybif/collocation.hpp"
#include "delaybif/error.hpp"

using namespace delaybif;

TEST(Collocation, GaussRuleIsExactToDegree2nMinus1) {
    for (int n = 1; n <= 6; ++n) {
        const GaussRule g = gauss_legendre(n);
        ASSERT_EQ(g.nodes.size(), static_cast<std::size_t>(n));
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double q = 0;
            for (int i = 0; i < n; ++i) q += g.weights[i] * std::pow(g.nodes[i], k);
            EXPECT_NEAR(q, 1.0 / (k + 1), 1e-14) << n << " " << k;
        }
        for (double x : g.nodes) {
            EXPECT_GT(x, 0.0);
            EXPECT_LT(x, 1.0);
        }
    }
}

TEST(Collocation, LagrangeBasisPartitionAndInterpolation) {
    for (int d = 1; d <= 6; ++d) {
        const LagrangeBasis b(d);
        std::vector<double> phi(d + 1), dphi(d + 1);
        for (double t : {0.0, 0.13, 0.5, 0.77, 1.0}) {
            b.eval(t, phi.data(), dphi.data());
            double s = 0, ds = 0, poly = 0;
            for (int j = 0; j <= d; ++j) {
                s += phi[j];
                ds += dphi[j];
                poly += phi[j] * std::pow(static_cast<double>(j) / d, d);
            }
            EXPECT_NEAR(s, 1.0, 1e-13);
            EXPECT_NEAR(ds, 0.0, 1e-11);
            EXPECT_NEAR(poly, std::pow(t, d), 1e-13);
        }
        for (int j = 0; j <= d; ++j) {
            b.eval(static_cast<double>(j) / d, phi.data(), dphi.data());
            for (int k = 0; k <= d; ++k) EXPECT_NEAR(phi[k], j == k ? 1.0 : 0.0, 1e-14);
        }
    }
}

TEST(Collocation, MeshLocateWrapsModuloOne) {
    const PeriodicMesh m({0.0, 0.25, 0.5, 1.0});
    EXPECT_EQ(m.intervals(), 3);
    auto [i, u] = m.locate(0.375);
    EXPECT_EQ(i, 1);
    EXPECT_NEAR(u, 0.5, 1e-15);
    auto [j, v] = m.locate(1.75);
    EXPECT_EQ(j, 2);
    EXPECT_NEAR(v, 0.5, 1e-15);
    auto [k, w] = m.locate(-0.125);
    EXPECT_EQ(k, 2);
    EXPECT_NEAR(w, 0.75, 1e-15);
    EXPECT_NEAR(wrap_unit(-0.25), 0.75, 1e-15);
    EXPECT_EQ(PeriodicMesh::uniform(8).intervals(), 8);
    EXPECT_THROW(PeriodicMesh({0.0, 0.6, 0.4, 1.0}), InvalidParameter);
}
