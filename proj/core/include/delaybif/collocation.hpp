#pragma once

// Piecewise-polynomial machinery for periodic boundary-value problems on the
// rescaled period [0, 1]: Lagrange bases on equidistant nodes, Gauss-Legendre
// collocation nodes and mesh lookup.

#include <cstddef>
#include <utility>
#include <vector>

namespace delaybif {

/// Gauss-Legendre nodes and weights on [0, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussRule gauss_legendre(int points);

/// Lagrange basis of degree d on the nodes j/d, j = 0..d, of [0, 1].
class LagrangeBasis {
public:
    explicit LagrangeBasis(int degree);

    int degree() const { return degree_; }
    /// Basis values phi_j(t) and derivatives phi_j'(t); both spans have d + 1 entries.
    void eval(double t, double* phi, double* dphi) const;
    /// d-th derivative of phi_j, a constant.
    double top_derivative(int j) const { return top_[j]; }

private:
    int degree_;
    std::vector<double> nodes_;
    std::vector<double> denom_;
    std::vector<double> top_;
};

/// Mesh 0 = s_0 < ... < s_M = 1 of the rescaled period.
class PeriodicMesh {
public:
    PeriodicMesh() = default;
    explicit PeriodicMesh(std::vector<double> points);
    static PeriodicMesh uniform(int intervals);

    int intervals() const { return static_cast<int>(points_.size()) - 1; }
    double operator[](int i) const { return points_[i]; }
    double width(int i) const { return points_[i + 1] - points_[i]; }
    const std::vector<double>& points() const { return points_; }

    /// Interval index and local coordinate in [0, 1] of s taken modulo 1.
    std::pair<int, double> locate(double s) const;

private:
    std::vector<double> points_{0.0, 1.0};
};

/// Wraps s into [0, 1).
double wrap_unit(double s);

}  // namespace delaybif
