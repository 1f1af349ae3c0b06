#include "delaybif/collocation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "delaybif/error.hpp"

namespace delaybif {

GaussRule gauss_legendre(int points) {
    if (points < 1) throw InvalidParameter("Gauss rule needs at least one point");
    GaussRule r;
    r.nodes.resize(points);
    r.weights.resize(points);
    const int n = points;
    for (int i = 0; i < n; ++i) {
        // Newton on P_n from the Chebyshev-like initial guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            const double pn = n == 1 ? x : p1;
            const double pnm1 = n == 1 ? 1.0 : p0;
            dp = n * (x * pn - pnm1) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.nodes[n - 1 - i] = 0.5 * (x + 1.0);
        r.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);  // 2/((1-x^2)P'^2) scaled to [0,1]
    }
    return r;
}

LagrangeBasis::LagrangeBasis(int degree) : degree_(degree) {
    if (degree < 1) throw InvalidParameter("polynomial degree must be positive");
    nodes_.resize(degree + 1);
    denom_.resize(degree + 1);
    top_.resize(degree + 1);
    for (int j = 0; j <= degree; ++j) nodes_[j] = static_cast<double>(j) / degree;
    double fact = 1.0;
    for (int k = 2; k <= degree; ++k) fact *= k;
    for (int j = 0; j <= degree; ++j) {
        double d = 1.0;
        for (int k = 0; k <= degree; ++k)
            if (k != j) d *= nodes_[j] - nodes_[k];
        denom_[j] = d;
        top_[j] = fact / d;
    }
}

void LagrangeBasis::eval(double t, double* phi, double* dphi) const {
    const int n = degree_ + 1;
    for (int j = 0; j < n; ++j) {
        double v = 1.0;
        double dv = 0.0;
        for (int k = 0; k < n; ++k) {
            if (k == j) continue;
            const double f = t - nodes_[k];
            dv = dv * f + v;
            v *= f;
        }
        phi[j] = v / denom_[j];
        if (dphi) dphi[j] = dv / denom_[j];
    }
}

PeriodicMesh::PeriodicMesh(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw InvalidParameter("mesh needs at least one interval");
    if (points_.front() != 0.0 || points_.back() != 1.0) throw InvalidParameter("mesh must span [0, 1]");
    for (std::size_t i = 1; i < points_.size(); ++i)
        if (!(points_[i] > points_[i - 1])) throw InvalidParameter("mesh points must increase strictly");
}

PeriodicMesh PeriodicMesh::uniform(int intervals) {
    if (intervals < 1) throw InvalidParameter("mesh needs at least one interval");
    std::vector<double> p(intervals + 1);
    for (int i = 0; i <= intervals; ++i) p[i] = static_cast<double>(i) / intervals;
    p.back() = 1.0;
    return PeriodicMesh(std::move(p));
}

double wrap_unit(double s) {
    double r = s - std::floor(s);
    if (r >= 1.0) r = 0.0;
    return r;
}

std::pair<int, double> PeriodicMesh::locate(double s) const {
    s = wrap_unit(s);
    auto it = std::upper_bound(points_.begin(), points_.end(), s);
    int i = static_cast<int>(it - points_.begin()) - 1;
    i = std::clamp(i, 0, intervals() - 1);
    return {i, std::clamp((s - points_[i]) / width(i), 0.0, 1.0)};
}

}  // namespace delaybif
