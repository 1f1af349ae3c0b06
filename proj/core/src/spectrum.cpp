#include "delaybif/spectrum.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "delaybif/error.hpp"
#include "delaybif/parallel.hpp"

namespace delaybif {

Complex Quasipolynomial::operator()(Complex lambda) const {
    return lambda * lambda + a * lambda + atilde * lambda * std::exp(-lambda * tau) + c;
}

Complex Quasipolynomial::dlambda(Complex lambda) const {
    return 2.0 * lambda + a + atilde * std::exp(-lambda * tau) * (1.0 - lambda * tau);
}

Complex Quasipolynomial::dtau(Complex lambda) const {
    return -atilde * lambda * lambda * std::exp(-lambda * tau);
}

bool refine_root(const Quasipolynomial& qp, Complex& lambda, double tol, int max_iter) {
    Complex z = lambda;
    for (int it = 0; it < max_iter; ++it) {
        const Complex d = qp.dlambda(z);
        if (std::abs(d) == 0.0 || !std::isfinite(std::abs(d))) return false;
        const Complex step = qp(z) / d;
        z -= step;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        if (std::abs(step) <= tol * (1.0 + std::abs(z))) {
            lambda = z;
            return true;
        }
    }
    return false;
}

namespace {

// Chebyshev points x_j = cos(j pi / N) and the differentiation matrix on [-1, 1].
Eigen::MatrixXd cheb_diff(int N, Eigen::VectorXd& x) {
    x.resize(N + 1);
    for (int j = 0; j <= N; ++j) x[j] = std::cos(std::numbers::pi * j / N);
    Eigen::VectorXd c(N + 1);
    for (int j = 0; j <= N; ++j) c[j] = ((j == 0 || j == N) ? 2.0 : 1.0) * ((j % 2) ? -1.0 : 1.0);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(N + 1, N + 1);
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= N; ++j)
            if (i != j) D(i, j) = (c[i] / c[j]) / (x[i] - x[j]);
    for (int i = 0; i <= N; ++i) D(i, i) = -D.row(i).sum();
    return D;
}

}  // namespace

std::vector<Complex> generator_eigenvalues(const Quasipolynomial& qp, int nodes) {
    if (nodes < 2) throw InvalidParameter("collocation needs at least two nodes");
    if (!(qp.tau > 0.0)) throw InvalidParameter("generator discretisation needs tau > 0");
    const int N = nodes;
    Eigen::VectorXd x;
    const Eigen::MatrixXd D = cheb_diff(N, x) * (2.0 / qp.tau);  // theta = tau (x - 1) / 2

    const int dim = 2 * (N + 1);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(dim, dim);
    // Row block 0 (theta = 0): x'(0) = A0 x(0) + A1 x(-tau).
    G(0, 1) = 1.0;
    G(1, 0) = -qp.c;
    G(1, 1) = -qp.a;
    G(1, 2 * N + 1) += -qp.atilde;
    for (int j = 1; j <= N; ++j)
        for (int k = 0; k <= N; ++k) {
            G(2 * j, 2 * k) = D(j, k);
            G(2 * j + 1, 2 * k + 1) = D(j, k);
        }
    Eigen::EigenSolver<Eigen::MatrixXd> es(G, false);
    if (es.info() != Eigen::Success) throw NumericalFailure("generator eigenvalue solve failed");
    std::vector<Complex> out(dim);
    for (int i = 0; i < dim; ++i) out[i] = es.eigenvalues()[i];
    return out;
}

namespace {

struct Refined {
    std::vector<Root> roots;  // every verified root, rightmost first
    int dropped = 0;
};

Refined refine_all(const Quasipolynomial& qp, const std::vector<Complex>& starters, const SpectrumOptions& o) {
    Refined r;
    for (Complex z : starters) {
        if (z.imag() < 0.0) continue;  // conjugates are implied
        if (!refine_root(qp, z, o.newton_tol, o.newton_max_iter)) {
            ++r.dropped;
            continue;
        }
        if (std::abs(z.imag()) <= 1e-10 * (1.0 + std::abs(z))) z = Complex(z.real(), 0.0);
        if (z.imag() < 0.0) z = std::conj(z);
        const double res = std::abs(qp(z));
        if (res > 1e-9 * (1.0 + std::norm(z))) {
            ++r.dropped;
            continue;
        }
        const bool dup = std::any_of(r.roots.begin(), r.roots.end(),
                                     [&](const Root& e) { return std::abs(e.value - z) <= o.dedup_tol; });
        if (!dup) r.roots.push_back(Root{z, res, z.imag() > 0.0});
    }
    std::sort(r.roots.begin(), r.roots.end(), [](const Root& l, const Root& rr) {
        if (l.value.real() != rr.value.real()) return l.value.real() > rr.value.real();
        return l.value.imag() < rr.value.imag();
    });
    return r;
}

RootSet summarise(const Refined& all, int count, int nodes) {
    RootSet s;
    s.collocation_nodes = nodes;
    for (const Root& r : all.roots)
        if (r.value.real() > 0.0) s.n_u += r.multiplicity();
    const std::size_t keep = std::min<std::size_t>(count, all.roots.size());
    s.roots.assign(all.roots.begin(), all.roots.begin() + keep);
    s.abscissa = s.roots.empty() ? -std::numeric_limits<double>::infinity() : s.roots.front().value.real();
    s.partial = static_cast<int>(keep) < count;
    return s;
}

bool same_roots(const RootSet& l, const RootSet& r, double tol) {
    if (l.roots.size() != r.roots.size()) return false;
    for (std::size_t i = 0; i < l.roots.size(); ++i)
        if (std::abs(l.roots[i].value - r.roots[i].value) > tol) return false;
    return true;
}

}  // namespace

RootSet approximate_spectrum(const Quasipolynomial& qp, const SpectrumOptions& opts) {
    if (opts.count < 1) throw InvalidParameter("count must be positive");
    if (qp.tau < 0.0) throw InvalidParameter("tau must be non-negative");

    if (qp.tau == 0.0) {
        // lambda^2 + (a + atilde) lambda + c
        const double b = qp.a + qp.atilde;
        const Complex disc = std::sqrt(Complex(b * b - 4.0 * qp.c));
        std::vector<Complex> starters{(-b + disc) / 2.0, (-b - disc) / 2.0};
        Refined r = refine_all(qp, starters, opts);
        if (r.roots.empty()) {
            for (Complex z : starters) {
                if (z.imag() < 0.0) continue;
                r.roots.push_back(Root{z, std::abs(qp(z)), z.imag() > 0.0});
            }
        }
        return summarise(r, opts.count, 0);
    }

    int N = opts.initial_nodes;
    Refined prev_all = refine_all(qp, generator_eigenvalues(qp, N), opts);
    RootSet prev = summarise(prev_all, opts.count, N);
    while (2 * N <= opts.max_nodes) {
        const int next = 2 * N;
        Refined cur_all = refine_all(qp, generator_eigenvalues(qp, next), opts);
        RootSet cur = summarise(cur_all, opts.count, next);
        const bool converged = !cur.partial && same_roots(prev, cur, opts.drift_tol);
        prev = std::move(cur);
        prev_all = std::move(cur_all);
        N = next;
        if (converged) {
            if (prev_all.dropped > 0)
                prev.warnings.push_back(std::to_string(prev_all.dropped) + " starters dropped by Newton");
            return prev;
        }
    }
    prev.warnings.push_back("root set did not stabilise under mesh doubling");
    if (prev_all.dropped > 0) prev.warnings.push_back(std::to_string(prev_all.dropped) + " starters dropped by Newton");
    return prev;
}

std::vector<SweepRow> abscissa_sweep(double a, double atilde, double c, const std::vector<double>& taus,
                                     const SpectrumOptions& opts) {
    for (std::size_t i = 1; i < taus.size(); ++i)
        if (!(taus[i] > taus[i - 1])) throw InvalidParameter("delay grid must be strictly increasing");
    std::vector<SweepRow> rows(taus.size());
    parallel_for(taus.size(), [&](std::size_t i) {
        const RootSet rs = approximate_spectrum(Quasipolynomial{a, atilde, c, taus[i]}, opts);
        SweepRow& row = rows[i];
        row.tau = taus[i];
        for (const Root& r : rs.roots) row.re.push_back(r.value.real());
        row.n_u = rs.n_u;
        row.abscissa = rs.abscissa;
    });
    return rows;
}

int crossing_direction(const Quasipolynomial& qp, Complex lambda0) {
    const Complex dl = qp.dlambda(lambda0);
    if (std::abs(dl) < 1e-10) throw Degeneracy("root is not simple");
    const double re = std::real(-qp.dtau(lambda0) / dl);
    return (re > 0.0) - (re < 0.0);
}

int crossing_direction_fd(const Quasipolynomial& qp, Complex lambda0, double h) {
    Quasipolynomial lo = qp, hi = qp;
    lo.tau -= h;
    hi.tau += h;
    Complex zl = lambda0, zh = lambda0;
    if (!refine_root(lo, zl) || !refine_root(hi, zh)) throw NumericalFailure("root tracking failed");
    const double d = zh.real() - zl.real();
    return (d > 0.0) - (d < 0.0);
}

}  // namespace delaybif
