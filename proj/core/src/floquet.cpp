#include "delaybif/floquet.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <random>

#include "delaybif/error.hpp"

namespace delaybif {

std::vector<Complex> FloquetSpectrum::nontrivial() const {
    std::vector<Complex> out;
    for (int i = 0; i < static_cast<int>(multipliers.size()); ++i)
        if (i != trivial_index) out.push_back(multipliers[i]);
    return out;
}

namespace {

// Discretised monodromy operator u -> S_h u + S_v v with A v = -B_h u.
class Monodromy {
public:
    explicit Monodromy(const PeriodicOrbit& o) {
        const int d = o.degree;
        const int M = o.intervals();
        L_ = static_cast<int>(o.values.size());
        const double T = o.period;
        const double r = o.params.tau / T;
        K_ = std::max(1, static_cast<int>(std::ceil(r - 1e-12)));
        H_ = K_ * L_ + 1;
        const SwingField f = SwingField::from(o.params);
        const LagrangeBasis basis(d);
        const GaussRule g = gauss_legendre(d);

        std::vector<Eigen::Triplet<double>> ta, tb;
        auto put = [&](int row, int ext, int comp, double v) {
            if (ext <= K_ * L_) tb.emplace_back(row, 2 * ext + comp, v);
            else ta.emplace_back(row, 2 * (ext - K_ * L_ - 1) + comp, v);
        };
        std::vector<double> phi(d + 1), dphi(d + 1), phid(d + 1), dphid(d + 1);
        for (int i = 0; i < M; ++i) {
            const double h = o.mesh.width(i);
            for (int m = 0; m < d; ++m) {
                const int row = 2 * (i * d + m);
                const double c = o.mesh[i] + h * g.nodes[m];
                basis.eval(g.nodes[m], phi.data(), dphi.data());
                const double cosv = -f.daccel_dx1(o(c)[0]);
                const double sigma = c - r;
                const double ks = std::floor(sigma);
                const auto [id, td] = o.mesh.locate(sigma - ks);
                basis.eval(td, phid.data(), dphid.data());
                const int copy = static_cast<int>(ks) + K_;
                for (int j = 0; j <= d; ++j) {
                    const int e = K_ * L_ + i * d + j;
                    put(row, e, 0, dphi[j] / h);
                    put(row, e, 1, -T * phi[j]);
                    put(row + 1, e, 1, dphi[j] / h + T * f.a * phi[j]);
                    put(row + 1, e, 0, T * cosv * phi[j]);
                    const int ed = copy * L_ + id * d + j;
                    put(row + 1, ed, 1, T * f.atilde * phid[j]);
                }
            }
        }
        A_.resize(2 * L_, 2 * L_);
        A_.setFromTriplets(ta.begin(), ta.end());
        A_.makeCompressed();
        B_.resize(2 * L_, 2 * H_);
        B_.setFromTriplets(tb.begin(), tb.end());
        B_.makeCompressed();
        lu_.compute(A_);
        if (lu_.info() != Eigen::Success) throw NumericalFailure("singular variational collocation matrix");
    }

    int size() const { return 2 * H_; }

    Eigen::VectorXd solution(const Eigen::VectorXd& u) const {
        const Eigen::VectorXd rhs = -(B_ * u);
        return lu_.solve(rhs);
    }

    Eigen::VectorXd apply(const Eigen::VectorXd& u) const {
        const Eigen::VectorXd v = solution(u);
        Eigen::VectorXd out(2 * H_);
        for (int q = 0; q < H_; ++q) {
            const int src = q + L_;
            for (int k = 0; k < 2; ++k)
                out[2 * q + k] = src <= K_ * L_ ? u[2 * src + k] : v[2 * (src - K_ * L_ - 1) + k];
        }
        return out;
    }

    Eigen::MatrixXd dense() const {
        Eigen::MatrixXd Mm(size(), size());
        Eigen::VectorXd e = Eigen::VectorXd::Zero(size());
        for (int c = 0; c < size(); ++c) {
            e[c] = 1.0;
            Mm.col(c) = apply(e);
            e[c] = 0.0;
        }
        return Mm;
    }

    /// Eigenfunction on [0, 1] at the orbit representation points from a history vector.
    std::vector<State> over_period(const Eigen::VectorXd& u, State& at_end) const {
        const Eigen::VectorXd v = solution(u);
        std::vector<State> out(L_);
        out[0] = {u[2 * K_ * L_], u[2 * K_ * L_ + 1]};
        for (int p = 1; p < L_; ++p) out[p] = {v[2 * (p - 1)], v[2 * (p - 1) + 1]};
        at_end = {v[2 * (L_ - 1)], v[2 * (L_ - 1) + 1]};
        return out;
    }

private:
    int L_ = 0, K_ = 1, H_ = 0;
    Eigen::SparseMatrix<double> A_, B_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

struct EigenData {
    std::vector<Complex> values;
    std::vector<Eigen::VectorXcd> vectors;  // only when requested
};

EigenData dense_eigen(const Monodromy& mono, bool vectors) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(mono.dense(), vectors);
    if (es.info() != Eigen::Success) throw NumericalFailure("monodromy eigenvalue solve failed");
    EigenData out;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        out.values.push_back(es.eigenvalues()[i]);
        if (vectors) out.vectors.push_back(es.eigenvectors().col(i));
    }
    return out;
}

// Arnoldi with full reorthogonalisation; grows the Krylov space until the
// wanted Ritz pairs have small residuals.
EigenData arnoldi_eigen(const Monodromy& mono, int wanted, bool vectors) {
    const int n = mono.size();
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> nd;
    Eigen::VectorXd v0(n);
    for (int i = 0; i < n; ++i) v0[i] = nd(rng);

    for (int m = std::min(n, std::max(4 * wanted, 60));; m = std::min(n, 2 * m)) {
        Eigen::MatrixXd V(n, m + 1);
        Eigen::MatrixXd Hm = Eigen::MatrixXd::Zero(m + 1, m);
        V.col(0) = v0.normalized();
        int steps = m;
        for (int j = 0; j < m; ++j) {
            Eigen::VectorXd w = mono.apply(V.col(j));
            for (int pass = 0; pass < 2; ++pass) {
                const Eigen::VectorXd hcol = V.leftCols(j + 1).transpose() * w;
                w -= V.leftCols(j + 1) * hcol;
                Hm.col(j).head(j + 1) += hcol;
            }
            const double beta = w.norm();
            Hm(j + 1, j) = beta;
            if (beta < 1e-14) {
                steps = j + 1;
                break;
            }
            V.col(j + 1) = w / beta;
        }
        Eigen::EigenSolver<Eigen::MatrixXd> es(Hm.topLeftCorner(steps, steps), true);
        if (es.info() != Eigen::Success) throw NumericalFailure("Hessenberg eigenvalue solve failed");
        std::vector<int> order(steps);
        for (int i = 0; i < steps; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]);
        });
        const double hlast = steps < m ? 0.0 : Hm(steps, steps - 1);
        bool ok = true;
        const int check = std::min(wanted, steps);
        for (int k = 0; k < check; ++k) {
            const int i = order[k];
            const Complex mu = es.eigenvalues()[i];
            const Eigen::VectorXcd y = es.eigenvectors().col(i);
            const double res = std::abs(hlast * y[steps - 1]) / y.norm();
            // Only multipliers that matter for stability need full accuracy.
            if (res > 1e-10 * std::max(1.0, std::abs(mu)) && std::abs(mu) > 1e-3) ok = false;
        }
        if (ok || m >= n) {
            EigenData out;
            for (int k = 0; k < steps; ++k) {
                const int i = order[k];
                out.values.push_back(es.eigenvalues()[i]);
                if (vectors) out.vectors.push_back(V.leftCols(steps).cast<Complex>() * es.eigenvectors().col(i));
            }
            return out;
        }
        if (2 * m > n && n <= 2000) return dense_eigen(mono, vectors);
    }
}

EigenData eigen(const Monodromy& mono, int wanted, bool vectors, const FloquetOptions& opts) {
    if (mono.size() <= opts.dense_limit) return dense_eigen(mono, vectors);
    return arnoldi_eigen(mono, wanted, vectors);
}

}  // namespace

FloquetSpectrum floquet_multipliers(const PeriodicOrbit& orbit, const FloquetOptions& opts) {
    if (opts.count < 1) throw InvalidParameter("multiplier count must be positive");
    if (!(orbit.period > 0.0)) throw InvalidParameter("orbit period must be positive");
    const Monodromy mono(orbit);
    EigenData ed = eigen(mono, opts.count + 2, false, opts);
    std::vector<Complex>& mu = ed.values;
    std::stable_sort(mu.begin(), mu.end(), [](Complex a, Complex b) {
        if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
        return a.imag() > b.imag();
    });
    std::size_t keep = std::min<std::size_t>(opts.count, mu.size());
    // Keep conjugate pairs together.
    if (keep < mu.size() && std::abs(mu[keep - 1].imag()) > 0.0 &&
        std::abs(mu[keep] - std::conj(mu[keep - 1])) <= 1e-10 * (1.0 + std::abs(mu[keep])))
        ++keep;
    mu.resize(keep);

    FloquetSpectrum s;
    s.dimension = mono.size();
    s.multipliers = mu;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(mu.size()); ++i) {
        const double dist = std::abs(mu[i] - 1.0);
        if (dist < best) {
            best = dist;
            s.trivial_index = i;
        }
    }
    if (s.trivial_index < 0 || best > opts.trivial_tol)
        throw NumericalFailure("trivial Floquet multiplier is inaccurate; refine the mesh");
    for (int i = 0; i < static_cast<int>(mu.size()); ++i)
        if (i != s.trivial_index && std::abs(mu[i]) > 1.0) ++s.unstable_count;
    s.stability = s.unstable_count == 0 ? OrbitStability::Stable : OrbitStability::Unstable;
    return s;
}

FloquetSpectrum floquet_multipliers(const PeriodicOrbit& orbit, int count) {
    FloquetOptions o;
    o.count = count;
    return floquet_multipliers(orbit, o);
}

FloquetMode floquet_mode(const PeriodicOrbit& orbit, Complex target, const FloquetOptions& opts) {
    const Monodromy mono(orbit);
    const EigenData ed = eigen(mono, opts.count + 2, true, opts);
    int best = -1;
    double dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(ed.values.size()); ++i)
        if (std::abs(ed.values[i] - target) < dist) {
            dist = std::abs(ed.values[i] - target);
            best = i;
        }
    if (best < 0) throw NumericalFailure("no multiplier found");
    const Eigen::VectorXcd& z = ed.vectors[best];
    // Rotate so the dominant entry is real, then take the real part.
    Eigen::Index imax = 0;
    z.cwiseAbs().maxCoeff(&imax);
    const Complex rot = std::abs(z[imax]) > 0.0 ? std::conj(z[imax]) / std::abs(z[imax]) : Complex(1.0);
    const Eigen::VectorXd u = (z * rot).real();

    FloquetMode mode;
    mode.multiplier = ed.values[best];
    mode.values = mono.over_period(u, mode.at_end);
    double scale = 0.0;
    for (const State& v : mode.values) scale = std::max({scale, std::abs(v[0]), std::abs(v[1])});
    if (!(scale > 0.0)) throw NumericalFailure("vanishing Floquet eigenfunction");
    for (State& v : mode.values) v = {v[0] / scale, v[1] / scale};
    mode.at_end = {mode.at_end[0] / scale, mode.at_end[1] / scale};
    return mode;
}

}  // namespace delaybif
