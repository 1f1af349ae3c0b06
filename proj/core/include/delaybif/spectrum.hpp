#pragma once

// Characteristic roots of the linearised delayed-damping equation,
//
//   det Delta(lambda) = lambda^2 + a lambda + atilde lambda exp(-lambda tau) + c,
//
// approximated by spectral collocation of the infinitesimal generator on a
// Chebyshev mesh of [-tau, 0] and refined by Newton iteration on the
// quasipolynomial itself.

#include <complex>
#include <string>
#include <vector>

namespace delaybif {

using Complex = std::complex<double>;

struct Quasipolynomial {
    double a = 0.0;
    double atilde = 0.0;
    double c = 0.0;
    double tau = 0.0;

    Complex operator()(Complex lambda) const;
    /// d/d lambda: 2 lambda + a + atilde exp(-lambda tau) (1 - lambda tau)
    Complex dlambda(Complex lambda) const;
    /// d/d tau: -atilde lambda^2 exp(-lambda tau)
    Complex dtau(Complex lambda) const;
};

inline Complex char_eval(const Quasipolynomial& qp, Complex lambda) { return qp(lambda); }

struct Root {
    Complex value;       ///< stored with Im >= 0
    double residual = 0.0;
    bool conjugate_pair = false;  ///< true when Im > 0, i.e. value and conj(value) are roots
    int multiplicity() const { return conjugate_pair ? 2 : 1; }
};

struct RootSet {
    std::vector<Root> roots;  ///< rightmost first
    int n_u = 0;              ///< roots with Re > 0 among `roots`, conjugates counted
    double abscissa = 0.0;    ///< max Re over `roots`
    int collocation_nodes = 0;
    bool partial = false;     ///< fewer verified roots than requested
    std::vector<std::string> warnings;
};

struct SpectrumOptions {
    int count = 8;            ///< rightmost roots to return (Im >= 0 representatives)
    int initial_nodes = 32;
    int max_nodes = 512;
    double drift_tol = 1e-8;
    double newton_tol = 1e-12;
    int newton_max_iter = 50;
    double dedup_tol = 1e-7;
};

/// Newton refinement of a single root; returns false on non-convergence.
bool refine_root(const Quasipolynomial& qp, Complex& lambda, double tol = 1e-12, int max_iter = 50);

/// Eigenvalues of the collocated generator with N+1 Chebyshev nodes (unrefined).
std::vector<Complex> generator_eigenvalues(const Quasipolynomial& qp, int nodes);

RootSet approximate_spectrum(const Quasipolynomial& qp, const SpectrumOptions& opts = {});

struct SweepRow {
    double tau = 0.0;
    std::vector<double> re;  ///< real parts of the k rightmost roots (descending)
    int n_u = 0;
    double abscissa = 0.0;
};

/// Spectrum summary over a monotone delay grid. Evaluated in parallel.
std::vector<SweepRow> abscissa_sweep(double a, double atilde, double c, const std::vector<double>& taus,
                                     const SpectrumOptions& opts = {});

/// Sign of d(Re lambda)/d tau at a simple root lambda0 of qp (qp.tau = tau0),
/// by implicit differentiation. Throws Degeneracy when |dP/dlambda| < 1e-10.
int crossing_direction(const Quasipolynomial& qp, Complex lambda0);

/// Same sign from Newton-tracked roots at tau0 +- h.
int crossing_direction_fd(const Quasipolynomial& qp, Complex lambda0, double h = 1e-4);

}  // namespace delaybif
