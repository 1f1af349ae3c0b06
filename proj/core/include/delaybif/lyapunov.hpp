#pragma once

// Criticality of Hopf points of
//
//   y'' + a y' + atilde y'(t - tau) + h(y) = 0,   a < atilde, h'(y_e) > 0.
//
// The closed form reduces the first Lyapunov coefficient to
//
//   sgn L = sgn[ Re(1/(beta det Delta(2 i omega))) + Re(1/beta) (2/h1 - h3/h2^2) ]
//
// with beta = -(omega tau)(omega^2 - h1) + i((omega tau) omega a + h1 + omega^2).
// `lyapunov_general_oracle` evaluates the generic RFDE formula from null
// vectors of Delta(i omega) instead and is kept as an independent check.

#include <array>
#include <complex>
#include <vector>

#include "delaybif/analytic_stability.hpp"
#include "delaybif/model.hpp"

namespace delaybif {

using Complex = std::complex<double>;

struct BetaValue {
    double re = 0.0;
    double im = 0.0;
    /// sgn Re(1/beta) = sgn(re) = -sgn(omega^2 - h1); 0 on the degenerate branch.
    int re_inverse_sign = 0;

    Complex value() const { return {re, im}; }
};

BetaValue beta(double omega, double tau, double a, double h1);

/// Closed form of det Delta(2 i omega), valid at Hopf candidates.
Complex det_delta_2iw(double omega, double a, double atilde, double h1);

enum class Criticality { Supercritical, Subcritical, Degenerate };
enum class BranchSide { LargerDelay, SmallerDelay };

const char* to_string(Criticality c);
const char* to_string(BranchSide s);

struct LyapunovReport {
    int sign = 0;
    double bracket_value = 0.0;
    double first_term = 0.0;   ///< Re(1/(beta det Delta(2 i omega)))
    double second_term = 0.0;  ///< Re(1/beta) (2/h1 - h3/h2^2)
    Complex det2iw;
    BetaValue beta_value;
    Criticality criticality = Criticality::Degenerate;
    BranchSide branch_side = BranchSide::LargerDelay;
};

/// Side on which the emerging cycle lives, from the sign of L and the root
/// crossing direction: super/sub-critical cycles coexist with the unstable/stable
/// equilibrium respectively.
BranchSide branch_side(int lyapunov_sign, int crossing_dir);

/// Theorem-level sign of the first Lyapunov coefficient. The crossing direction
/// defaults to the family read off from sgn(omega^2 - h1).
LyapunovReport sign_first_lyapunov(const NonlinearityJet& jet, double a, double atilde, double omega,
                                   double tau);

struct GeneralLyapunovInputs {
    std::array<Complex, 2> p{};  ///< left null vector, p^T Delta(i omega) = 0
    std::array<Complex, 2> q{};  ///< right null vector, Delta(i omega) q = 0
    Complex alpha_product;       ///< alpha_p alpha_q, equal to 1/beta
    Complex h11_at_0;            ///< first component of h11(0)
    Complex h20_at_0;            ///< first component of h20(0)
    double left_residual = 0.0;
    double right_residual = 0.0;
    double normalization_residual = 0.0;
};

struct GeneralLyapunovResult {
    double L = 0.0;
    double alpha_q_magnitude = 1.0;
    GeneralLyapunovInputs inputs;
};

/// First Lyapunov coefficient from the generic RFDE formula with
/// q = alpha_q [1, i omega]^T, |alpha_q| given. Throws Degeneracy for h1 = 0.
GeneralLyapunovResult lyapunov_general_oracle(const NonlinearityJet& jet, double a, double atilde,
                                              double omega, double tau, double alpha_q_magnitude = 1.0);

struct ClassifiedHopf {
    HopfPoint point;
    LyapunovReport report;
};

/// Criticality of every Hopf candidate of the lower equilibrium with n <= n_upper,
/// ordered by delay. Candidates lying on both families are skipped.
std::vector<ClassifiedHopf> classify_all_hopf(const SwingParams& params, int n_upper);

/// Coefficients of the rational-in-n form of the two bracket summands along one
/// family:
///   first  = (first_slope n + first_intercept)  / (n^2 + den_linear n + den_const)
///   second = (second_slope n + second_intercept) / (n^2 + den_linear n + den_const)
struct BracketPolynomial {
    double first_slope = 0.0, first_intercept = 0.0;
    double second_slope = 0.0, second_intercept = 0.0;
    double den_linear = 0.0, den_const = 0.0;
};

BracketPolynomial bracket_polynomial(const NonlinearityJet& jet, double a, double atilde, int family);

}  // namespace delaybif
