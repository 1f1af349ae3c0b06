#include "delaybif/lyapunov.hpp"

#include <algorithm>
#include <cmath>

#include "delaybif/error.hpp"

namespace delaybif {

namespace {

constexpr Complex kI{0.0, 1.0};

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

using Mat2 = std::array<std::array<Complex, 2>, 2>;

Complex det(const Mat2& m) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

// Characteristic matrix Delta(lambda) = [[lambda, -1], [c, lambda + a + atilde e^{-lambda tau}]].
Mat2 char_matrix(Complex lambda, double a, double atilde, double c, double tau) {
    return Mat2{{{lambda, Complex(-1.0)}, {Complex(c), lambda + a + atilde * std::exp(-lambda * tau)}}};
}

std::array<Complex, 2> solve2(const Mat2& m, std::array<Complex, 2> rhs) {
    const Complex d = det(m);
    if (std::abs(d) == 0.0) throw Degeneracy("singular characteristic matrix");
    return {(m[1][1] * rhs[0] - m[0][1] * rhs[1]) / d, (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / d};
}

}  // namespace

const char* to_string(Criticality c) {
    switch (c) {
        case Criticality::Supercritical: return "supercritical";
        case Criticality::Subcritical: return "subcritical";
        case Criticality::Degenerate: return "degenerate";
    }
    return "?";
}

const char* to_string(BranchSide s) {
    return s == BranchSide::LargerDelay ? "larger-delay" : "smaller-delay";
}

BetaValue beta(double omega, double tau, double a, double h1) {
    if (!(omega > 0.0) || !(tau > 0.0)) throw InvalidParameter("beta needs omega > 0 and tau > 0");
    const double wt = omega * tau;
    BetaValue b;
    b.re = -wt * (omega * omega - h1);
    b.im = wt * omega * a + h1 + omega * omega;
    if (b.re == 0.0 && b.im == 0.0) throw Degeneracy("beta vanishes");
    b.re_inverse_sign = sgn(b.re);
    return b;
}

Complex det_delta_2iw(double omega, double a, double atilde, double h1) {
    const double w2 = omega * omega;
    return Complex(-3.0 * w2 - (1.0 + 4.0 * a / atilde) * (w2 - h1),
                   2.0 * omega * (a - atilde + 2.0 * a * a / atilde));
}

BranchSide branch_side(int lyapunov_sign, int crossing_dir) {
    // L < 0: cycle where the crossing pair is unstable, i.e. on the side the
    // roots move into the right half plane.
    return (lyapunov_sign * crossing_dir < 0) ? BranchSide::LargerDelay : BranchSide::SmallerDelay;
}

LyapunovReport sign_first_lyapunov(const NonlinearityJet& jet, double a, double atilde, double omega,
                                   double tau) {
    if (!(a < atilde)) throw InvalidParameter("closed form requires a < atilde");
    if (!(jet.h1 > 0.0)) throw InvalidParameter("closed form requires h'(y_e) > 0");
    if (jet.h2 == 0.0) throw Degeneracy("h''(y_e) = 0: the h'''/h''^2 term is undefined");

    LyapunovReport r;
    r.beta_value = beta(omega, tau, a, jet.h1);
    r.det2iw = det_delta_2iw(omega, a, atilde, jet.h1);
    const Complex b = r.beta_value.value();
    r.first_term = std::real(1.0 / (b * r.det2iw));
    r.second_term = std::real(1.0 / b) * (2.0 / jet.h1 - jet.h3 / (jet.h2 * jet.h2));
    r.bracket_value = r.first_term + r.second_term;

    const double scale = 1.0 + std::abs(r.first_term) + std::abs(r.second_term);
    if (std::abs(r.bracket_value) < 1e-9 * scale) {
        r.sign = 0;
        r.criticality = Criticality::Degenerate;
    } else {
        r.sign = sgn(r.bracket_value);
        r.criticality = r.sign < 0 ? Criticality::Supercritical : Criticality::Subcritical;
    }
    const int crossing = (omega * omega > jet.h1) ? +1 : -1;
    r.branch_side = branch_side(r.sign == 0 ? -crossing : r.sign, crossing);
    return r;
}

GeneralLyapunovResult lyapunov_general_oracle(const NonlinearityJet& jet, double a, double atilde,
                                              double omega, double tau, double alpha_q_magnitude) {
    if (jet.h1 == 0.0) throw Degeneracy("Delta(0) is singular for h'(y_e) = 0");
    if (!(alpha_q_magnitude > 0.0)) throw InvalidParameter("|alpha_q| must be positive");
    const double c = jet.h1;
    const Complex iw(0.0, omega);

    const Mat2 d_iw = char_matrix(iw, a, atilde, c, tau);
    // Null vectors from the first row / first column of Delta(i omega).
    std::array<Complex, 2> q{Complex(alpha_q_magnitude), alpha_q_magnitude * d_iw[0][0]};
    std::array<Complex, 2> p_dir{-d_iw[1][0], d_iw[0][0]};

    // D Delta(lambda) = diag(1, 1 - tau atilde e^{-lambda tau}).
    const Complex dd22 = 1.0 - tau * atilde * std::exp(-iw * tau);
    const Complex pdq = p_dir[0] * q[0] + p_dir[1] * dd22 * q[1];
    if (std::abs(pdq) == 0.0) throw Degeneracy("p^T D Delta q vanishes: root not simple");
    const std::array<Complex, 2> p{p_dir[0] / pdq, p_dir[1] / pdq};

    GeneralLyapunovResult out;
    out.alpha_q_magnitude = alpha_q_magnitude;
    auto& in = out.inputs;
    in.p = p;
    in.q = q;
    in.alpha_product = p[1] / omega * q[0];  // p = alpha_p [i c, omega], q = alpha_q [1, i omega]
    const double qn = std::abs(q[0]) + std::abs(q[1]);
    const double pn = std::abs(p[0]) + std::abs(p[1]);
    in.right_residual = (std::abs(d_iw[0][0] * q[0] + d_iw[0][1] * q[1]) +
                         std::abs(d_iw[1][0] * q[0] + d_iw[1][1] * q[1])) / qn;
    in.left_residual = (std::abs(p[0] * d_iw[0][0] + p[1] * d_iw[1][0]) +
                        std::abs(p[0] * d_iw[0][1] + p[1] * d_iw[1][1])) / pn;
    in.normalization_residual = std::abs(p[0] * q[0] + p[1] * dd22 * q[1] - 1.0);

    // Nonlinearity of the state equation sits in the second component and
    // depends on x1(t) only: D2f(X,Y) = [0, -h2 X1 Y1], D3f(X,Y,Z) = [0, -h3 X1 Y1 Z1].
    const Complex phi1 = q[0];
    const Complex phi1_bar = std::conj(q[0]);
    const auto h11 = solve2(char_matrix(Complex(0.0), a, atilde, c, tau), {Complex(0.0), -jet.h2 * phi1 * phi1_bar});
    const auto h20 = solve2(char_matrix(2.0 * iw, a, atilde, c, tau), {Complex(0.0), -jet.h2 * phi1 * phi1});
    in.h11_at_0 = h11[0];
    in.h20_at_0 = h20[0];

    const Complex second = -jet.h2 * phi1 * h11[0] + 0.5 * (-jet.h2 * phi1_bar * h20[0]) +
                           0.5 * (-jet.h3 * phi1 * phi1 * phi1_bar);
    out.L = std::real(p[1] * second) / omega;
    return out;
}

std::vector<ClassifiedHopf> classify_all_hopf(const SwingParams& params, int n_upper) {
    validate_for_equilibria(params);
    std::vector<ClassifiedHopf> out;
    if (!(params.w < 1.0)) throw InvalidParameter("classification needs 0 < w < 1");
    if (params.atilde < params.a) return out;

    const EquilibriumSet eqs = equilibria(params, 0.0, 2.0 * kPi);
    const Equilibrium lower = eqs.points.front();
    const NonlinearityJet jet = swing_jet(params, lower);
    const HopfPointTable table = hopf_points(params.a, params.atilde, jet.h1, n_upper);
    if (table.regime != HopfRegime::Switching) return out;

    auto on_other_family = [&](const HopfPoint& hp) {
        const int other = hp.family == 1 ? 2 : 1;
        const int k = crossings_below(table, other, hp.tau);
        for (int n : {k - 1, k, k + 1}) {
            if (n < 0) continue;
            if (std::abs(table.tau_of(other, n) - hp.tau) <= 1e-12 * hp.tau) return true;
        }
        return false;
    };

    for (const auto* fam : {&table.tau1, &table.tau2}) {
        for (const HopfPoint& hp : *fam) {
            if (on_other_family(hp)) continue;
            LyapunovReport r = sign_first_lyapunov(jet, params.a, params.atilde, hp.omega, hp.tau);
            r.branch_side = branch_side(r.sign, hp.crossing_dir);
            out.push_back(ClassifiedHopf{hp, r});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const ClassifiedHopf& l, const ClassifiedHopf& r) { return l.point.tau < r.point.tau; });
    return out;
}

BracketPolynomial bracket_polynomial(const NonlinearityJet& jet, double a, double atilde, int family) {
    const HopfFrequencies om = hopf_frequencies(a, atilde, jet.h1);
    const double omega = family == 1 ? om.omega1 : om.omega2;
    const double phase = std::acos(-a / atilde);
    const double s0 = family == 1 ? phase : 2.0 * kPi - phase;
    const double k = 2.0 * kPi;

    // beta = A s + i (B s + C) with s = omega tau = s0 + 2 pi n.
    const double A = -(omega * omega - jet.h1);
    const double B = omega * a;
    const double C = jet.h1 + omega * omega;
    const Complex d = det_delta_2iw(omega, a, atilde, jet.h1);
    const double d2 = std::norm(d);
    const double K = 2.0 / jet.h1 - jet.h3 / (jet.h2 * jet.h2);

    // |beta|^2 = (A^2 + B^2) s^2 + 2 B C s + C^2
    const double q2 = (A * A + B * B) * k * k;
    const double q1 = 2.0 * (A * A + B * B) * s0 * k + 2.0 * B * C * k;
    const double q0 = (A * A + B * B) * s0 * s0 + 2.0 * B * C * s0 + C * C;

    // Re(1/(beta d)) = Re(beta d) / (|beta|^2 |d|^2), Re(beta d) = A s Re d - (B s + C) Im d.
    BracketPolynomial out;
    out.first_slope = (A * d.real() - B * d.imag()) * k / d2 / q2;
    out.first_intercept = ((A * d.real() - B * d.imag()) * s0 - C * d.imag()) / d2 / q2;
    out.second_slope = A * k * K / q2;
    out.second_intercept = A * s0 * K / q2;
    out.den_linear = q1 / q2;
    out.den_const = q0 / q2;
    return out;
}

}  // namespace delaybif
