#pragma once

// Closed-form stability switching of the linear delayed-damping equation
//
//   x1' = x2,  x2' = -c x1 - a x2 - atilde x2(t - tau)
//
// For c > 0 and a < atilde, purely imaginary roots i*omega_j occur at two
// delay sequences
//
//   tau_1n = ( acos(-a/atilde) + 2 pi n     ) / omega_1   (roots move right)
//   tau_2n = (-acos(-a/atilde) + 2 pi (n+1) ) / omega_2   (roots move left)
//
// with omega_{1,2} = +-sqrt(atilde^2 - a^2)/2 + sqrt(c + (atilde^2 - a^2)/4).
// Indices n start at 0, so tau_10 is the first destabilising delay.

#include <optional>
#include <string>
#include <vector>

#include "delaybif/model.hpp"

namespace delaybif {

enum class HopfRegime {
    Switching,               ///< c > 0, a < atilde: both families present
    DelayIndependentStable,  ///< c > 0, atilde < a
    BautinBoundary,          ///< c > 0, atilde == a: the two families coincide
    NonHyperbolic,           ///< c == 0
    Unstable,                ///< c < 0
};

const char* to_string(HopfRegime r);

struct HopfFrequencies {
    double omega1 = 0.0;
    double omega2 = 0.0;
};

/// omega_{1,2} for c + (atilde^2 - a^2)/4 >= 0; requires atilde >= a.
HopfFrequencies hopf_frequencies(double a, double atilde, double c);

struct HopfPoint {
    int n = 0;
    int family = 1;  ///< 1 or 2
    double tau = 0.0;
    double omega = 0.0;
    int crossing_dir = 0;  ///< sign of d(Re lambda)/d tau
};

struct HopfPointTable {
    double a = 0.0;
    double atilde = 0.0;
    double c = 0.0;
    HopfRegime regime = HopfRegime::Switching;
    HopfFrequencies omega{};
    double phase = 0.0;  ///< acos(-a/atilde)
    std::vector<HopfPoint> tau1;
    std::vector<HopfPoint> tau2;

    bool empty() const { return tau1.empty() && tau2.empty(); }
    /// Exact formula value for any n >= 0, independent of the stored lists.
    double tau_of(int family, int n) const;
    double omega_of(int family) const { return family == 1 ? omega.omega1 : omega.omega2; }
    static int crossing_dir(int family) { return family == 1 ? +1 : -1; }
};

inline constexpr int kDefaultHopfIndexBound = 32;

/// Hopf candidate delays for n = 0..n_upper. Non-switching regimes return an
/// empty table with the regime flag set (the BautinBoundary table lists the
/// coincident delays in both families).
HopfPointTable hopf_points(double a, double atilde, double c, int n_upper = kDefaultHopfIndexBound);

struct DelayInterval {
    double lo = 0.0;
    double hi = 0.0;  ///< +infinity for the final ray
};

/// Unstable delay set: (tau_10, tau_20) u ... u (tau_1,nmax, tau_2,nmax) u (tau_1,nmax+1, inf).
struct UnstableDelaySet {
    /// Largest 0-based n with tau_2n < tau_1(n+1); -1 when even tau_20 >= tau_11.
    int n_max = -1;
    std::vector<DelayInterval> intervals;

    bool empty() const { return intervals.empty(); }
    /// Number of bounded unstable windows, n_max + 1. This is the value called
    /// n_max when delays are labelled from 1 (first Hopf delay = tau_{1,1}).
    int bounded_windows() const { return n_max + 1; }
    bool contains(double tau) const;
};

UnstableDelaySet unstable_set(const HopfPointTable& table);

/// #{n : tau_1n < tau}, evaluated by the exact formula.
int crossings_below(const HopfPointTable& table, int family, double tau);

/// Number of characteristic roots in the open right half plane at delay tau
/// (conjugates counted separately).
int unstable_count(const HopfPointTable& table, double tau);

enum class Stability { AsymptoticallyStable, Unstable, NonHyperbolic };

const char* to_string(Stability s);

struct StabilityVerdict {
    Stability kind = Stability::AsymptoticallyStable;
    int n_u = 0;                  ///< -1 when not determined analytically
    bool delay_independent = false;
    /// Verdicts on either side of a non-hyperbolic delay.
    std::optional<Stability> below;
    std::optional<Stability> above;
};

/// Verdict at a single delay from the crossing counts; delays within
/// 1e-12 * max(1, tau) of some tau_jn are reported as non-hyperbolic.
StabilityVerdict classify_delay(const HopfPointTable& table, double tau);

/// Equilibrium classification for the swing equation at params.tau.
StabilityVerdict classify_equilibrium(const SwingParams& params, const Equilibrium& eq);

// --- codimension-two points -------------------------------------------------

enum class Codim2Kind { HopfHopf, Bautin, FoldHopf };

const char* to_string(Codim2Kind k);

enum class SecondParameter { Atilde, W };

struct Codim2Point {
    Codim2Kind kind = Codim2Kind::HopfHopf;
    double tau = 0.0;
    SecondParameter which = SecondParameter::Atilde;
    double value = 0.0;  ///< atilde or w at the point
    std::vector<double> omegas;
    int n = -1;  ///< family-1 index (HopfHopf, FoldHopf) or Bautin index
    int m = -1;  ///< family-2 index (HopfHopf)
    /// Bautin only: the delay from the alternative (1 - w^2)^(-1/2) scaling,
    /// kept for comparison; `tau` holds the one that solves the characteristic
    /// equation.
    std::optional<double> tau_alternative;
    double residual = 0.0;  ///< |det Delta(i omega)| at (tau, value)
};

struct HopfHopfQuery {
    double a = 0.0;
    double c = 0.0;           ///< fixed when scanning atilde
    double atilde = 0.0;      ///< fixed when scanning w
    double lo = 0.0, hi = 0.0;  ///< range of the scanned parameter
    double tau_lo = 0.0, tau_hi = 0.0;
    int n_max = 3;
    int m_max = 3;
    int grid = 4000;
};

/// Intersections tau_1n(atilde) = tau_2m(atilde) over an atilde range.
std::vector<Codim2Point> hopf_hopf_points_atilde(const HopfHopfQuery& q);
/// Intersections tau_1n(w) = tau_2m(w) over a w range, c = sqrt(1 - w^2).
std::vector<Codim2Point> hopf_hopf_points_w(const HopfHopfQuery& q);

/// Points on the atilde = a locus for n = 0..count-1 at drive w.
std::vector<Codim2Point> bautin_points(double a, double w, int count);

/// w = 1 (c = 0) points tau_1n with omega_1 = sqrt(atilde^2 - a^2) inside the window.
std::vector<Codim2Point> fold_hopf_points(double a, double atilde, double tau_lo, double tau_hi);

/// Everything visible in the (tau, atilde) plane at fixed a and w: Hopf-Hopf
/// intersections plus the Bautin locus when a lies in the atilde range.
std::vector<Codim2Point> codim2_points(double a, double w, double atilde_lo, double atilde_hi,
                                       double tau_lo, double tau_hi, int n_max = 3, int m_max = 3);

}  // namespace delaybif
