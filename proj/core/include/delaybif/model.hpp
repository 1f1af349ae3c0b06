#pragma once

// Governing equations of the delayed swing equation
//
//   y'' + a y' + atilde y'(t - tau) + ks sin(y) = w
//
// and of the general delayed-damping equation with a delay-free
// nonlinearity h(y). State coordinates are x = (y - y_ref, y') with y_ref the
// principal equilibrium arcsin(w); angles live on the real line, so
// equilibria that differ by 2 pi are distinct.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace delaybif {

inline constexpr double kPi = std::numbers::pi;

/// Parameters in physical units.
struct PhysicalParams {
    double a_hat = 0.0;       ///< instantaneous damping [1/s]
    double atilde_hat = 0.0;  ///< delayed damping [1/s]
    double ks_hat = 1.0;      ///< restoring coefficient [1/s^2]
    double w_hat = 0.0;       ///< drive [1/s^2]
    double tau_hat = 0.0;     ///< delay [s]
};

/// Dimensionless parameters with ks = 1.
struct SwingParams {
    double a = 0.0;
    double atilde = 0.0;
    double w = 0.0;
    double tau = 0.0;
};

/// The reference parametrisation a = 0.025, atilde = 0.0625, w = 0.125.
SwingParams reference_params(double tau = 0.0);

void validate(const PhysicalParams& p);
/// Checks the dimensionless invariants needed for equilibrium analysis
/// (a > 0, atilde > 0, tau >= 0, 0 < w <= 1).
void validate_for_equilibria(const SwingParams& p);
/// Looser check for time simulation: finite values, tau >= 0, w unrestricted.
void validate_for_simulation(const SwingParams& p);

SwingParams to_dimensionless(const PhysicalParams& p);
/// Inverse scaling for a given restoring coefficient ks_hat.
PhysicalParams to_physical(const SwingParams& p, double ks_hat);

enum class Branch {
    Lower,  ///< y_e + 2k pi, c = +sqrt(1 - w^2)
    Upper,  ///< pi - y_e + 2k pi, c = -sqrt(1 - w^2)
    Fold,   ///< w = 1: both families coincide at pi/2 + 2k pi, c = 0
};

const char* to_string(Branch b);

struct Equilibrium {
    double y_e = 0.0;  ///< angle on the real line [rad]
    Branch kind = Branch::Lower;
    double c = 0.0;    ///< linearisation coefficient cos(y_e)
    int k = 0;         ///< 2 pi winding index
};

struct EquilibriumSet {
    std::vector<Equilibrium> points;  ///< ascending in y_e
    bool none_exist = false;          ///< set when w > 1
};

/// All equilibria with y_e in [lo, hi]. Throws InvalidParameter for w <= 0.
EquilibriumSet equilibria(const SwingParams& params, double lo, double hi);

/// Derivatives of the nonlinearity h at an equilibrium.
struct NonlinearityJet {
    double h1 = 0.0;
    double h2 = 0.0;
    double h3 = 0.0;
};

/// Jet of h(y) = sin(y) - w at eq; uses the exact branch values
/// (sin y_e = w, cos y_e = c).
NonlinearityJet swing_jet(const SwingParams& params, const Equilibrium& eq);

/// Principal equilibrium angle arcsin(w), the origin of state coordinates.
double reference_angle(const SwingParams& params);

/// Reduces an angle to (-pi, pi]; plotting only.
double wrap_angle(double y);

/// Right-hand side coefficients of the state equation
///   x1' = x2
///   x2' = -a x2 - atilde x2(t - tau) - ks sin(x1 + y_ref) + w
/// shared by the simulator and the periodic-orbit solver.
struct SwingField {
    double a = 0.0;
    double atilde = 0.0;
    double ks = 1.0;
    double w = 0.0;
    double tau = 0.0;
    double y_ref = 0.0;

    static SwingField from(const SwingParams& p);
    /// Dimensional field; y_ref = arcsin(w_hat / ks_hat) when that exists, 0 otherwise.
    static SwingField from(const PhysicalParams& p);

    double accel(double x1, double x2, double x2_delayed) const {
        return -a * x2 - atilde * x2_delayed - ks * std::sin(x1 + y_ref) + w;
    }
    double daccel_dx1(double x1) const { return -ks * std::cos(x1 + y_ref); }
};

}  // namespace delaybif
