#include "delaybif/model.hpp"

#include <algorithm>
#include <string>

#include "delaybif/error.hpp"

namespace delaybif {

namespace {

bool finite(double v) { return std::isfinite(v); }

double cos_of_arcsin(double w) { return std::sqrt((1.0 - w) * (1.0 + w)); }

}  // namespace

SwingParams reference_params(double tau) { return SwingParams{0.025, 0.0625, 0.125, tau}; }

void validate(const PhysicalParams& p) {
    if (!finite(p.a_hat) || !finite(p.atilde_hat) || !finite(p.ks_hat) || !finite(p.w_hat) ||
        !finite(p.tau_hat))
        throw InvalidParameter("physical parameters must be finite");
    if (!(p.ks_hat > 0.0)) throw InvalidParameter("ks_hat must be positive");
    if (p.a_hat < 0.0 || p.atilde_hat < 0.0)
        throw InvalidParameter("damping coefficients must be non-negative");
    if (p.tau_hat < 0.0) throw InvalidParameter("tau_hat must be non-negative");
}

void validate_for_simulation(const SwingParams& p) {
    if (!finite(p.a) || !finite(p.atilde) || !finite(p.w) || !finite(p.tau))
        throw InvalidParameter("parameters must be finite");
    if (p.tau < 0.0) throw InvalidParameter("tau must be non-negative");
}

void validate_for_equilibria(const SwingParams& p) {
    validate_for_simulation(p);
    if (!(p.a > 0.0) || !(p.atilde > 0.0))
        throw InvalidParameter("a and atilde must be positive");
    if (!(p.w > 0.0)) throw InvalidParameter("w <= 0 is outside the supported range");
    if (p.w > 1.0) throw InvalidParameter("w > 1: no equilibrium exists");
}

SwingParams to_dimensionless(const PhysicalParams& p) {
    validate(p);
    const double root = std::sqrt(p.ks_hat);
    return SwingParams{p.a_hat / root, p.atilde_hat / root, p.w_hat / p.ks_hat, p.tau_hat * root};
}

PhysicalParams to_physical(const SwingParams& p, double ks_hat) {
    if (!finite(ks_hat) || !(ks_hat > 0.0)) throw InvalidParameter("ks_hat must be positive");
    const double root = std::sqrt(ks_hat);
    return PhysicalParams{p.a * root, p.atilde * root, ks_hat, p.w * ks_hat, p.tau / root};
}

const char* to_string(Branch b) {
    switch (b) {
        case Branch::Lower: return "lower";
        case Branch::Upper: return "upper";
        case Branch::Fold: return "fold";
    }
    return "?";
}

EquilibriumSet equilibria(const SwingParams& params, double lo, double hi) {
    if (!finite(lo) || !finite(hi) || lo > hi) throw InvalidParameter("angle window must be finite and ordered");
    if (!finite(params.w)) throw InvalidParameter("w must be finite");
    if (!(params.w > 0.0)) throw InvalidParameter("w <= 0 is outside the supported range");

    EquilibriumSet out;
    if (params.w > 1.0) {
        out.none_exist = true;
        return out;
    }

    const double two_pi = 2.0 * kPi;
    auto add_family = [&](double base, Branch kind, double c) {
        const int k_lo = static_cast<int>(std::ceil((lo - base) / two_pi));
        const int k_hi = static_cast<int>(std::floor((hi - base) / two_pi));
        for (int k = k_lo; k <= k_hi; ++k) out.points.push_back(Equilibrium{base + two_pi * k, kind, c, k});
    };

    if (params.w == 1.0) {
        add_family(kPi / 2.0, Branch::Fold, 0.0);
    } else {
        const double y = std::asin(params.w);
        const double c = cos_of_arcsin(params.w);
        add_family(y, Branch::Lower, c);
        add_family(kPi - y, Branch::Upper, -c);
    }
    std::sort(out.points.begin(), out.points.end(),
              [](const Equilibrium& l, const Equilibrium& r) { return l.y_e < r.y_e; });
    return out;
}

NonlinearityJet swing_jet(const SwingParams& params, const Equilibrium& eq) {
    // h(y) = sin(y) - w:  h' = cos, h'' = -sin, h''' = -cos.
    const double s = (eq.kind == Branch::Fold) ? 1.0 : params.w;
    return NonlinearityJet{eq.c, -s, -eq.c};
}

double reference_angle(const SwingParams& params) {
    if (params.w >= 1.0) return kPi / 2.0;
    if (params.w <= -1.0) return -kPi / 2.0;
    return std::asin(params.w);
}

double wrap_angle(double y) {
    double r = std::remainder(y, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

SwingField SwingField::from(const SwingParams& p) {
    return SwingField{p.a, p.atilde, 1.0, p.w, p.tau, reference_angle(p)};
}

SwingField SwingField::from(const PhysicalParams& p) {
    const double ratio = p.w_hat / p.ks_hat;
    const double y_ref = (std::abs(ratio) <= 1.0) ? std::asin(ratio) : 0.0;
    return SwingField{p.a_hat, p.atilde_hat, p.ks_hat, p.w_hat, p.tau_hat, y_ref};
}

}  // namespace delaybif
