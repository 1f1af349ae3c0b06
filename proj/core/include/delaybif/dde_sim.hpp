#pragma once

// Method-of-steps integration of the delayed swing equation in state
// coordinates x = (y - y_ref, y'):
//
//   x1' = x2,   x2' = -a x2 - atilde x2(t - tau) - ks sin(x1 + y_ref) + w.
//
// Dormand-Prince 5(4) steps with the free fourth-order continuous extension.
// Delayed values are read from the dense output of completed steps; a step is
// never longer than tau, so no delayed lookup extrapolates.

#include <array>
#include <limits>
#include <optional>
#include <vector>

#include "delaybif/model.hpp"

namespace delaybif {

using State = std::array<double, 2>;

/// History on [-tau, 0].
class InitialFunction {
public:
    static InitialFunction constant(State x);
    /// Cubic Hermite segment; times ascending, covering exactly [-tau, 0].
    static InitialFunction sampled(std::vector<double> times, std::vector<State> values,
                                   std::vector<State> derivatives);

    bool is_constant() const { return times_.empty(); }
    State operator()(double theta) const;
    double earliest() const { return times_.empty() ? -std::numeric_limits<double>::infinity() : times_.front(); }

private:
    State constant_{};
    std::vector<double> times_;
    std::vector<State> values_;
    std::vector<State> derivatives_;
};

struct IntegrationOptions {
    double tol = 1e-8;                   ///< relative and absolute local error target
    double initial_step = 0.0;           ///< 0 picks a default
    double min_step = 1e-13;
    double max_step = 1.0;
    std::optional<double> fixed_step;    ///< constant step, no error control
    std::size_t max_steps = 50'000'000;
    int breakpoint_orders = 6;           ///< k tau, k = 1..breakpoint_orders, for non-smooth history
};

struct StepInfo {
    double t = 0.0;
    double h = 0.0;
    double error = 0.0;  ///< scaled local error estimate (<= 1 when accepted)
};

class Trajectory {
public:
    double t_begin() const { return -field_.tau; }
    double t_end() const { return steps_.empty() ? 0.0 : steps_.back().t0 + steps_.back().h; }
    const SwingField& field() const { return field_; }

    /// State at t in [-tau, t_end]; throws ContractViolation elsewhere.
    State at(double t) const;
    /// Vector field evaluated along the trajectory at t in [0, t_end].
    State derivative(double t) const;

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<StepInfo>& steps() const { return info_; }
    std::size_t rejected_steps() const { return rejected_; }

    /// Uniform resampling on [t0, t1].
    std::vector<std::pair<double, State>> sample(double t0, double t1, double dt) const;

private:
    friend class Integrator;
    struct Dense {
        double t0 = 0.0;
        double h = 0.0;
        std::array<State, 5> r{};
        State eval(double t) const;
    };

    SwingField field_;
    InitialFunction phi_ = InitialFunction::constant({0.0, 0.0});
    std::vector<Dense> steps_;
    std::vector<StepInfo> info_;
    std::vector<double> breakpoints_;
    std::size_t rejected_ = 0;
};

Trajectory integrate(const SwingField& field, const InitialFunction& phi, double t_end,
                     const IntegrationOptions& opts = {});
Trajectory integrate(const SwingParams& params, const InitialFunction& phi, double t_end,
                     const IntegrationOptions& opts = {});

struct HalfPlane {
    State normal{};
    double offset = 0.0;  ///< keeps points with normal . x > offset
};

struct Section {
    State normal{1.0, 0.0};
    double offset = 0.0;  ///< hyperplane normal . x = offset
    int direction = +1;   ///< +1: normal . x' > 0, -1: < 0, 0: both
    std::optional<HalfPlane> within;
};

struct Crossing {
    double t = 0.0;
    State x{};
    double normal_velocity = 0.0;
    bool ambiguous = false;  ///< |normal velocity| below the grazing tolerance
};

/// Crossings on [0, t_end], located by bisection on the dense output.
std::vector<Crossing> poincare_section(const Trajectory& traj, const Section& section,
                                       double time_tol = 1e-10, double grazing_tol = 1e-9);

}  // namespace delaybif
