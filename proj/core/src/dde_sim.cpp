#include "delaybif/dde_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "delaybif/error.hpp"

namespace delaybif {

// --- initial function -----------------------------------------------------------

InitialFunction InitialFunction::constant(State x) {
    if (!std::isfinite(x[0]) || !std::isfinite(x[1])) throw InvalidParameter("initial state must be finite");
    InitialFunction f;
    f.constant_ = x;
    return f;
}

InitialFunction InitialFunction::sampled(std::vector<double> times, std::vector<State> values,
                                         std::vector<State> derivatives) {
    if (times.size() < 2 || values.size() != times.size() || derivatives.size() != times.size())
        throw InvalidParameter("sampled segment needs matching times, values and derivatives");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw InvalidParameter("segment times must be strictly increasing");
    for (std::size_t i = 0; i < times.size(); ++i)
        for (int k = 0; k < 2; ++k)
            if (!std::isfinite(values[i][k]) || !std::isfinite(derivatives[i][k]))
                throw InvalidParameter("segment values must be finite");
    InitialFunction f;
    f.times_ = std::move(times);
    f.values_ = std::move(values);
    f.derivatives_ = std::move(derivatives);
    f.constant_ = f.values_.back();
    return f;
}

State InitialFunction::operator()(double theta) const {
    if (times_.empty()) return constant_;
    if (theta < times_.front() - 1e-12 * (1.0 + std::abs(theta)) || theta > times_.back() + 1e-12)
        throw ContractViolation("history query outside the initial segment");
    theta = std::clamp(theta, times_.front(), times_.back());
    auto it = std::upper_bound(times_.begin(), times_.end(), theta);
    std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - times_.begin() - 1, 0), times_.size() - 2);
    const double h = times_[i + 1] - times_[i];
    const double s = (theta - times_[i]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    State out{};
    for (int k = 0; k < 2; ++k)
        out[k] = h00 * values_[i][k] + h10 * h * derivatives_[i][k] + h01 * values_[i + 1][k] +
                 h11 * h * derivatives_[i + 1][k];
    return out;
}

// --- dense output ------------------------------------------------------------------

State Trajectory::Dense::eval(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    State y{};
    for (int k = 0; k < 2; ++k)
        y[k] = r[0][k] + th * (r[1][k] + th1 * (r[2][k] + th * (r[3][k] + th1 * r[4][k])));
    return y;
}

State Trajectory::at(double t) const {
    const double t0 = t_begin();
    const double slack = 1e-12 * (1.0 + std::abs(t));
    if (t < t0 - slack || t > t_end() + slack)
        throw ContractViolation("trajectory query outside [-tau, t_end]");
    if (t <= 0.0) {
        if (!phi_.is_constant() && t < phi_.earliest()) t = phi_.earliest();
        return phi_(std::max(t, t0));
    }
    auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                               [](double v, const Dense& d) { return v < d.t0; });
    const Dense& d = (it == steps_.begin()) ? steps_.front() : *(it - 1);
    return d.eval(t);
}

State Trajectory::derivative(double t) const {
    const State x = at(t);
    const double xd = at(t - field_.tau)[1];
    return {x[1], field_.accel(x[0], x[1], field_.tau == 0.0 ? x[1] : xd)};
}

std::vector<std::pair<double, State>> Trajectory::sample(double t0, double t1, double dt) const {
    if (!(dt > 0.0) || t1 < t0) throw InvalidParameter("sampling needs dt > 0 and t1 >= t0");
    std::vector<std::pair<double, State>> out;
    const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / dt + 1e-9));
    out.reserve(n + 2);
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = t0 + dt * static_cast<double>(i);
        out.emplace_back(t, at(std::min(t, t1)));
    }
    if (out.back().first < t1 - 1e-12 * (1.0 + std::abs(t1))) out.emplace_back(t1, at(t1));
    return out;
}

// --- integrator --------------------------------------------------------------------

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

}  // namespace

class Integrator {
public:
    Integrator(const SwingField& field, const InitialFunction& phi, const IntegrationOptions& opts)
        : opts_(opts) {
        traj_.field_ = field;
        traj_.phi_ = phi;
    }

    Trajectory run(double t_end) {
        const double tau = traj_.field_.tau;
        std::vector<double> bps;
        if (tau > 0.0 && traj_.phi_.is_constant()) {
            for (int k = 1; k <= opts_.breakpoint_orders && k * tau < t_end; ++k) bps.push_back(k * tau);
        }
        traj_.breakpoints_ = bps;
        bps.push_back(t_end);

        double t = 0.0;
        State y = traj_.phi_(0.0);
        State k1 = rhs(t, y);
        double h = opts_.fixed_step ? *opts_.fixed_step
                                    : (opts_.initial_step > 0.0 ? opts_.initial_step : initial_step(y, k1));
        std::size_t bp = 0;
        std::size_t count = 0;

        while (t < t_end) {
            if (++count > opts_.max_steps) throw NumericalFailure("maximum number of steps exceeded");
            while (bp < bps.size() && bps[bp] <= t * (1.0 + 1e-15) + 1e-15) ++bp;
            const double next_bp = bps[std::min(bp, bps.size() - 1)];
            double step = std::min({h, opts_.max_step, next_bp - t});
            if (tau > 0.0) step = std::min(step, tau);
            // Snap to a breakpoint that is only marginally ahead.
            if (next_bp - (t + step) < 1e-12 * std::max(1.0, std::abs(t))) step = next_bp - t;
            if (step < opts_.min_step) throw NumericalFailure("step size underflow");

            State y1{}, k7{};
            std::array<State, 7> k{};
            const double err = attempt(t, y, k1, step, y1, k7, k);
            if (opts_.fixed_step || err <= 1.0) {
                store(t, step, y, y1, k, err);
                t = (step == next_bp - t) ? next_bp : t + step;
                y = y1;
                k1 = k7;
                if (!opts_.fixed_step) h = step * std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
                else h = *opts_.fixed_step;
            } else {
                ++traj_.rejected_;
                h = step * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
            }
        }
        return std::move(traj_);
    }

private:
    double delayed_x2(double t, const State& y) const {
        const double tau = traj_.field_.tau;
        if (tau == 0.0) return y[1];
        return traj_.at(t - tau)[1];
    }

    State rhs(double t, const State& y) const {
        return {y[1], traj_.field_.accel(y[0], y[1], delayed_x2(t, y))};
    }

    double initial_step(const State& y, const State& f) const {
        const double sc = opts_.tol * (1.0 + std::max(std::abs(y[0]), std::abs(y[1])));
        const double fn = std::max(std::abs(f[0]), std::abs(f[1]));
        double h = fn > 0.0 ? 0.01 * std::pow(sc / fn, 0.2) : 1e-3;
        return std::clamp(h, 1e-6, 0.1);
    }

    double attempt(double t, const State& y, const State& k1, double h, State& y1, State& k7,
                   std::array<State, 7>& k) const {
        auto comb = [&](std::initializer_list<std::pair<double, int>> terms) {
            State s = y;
            for (auto [coef, idx] : terms)
                for (int i = 0; i < 2; ++i) s[i] += h * coef * k[idx][i];
            return s;
        };
        k[0] = k1;
        k[1] = rhs(t + c2 * h, comb({{a21, 0}}));
        k[2] = rhs(t + c3 * h, comb({{a31, 0}, {a32, 1}}));
        k[3] = rhs(t + c4 * h, comb({{a41, 0}, {a42, 1}, {a43, 2}}));
        k[4] = rhs(t + c5 * h, comb({{a51, 0}, {a52, 1}, {a53, 2}, {a54, 3}}));
        k[5] = rhs(t + h, comb({{a61, 0}, {a62, 1}, {a63, 2}, {a64, 3}, {a65, 4}}));
        y1 = comb({{a71, 0}, {a73, 2}, {a74, 3}, {a75, 4}, {a76, 5}});
        k[6] = rhs(t + h, y1);
        k7 = k[6];
        double acc = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double e = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] + e6 * k[5][i] +
                                  e7 * k[6][i]);
            const double sc = opts_.tol * (1.0 + std::max(std::abs(y[i]), std::abs(y1[i])));
            acc += (e / sc) * (e / sc);
        }
        return std::sqrt(acc / 2.0);
    }

    void store(double t, double h, const State& y0, const State& y1, const std::array<State, 7>& k, double err) {
        Trajectory::Dense d;
        d.t0 = t;
        d.h = h;
        for (int i = 0; i < 2; ++i) {
            d.r[0][i] = y0[i];
            d.r[1][i] = y1[i] - y0[i];
            d.r[2][i] = h * k[0][i] - d.r[1][i];
            d.r[3][i] = d.r[1][i] - h * k[6][i] - d.r[2][i];
            d.r[4][i] = h * (d1 * k[0][i] + d3 * k[2][i] + d4 * k[3][i] + d5 * k[4][i] + d6 * k[5][i] +
                             d7 * k[6][i]);
        }
        traj_.steps_.push_back(d);
        traj_.info_.push_back(StepInfo{t, h, err});
    }

    IntegrationOptions opts_;
    Trajectory traj_;
};

Trajectory integrate(const SwingField& field, const InitialFunction& phi, double t_end,
                     const IntegrationOptions& opts) {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidParameter("t_end must be positive");
    if (!opts.fixed_step && (opts.tol < 1e-12 || opts.tol > 1e-3))
        throw InvalidParameter("tolerance must lie in [1e-12, 1e-3]");
    if (opts.fixed_step && !(*opts.fixed_step > 0.0)) throw InvalidParameter("fixed step must be positive");
    if (!(field.tau >= 0.0)) throw InvalidParameter("tau must be non-negative");
    if (!phi.is_constant() && field.tau > 0.0 &&
        std::abs(phi.earliest() + field.tau) > 1e-9 * (1.0 + field.tau))
        throw InvalidParameter("initial segment must cover exactly [-tau, 0]");
    return Integrator(field, phi, opts).run(t_end);
}

Trajectory integrate(const SwingParams& params, const InitialFunction& phi, double t_end,
                     const IntegrationOptions& opts) {
    validate_for_simulation(params);
    return integrate(SwingField::from(params), phi, t_end, opts);
}

// --- Poincare sections ----------------------------------------------------------------

std::vector<Crossing> poincare_section(const Trajectory& traj, const Section& section, double time_tol,
                                       double grazing_tol) {
    const double nn = std::hypot(section.normal[0], section.normal[1]);
    if (!(nn > 0.0)) throw InvalidParameter("section normal must be nonzero");
    auto g = [&](double t) {
        const State x = traj.at(t);
        return section.normal[0] * x[0] + section.normal[1] * x[1] - section.offset;
    };
    auto inside = [&](const State& x) {
        if (!section.within) return true;
        const auto& hp = *section.within;
        return hp.normal[0] * x[0] + hp.normal[1] * x[1] > hp.offset;
    };

    std::vector<Crossing> out;
    const auto& steps = traj.steps();
    constexpr int kSub = 4;
    double t_prev = 0.0;
    double g_prev = g(0.0);
    for (const StepInfo& s : steps) {
        for (int j = 1; j <= kSub; ++j) {
            const double t = (j == kSub) ? s.t + s.h : s.t + s.h * j / kSub;
            const double gt = g(t);
            const bool up = g_prev < 0.0 && gt >= 0.0;
            const bool down = g_prev > 0.0 && gt <= 0.0;
            if ((up && section.direction >= 0) || (down && section.direction <= 0)) {
                double lo = t_prev, hi = t, glo = g_prev;
                while (hi - lo > time_tol) {
                    const double mid = 0.5 * (lo + hi);
                    const double gm = g(mid);
                    if ((gm < 0.0) == (glo < 0.0)) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                Crossing c;
                c.t = 0.5 * (lo + hi);
                c.x = traj.at(c.t);
                const State v = traj.derivative(c.t);
                c.normal_velocity = (section.normal[0] * v[0] + section.normal[1] * v[1]) / nn;
                c.ambiguous = std::abs(c.normal_velocity) < grazing_tol;
                if (inside(c.x)) out.push_back(c);
            }
            t_prev = t;
            g_prev = gt;
        }
    }
    return out;
}

}  // namespace delaybif
