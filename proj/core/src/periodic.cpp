#include "delaybif/periodic.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "delaybif/error.hpp"
#include "delaybif/lyapunov.hpp"
#include "delaybif/spectrum.hpp"

namespace delaybif {

namespace {

constexpr int kMaxDegree = 12;

struct Stencil {
    int interval = 0;
    std::array<double, kMaxDegree + 1> phi{};
    std::array<double, kMaxDegree + 1> dphi{};  // d/ds, already divided by the interval width
};

Stencil stencil_at(const PeriodicOrbit& o, const LagrangeBasis& basis, double s) {
    Stencil st;
    const auto [i, t] = o.mesh.locate(s);
    st.interval = i;
    basis.eval(t, st.phi.data(), st.dphi.data());
    const double h = o.mesh.width(i);
    for (int j = 0; j <= o.degree; ++j) st.dphi[j] /= h;
    return st;
}

std::size_t point_index(const PeriodicOrbit& o, int interval, int j) {
    return (static_cast<std::size_t>(interval) * o.degree + j) % o.values.size();
}

State combine(const PeriodicOrbit& o, const Stencil& st, bool derivative) {
    State x{0.0, 0.0};
    for (int j = 0; j <= o.degree; ++j) {
        const State& v = o.values[point_index(o, st.interval, j)];
        const double c = derivative ? st.dphi[j] : st.phi[j];
        x[0] += c * v[0];
        x[1] += c * v[1];
    }
    return x;
}

void check_orbit(const PeriodicOrbit& o) {
    if (o.degree < 1 || o.degree > kMaxDegree) throw InvalidParameter("collocation degree must lie in [1, 12]");
    if (o.values.size() != static_cast<std::size_t>(o.intervals()) * o.degree)
        throw InvalidParameter("profile size does not match mesh and degree");
    if (!(o.period > 0.0) || !std::isfinite(o.period)) throw InvalidParameter("period must be positive");
    for (const State& v : o.values)
        if (!std::isfinite(v[0]) || !std::isfinite(v[1])) throw InvalidParameter("profile values must be finite");
}

}  // namespace

double PeriodicOrbit::rep_point(std::size_t p) const {
    const int i = static_cast<int>(p / degree);
    const int j = static_cast<int>(p % degree);
    return mesh[i] + mesh.width(i) * j / degree;
}

State PeriodicOrbit::operator()(double s) const {
    const LagrangeBasis basis(degree);
    return combine(*this, stencil_at(*this, basis, s), false);
}

State PeriodicOrbit::ds(double s) const {
    const LagrangeBasis basis(degree);
    return combine(*this, stencil_at(*this, basis, s), true);
}

double PeriodicOrbit::min_x1() const {
    double m = std::numeric_limits<double>::infinity();
    const LagrangeBasis basis(degree);
    for (int i = 0; i < intervals(); ++i)
        for (int k = 0; k < 4 * degree; ++k) {
            const double s = mesh[i] + mesh.width(i) * k / (4.0 * degree);
            m = std::min(m, combine(*this, stencil_at(*this, basis, s), false)[0]);
        }
    return m;
}

double PeriodicOrbit::max_x1() const {
    double m = -std::numeric_limits<double>::infinity();
    const LagrangeBasis basis(degree);
    for (int i = 0; i < intervals(); ++i)
        for (int k = 0; k < 4 * degree; ++k) {
            const double s = mesh[i] + mesh.width(i) * k / (4.0 * degree);
            m = std::max(m, combine(*this, stencil_at(*this, basis, s), false)[0]);
        }
    return m;
}

PeriodicOrbit remesh(const PeriodicOrbit& orbit, const PeriodicMesh& mesh) {
    const LagrangeBasis basis(orbit.degree);
    return sample_orbit(orbit.params, orbit.period, mesh, orbit.degree,
                        [&](double s) { return combine(orbit, stencil_at(orbit, basis, s), false); });
}

PeriodicMesh adapted_mesh(const PeriodicOrbit& orbit, int intervals) {
    check_orbit(orbit);
    if (intervals < 2) throw InvalidParameter("adapted mesh needs at least two intervals");
    const int M = orbit.intervals();
    const int d = orbit.degree;
    const LagrangeBasis basis(d);
    // d-th derivative per interval (constant on each piece).
    std::vector<State> top(M);
    for (int i = 0; i < M; ++i) {
        State acc{0.0, 0.0};
        for (int j = 0; j <= d; ++j) {
            const State& v = orbit.values[point_index(orbit, i, j)];
            acc[0] += basis.top_derivative(j) * v[0];
            acc[1] += basis.top_derivative(j) * v[1];
        }
        const double hd = std::pow(orbit.mesh.width(i), d);
        top[i] = {acc[0] / hd, acc[1] / hd};
    }
    // (d+1)-th derivative from jumps of the d-th one, symmetrised.
    std::vector<double> rho(M);
    for (int i = 0; i < M; ++i) {
        const int l = (i + M - 1) % M;
        const int r = (i + 1) % M;
        const double hl = 0.5 * (orbit.mesh.width(l) + orbit.mesh.width(i));
        const double hr = 0.5 * (orbit.mesh.width(i) + orbit.mesh.width(r));
        double jump = 0.0;
        for (int k = 0; k < 2; ++k)
            jump = std::max(jump, 0.5 * (std::abs(top[i][k] - top[l][k]) / hl + std::abs(top[r][k] - top[i][k]) / hr));
        rho[i] = std::pow(jump, 1.0 / (d + 1));
    }
    double total = 0.0;
    for (int i = 0; i < M; ++i) total += rho[i] * orbit.mesh.width(i);
    // Floor keeps smooth stretches from being starved.
    const double floor = 0.1 * std::max(total, 1e-300);
    for (double& r : rho) r += floor;
    std::vector<double> cum(M + 1, 0.0);
    for (int i = 0; i < M; ++i) cum[i + 1] = cum[i] + rho[i] * orbit.mesh.width(i);
    const double sum = cum[M];
    if (!(sum > 0.0) || !std::isfinite(sum)) return PeriodicMesh::uniform(intervals);

    std::vector<double> pts(intervals + 1);
    pts[0] = 0.0;
    int i = 0;
    for (int k = 1; k < intervals; ++k) {
        const double target = sum * k / intervals;
        while (i < M - 1 && cum[i + 1] < target) ++i;
        pts[k] = orbit.mesh[i] + (target - cum[i]) / rho[i];
    }
    pts[intervals] = 1.0;
    for (int k = 1; k <= intervals; ++k)
        if (!(pts[k] > pts[k - 1])) return PeriodicMesh::uniform(intervals);
    return PeriodicMesh(std::move(pts));
}

namespace {

double residual_at(const PeriodicOrbit& o, const LagrangeBasis& basis, const SwingField& f, double s) {
    const Stencil st = stencil_at(o, basis, s);
    const State x = combine(o, st, false);
    const State dx = combine(o, st, true);
    const State xd = combine(o, stencil_at(o, basis, s - o.params.tau / o.period), false);
    const double r1 = dx[0] - o.period * x[1];
    const double r2 = dx[1] - o.period * f.accel(x[0], x[1], xd[1]);
    return std::max(std::abs(r1), std::abs(r2));
}

}  // namespace

double collocation_defect(const PeriodicOrbit& orbit, int per_interval) {
    check_orbit(orbit);
    const LagrangeBasis basis(orbit.degree);
    const SwingField f = SwingField::from(orbit.params);
    double m = 0.0;
    for (int i = 0; i < orbit.intervals(); ++i)
        for (int k = 0; k < per_interval; ++k) {
            const double t = (k + 0.5) / per_interval;
            m = std::max(m, residual_at(orbit, basis, f, orbit.mesh[i] + orbit.mesh.width(i) * t));
        }
    return m;
}

double collocation_residual(const PeriodicOrbit& orbit) {
    check_orbit(orbit);
    const LagrangeBasis basis(orbit.degree);
    const GaussRule g = gauss_legendre(orbit.degree);
    const SwingField f = SwingField::from(orbit.params);
    double m = 0.0;
    for (int i = 0; i < orbit.intervals(); ++i)
        for (double t : g.nodes) m = std::max(m, residual_at(orbit, basis, f, orbit.mesh[i] + orbit.mesh.width(i) * t));
    return m;
}

InitialFunction history_from_orbit(const PeriodicOrbit& orbit, double s0, int samples) {
    check_orbit(orbit);
    const double tau = orbit.params.tau;
    if (tau == 0.0) return InitialFunction::constant(orbit(s0));
    if (samples < 2) throw InvalidParameter("history needs at least two samples");
    std::vector<double> times(samples + 1);
    std::vector<State> vals(samples + 1), ders(samples + 1);
    for (int k = 0; k <= samples; ++k) {
        const double theta = k == samples ? 0.0 : -tau + tau * k / samples;
        const double s = s0 + theta / orbit.period;
        times[k] = theta;
        vals[k] = orbit(s);
        const State d = orbit.ds(s);
        ders[k] = {d[0] / orbit.period, d[1] / orbit.period};
    }
    return InitialFunction::sampled(std::move(times), std::move(vals), std::move(ders));
}

CollocationSystem collocation_system(const PeriodicOrbit& o, const PeriodicOrbit& ref) {
    check_orbit(o);
    if (ref.values.size() != o.values.size() || ref.mesh.points() != o.mesh.points() || ref.degree != o.degree)
        throw InvalidParameter("phase reference must share the mesh");
    const int d = o.degree;
    const int M = o.intervals();
    const int L = static_cast<int>(o.values.size());
    const int colT = 2 * L;
    const int colTau = 2 * L + 1;
    const double T = o.period;
    const double tau = o.params.tau;
    const SwingField f = SwingField::from(o.params);
    const LagrangeBasis basis(d);
    const GaussRule g = gauss_legendre(d);

    CollocationSystem sys;
    sys.residual.assign(2 * L + 1, 0.0);
    sys.jacobian.reserve(static_cast<std::size_t>(2 * L) * (3 * (d + 1) + 2) + 2 * L);

    int row = 0;
    double phase = 0.0;
    std::vector<double> phase_row(2 * L, 0.0);
    for (int i = 0; i < M; ++i) {
        const double h = o.mesh.width(i);
        for (int m = 0; m < d; ++m) {
            const double s = o.mesh[i] + h * g.nodes[m];
            Stencil st;
            st.interval = i;
            basis.eval(g.nodes[m], st.phi.data(), st.dphi.data());
            for (int j = 0; j <= d; ++j) st.dphi[j] /= h;
            const Stencil sd = stencil_at(o, basis, s - tau / T);
            const State x = combine(o, st, false);
            const State dx = combine(o, st, true);
            const State xd = combine(o, sd, false);
            const State dxd = combine(o, sd, true);
            const double acc = f.accel(x[0], x[1], xd[1]);
            const double cosv = -f.daccel_dx1(x[0]);

            sys.residual[row] = dx[0] - T * x[1];
            sys.residual[row + 1] = dx[1] - T * acc;
            for (int j = 0; j <= d; ++j) {
                const int p = static_cast<int>(point_index(o, i, j));
                sys.jacobian.push_back({row, 2 * p, st.dphi[j]});
                sys.jacobian.push_back({row, 2 * p + 1, -T * st.phi[j]});
                sys.jacobian.push_back({row + 1, 2 * p + 1, st.dphi[j] + T * f.a * st.phi[j]});
                sys.jacobian.push_back({row + 1, 2 * p, T * cosv * st.phi[j]});
                const int pd = static_cast<int>(point_index(o, sd.interval, j));
                sys.jacobian.push_back({row + 1, 2 * pd + 1, T * f.atilde * sd.phi[j]});
            }
            sys.jacobian.push_back({row, colT, -x[1]});
            sys.jacobian.push_back({row + 1, colT, -acc + f.atilde * dxd[1] * tau / T});
            sys.jacobian.push_back({row + 1, colTau, -f.atilde * dxd[1]});

            // Phase condition: integral of <u, u_ref'> by the same Gauss rule.
            const State rd = combine(ref, st, true);
            const double wq = h * g.weights[m];
            phase += wq * (x[0] * rd[0] + x[1] * rd[1]);
            for (int j = 0; j <= d; ++j) {
                const int p = static_cast<int>(point_index(o, i, j));
                phase_row[2 * p] += wq * st.phi[j] * rd[0];
                phase_row[2 * p + 1] += wq * st.phi[j] * rd[1];
            }
            row += 2;
        }
    }
    sys.residual[2 * L] = phase;
    for (int c = 0; c < 2 * L; ++c)
        if (phase_row[c] != 0.0) sys.jacobian.push_back({2 * L, c, phase_row[c]});
    return sys;
}

PeriodicOrbit newton_correct_extended(const PeriodicOrbit& guess, const PeriodicOrbit& reference,
                                      const ExtraCondition& extra, const NewtonOptions& opts, NewtonReport* report) {
    check_orbit(guess);
    const int L = static_cast<int>(guess.values.size());
    const int n = 2 * L + 2;
    if (static_cast<int>(extra.row.size()) != n) throw InvalidParameter("extra condition has wrong length");

    PeriodicOrbit x = guess;
    NewtonReport rep;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    double last_step = std::numeric_limits<double>::infinity();

    for (int it = 0; it <= opts.max_iter; ++it) {
        CollocationSystem sys = collocation_system(x, reference);
        double extra_res = -extra.value;
        for (int p = 0; p < L; ++p) extra_res += extra.row[2 * p] * x.values[p][0] + extra.row[2 * p + 1] * x.values[p][1];
        extra_res += extra.row[2 * L] * x.period + extra.row[2 * L + 1] * x.params.tau;

        double res = std::abs(extra_res);
        for (double r : sys.residual) res = std::max(res, std::abs(r));
        rep.residual_norms.push_back(res);
        if (!std::isfinite(res)) break;
        const bool step_ok = it == 0 || last_step <= opts.step_tol;
        if (res <= opts.residual_tol && step_ok) {
            rep.converged = true;
            break;
        }
        if (it == opts.max_iter) break;

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(sys.jacobian.size() + n);
        for (const auto& e : sys.jacobian) trip.emplace_back(e.row, e.col, e.value);
        for (int c = 0; c < n; ++c)
            if (extra.row[c] != 0.0) trip.emplace_back(n - 1, c, extra.row[c]);
        Eigen::SparseMatrix<double> J(n, n);
        J.setFromTriplets(trip.begin(), trip.end());
        J.makeCompressed();
        lu.compute(J);
        if (lu.info() != Eigen::Success) {
            if (report) *report = rep;
            throw NumericalFailure("singular collocation Jacobian");
        }
        Eigen::VectorXd rhs(n);
        for (int r = 0; r < n - 1; ++r) rhs[r] = -sys.residual[r];
        rhs[n - 1] = -extra_res;
        const Eigen::VectorXd dx = lu.solve(rhs);
        if (!dx.allFinite()) break;

        for (int p = 0; p < L; ++p) {
            x.values[p][0] += dx[2 * p];
            x.values[p][1] += dx[2 * p + 1];
        }
        x.period += dx[2 * L];
        x.params.tau += dx[2 * L + 1];
        last_step = dx.cwiseAbs().maxCoeff();
        rep.step_norms.push_back(last_step);
        rep.iterations = it + 1;
        if (!(x.period > 0.0) || x.params.tau < 0.0 || !std::isfinite(last_step)) break;
    }
    if (report) *report = rep;
    if (!rep.converged) throw NumericalFailure("collocation Newton iteration did not converge");
    return x;
}

PeriodicOrbit newton_correct(const PeriodicOrbit& guess, const SwingParams& params, const NewtonOptions& opts,
                             NewtonReport* report) {
    validate_for_simulation(params);
    PeriodicOrbit g = guess;
    g.params = params;
    check_orbit(g);
    ExtraCondition pin;
    pin.row.assign(2 * g.values.size() + 2, 0.0);
    pin.row.back() = 1.0;
    pin.value = params.tau;
    PeriodicOrbit out = newton_correct_extended(g, g, pin, opts, report);
    out.params.tau = params.tau;
    return out;
}

double saddle_distance(const PeriodicOrbit& orbit, int samples_per_interval) {
    check_orbit(orbit);
    const double y_ref = reference_angle(orbit.params);
    const double saddle0 = kPi - 2.0 * y_ref;  // upper equilibrium in state coordinates, k = 0
    const LagrangeBasis basis(orbit.degree);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < orbit.intervals(); ++i)
        for (int k = 0; k < samples_per_interval; ++k) {
            const double s = orbit.mesh[i] + orbit.mesh.width(i) * k / samples_per_interval;
            const State x = combine(orbit, stencil_at(orbit, basis, s), false);
            const double kk = std::round((x[0] - saddle0) / (2.0 * kPi));
            const double dx = x[0] - (saddle0 + 2.0 * kPi * kk);
            best = std::min(best, std::hypot(dx, x[1]));
        }
    return best;
}

PeriodicOrbit orbit_from_hopf(const SwingParams& params, const HopfPoint& hopf, const HopfStartOptions& opts) {
    validate_for_equilibria(params);
    if (!(params.w < 1.0)) throw InvalidParameter("Hopf start needs w < 1");
    const double delta = params.tau - hopf.tau;
    if (delta == 0.0) throw InvalidParameter("orbit start needs tau != tau_Hopf");
    if (!(hopf.omega > 0.0)) throw InvalidParameter("Hopf frequency must be positive");

    const Equilibrium lower = equilibria(params, 0.0, 2.0 * kPi).points.front();
    const NonlinearityJet jet = swing_jet(params, lower);
    const Quasipolynomial qp{params.a, params.atilde, jet.h1, hopf.tau};
    const Complex iw(0.0, hopf.omega);
    const double dre = std::real(-qp.dtau(iw) / qp.dlambda(iw));
    const LyapunovReport lr = sign_first_lyapunov(jet, params.a, params.atilde, hopf.omega, hopf.tau);
    const int dir = (dre > 0.0) - (dre < 0.0);
    if (lr.sign != 0 && dir != 0) {
        const BranchSide side = branch_side(lr.sign, dir);
        if ((side == BranchSide::LargerDelay) != (delta > 0.0))
            throw InvalidParameter("no periodic branch on the requested side of the Hopf point");
    }

    // Normal-form amplitude r^2 = -Re(lambda') delta / Re(c1), x1 = 2 r cos(omega t).
    double amp = 0.5 * std::sqrt(std::abs(delta));
    try {
        const double L = lyapunov_general_oracle(jet, params.a, params.atilde, hopf.omega, hopf.tau).L;
        const double r2 = -dre * delta / (hopf.omega * L);
        if (r2 > 0.0 && std::isfinite(r2)) amp = 2.0 * std::sqrt(r2);
    } catch (const Error&) {
    }
    amp = std::min(amp, 1.0);

    const double T0 = 2.0 * kPi / hopf.omega;
    const PeriodicMesh mesh = PeriodicMesh::uniform(opts.intervals);
    static constexpr double factors[] = {1.0, 0.5, 2.0, 0.25, 4.0, 0.125, 8.0};
    const int tries = std::min<int>(opts.retries, static_cast<int>(std::size(factors)));
    for (int k = 0; k < tries; ++k) {
        const double A = amp * factors[k];
        const PeriodicOrbit guess = sample_orbit(params, T0, mesh, opts.degree, [&](double s) {
            const double th = 2.0 * kPi * s;
            return State{A * std::cos(th), -A * hopf.omega * std::sin(th)};
        });
        try {
            PeriodicOrbit o = newton_correct(guess, params, opts.newton);
            const double a_out = o.amplitude();
            if (a_out > 0.05 * A && o.period > 0.5 * T0 && o.period < 2.0 * T0) return o;
        } catch (const NumericalFailure&) {
        }
    }
    throw NumericalFailure("Hopf start failed for every amplitude guess");
}

}  // namespace delaybif
