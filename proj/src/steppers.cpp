#include "wide/steppers.hpp"

#include "wide/cg.hpp"
#include "wide/discretization.hpp"

#include <cmath>
#include <sstream>

namespace wide {

namespace {

thread_local long g_spd_violations = 0;

// Solves rho_tau2 (W - W_pred) + nu g((W - U)/tau) + A W + f(W) = 0 for one
// implicit step; rho_tau2 = rho/tau^2 and W_pred = 2 U^n - U^{n-1} for the
// wave stepper, rho_tau2 = 0 for the parabolic one.
Field implicit_step(const WideParams& params, const Grid& grid, double tau, double rho_tau2,
                    const Field& w_pred, const Field& u_prev, bool& ok) {
    const int sz = grid.node_count();
    auto residual = [&](const Field& w) {
        Field r = Field::Zero(sz);
        if (rho_tau2 > 0) r += rho_tau2 * (w - w_pred);
        laplacian_accumulate(grid, w, 1.0, r);
        for (int i = 0; i < sz; ++i) {
            double v = (w[i] - u_prev[i]) / tau;
            r[i] += params.nu * evaluate(params.G, v, 1) + evaluate(params.F, w[i], 1);
        }
        return r;
    };

    Field w = u_prev;
    const double tol = 1e-10;
    ok = false;
    for (int it = 0; it < 60; ++it) {
        Field r = residual(w);
        double rn = norm(grid, r, NormKind::L2);
        if (rn <= tol) {
            ok = true;
            return w;
        }
        Field gpp(sz), fpp(sz);
        for (int i = 0; i < sz; ++i) {
            double v = (w[i] - u_prev[i]) / tau;
            double g2;
            try {
                g2 = evaluate(params.G, v, 2);
            } catch (const std::domain_error&) {
                g2 = 0.0;
            }
            gpp[i] = g2;
            try {
                fpp[i] = evaluate(params.F, w[i], 2);
            } catch (const std::domain_error&) {
                fpp[i] = 0.0;
            }
        }
        auto apply = [&](const Eigen::VectorXd& x) {
            Field y = Field::Zero(sz);
            if (rho_tau2 > 0) y += rho_tau2 * x;
            laplacian_accumulate(grid, x, 1.0, y);
            y.array() += (params.nu / tau) * gpp.array() * x.array() + fpp.array() * x.array();
            return y;
        };
        const double stiff = 2.0 * grid.dim / (grid.h * grid.h);
        auto precond = [&](const Eigen::VectorXd& x) {
            return (x.array() /
                    (rho_tau2 + stiff + (params.nu / tau) * gpp.array() + fpp.array()))
                .matrix()
                .eval();
        };
        Field step = Field::Zero(sz);
        CgResult cg = pcg(apply, precond, (-r).eval(), step, 1e-12, 20 * sz + 200);
        if (cg.spd_violation) ++g_spd_violations;
        double t = 1.0;
        Field trial = w + step;
        for (int ls = 0; ls < 40; ++ls) {
            if (norm(grid, residual(trial), NormKind::L2) < rn) break;
            t *= 0.5;
            trial = w + t * step;
        }
        w = trial;
    }
    ok = norm(grid, residual(w), NormKind::L2) <= tol;
    return w;
}

Field advance_or_substep(const WideParams& params, const Grid& grid, double tau,
                         const Field& u_curr, const Field& u_old, bool parabolic) {
    bool ok = false;
    if (parabolic) {
        Field w = implicit_step(params, grid, tau, 0.0, u_curr, u_curr, ok);
        if (ok) return w;
        // one internal tau-halving, then fail
        Field mid = implicit_step(params, grid, tau / 2, 0.0, u_curr, u_curr, ok);
        if (ok) {
            Field fin = implicit_step(params, grid, tau / 2, 0.0, mid, mid, ok);
            if (ok) return fin;
        }
        throw std::runtime_error("solve_parabolic: Newton failed even after halving tau");
    }
    const double rt2 = params.rho / (tau * tau);
    Field pred = 2.0 * u_curr - u_old;
    Field w = implicit_step(params, grid, tau, rt2, pred, u_curr, ok);
    if (ok) return w;
    // retry with two half steps; velocity from the last full-step pair
    const double ht = tau / 2;
    const double hrt2 = params.rho / (ht * ht);
    Field vel = (u_curr - u_old) / tau;
    Field mid_old = u_curr - ht * vel;
    Field pred_mid = 2.0 * u_curr - mid_old;
    Field mid = implicit_step(params, grid, ht, hrt2, pred_mid, u_curr, ok);
    if (ok) {
        Field pred_fin = 2.0 * mid - u_curr;
        Field fin = implicit_step(params, grid, ht, hrt2, pred_fin, mid, ok);
        if (ok) return fin;
    }
    throw std::runtime_error("solve_hyperbolic: Newton failed even after halving tau");
}

}  // namespace

long stepper_spd_violations() { return g_spd_violations; }

Trajectory solve_hyperbolic(const WideParams& params, const Grid& grid, const TimeAxis& time,
                            FieldRef u0, FieldRef u1) {
    params.validate();
    if (!(params.rho > 0)) throw std::invalid_argument("solve_hyperbolic: needs rho > 0");
    if (u0.size() != grid.node_count() || u1.size() != grid.node_count())
        throw std::invalid_argument("solve_hyperbolic: data fields do not match grid");

    Trajectory traj = Trajectory::zeros(grid, time);
    traj.levels[0] = u0;
    traj.levels[1] = u0 + time.tau * u1;
    for (int n = 1; n < time.N; ++n)
        traj.levels[n + 1] =
            advance_or_substep(params, grid, time.tau, traj.levels[n], traj.levels[n - 1], false);
    return traj;
}

Trajectory solve_parabolic(const WideParams& params, const Grid& grid, const TimeAxis& time,
                           FieldRef u0) {
    params.validate();
    if (!(params.nu > 0)) throw std::invalid_argument("solve_parabolic: needs nu > 0");
    if (u0.size() != grid.node_count())
        throw std::invalid_argument("solve_parabolic: data field does not match grid");

    Trajectory traj = Trajectory::zeros(grid, time);
    traj.levels[0] = u0;
    for (int n = 0; n < time.N; ++n)
        traj.levels[n + 1] =
            advance_or_substep(params, grid, time.tau, traj.levels[n], traj.levels[n], true);
    return traj;
}

double modal_amplitude(double rho, double nu, double omega, double amp0, double amp1, double t) {
    if (rho == 0.0) {
        if (!(nu > 0)) throw std::invalid_argument("modal_amplitude: rho = 0 needs nu > 0");
        return amp0 * std::exp(-omega * t / nu);
    }
    const double disc = nu * nu - 4.0 * rho * omega;
    const double tol = 1e-12 * (nu * nu + 4.0 * std::abs(rho * omega) + 1.0);
    if (disc > tol) {  // overdamped
        const double root = std::sqrt(disc);
        const double sp = (-nu + root) / (2.0 * rho);
        const double sm = (-nu - root) / (2.0 * rho);
        const double cp = (amp1 - sm * amp0) / (sp - sm);
        const double cm = (sp * amp0 - amp1) / (sp - sm);
        return cp * std::exp(sp * t) + cm * std::exp(sm * t);
    }
    if (disc < -tol) {  // underdamped
        const double sigma = -nu / (2.0 * rho);
        const double w0 = std::sqrt(-disc) / (2.0 * rho);
        return std::exp(sigma * t) *
               (amp0 * std::cos(w0 * t) + (amp1 - sigma * amp0) / w0 * std::sin(w0 * t));
    }
    const double s = -nu / (2.0 * rho);  // critically damped
    return (amp0 + (amp1 - s * amp0) * t) * std::exp(s * t);
}

Trajectory modal_reference(double rho, double nu, double c, const Grid& grid,
                           const TimeAxis& time, int mode, double amp0, double amp1) {
    if (grid.dim != 1) throw std::invalid_argument("modal_reference: d = 1 only");
    const double k = mode * M_PI / grid.length;
    const double omega = k * k + c;
    Trajectory traj = Trajectory::zeros(grid, time);
    Field shape(grid.node_count());
    for (int i = 0; i < grid.n_per_axis; ++i) shape[i] = std::sin(k * grid.axis_coord(i));
    for (int n = 0; n <= time.N; ++n)
        traj.levels[n] = modal_amplitude(rho, nu, omega, amp0, amp1, time.node(n)) * shape;
    return traj;
}

EnergyLedger energy_ledger(const Trajectory& traj, const WideParams& params, double slack) {
    traj.require_consistent();
    const int N = traj.time.N;
    const double tau = traj.time.tau;
    const double meas = traj.grid.cell_measure();
    const int sz = traj.grid.node_count();

    auto energy_at = [&](const Field& u, const Field& v) {
        double kinetic = 0.5 * params.rho * meas * v.squaredNorm();
        double elastic = 0.5 * meas * laplacian_apply(traj.grid, u).dot(u);
        double potential = 0.0;
        for (int i = 0; i < sz; ++i) potential += evaluate(params.F, u[i], 0);
        return kinetic + elastic + meas * potential;
    };

    EnergyLedger ledger;
    Field v1 = (traj.levels[1] - traj.levels[0]) / tau;  // u1 under the shared start-up
    ledger.initial_energy = energy_at(traj.levels[0], v1);

    double dissipated = 0.0;
    double prev_energy = ledger.initial_energy;
    double prev_budget = ledger.initial_energy;
    for (int n = 1; n <= N; ++n) {
        Field v = (traj.levels[n] - traj.levels[n - 1]) / tau;
        double pairing = 0.0;
        for (int i = 0; i < sz; ++i) pairing += evaluate(params.G, v[i], 1) * v[i];
        dissipated += tau * params.nu * meas * pairing;

        EnergyLedger::Row row;
        row.n = n;
        row.energy = energy_at(traj.levels[n], v);
        row.dissipated = dissipated;
        row.residual = row.energy + dissipated - ledger.initial_energy;
        ledger.max_abs_residual = std::max(ledger.max_abs_residual, std::abs(row.residual));
        if (row.energy + dissipated > prev_budget + slack) ledger.budget_nonincreasing = false;
        if (n >= 2 && (row.energy - prev_energy) * (prev_energy - ledger.initial_energy) < 0)
            ++ledger.sign_changes;
        prev_budget = row.energy + dissipated;
        prev_energy = row.energy;
        ledger.rows.push_back(row);
    }
    return ledger;
}

}  // namespace wide
