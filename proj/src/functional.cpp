#include "wide/functional.hpp"

#include "wide/cg.hpp"
#include "wide/discretization.hpp"

#include <cmath>

namespace wide {

namespace {

// Effective dissipation density: the spec'd density for lambda = 0, its
// Moreau-Yosida envelope otherwise.
double g_value(const PotentialSpec& g, double lambda, double v) {
    return lambda > 0 ? moreau_envelope(g, v, lambda) : evaluate(g, v, 0);
}
double g_slope(const PotentialSpec& g, double lambda, double v) {
    return lambda > 0 ? moreau_envelope_derivative(g, v, lambda) : evaluate(g, v, 1);
}
double g_curv(const PotentialSpec& g, double lambda, double v) {
    return lambda > 0 ? moreau_envelope_second(g, v, lambda) : evaluate(g, v, 2);
}

struct EnergyOps {
    const PotentialSpec& f;
    const Grid& grid;
    double mu;

    double value(FieldRef u) const {
        return mu > 0 ? energy_phi_envelope(f, grid, u, mu) : energy_phi(f, grid, u);
    }

    // h^dim (A u + f(u)) for mu = 0, h^dim (u - J_mu u)/mu otherwise.
    Field gradient(FieldRef u) const {
        const double meas = grid.cell_measure();
        if (mu > 0) {
            Field w = prox_elliptic(f, grid, u, mu).w;
            return (meas / mu) * (u - w);
        }
        Field out = laplacian_apply(grid, u);
        for (int i = 0; i < u.size(); ++i) out[i] += evaluate(f, u[i], 1);
        return meas * out;
    }

    Field hessian_vec(FieldRef u, FieldRef v) const {
        const double meas = grid.cell_measure();
        if (mu > 0) {
            // d/du of the Yosida map: (v - z)/mu with (I + mu A + mu f'(w)) z = v.
            Field w = prox_elliptic(f, grid, u, mu).w;
            Field fpp(u.size());
            for (int i = 0; i < u.size(); ++i) fpp[i] = evaluate(f, w[i], 2);
            auto apply = [&](const Eigen::VectorXd& x) {
                Field y = x;
                laplacian_accumulate(grid, x, mu, y);
                y.array() += mu * fpp.array() * x.array();
                return y;
            };
            double diag = 1.0 + mu * 2.0 * grid.dim / (grid.h * grid.h);
            auto precond = [&](const Eigen::VectorXd& x) {
                return ((x.array() / (diag + mu * fpp.array()))).matrix().eval();
            };
            Field z = Field::Zero(u.size());
            pcg(apply, precond, Field(v), z, 1e-12, 20 * static_cast<int>(u.size()) + 100);
            return (meas / mu) * (v - z);
        }
        Field out = laplacian_apply(grid, v);
        for (int i = 0; i < u.size(); ++i) out[i] += evaluate(f, u[i], 2) * v[i];
        return meas * out;
    }
};

}  // namespace

WideWeights WideWeights::make(const TimeAxis& time, double eps) {
    WideWeights w;
    const int N = time.N;
    w.a.assign(N + 1, 0.0);
    w.b.assign(N + 1, 0.0);
    w.c.assign(N + 1, 0.0);
    for (int n = 1; n <= N - 1; ++n) w.a[n] = time.tau * exp_weight(time.node(n), eps);
    for (int n = 1; n <= N; ++n) w.b[n] = time.tau * exp_weight(time.midpoint(n), eps);
    for (int n = 0; n <= N; ++n) {
        double trap = (n == 0 || n == N) ? 0.5 : 1.0;
        w.c[n] = time.tau * trap * exp_weight(time.node(n), eps);
    }
    return w;
}

double eval_wide(const Trajectory& traj, const WideParams& params) {
    traj.require_consistent();
    params.validate();
    const int N = traj.time.N;
    const double tau = traj.time.tau;
    const double meas = traj.grid.cell_measure();
    const WideWeights w = WideWeights::make(traj.time, params.eps);
    const EnergyOps energy{params.F, traj.grid, params.reg.mu};

    double total = 0.0;
    if (params.rho > 0) {
        const double inertia_coef = 0.5 * params.eps * params.eps * params.rho * meas;
        for (int n = 1; n <= N - 1; ++n) {
            if (w.a[n] == 0.0) continue;
            Field d2 = (traj.levels[n + 1] - 2.0 * traj.levels[n] + traj.levels[n - 1]) / (tau * tau);
            total += w.a[n] * inertia_coef * d2.squaredNorm();
        }
    }
    const double diss_coef = params.eps * params.nu * meas;
    for (int n = 1; n <= N; ++n) {
        if (w.b[n] == 0.0) continue;
        Field v = (traj.levels[n] - traj.levels[n - 1]) / tau;
        double s = 0.0;
        for (int i = 0; i < v.size(); ++i) s += g_value(params.G, params.reg.lambda, v[i]);
        total += w.b[n] * diss_coef * s;
    }
    for (int n = 0; n <= N; ++n) {
        if (w.c[n] == 0.0) continue;
        total += w.c[n] * energy.value(traj.levels[n]);
    }
    return total;
}

namespace {

// Full-length gradient (indices 0..N); constrained entries are later dropped.
std::vector<Field> grad_full(const Trajectory& traj, const WideParams& params) {
    const int N = traj.time.N;
    const double tau = traj.time.tau;
    const double meas = traj.grid.cell_measure();
    const int sz = traj.grid.node_count();
    const WideWeights w = WideWeights::make(traj.time, params.eps);
    const EnergyOps energy{params.F, traj.grid, params.reg.mu};

    std::vector<Field> grad(N + 1, Field::Zero(sz));
    if (params.rho > 0) {
        const double coef = params.eps * params.eps * params.rho * meas / (tau * tau);
        for (int n = 1; n <= N - 1; ++n) {
            if (w.a[n] == 0.0) continue;
            Field d2 = (traj.levels[n + 1] - 2.0 * traj.levels[n] + traj.levels[n - 1]) / (tau * tau);
            Field contrib = (w.a[n] * coef) * d2;
            grad[n + 1] += contrib;
            grad[n] -= 2.0 * contrib;
            grad[n - 1] += contrib;
        }
    }
    const double diss_coef = params.eps * params.nu * meas / tau;
    for (int n = 1; n <= N; ++n) {
        if (w.b[n] == 0.0) continue;
        Field v = (traj.levels[n] - traj.levels[n - 1]) / tau;
        Field gv(sz);
        for (int i = 0; i < sz; ++i) gv[i] = g_slope(params.G, params.reg.lambda, v[i]);
        Field contrib = (w.b[n] * diss_coef) * gv;
        grad[n] += contrib;
        grad[n - 1] -= contrib;
    }
    for (int n = 0; n <= N; ++n) {
        if (w.c[n] == 0.0) continue;
        grad[n] += w.c[n] * energy.gradient(traj.levels[n]);
    }
    return grad;
}

}  // namespace

std::vector<Field> grad_wide(const Trajectory& traj, const WideParams& params) {
    traj.require_consistent();
    params.validate();
    std::vector<Field> full = grad_full(traj, params);
    const int m0 = params.first_free();
    return std::vector<Field>(full.begin() + m0, full.end());
}

std::vector<Field> hess_vec(const Trajectory& traj, const std::vector<Field>& direction,
                            const WideParams& params) {
    traj.require_consistent();
    params.validate();
    const int N = traj.time.N;
    const int m0 = params.first_free();
    if (static_cast<int>(direction.size()) != N + 1 - m0)
        throw std::invalid_argument("hess_vec: direction size does not match free levels");

    const double tau = traj.time.tau;
    const double meas = traj.grid.cell_measure();
    const int sz = traj.grid.node_count();
    const WideWeights w = WideWeights::make(traj.time, params.eps);
    const EnergyOps energy{params.F, traj.grid, params.reg.mu};

    // Direction extended by zero on the constrained levels.
    std::vector<Field> d(N + 1, Field::Zero(sz));
    for (int k = 0; k < static_cast<int>(direction.size()); ++k) d[m0 + k] = direction[k];

    std::vector<Field> out(N + 1, Field::Zero(sz));
    if (params.rho > 0) {
        const double coef = params.eps * params.eps * params.rho * meas / (tau * tau);
        for (int n = 1; n <= N - 1; ++n) {
            if (w.a[n] == 0.0) continue;
            Field d2 = (d[n + 1] - 2.0 * d[n] + d[n - 1]) / (tau * tau);
            Field contrib = (w.a[n] * coef) * d2;
            out[n + 1] += contrib;
            out[n] -= 2.0 * contrib;
            out[n - 1] += contrib;
        }
    }
    const double diss_coef = params.eps * params.nu * meas / tau;
    for (int n = 1; n <= N; ++n) {
        if (w.b[n] == 0.0) continue;
        Field v = (traj.levels[n] - traj.levels[n - 1]) / tau;
        Field vd = (d[n] - d[n - 1]) / tau;
        Field gpp(sz);
        for (int i = 0; i < sz; ++i) gpp[i] = g_curv(params.G, params.reg.lambda, v[i]);
        Field contrib = (w.b[n] * diss_coef) * (gpp.array() * vd.array()).matrix();
        out[n] += contrib;
        out[n - 1] -= contrib;
    }
    for (int n = 0; n <= N; ++n) {
        if (w.c[n] == 0.0) continue;
        out[n] += w.c[n] * energy.hessian_vec(traj.levels[n], d[n]);
    }
    return std::vector<Field>(out.begin() + m0, out.end());
}

double ElResidual::max_interior_l2(const Grid& g, bool exclude_last_row) const {
    double m = 0.0;
    const size_t count = exclude_last_row && !interior.empty() ? interior.size() - 1
                                                               : interior.size();
    for (size_t k = 0; k < count; ++k) m = std::max(m, norm(g, interior[k], NormKind::L2));
    return m;
}

ElResidual el_residual(const Trajectory& traj, const WideParams& params) {
    traj.require_consistent();
    params.validate();
    const int N = traj.time.N;
    if (N < 5) throw std::invalid_argument("el_residual: needs N >= 5");
    const double tau = traj.time.tau;
    const double eps = params.eps;
    const double meas = traj.grid.cell_measure();
    const int sz = traj.grid.node_count();
    const WideWeights w = WideWeights::make(traj.time, eps);
    const EnergyOps energy{params.F, traj.grid, params.reg.mu};

    ElResidual res;
    res.xi.reserve(N);
    for (int n = 1; n <= N; ++n) {
        Field v = (traj.levels[n] - traj.levels[n - 1]) / tau;
        Field xi(sz);
        for (int i = 0; i < sz; ++i) xi[i] = g_slope(params.G, params.reg.lambda, v[i]);
        res.xi.push_back(std::move(xi));
    }
    res.eta.reserve(N + 1);
    for (int n = 0; n <= N; ++n) res.eta.push_back(energy.gradient(traj.levels[n]) / meas);

    std::vector<Field> grad = grad_full(traj, params);
    res.interior.reserve(N - 2);
    for (int n = 2; n <= N - 1; ++n) {
        double weight = tau * exp_weight(traj.time.node(n), eps) * meas;
        res.interior.push_back(grad[n] / weight);
    }

    // Stationarity at the last two levels, rescaled so the continuum limits
    // are rho u''(T) and eps rho u'''(T) - nu xi(T). The raw difference
    // stencils rho D2 U^{N-1} and eps rho D3 U^{N-1} - nu xi_N agree with
    // these up to O(tau) weight corrections.
    res.terminal_acc = grad[N] * (tau * tau / (eps * eps * w.a[N - 1] * meas));
    res.terminal_jet = (grad[N - 1] + 2.0 * grad[N]) * (-tau / (2.0 * eps * w.a[N - 2] * meas));
    return res;
}

}  // namespace wide
