#include "wide/potentials.hpp"

#include "wide/cg.hpp"
#include "wide/discretization.hpp"

#include <cmath>
#include <sstream>

namespace wide {

PotentialSpec PotentialSpec::power(double exponent, double coefficient) {
    if (!(exponent >= 1.0)) throw std::invalid_argument("PotentialSpec: exponent must be >= 1");
    if (!(coefficient >= 0.0)) throw std::invalid_argument("PotentialSpec: coefficient must be >= 0");
    return PotentialSpec{PotentialKind::Power, exponent, coefficient, 0.0};
}

PotentialSpec PotentialSpec::smoothed_power(double exponent, double coefficient, double delta) {
    if (!(exponent >= 1.0)) throw std::invalid_argument("PotentialSpec: exponent must be >= 1");
    if (!(coefficient >= 0.0)) throw std::invalid_argument("PotentialSpec: coefficient must be >= 0");
    if (!(delta >= 0.0)) throw std::invalid_argument("PotentialSpec: smoothing must be >= 0");
    return PotentialSpec{PotentialKind::SmoothedPower, exponent, coefficient, delta};
}

double evaluate(const PotentialSpec& spec, double v, int order) {
    const double q = spec.exponent;
    const double c = spec.coefficient;
    if (spec.kind == PotentialKind::Power) {
        const double av = std::abs(v);
        switch (order) {
            case 0:
                return c * std::pow(av, q) / q;
            case 1:
                if (av == 0.0) return 0.0;
                return c * std::pow(av, q - 2.0) * v;
            case 2:
                if (av == 0.0) {
                    if (q > 2.0) return 0.0;
                    if (q == 2.0) return c;
                    throw std::domain_error(
                        "evaluate: second derivative of |v|^q with q < 2 blows up at v = 0");
                }
                return c * (q - 1.0) * std::pow(av, q - 2.0);
            default:
                throw std::invalid_argument("evaluate: order must be 0, 1 or 2");
        }
    }
    // SmoothedPower: c * ((v^2 + d^2)^(q/2) - d^q) / q
    const double d = spec.smoothing;
    const double m = v * v + d * d;
    switch (order) {
        case 0:
            return c * (std::pow(m, q / 2.0) - std::pow(d, q)) / q;
        case 1:
            return c * v * std::pow(m, q / 2.0 - 1.0);
        case 2:
            if (m == 0.0) return q == 2.0 ? c : (q > 2.0 ? 0.0 : std::numeric_limits<double>::infinity());
            return c * std::pow(m, q / 2.0 - 2.0) * ((q - 1.0) * v * v + d * d);
        default:
            throw std::invalid_argument("evaluate: order must be 0, 1 or 2");
    }
}

double prox_pointwise(const PotentialSpec& spec, double v, double lambda) {
    if (!(lambda > 0)) throw std::invalid_argument("prox_pointwise: lambda must be positive");
    if (v == 0.0) return 0.0;

    // Residual R(w) = w + lambda g(w) - v is strictly increasing and brackets
    // a root on [min(0,v), max(0,v)].
    auto residual = [&](double w) { return w + lambda * evaluate(spec, w, 1) - v; };
    double lo = std::min(0.0, v);
    double hi = std::max(0.0, v);
    double w = v / (1.0 + lambda);  // exact for the quadratic density
    if (w < lo || w > hi) w = 0.5 * (lo + hi);

    const double tol = 1e-13;
    for (int it = 0; it < 200; ++it) {
        double r = residual(w);
        if (std::abs(r) <= tol) return w;
        if (r > 0)
            hi = w;
        else
            lo = w;
        double slope;
        try {
            slope = 1.0 + lambda * evaluate(spec, w, 2);
        } catch (const std::domain_error&) {
            slope = 0.0;  // force bisection
        }
        double w_next = slope > 0 ? w - r / slope : w;
        if (!(w_next > lo && w_next < hi)) w_next = 0.5 * (lo + hi);
        w = w_next;
    }
    if (std::abs(residual(w)) <= 1e-12) return w;
    std::ostringstream msg;
    msg << "prox_pointwise: no convergence (v=" << v << ", lambda=" << lambda
        << ", residual=" << residual(w) << ")";
    throw std::runtime_error(msg.str());
}

double moreau_envelope(const PotentialSpec& spec, double v, double lambda) {
    if (!(lambda > 0)) throw std::invalid_argument("moreau_envelope: level must be positive");
    double w = prox_pointwise(spec, v, lambda);
    double d = v - w;
    return d * d / (2.0 * lambda) + evaluate(spec, w, 0);
}

double moreau_envelope_derivative(const PotentialSpec& spec, double v, double lambda) {
    double w = prox_pointwise(spec, v, lambda);
    return (v - w) / lambda;
}

double moreau_envelope_second(const PotentialSpec& spec, double v, double lambda) {
    double w = prox_pointwise(spec, v, lambda);
    double gp = evaluate(spec, w, 2);
    return gp / (1.0 + lambda * gp);
}

EllipticProxResult prox_elliptic(const PotentialSpec& f_spec, const Grid& grid, FieldRef u,
                                 double mu) {
    if (!(mu > 0)) throw std::invalid_argument("prox_elliptic: mu must be positive");
    if (u.size() != grid.node_count())
        throw std::invalid_argument("prox_elliptic: field size does not match grid");

    const int sz = grid.node_count();
    const double u_l2 = norm(grid, u, NormKind::L2);
    const double target = 1e-11 * (1.0 + u_l2);

    auto assemble_residual = [&](const Field& w) {
        Field r = w - u;
        laplacian_accumulate(grid, w, mu, r);
        for (int i = 0; i < sz; ++i) r[i] += mu * evaluate(f_spec, w[i], 1);
        return r;
    };

    EllipticProxResult out;
    out.w = u;  // resolvent contracts toward 0; u is a sound starting point
    for (int it = 0; it < 60; ++it) {
        out.newton_iterations = it;
        Field r = assemble_residual(out.w);
        out.residual = norm(grid, r, NormKind::L2);
        if (out.residual <= target) return out;

        Field fpp(sz);
        for (int i = 0; i < sz; ++i) fpp[i] = evaluate(f_spec, out.w[i], 2);
        auto apply = [&](const Eigen::VectorXd& x) {
            Field y = x;
            laplacian_accumulate(grid, x, mu, y);
            y.array() += mu * fpp.array() * x.array();
            return y;
        };
        Field jac_diag = (1.0 + mu * fpp.array() +
                          mu * 2.0 * grid.dim / (grid.h * grid.h))
                             .matrix();
        auto precond = [&](const Eigen::VectorXd& x) {
            return (x.array() / jac_diag.array()).matrix().eval();
        };
        Field step = Field::Zero(sz);
        CgResult cg = pcg(apply, precond, (-r).eval(), step, 1e-12, 20 * sz + 100);
        if (!cg.converged) {
            std::ostringstream msg;
            msg << "prox_elliptic: CG stalled (relative residual " << cg.residual << ")";
            throw std::runtime_error(msg.str());
        }
        double t = 1.0;
        Field trial = out.w + step;
        // plain backtracking on the residual norm; the monotone structure makes
        // full steps acceptable in practice
        for (int ls = 0; ls < 30; ++ls) {
            if (norm(grid, assemble_residual(trial), NormKind::L2) < out.residual) break;
            t *= 0.5;
            trial = out.w + t * step;
        }
        out.w = trial;
    }
    Field r = assemble_residual(out.w);
    out.residual = norm(grid, r, NormKind::L2);
    if (out.residual <= 1e-10 * (1.0 + u_l2)) return out;
    std::ostringstream msg;
    msg << "prox_elliptic: Newton did not converge (residual " << out.residual << ")";
    throw std::runtime_error(msg.str());
}

double energy_phi(const PotentialSpec& f_spec, const Grid& grid, FieldRef u) {
    const double meas = grid.cell_measure();
    Field au = laplacian_apply(grid, u);
    double quad = 0.5 * meas * au.dot(u);
    double dens = 0.0;
    for (int i = 0; i < u.size(); ++i) dens += evaluate(f_spec, u[i], 0);
    return quad + meas * dens;
}

double energy_phi_envelope(const PotentialSpec& f_spec, const Grid& grid, FieldRef u, double mu) {
    EllipticProxResult prox = prox_elliptic(f_spec, grid, u, mu);
    const double meas = grid.cell_measure();
    double d2 = meas * (u - prox.w).squaredNorm();
    return d2 / (2.0 * mu) + energy_phi(f_spec, grid, prox.w);
}

double dissipation_psi(const PotentialSpec& g_spec, const Grid& grid, FieldRef v, double lambda) {
    double s = 0.0;
    if (lambda > 0) {
        for (int i = 0; i < v.size(); ++i) s += moreau_envelope(g_spec, v[i], lambda);
    } else {
        for (int i = 0; i < v.size(); ++i) s += evaluate(g_spec, v[i], 0);
    }
    return grid.cell_measure() * s;
}

}  // namespace wide
