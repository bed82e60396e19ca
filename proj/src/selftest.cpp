#include "wide/selftest.hpp"

#include "wide/discretization.hpp"

#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>

namespace wide {

namespace {

struct Check {
    std::string name;
    std::function<bool(std::string&)> run;
};

Field random_field(std::mt19937_64& rng, int size, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    Field f(size);
    for (int i = 0; i < size; ++i) f[i] = dist(rng);
    return f;
}

Trajectory random_trajectory(std::mt19937_64& rng, const Grid& g, const TimeAxis& t,
                             double scale = 0.5) {
    Trajectory traj = Trajectory::zeros(g, t);
    for (auto& level : traj.levels) level = random_field(rng, g.node_count(), scale);
    return traj;
}

// Central finite differences of eval_wide against grad_wide, worst relative
// component error.
double grad_fd_error(const Trajectory& traj, const WideParams& params) {
    std::vector<Field> grad = grad_wide(traj, params);
    const int m0 = params.first_free();
    double worst = 0.0;
    for (size_t k = 0; k < grad.size(); ++k) {
        for (int i = 0; i < grad[k].size(); ++i) {
            const double step = 1e-6 * (1.0 + std::abs(traj.levels[m0 + k][i]));
            Trajectory up = traj, dn = traj;
            up.levels[m0 + k][i] += step;
            dn.levels[m0 + k][i] -= step;
            double fd = (eval_wide(up, params) - eval_wide(dn, params)) / (2.0 * step);
            double denom = std::max({std::abs(fd), std::abs(grad[k][i]), 1e-8});
            worst = std::max(worst, std::abs(fd - grad[k][i]) / denom);
        }
    }
    return worst;
}

}  // namespace

int run_selftest(const RunConfig& cfg, unsigned long long seed, std::ostream& out) {
    std::mt19937_64 rng(seed);
    std::vector<Check> checks;

    const Grid g1 = Grid::make(1, 8, 1.0);
    const Grid g2 = Grid::make(2, 8, 1.0);
    const TimeAxis tshort = TimeAxis::make(1.0, 12);

    checks.push_back({"laplacian symmetry <Au,v> = <u,Av>", [&](std::string& msg) {
        for (const Grid& g : {g1, g2}) {
            Field u = random_field(rng, g.node_count());
            Field v = random_field(rng, g.node_count());
            double a = laplacian_apply(g, u).dot(v);
            double b = laplacian_apply(g, v).dot(u);
            if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a))) {
                msg = "asymmetry " + std::to_string(a - b);
                return false;
            }
        }
        return true;
    }});

    checks.push_back({"laplacian positivity and H10 norm", [&](std::string& msg) {
        Field v = random_field(rng, g2.node_count());
        double q = laplacian_apply(g2, v).dot(v);
        if (!(q > 0)) {
            msg = "quadratic form not positive";
            return false;
        }
        double h10 = norm(g2, v, NormKind::H10);
        if (std::abs(h10 * h10 - g2.cell_measure() * q) > 1e-10 * (1.0 + q)) {
            msg = "H10 norm mismatch";
            return false;
        }
        return norm(g2, Field::Zero(g2.node_count()), NormKind::H10) == 0.0;
    }});

    checks.push_back({"time derivatives exact on polynomials", [&](std::string& msg) {
        Field w = random_field(rng, g1.node_count());
        Trajectory traj = Trajectory::zeros(g1, tshort);
        for (int n = 0; n <= tshort.N; ++n) {
            double t = tshort.node(n);
            traj.levels[n] = (t * t * t) * w;
        }
        for (int n = 2; n <= tshort.N - 1; ++n) {
            Field d3 = time_derivative(traj, 3, n);
            if ((d3 - 6.0 * w).cwiseAbs().maxCoeff() > 1e-8) {
                msg = "D3 of cubic is not exact at n=" + std::to_string(n);
                return false;
            }
        }
        return true;
    }});

    checks.push_back({"quadrature identity (iterated vs weighted)", [&](std::string& msg) {
        auto gap = [&](int N) {
            TimeAxis time = TimeAxis::make(2.0, N);
            std::vector<double> f(N + 1), running(N + 1, 0.0);
            for (int n = 0; n <= N; ++n) {
                double t = time.node(n);
                f[n] = t * t;
            }
            for (int n = 1; n <= N; ++n)
                running[n] = running[n - 1] + 0.5 * time.tau * (f[n] + f[n - 1]);
            double iterated = weighted_quadrature(running, time, QuadWeight::None);
            double weighted = weighted_quadrature(f, time, QuadWeight::TMinusT);
            return std::abs(iterated - weighted);
        };
        double c = gap(32), f = gap(64);
        double order = std::log2(c / f);
        if (order < 1.9) {
            msg = "observed order " + std::to_string(order);
            return false;
        }
        return true;
    }});

    checks.push_back({"scalar prox residual and nonexpansivity", [&](std::string& msg) {
        std::uniform_real_distribution<double> dist(-4.0, 4.0);
        for (const PotentialSpec& spec :
             {cfg.params.G, PotentialSpec::power(3.0), PotentialSpec::smoothed_power(2.7, 1.3, 1e-3)}) {
            for (int trial = 0; trial < 50; ++trial) {
                double v1 = dist(rng), v2 = dist(rng), lambda = 0.25 + trial * 0.05;
                double w1 = prox_pointwise(spec, v1, lambda);
                double w2 = prox_pointwise(spec, v2, lambda);
                if (std::abs(w1 + lambda * evaluate(spec, w1, 1) - v1) > 1e-12) {
                    msg = "residual above 1e-12";
                    return false;
                }
                if (std::abs(w1 - w2) > std::abs(v1 - v2) + 1e-12) {
                    msg = "prox expansive";
                    return false;
                }
                double lhs = (v1 - w1) / lambda;
                if (std::abs(lhs - evaluate(spec, w1, 1)) > 1e-9 * (1.0 + std::abs(lhs))) {
                    msg = "resolvent identity violated";
                    return false;
                }
            }
        }
        return true;
    }});

    checks.push_back({"envelope domination and monotone recovery", [&](std::string& msg) {
        const PotentialSpec spec = PotentialSpec::power(3.0);
        for (double v : {-2.0, -0.4, 0.7, 1.9}) {
            double prev = -1.0;
            double lambda = 1.0;
            double dens = evaluate(spec, v, 0);
            double slope = evaluate(spec, v, 1);
            for (int k = 0; k < 8; ++k, lambda *= 0.5) {
                double env = moreau_envelope(spec, v, lambda);
                if (env > dens + 1e-14) {
                    msg = "envelope exceeds density";
                    return false;
                }
                if (prev >= 0 && env + 1e-14 < prev) {
                    msg = "envelope not nondecreasing along lambda halving";
                    return false;
                }
                prev = env;
            }
            // psi_lambda = psi - lambda g^2/2 + O(lambda^2)
            if (dens - prev > 0.75 * std::pow(0.5, 7) * slope * slope + 1e-12) {
                msg = "envelope does not recover the density at the O(lambda) rate";
                return false;
            }
        }
        return true;
    }});

    checks.push_back({"elliptic prox residual", [&](std::string& msg) {
        Field u = random_field(rng, g1.node_count(), 1.0);
        EllipticProxResult res = prox_elliptic(PotentialSpec::power(3.0), g1, u, 0.1);
        double bound = 1e-10 * (1.0 + norm(g1, u, NormKind::L2));
        if (res.residual > bound) {
            msg = "residual " + std::to_string(res.residual);
            return false;
        }
        return true;
    }});

    checks.push_back({"gradient matches finite differences", [&](std::string& msg) {
        WideParams params = cfg.params;
        params.eps = 1.0;  // moderate weight spread keeps late-time FD above noise
        params.G = PotentialSpec::power(2.0);
        params.F = PotentialSpec::power(2.0, 0.8);
        Trajectory traj = random_trajectory(rng, g1, tshort);
        double err = grad_fd_error(traj, params);
        if (err > 1e-6) {
            msg = "relative error " + std::to_string(err);
            return false;
        }
        return true;
    }});

    checks.push_back({"hessian symmetry and positive curvature", [&](std::string& msg) {
        WideParams params = cfg.params;
        params.G = PotentialSpec::smoothed_power(3.0, 1.0, 1e-6);
        params.F = PotentialSpec::smoothed_power(2.5, 0.7, 1e-6);
        Trajectory traj = random_trajectory(rng, g1, tshort);
        const int free_levels = tshort.N + 1 - params.first_free();
        auto rand_dir = [&] {
            std::vector<Field> d(free_levels);
            for (auto& f : d) f = random_field(rng, g1.node_count());
            return d;
        };
        for (int trial = 0; trial < 20; ++trial) {
            auto v = rand_dir(), w = rand_dir();
            auto hv = hess_vec(traj, v, params), hw = hess_vec(traj, w, params);
            double a = 0.0, b = 0.0, quad = 0.0;
            for (int k = 0; k < free_levels; ++k) {
                a += hv[k].dot(w[k]);
                b += hw[k].dot(v[k]);
                quad += hv[k].dot(v[k]);
            }
            if (std::abs(a - b) > 1e-9 * (1.0 + std::abs(a))) {
                msg = "asymmetric";
                return false;
            }
            if (quad < -1e-12) {
                msg = "negative curvature";
                return false;
            }
        }
        return true;
    }});

    checks.push_back({"convexity probe of the functional", [&](std::string& msg) {
        WideParams params = cfg.params;
        std::uniform_real_distribution<double> theta_dist(0.05, 0.95);
        for (int trial = 0; trial < 20; ++trial) {
            Trajectory a = random_trajectory(rng, g1, tshort);
            Trajectory b = random_trajectory(rng, g1, tshort);
            double theta = theta_dist(rng);
            Trajectory mix = a;
            for (int n = 0; n <= tshort.N; ++n)
                mix.levels[n] = theta * a.levels[n] + (1.0 - theta) * b.levels[n];
            double lhs = eval_wide(mix, params);
            double rhs = theta * eval_wide(a, params) + (1.0 - theta) * eval_wide(b, params);
            if (lhs > rhs + 1e-12 * (1.0 + std::abs(rhs))) {
                msg = "convexity violated by " + std::to_string(lhs - rhs);
                return false;
            }
        }
        return true;
    }});

    checks.push_back({"envelope ordering at the functional level", [&](std::string& msg) {
        WideParams plain = cfg.params;
        plain.G = PotentialSpec::power(3.0);
        plain.F = PotentialSpec::power(2.0, 0.5);
        WideParams reg = plain;
        reg.reg.lambda = 0.3;
        reg.reg.mu = 0.2;
        Trajectory traj = random_trajectory(rng, g1, tshort);
        double a = eval_wide(traj, reg);
        double b = eval_wide(traj, plain);
        if (a > b + 1e-12 * (1.0 + std::abs(b))) {
            msg = "regularized value exceeds the plain one";
            return false;
        }
        return true;
    }});

    checks.push_back({"density linearity of the functional", [&](std::string& msg) {
        Trajectory traj = random_trajectory(rng, g1, tshort);
        auto with_coeff = [&](double cg, double cf) {
            WideParams p = cfg.params;
            p.G = PotentialSpec::power(cfg.params.G.exponent, cg);
            p.F = PotentialSpec::power(cfg.params.F.exponent, cf);
            return eval_wide(traj, p);
        };
        const double c = 2.75;
        double e0 = with_coeff(0.0, 0.0);
        double e1 = with_coeff(1.0, 1.0);
        double ec = with_coeff(c, c);
        if (std::abs((ec - e0) - c * (e1 - e0)) > 1e-10 * (1.0 + std::abs(ec))) {
            msg = "density contributions not linear in the coefficients";
            return false;
        }
        return true;
    }});

    checks.push_back({"energy ledger nonincreasing budget", [&](std::string& msg) {
        WideParams params = cfg.params;
        params.rho = 1.0;
        params.nu = 1.0;
        Field u0(g1.node_count()), u1 = Field::Zero(g1.node_count());
        for (int i = 0; i < g1.n_per_axis; ++i) u0[i] = std::sin(M_PI * g1.axis_coord(i));
        Trajectory traj = solve_hyperbolic(params, g1, TimeAxis::make(1.0, 64), u0, u1);
        EnergyLedger ledger = energy_ledger(traj, params);
        if (!ledger.budget_nonincreasing) {
            msg = "E + D increased beyond slack";
            return false;
        }
        return true;
    }});

    int failures = 0;
    for (const Check& c : checks) {
        std::string msg;
        bool ok = false;
        try {
            ok = c.run(msg);
        } catch (const std::exception& e) {
            msg = e.what();
        }
        out << (ok ? "PASS" : "FAIL") << "  " << c.name;
        if (!ok && !msg.empty()) out << "  (" << msg << ")";
        out << '\n';
        if (!ok) ++failures;
    }
    out << (failures == 0 ? "selftest: all checks passed\n"
                          : "selftest: " + std::to_string(failures) + " check(s) failed\n");
    return failures;
}

}  // namespace wide
