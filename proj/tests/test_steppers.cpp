#include "wide/steppers.hpp"

#include "wide/discretization.hpp"
#include "wide/harness.hpp"

#include <doctest.h>

#include <cmath>

using namespace wide;

namespace {

Field sine_field(const Grid& g, int mode, double amp) {
    Field f(g.node_count());
    for (int i = 0; i < g.n_per_axis; ++i)
        f[i] = amp * std::sin(mode * M_PI * g.axis_coord(i));
    return f;
}

WideParams make_params(double rho, double nu, const PotentialSpec& G, const PotentialSpec& F) {
    WideParams p;
    p.rho = rho;
    p.eps = 0.1;  // unused by the steppers
    p.nu = nu;
    p.G = G;
    p.F = F;
    return p;
}

}  // namespace

TEST_CASE("zero data keeps both steppers at zero") {
    Grid g = Grid::make(1, 8, 1.0);
    TimeAxis t = TimeAxis::make(1.0, 16);
    WideParams p = make_params(1.0, 1.0, PotentialSpec::power(3.0), PotentialSpec::power(3.0));
    Field zero = Field::Zero(g.node_count());
    Trajectory hyp = solve_hyperbolic(p, g, t, zero, zero);
    for (const Field& level : hyp.levels) CHECK(level.cwiseAbs().maxCoeff() == 0.0);
    Trajectory par = solve_parabolic(p, g, t, zero);
    for (const Field& level : par.levels) CHECK(level.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("undamped wave matches cos(pi t) sin(pi x) at first order") {
    // nu = 0 and f = 0: the pure wave mode
    WideParams p = make_params(1.0, 0.0, PotentialSpec::power(2.0), PotentialSpec::power(2.0, 0.0));
    auto error_at = [&](int nodes, int steps) {
        Grid g = Grid::make(1, nodes, 1.0);
        TimeAxis t = TimeAxis::make(1.0, steps);
        Trajectory traj = solve_hyperbolic(p, g, t, sine_field(g, 1, 1.0),
                                           Field::Zero(g.node_count()));
        Trajectory ref = modal_reference(1.0, 0.0, 0.0, g, t, 1, 1.0, 0.0);
        return trajectory_error(traj, ref, ErrorNorm::L2L2, 2.0);
    };
    double e0 = error_at(15, 32), e1 = error_at(31, 64), e2 = error_at(63, 128);
    CHECK(std::log2(e0 / e1) > 0.9);
    CHECK(std::log2(e1 / e2) > 0.9);
}

TEST_CASE("damped linear wave converges to the modal oracle") {
    WideParams p = make_params(1.0, 1.0, PotentialSpec::power(2.0), PotentialSpec::power(2.0, 0.8));
    auto error_at = [&](int nodes, int steps) {
        Grid g = Grid::make(1, nodes, 1.0);
        TimeAxis t = TimeAxis::make(1.0, steps);
        Trajectory traj = solve_hyperbolic(p, g, t, sine_field(g, 1, 1.0),
                                           sine_field(g, 1, 0.5));
        Trajectory ref = modal_reference(1.0, 1.0, 0.8, g, t, 1, 1.0, 0.5);
        return trajectory_error(traj, ref, ErrorNorm::L2L2, 2.0);
    };
    double e0 = error_at(15, 32), e1 = error_at(31, 64), e2 = error_at(63, 128);
    CHECK(std::log2(e0 / e1) > 0.9);
    CHECK(std::log2(e1 / e2) > 0.9);
}

TEST_CASE("parabolic linear step follows the implicit-Euler recurrence exactly") {
    Grid g = Grid::make(1, 9, 1.0);
    TimeAxis t = TimeAxis::make(1.0, 20);
    const double nu = 2.0;
    WideParams p = make_params(0.0, nu, PotentialSpec::power(2.0), PotentialSpec::power(2.0, 0.0));
    Trajectory traj = solve_parabolic(p, g, t, sine_field(g, 1, 1.0));

    double lambda_h = (2.0 - 2.0 * std::cos(M_PI * g.h)) / (g.h * g.h);
    double a = 1.0;
    Field shape = sine_field(g, 1, 1.0);
    for (int n = 1; n <= t.N; ++n) {
        a = a / (1.0 + t.tau * lambda_h / nu);
        CHECK((traj.levels[n] - a * shape).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("nonlinear parabolic step satisfies its residual by substitution") {
    Grid g = Grid::make(1, 8, 1.0);
    TimeAxis t = TimeAxis::make(1.0, 16);
    WideParams p = make_params(0.0, 1.0, PotentialSpec::power(3.0), PotentialSpec::power(3.0, 0.7));
    Trajectory traj = solve_parabolic(p, g, t, sine_field(g, 1, 1.0));
    for (int n = 0; n < t.N; ++n) {
        Field v = (traj.levels[n + 1] - traj.levels[n]) / t.tau;
        Field r = laplacian_apply(g, traj.levels[n + 1]);
        for (int i = 0; i < r.size(); ++i)
            r[i] += p.nu * evaluate(p.G, v[i], 1) + evaluate(p.F, traj.levels[n + 1][i], 1);
        CHECK(norm(g, r, NormKind::L2) <= 1e-10);
    }
}

TEST_CASE("modal amplitude: frozen cases and an RK4 oracle") {
    // undamped: a(t) = cos(pi t)
    CHECK(modal_amplitude(1.0, 0.0, M_PI * M_PI, 1.0, 0.0, 0.37) ==
          doctest::Approx(std::cos(M_PI * 0.37)).epsilon(1e-12));
    // rho = 0: first-order decay
    CHECK(modal_amplitude(0.0, 2.0, 5.0, 1.2, 0.0, 0.5) ==
          doctest::Approx(1.2 * std::exp(-5.0 * 0.5 / 2.0)).epsilon(1e-12));

    // critically damped flavor (nu = 2 pi, omega = pi^2): check against RK4
    const double rho = 1.0, nu = 2.0 * M_PI, omega = M_PI * M_PI;
    double y = 1.0, v = 0.3;
    const int steps = 200000;
    const double dt = 1.0 / steps;
    auto acc = [&](double yy, double vv) { return (-nu * vv - omega * yy) / rho; };
    for (int i = 0; i < steps; ++i) {
        double k1y = v, k1v = acc(y, v);
        double k2y = v + 0.5 * dt * k1v, k2v = acc(y + 0.5 * dt * k1y, v + 0.5 * dt * k1v);
        double k3y = v + 0.5 * dt * k2v, k3v = acc(y + 0.5 * dt * k2y, v + 0.5 * dt * k2v);
        double k4y = v + dt * k3v, k4v = acc(y + dt * k3y, v + dt * k3v);
        y += dt / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
        v += dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
    CHECK(modal_amplitude(rho, nu, omega, 1.0, 0.3, 1.0) == doctest::Approx(y).epsilon(1e-8));

    // overdamped branch cross-check
    double y2 = 0.7, v2 = -0.1;
    const double nu2 = 9.0, om2 = 4.0;
    auto acc2 = [&](double yy, double vv) { return -nu2 * vv - om2 * yy; };
    for (int i = 0; i < steps; ++i) {
        double k1y = v2, k1v = acc2(y2, v2);
        double k2y = v2 + 0.5 * dt * k1v, k2v = acc2(y2 + 0.5 * dt * k1y, v2 + 0.5 * dt * k1v);
        double k3y = v2 + 0.5 * dt * k2v, k3v = acc2(y2 + 0.5 * dt * k2y, v2 + 0.5 * dt * k2v);
        double k4y = v2 + dt * k3v, k4v = acc2(y2 + dt * k3y, v2 + dt * k3v);
        y2 += dt / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
        v2 += dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
    CHECK(modal_amplitude(1.0, nu2, om2, 0.7, -0.1, 1.0) == doctest::Approx(y2).epsilon(1e-8));
}

TEST_CASE("energy ledger: zero data, first-order residual, nonincreasing budget") {
    WideParams p = make_params(1.0, 1.0, PotentialSpec::power(2.0), PotentialSpec::power(2.0, 0.5));
    Grid g = Grid::make(1, 15, 1.0);

    Trajectory zero_traj = Trajectory::zeros(g, TimeAxis::make(1.0, 32));
    EnergyLedger zl = energy_ledger(zero_traj, p);
    CHECK(zl.max_abs_residual == 0.0);
    CHECK(zl.initial_energy == 0.0);

    auto ledger_at = [&](int steps) {
        TimeAxis t = TimeAxis::make(1.0, steps);
        Trajectory traj = solve_hyperbolic(p, g, t, sine_field(g, 1, 1.0),
                                           sine_field(g, 1, -0.3));
        return energy_ledger(traj, p);
    };
    double r64 = ledger_at(64).max_abs_residual;
    double r128 = ledger_at(128).max_abs_residual;
    double r256 = ledger_at(256).max_abs_residual;
    CHECK(std::log2(r64 / r128) > 0.9);
    CHECK(std::log2(r128 / r256) > 0.9);

    for (int steps : {64, 256}) CHECK(ledger_at(steps).budget_nonincreasing);

    // parabolic flavor: elastic + potential energy decreases monotonically
    WideParams pp = make_params(0.0, 1.0, PotentialSpec::power(3.0), PotentialSpec::power(3.0, 0.4));
    TimeAxis t = TimeAxis::make(1.0, 64);
    Trajectory par = solve_parabolic(pp, g, t, sine_field(g, 1, 1.0));
    EnergyLedger pl = energy_ledger(par, pp);
    CHECK(pl.budget_nonincreasing);
    for (size_t i = 1; i < pl.rows.size(); ++i)
        CHECK(pl.rows[i].energy <= pl.rows[i - 1].energy + 1e-9);
}

TEST_CASE("hyperbolic stepper approaches the parabolic one as rho vanishes") {
    Grid g = Grid::make(1, 15, 1.0);
    TimeAxis t = TimeAxis::make(1.0, 64);
    Field u0 = sine_field(g, 1, 0.5);
    Field u1 = Field::Zero(g.node_count());
    for (const PotentialSpec& G : {PotentialSpec::power(2.0), PotentialSpec::power(3.0)}) {
        WideParams p = make_params(1.0, 1.0, G, PotentialSpec::power(2.0, 0.5));
        WideParams ppar = p;
        ppar.rho = 0.0;
        Trajectory par = solve_parabolic(ppar, g, t, u0);
        double prev = 1e300;
        for (double rho : {1e-1, 1e-2, 1e-3}) {
            WideParams ph = p;
            ph.rho = rho;
            Trajectory hyp = solve_hyperbolic(ph, g, t, u0, u1);
            double gap = trajectory_error(hyp, par, ErrorNorm::LpV, p.G.exponent);
            CHECK(gap < prev);
            prev = gap;
        }
    }
}

TEST_CASE("no nonpositive curvature is seen on the CG probes") {
    CHECK(stepper_spd_violations() == 0);
}

TEST_CASE("stepper rejects inconsistent inputs") {
    Grid g = Grid::make(1, 6, 1.0);
    TimeAxis t = TimeAxis::make(1.0, 8);
    WideParams p = make_params(0.0, 1.0, PotentialSpec::power(2.0), PotentialSpec::power(2.0));
    Field zero = Field::Zero(g.node_count());
    CHECK_THROWS_AS(solve_hyperbolic(p, g, t, zero, zero), std::invalid_argument);  // rho = 0
    WideParams bad = make_params(1.0, 0.0, PotentialSpec::power(2.0), PotentialSpec::power(2.0));
    CHECK_THROWS_AS(solve_parabolic(bad, g, t, zero), std::invalid_argument);  // nu = 0
}
