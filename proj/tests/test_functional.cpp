#include "wide/functional.hpp"

#include "wide/discretization.hpp"
#include "test_helpers.hpp"

#include <doctest.h>
#include <Eigen/Eigenvalues>

#include <cmath>

using namespace wide;
using wide::testing::grad_fd_error;
using wide::testing::random_field;
using wide::testing::random_trajectory;

namespace {

WideParams linear_params(double rho, double eps, double nu, double f_coeff) {
    WideParams p;
    p.rho = rho;
    p.eps = eps;
    p.nu = nu;
    p.G = PotentialSpec::power(2.0);
    p.F = PotentialSpec::power(2.0, f_coeff);
    return p;
}

}  // namespace

TEST_CASE("zero trajectory with vanishing densities evaluates to zero") {
    Grid g = Grid::make(1, 6, 1.0);
    TimeAxis t = TimeAxis::make(1.0, 10);
    Trajectory traj = Trajectory::zeros(g, t);
    WideParams p = linear_params(1.0, 0.3, 1.0, 1.0);
    CHECK(eval_wide(traj, p) == 0.0);
}

TEST_CASE("constant trajectory: only the energy sum survives") {
    Grid g = Grid::make(1, 7, 1.0);
    TimeAxis t = TimeAxis::make(1.5, 24);
    WideParams p = linear_params(1.0, 0.4, 2.0, 0.6);
    std::mt19937_64 rng(31);
    Field u0 = random_field(rng, g.node_count());
    Trajectory traj = Trajectory::zeros(g, t);
    for (auto& level : traj.levels) level = u0;

    std::vector<double> ones(t.N + 1, 1.0);
    double weight_mass = weighted_quadrature(ones, t, QuadWeight::ExpDecay, p.eps);
    double expected = energy_phi(p.F, g, u0) * weight_mass;
    CHECK(eval_wide(traj, p) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("single-node ramp reproduces the hand-computed three-term sum") {
    // rho = 0, one spatial node, N = 2: every term is written out by hand.
    Grid g = Grid::make(1, 1, 1.0);  // h = 1/2
    TimeAxis t = TimeAxis::make(1.0, 2);
    const double eps = 0.3, nu = 1.2, cf = 0.7, slope = 0.8, tau = 0.5, h = 0.5;
    WideParams p = linear_params(0.0, eps, nu, cf);

    Trajectory traj = Trajectory::zeros(g, t);
    for (int n = 0; n <= 2; ++n) traj.levels[n][0] = slope * t.node(n);

    auto phi = [&](double u) { return 0.5 * h * (2.0 * u / (h * h)) * u + h * cf * u * u / 2.0; };
    double hand = 0.0;
    for (int n = 1; n <= 2; ++n)  // dissipation at midpoint weights, G(slope) = slope^2/2
        hand += tau * std::exp(-((n - 0.5) * tau) / eps) * eps * nu * h * slope * slope / 2.0;
    for (int n = 0; n <= 2; ++n) {
        double trap = (n == 0 || n == 2) ? 0.5 : 1.0;
        hand += tau * trap * std::exp(-t.node(n) / eps) * phi(slope * t.node(n));
    }
    CHECK(eval_wide(traj, p) == doctest::Approx(hand).epsilon(1e-14));
}

TEST_CASE("gradient matches central finite differences across the density matrix") {
    Grid g = Grid::make(1, 8, 1.0);
    TimeAxis t = TimeAxis::make(1.0, 16);
    std::mt19937_64 rng(41);
    for (double rho : {0.0, 1.0}) {
        for (int variant = 0; variant < 2; ++variant) {
            WideParams p;
            p.rho = rho;
            p.eps = 1.0;
            p.nu = 1.3;
            p.G = variant == 0 ? PotentialSpec::power(2.0)
                               : PotentialSpec::smoothed_power(3.0, 1.0, 1e-6);
            p.F = variant == 0 ? PotentialSpec::power(2.0, 0.8)
                               : PotentialSpec::smoothed_power(3.0, 0.5, 1e-4);
            Trajectory traj = random_trajectory(rng, g, t);
            CHECK(grad_fd_error(traj, p) < 1e-6);
        }
    }
}

TEST_CASE("gradient with active envelopes matches finite differences") {
    Grid g = Grid::make(1, 5, 1.0);
    TimeAxis t = TimeAxis::make(1.0, 8);
    std::mt19937_64 rng(43);
    WideParams p;
    p.rho = 1.0;
    p.eps = 1.0;
    p.nu = 0.9;
    p.G = PotentialSpec::power(3.0);
    p.F = PotentialSpec::power(3.0, 0.6);
    p.reg.lambda = 0.25;
    p.reg.mu = 0.15;
    Trajectory traj = random_trajectory(rng, g, t);
    CHECK(grad_fd_error(traj, p) < 2e-6);
}

TEST_CASE("quadratic case: gradient is affine in the trajectory") {
    Grid g = Grid::make(1, 6, 1.0);
    TimeAxis t = TimeAxis::make(1.0, 12);
    WideParams p = linear_params(1.0, 0.5, 1.0, 1.0);
    std::mt19937_64 rng(47);
    Trajectory a = random_trajectory(rng, g, t);
    Trajectory b = random_trajectory(rng, g, t);
    Trajectory sum = a;
    for (int n = 0; n <= t.N; ++n) sum.levels[n] = a.levels[n] + b.levels[n];
    Trajectory zero = Trajectory::zeros(g, t);

    auto ga = grad_wide(a, p), gb = grad_wide(b, p), gs = grad_wide(sum, p),
         g0 = grad_wide(zero, p);
    for (size_t k = 0; k < ga.size(); ++k)
        CHECK((gs[k] - ga[k] - gb[k] + g0[k]).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("hessian-vector products: constant in quadratic case, symmetric, PSD, FD-consistent") {
    Grid g = Grid::make(1, 6, 1.0);
    TimeAxis t = TimeAxis::make(1.0, 12);
    std::mt19937_64 rng(53);

    WideParams quad = linear_params(1.0, 0.6, 1.0, 0.9);
    Trajectory t1 = random_trajectory(rng, g, t);
    Trajectory t2 = random_trajectory(rng, g, t);
    const int free_levels = t.N + 1 - quad.first_free();
    std::vector<Field> dir(free_levels);
    for (auto& f : dir) f = random_field(rng, g.node_count());
    auto h1 = hess_vec(t1, dir, quad), h2 = hess_vec(t2, dir, quad);
    for (int k = 0; k < free_levels; ++k)
        CHECK((h1[k] - h2[k]).cwiseAbs().maxCoeff() < 1e-11);  // state-independent

    WideParams smooth = quad;
    smooth.G = PotentialSpec::smoothed_power(3.0, 1.0, 1e-6);
    smooth.F = PotentialSpec::smoothed_power(2.5, 0.7, 1e-6);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Field> v(free_levels), w(free_levels);
        for (auto& f : v) f = random_field(rng, g.node_count());
        for (auto& f : w) f = random_field(rng, g.node_count());
        auto hv = hess_vec(t1, v, smooth);
        auto hw = hess_vec(t1, w, smooth);
        double vw = 0.0, wv = 0.0, vv = 0.0;
        for (int k = 0; k < free_levels; ++k) {
            vw += hv[k].dot(w[k]);
            wv += hw[k].dot(v[k]);
            vv += hv[k].dot(v[k]);
        }
        CHECK(vw == doctest::Approx(wv).epsilon(1e-10));
        CHECK(vv >= -1e-12);
    }

    // directional finite differences of the gradient
    const double s = 1e-6;
    std::vector<Field> dirs(free_levels);
    for (auto& f : dirs) f = random_field(rng, g.node_count());
    Trajectory shifted = t1;
    for (int k = 0; k < free_levels; ++k) shifted.levels[smooth.first_free() + k] += s * dirs[k];
    auto gplus = grad_wide(shifted, smooth);
    auto gbase = grad_wide(t1, smooth);
    auto hd = hess_vec(t1, dirs, smooth);
    for (int k = 0; k < free_levels; ++k) {
        Field fd = (gplus[k] - gbase[k]) / s;
        double scale = std::max(1e-8, hd[k].cwiseAbs().maxCoeff());
        CHECK((fd - hd[k]).cwiseAbs().maxCoeff() / scale < 1e-5);
    }
}

TEST_CASE("convexity probe and envelope ordering of the functional") {
    Grid g = Grid::make(1, 6, 1.0);
    TimeAxis t = TimeAxis::make(1.0, 10);
    std::mt19937_64 rng(59);
    WideParams p;
    p.rho = 1.0;
    p.eps = 0.35;
    p.nu = 1.1;
    p.G = PotentialSpec::power(3.0);
    p.F = PotentialSpec::power(2.0, 0.8);
    std::uniform_real_distribution<double> theta_dist(0.1, 0.9);
    for (int trial = 0; trial < 25; ++trial) {
        Trajectory a = random_trajectory(rng, g, t);
        Trajectory b = random_trajectory(rng, g, t);
        double theta = theta_dist(rng);
        Trajectory mix = a;
        for (int n = 0; n <= t.N; ++n)
            mix.levels[n] = theta * a.levels[n] + (1 - theta) * b.levels[n];
        double lhs = eval_wide(mix, p);
        double rhs = theta * eval_wide(a, p) + (1 - theta) * eval_wide(b, p);
        CHECK(lhs <= rhs + 1e-12 * (1.0 + std::abs(rhs)));
    }

    WideParams reg = p;
    reg.reg.lambda = 0.4;
    reg.reg.mu = 0.25;
    Trajectory traj = random_trajectory(rng, g, t);
    CHECK(eval_wide(traj, reg) <= eval_wide(traj, p) + 1e-12);
}

TEST_CASE("functional is affine in each density coefficient") {
    Grid g = Grid::make(1, 5, 1.0);
    TimeAxis t = TimeAxis::make(1.0, 9);
    std::mt19937_64 rng(61);
    Trajectory traj = random_trajectory(rng, g, t);
    auto value = [&](double cg, double cf, double nu) {
        WideParams p;
        p.rho = 0.7;
        p.eps = 0.5;
        p.nu = nu;
        p.G = PotentialSpec::power(3.0, cg);
        p.F = PotentialSpec::power(2.0, cf);
        return eval_wide(traj, p);
    };
    const double c = 3.2;
    // scaling the G,F coefficients scales their contributions linearly
    double e0 = value(0.0, 0.0, 1.0), e1 = value(1.0, 1.0, 1.0), ec = value(c, c, 1.0);
    CHECK(ec - e0 == doctest::Approx(c * (e1 - e0)).epsilon(1e-12));
    // the same contribution scales identically through nu
    double n2 = value(1.0, 0.0, 2.0), n1 = value(1.0, 0.0, 1.0), n0 = value(0.0, 0.0, 1.0);
    CHECK(n2 - n0 == doctest::Approx(2.0 * (n1 - n0)).epsilon(1e-12));
}

TEST_CASE("el_residual of the zero trajectory vanishes identically") {
    Grid g = Grid::make(1, 5, 1.0);
    TimeAxis t = TimeAxis::make(1.0, 8);
    WideParams p = linear_params(1.0, 0.4, 1.0, 1.0);
    Trajectory traj = Trajectory::zeros(g, t);
    ElResidual r = el_residual(traj, p);
    CHECK(r.max_interior_l2(g) == 0.0);
    CHECK(r.terminal_acc.cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.terminal_jet.cwiseAbs().maxCoeff() == 0.0);
    for (const Field& xi : r.xi) CHECK(xi.cwiseAbs().maxCoeff() == 0.0);
    for (const Field& eta : r.eta) CHECK(eta.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(el_residual(Trajectory::zeros(g, TimeAxis::make(1.0, 4)), p),
                    std::invalid_argument);
}

TEST_CASE("manufactured linear solution: interior residual decays under refinement") {
    // Exact mode amplitude a(t) = Re exp(s t) where s is a root of the
    // quartic symbol rho eps^2 s^4 - 2 rho eps s^3 + (rho - eps nu) s^2
    // + nu s + omega = 0 with omega = (k pi)^2 + c_F.
    const double rho = 1.0, eps = 0.4, nu = 1.0, cf = 1.0;
    const double omega = M_PI * M_PI + cf;
    Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
    const double a4 = rho * eps * eps;
    const double coeffs[4] = {omega / a4, nu / a4, (rho - eps * nu) / a4, -2.0 * rho * eps / a4};
    for (int i = 0; i < 3; ++i) companion(i + 1, i) = 1.0;
    for (int i = 0; i < 4; ++i) companion(i, 3) = -coeffs[i];
    Eigen::EigenSolver<Eigen::Matrix4d> es(companion);
    std::complex<double> s = es.eigenvalues()[0];
    for (int i = 1; i < 4; ++i)
        if (std::abs(es.eigenvalues()[i]) < std::abs(s)) s = es.eigenvalues()[i];

    WideParams p = linear_params(rho, eps, nu, cf);
    auto residual_at = [&](int n_nodes, int steps) {
        Grid g = Grid::make(1, n_nodes, 1.0);
        TimeAxis t = TimeAxis::make(1.0, steps);
        Trajectory traj = Trajectory::zeros(g, t);
        for (int n = 0; n <= steps; ++n) {
            double amp = std::real(std::exp(s * t.node(n)));
            for (int i = 0; i < n_nodes; ++i)
                traj.levels[n][i] = amp * std::sin(M_PI * g.axis_coord(i));
        }
        // the consistent interior rows; the last row belongs to the terminal
        // structure and only vanishes at minimizers
        return el_residual(traj, p).max_interior_l2(g, true);
    };

    double e0 = residual_at(9, 16);
    double e1 = residual_at(19, 32);
    double e2 = residual_at(39, 64);
    CHECK(std::log2(e0 / e1) > 0.9);
    CHECK(std::log2(e1 / e2) > 0.9);
}
