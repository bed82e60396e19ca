#pragma once

#include "wide/functional.hpp"

namespace wide {

/// Fully implicit stepping for the damped wave problem: each new level solves
///   rho (U^{n+1} - 2U^n + U^{n-1})/tau^2 + nu g((U^{n+1}-U^n)/tau)
///   + (-Delta_h) U^{n+1} + f(U^{n+1}) = 0
/// by Newton-CG to residual 1e-10, with start-up U^1 = U^0 + tau u1.
/// On Newton failure the step is retried once with two half steps.
Trajectory solve_hyperbolic(const WideParams& params, const Grid& grid, const TimeAxis& time,
                            FieldRef u0, FieldRef u1);

/// Implicit stepping for the doubly nonlinear parabolic problem:
///   nu g((U^{n+1}-U^n)/tau) + (-Delta_h) U^{n+1} + f(U^{n+1}) = 0.
Trajectory solve_parabolic(const WideParams& params, const Grid& grid, const TimeAxis& time,
                           FieldRef u0);

/// Analytic single-mode solution for the linear sub-case (d = 1, p = 2,
/// f(u) = c u): u(t,x) = a(t) sin(k pi x) with
/// rho a'' + nu a' + (k^2 pi^2 + c) a = 0, a(0) = amp0, a'(0) = amp1.
/// For rho = 0 the first-order decay a(t) = amp0 exp(-(k^2 pi^2 + c) t / nu).
Trajectory modal_reference(double rho, double nu, double c, const Grid& grid,
                           const TimeAxis& time, int mode, double amp0, double amp1);

/// The scalar amplitude used by modal_reference.
double modal_amplitude(double rho, double nu, double omega, double amp0, double amp1, double t);

struct EnergyLedger {
    struct Row {
        int n = 0;
        double energy = 0.0;       // E_n = rho/2 |D1 U^n|^2 + 1/2 |U^n|_H10^2 + sum F
        double dissipated = 0.0;   // D_n, cumulative
        double residual = 0.0;     // L_n = E_n + D_n - E_0
    };
    double initial_energy = 0.0;
    std::vector<Row> rows;  // n = 1..N
    double max_abs_residual = 0.0;
    bool budget_nonincreasing = true;  // E_n + D_n nonincreasing up to slack
    int sign_changes = 0;              // sign pattern of E_{n+1} - E_n
};

/// Per-step energy bookkeeping; the initial velocity is recovered from the
/// start-up convention D1 U^1 = u1 shared by the stepper and the minimizer.
EnergyLedger energy_ledger(const Trajectory& traj, const WideParams& params,
                           double slack = 1e-9);

/// Count of CG probes with nonpositive curvature seen by the steppers in this
/// thread; stays zero for the convex densities.
long stepper_spd_violations();

}  // namespace wide
