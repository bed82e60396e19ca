#pragma once

#include "wide/functional.hpp"

namespace wide {

struct MinimizeOptions {
    double grad_tol = 1e-9;  // tolerance on the l2 norm of the free gradient
    bool grad_tol_relative = false;  // scale grad_tol by max(1, initial gradient norm)
    int max_newton = 100;
    int max_cg = 0;  // 0 = automatic cap from the unknown count
};

struct MinimizeStats {
    int newton_iterations = 0;
    long cg_iterations = 0;
    double initial_grad_norm = 0.0;
    double final_grad_norm = 0.0;
    double final_value = 0.0;
    bool converged = false;
    bool line_search_failed = false;
    std::vector<double> value_history;  // objective after each accepted step
};

struct MinimizeResult {
    Trajectory traj;
    MinimizeStats stats;
};

/// Damped Newton-CG with Armijo backtracking on the strictly convex discrete
/// functional. Initial guess: constant-in-time extension of u0 plus the ramp
/// t u1 when rho > 0, or `warm_start` when given (its constrained levels are
/// overwritten by the data). Newton curvature substitutes smoothed densities
/// (delta = 1e-6) for pure powers with exponent != 2; gradient and objective
/// always use the exact densities. Returns the best iterate flagged
/// non-converged when max_newton is exhausted.
MinimizeResult minimize_wide(const WideParams& params, const Grid& grid, const TimeAxis& time,
                             FieldRef u0, FieldRef u1, const MinimizeOptions& opts = {},
                             const Trajectory* warm_start = nullptr);

struct StationarityReport {
    double max_interior = 0.0;   // max_n L2 norm of the interior EL residual
    double terminal_acc = 0.0;   // L2 norm
    double terminal_jet = 0.0;   // L2 norm
    double tol = 0.0;
    bool pass = false;
};

/// Checks the Euler-Lagrange system at a (purported) minimizer against tol.
StationarityReport verify_stationarity(const Trajectory& traj, const WideParams& params,
                                       double tol);

/// Stack the free levels into one vector and back; the layout is level-major.
Eigen::VectorXd flatten(const std::vector<Field>& levels);
std::vector<Field> unflatten(const Eigen::VectorXd& x, int levels, int nodes);

}  // namespace wide
