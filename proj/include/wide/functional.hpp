#pragma once

#include "wide/core.hpp"
#include "wide/potentials.hpp"

namespace wide {

/// Parameter bundle for the weighted inertia-dissipation-energy functional
///   I(U) = sum_n tau e^{-t_n/eps} (eps^2 rho / 2) |D2 U^n|_L2^2
///        + sum_n tau e^{-t_{n-1/2}/eps} eps nu psi_h(D1 U^n)
///        + sum_n tau w_n e^{-t_n/eps} phi_h(U^n)
/// with psi_h, phi_h replaced by their Moreau-Yosida envelopes when the
/// corresponding level in reg is positive.
///
/// rho = 0 selects the parabolic admissible class (only U^0 constrained);
/// rho > 0 additionally constrains the initial velocity (U^1 eliminated).
struct WideParams {
    double rho = 1.0;
    double eps = 0.1;
    double nu = 1.0;
    RegLevels reg;
    PotentialSpec G = PotentialSpec::power(2.0);
    PotentialSpec F = PotentialSpec::power(2.0);

    void validate() const {
        if (!(rho >= 0)) throw std::invalid_argument("WideParams: rho must be >= 0");
        if (!(eps > 0)) throw std::invalid_argument("WideParams: eps must be positive");
        if (!(nu >= 0)) throw std::invalid_argument("WideParams: nu must be >= 0");
        if (!(reg.lambda >= 0) || !(reg.mu >= 0))
            throw std::invalid_argument("WideParams: regularization levels must be >= 0");
    }

    /// Smallest unconstrained time index: 2 when rho > 0 (U^0, U^1 pinned by
    /// the data), 1 when rho = 0 (only U^0 pinned).
    int first_free() const { return rho > 0 ? 2 : 1; }
};

/// Residual bundle of the discrete Euler-Lagrange system. All components are
/// exact algebraic rearrangements of the stationarity conditions of the
/// discrete functional, so they vanish (to solver tolerance) at a minimizer.
struct ElResidual {
    std::vector<Field> interior;  // indices 2..N-1, pointwise EL residual
    Field terminal_acc;           // discrete rho u''(T)
    Field terminal_jet;           // discrete eps rho u'''(T) - nu xi(T)
    std::vector<Field> xi;        // xi[n-1] = g(D1 U^n), n = 1..N
    std::vector<Field> eta;       // eta[n] = -Dh U^n + f(U^n), n = 0..N

    /// Largest L2 norm over the interior rows. The row at n = N-1 carries the
    /// truncated stencil adjoining the terminal conditions: it vanishes at a
    /// minimizer like every other row, but consistency statements against the
    /// continuum operator hold on n <= N-2 (pass exclude_last_row = true).
    double max_interior_l2(const Grid& g, bool exclude_last_row = false) const;
};

double eval_wide(const Trajectory& traj, const WideParams& params);

/// Exact partial derivatives of eval_wide with respect to the free levels
/// U^n, n = first_free()..N. Entry k corresponds to level first_free()+k.
std::vector<Field> grad_wide(const Trajectory& traj, const WideParams& params);

/// Exact directional derivative of grad_wide along `direction` (same indexing
/// as grad_wide). Requires twice-differentiable densities; use smoothed_power
/// when an exponent other than 2 is in play and no envelope level is set.
std::vector<Field> hess_vec(const Trajectory& traj, const std::vector<Field>& direction,
                            const WideParams& params);

/// Assembles the discrete Euler-Lagrange residual. Interior entries are the
/// gradient stencils divided by the local weight tau e^{-t_n/eps} h^dim; the
/// terminal components are the weight-rescaled stationarity conditions at the
/// last two levels, whose continuum limits are rho u''(T) and
/// eps rho u'''(T) - nu xi(T). Requires N >= 5.
ElResidual el_residual(const Trajectory& traj, const WideParams& params);

/// Time-level weights of the three sums; shared by the functional, the
/// minimizer's preconditioner and the residual assembly.
struct WideWeights {
    std::vector<double> a;  // inertia, valid 1..N-1
    std::vector<double> b;  // dissipation, valid 1..N
    std::vector<double> c;  // energy (trapezoid), valid 0..N

    static WideWeights make(const TimeAxis& time, double eps);
};

}  // namespace wide
