#pragma once

#include "wide/core.hpp"

namespace wide {

enum class PotentialKind { Power, SmoothedPower };

/// Convex scalar density c*|v|^q/q (Power) or its twice-differentiable
/// regularization c*((v^2+d^2)^(q/2) - d^q)/q (SmoothedPower). Serves both the
/// dissipation density G (exponent p) and the energy density F (exponent r).
struct PotentialSpec {
    PotentialKind kind = PotentialKind::Power;
    double exponent = 2.0;
    double coefficient = 1.0;
    double smoothing = 0.0;  // delta, SmoothedPower only

    static PotentialSpec power(double exponent, double coefficient = 1.0);
    static PotentialSpec smoothed_power(double exponent, double coefficient = 1.0,
                                        double delta = 1e-6);
};

/// Moreau-Yosida levels; zero disables regularization for that slot.
struct RegLevels {
    double lambda = 0.0;  // dissipation envelope level
    double mu = 0.0;      // energy envelope level
};

/// Density (order 0), derivative (order 1) or second derivative (order 2).
/// Throws std::domain_error for order 2 of a pure power with exponent < 2 at
/// v = 0, where the second derivative blows up.
double evaluate(const PotentialSpec& spec, double v, int order);

/// Unique root w of w + lambda * g(w) = v (g monotone), by safeguarded Newton
/// with bisection fallback on [min(0,v), max(0,v)]. Residual <= 1e-12.
double prox_pointwise(const PotentialSpec& spec, double v, double lambda);

/// Scalar Moreau envelope value (v - w)^2 / (2 lambda) + G(w), w = prox.
double moreau_envelope(const PotentialSpec& spec, double v, double lambda);

/// Derivative of the scalar envelope, (v - prox(v)) / lambda = g(prox(v)).
double moreau_envelope_derivative(const PotentialSpec& spec, double v, double lambda);

/// Second derivative g'(w) / (1 + lambda g'(w)) at w = prox(v).
double moreau_envelope_second(const PotentialSpec& spec, double v, double lambda);

struct EllipticProxResult {
    Field w;
    double residual = 0.0;  // |w + mu(-Dh)w + mu f(w) - u|_L2
    int newton_iterations = 0;
};

/// Resolvent of the energy functional: solves w + mu (-Delta_h) w + mu f(w) = u
/// by Newton with a CG inner solve (Jacobian I + mu(-Delta_h) + mu f'(w) is SPD).
/// Residual <= 1e-10 (1 + |u|_L2).
EllipticProxResult prox_elliptic(const PotentialSpec& f_spec, const Grid& grid, FieldRef u,
                                 double mu);

/// Discrete energy phi_h(u) = 1/2 |u|_H10^2 + h^dim sum F(u_x).
double energy_phi(const PotentialSpec& f_spec, const Grid& grid, FieldRef u);

/// Envelope of the energy functional, h^dim |u-w|^2/(2 mu) + phi_h(w) with
/// w the elliptic resolvent.
double energy_phi_envelope(const PotentialSpec& f_spec, const Grid& grid, FieldRef u, double mu);

/// Nodewise envelope of the dissipation functional: h^dim sum G_lambda(v_x).
double dissipation_psi(const PotentialSpec& g_spec, const Grid& grid, FieldRef v, double lambda);

}  // namespace wide
