#pragma once

#include "wide/core.hpp"

namespace wide {

/// y = (-Delta_h) x with homogeneous Dirichlet data: three-point stencil in
/// 1D, five-point in 2D. Symmetric positive definite on interior fields.
Field laplacian_apply(const Grid& grid, FieldRef field);

/// In-place variant: out += scale * (-Delta_h) x. Avoids temporaries in the
/// matrix-free solver loops.
void laplacian_accumulate(const Grid& grid, FieldRef field, double scale, Field& out);

enum class NormKind { L2, Lp, H10 };

/// Discrete norms over interior nodes: L2 = sqrt(h^dim sum v^2),
/// Lp = (h^dim sum |v|^p)^(1/p) for p in [2,4), H10 = sqrt(h^dim <-Delta_h v, v>).
double norm(const Grid& grid, FieldRef field, NormKind kind, double p = 2.0);

/// Backward first difference, centered second difference, and the one-sided
/// third difference D3 U^n = (D2 U^n - D2 U^{n-1}) / tau.
/// Valid index ranges: order 1 needs n in [1,N], order 2 n in [1,N-1],
/// order 3 n in [2,N-1].
Field time_derivative(const Trajectory& traj, int order, int n);

enum class QuadWeight { None, TMinusT, ExpDecay };

/// Trapezoidal quadrature of node samples with the weight evaluated at the
/// nodes: sum_n tau w_n weight(t_n) samples[n], end weights 1/2.
/// eps is used only by the ExpDecay weight; exp(-t/eps) underflowing below
/// 1e-300 is clamped to zero and the term skipped.
double weighted_quadrature(const std::vector<double>& samples, const TimeAxis& time,
                           QuadWeight weight, double eps = 1.0);

/// exp(-t/eps) with the underflow clamp shared by all weighted sums.
inline double exp_weight(double t, double eps) {
    double a = -t / eps;
    if (a < -690.0) return 0.0;  // below ~1e-300
    return std::exp(a);
}

}  // namespace wide
