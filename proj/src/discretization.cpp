#include "wide/discretization.hpp"

#include <cmath>

namespace wide {

void laplacian_accumulate(const Grid& grid, FieldRef field, double scale, Field& out) {
    const int n = grid.n_per_axis;
    const double inv_h2 = 1.0 / (grid.h * grid.h);
    if (field.size() != grid.node_count())
        throw std::invalid_argument("laplacian: field size does not match grid");
    if (out.size() != field.size())
        throw std::invalid_argument("laplacian: output size mismatch");

    if (grid.dim == 1) {
        for (int i = 0; i < n; ++i) {
            double left = i > 0 ? field[i - 1] : 0.0;
            double right = i + 1 < n ? field[i + 1] : 0.0;
            out[i] += scale * (2.0 * field[i] - left - right) * inv_h2;
        }
        return;
    }
    // 2D five-point stencil, row-major over (i, j) -> i*n + j.
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int k = i * n + j;
            double south = i > 0 ? field[k - n] : 0.0;
            double north = i + 1 < n ? field[k + n] : 0.0;
            double west = j > 0 ? field[k - 1] : 0.0;
            double east = j + 1 < n ? field[k + 1] : 0.0;
            out[k] += scale * (4.0 * field[k] - south - north - west - east) * inv_h2;
        }
    }
}

Field laplacian_apply(const Grid& grid, FieldRef field) {
    Field out = Field::Zero(field.size());
    laplacian_accumulate(grid, field, 1.0, out);
    return out;
}

double norm(const Grid& grid, FieldRef field, NormKind kind, double p) {
    if (field.size() != grid.node_count())
        throw std::invalid_argument("norm: field size does not match grid");
    const double meas = grid.cell_measure();
    switch (kind) {
        case NormKind::L2:
            return std::sqrt(meas * field.squaredNorm());
        case NormKind::Lp: {
            if (!(p >= 2.0 && p < 4.0)) throw std::invalid_argument("norm: Lp needs p in [2,4)");
            double s = field.array().abs().pow(p).sum();
            return std::pow(meas * s, 1.0 / p);
        }
        case NormKind::H10: {
            Field au = laplacian_apply(grid, field);
            double q = au.dot(field);
            return std::sqrt(std::max(0.0, meas * q));
        }
    }
    throw std::logic_error("norm: unknown kind");
}

Field time_derivative(const Trajectory& traj, int order, int n) {
    traj.require_consistent();
    const int N = traj.time.N;
    const double tau = traj.time.tau;
    switch (order) {
        case 1:
            if (n < 1 || n > N) throw std::out_of_range("time_derivative: order 1 needs n in [1,N]");
            return (traj.levels[n] - traj.levels[n - 1]) / tau;
        case 2:
            if (n < 1 || n > N - 1)
                throw std::out_of_range("time_derivative: order 2 needs n in [1,N-1]");
            return (traj.levels[n + 1] - 2.0 * traj.levels[n] + traj.levels[n - 1]) / (tau * tau);
        case 3: {
            if (n < 2 || n > N - 1)
                throw std::out_of_range("time_derivative: order 3 needs n in [2,N-1]");
            Field d2a = time_derivative(traj, 2, n);
            Field d2b = time_derivative(traj, 2, n - 1);
            return (d2a - d2b) / tau;
        }
        default:
            throw std::invalid_argument("time_derivative: order must be 1, 2 or 3");
    }
}

double weighted_quadrature(const std::vector<double>& samples, const TimeAxis& time,
                           QuadWeight weight, double eps) {
    if (static_cast<int>(samples.size()) != time.N + 1)
        throw std::invalid_argument("weighted_quadrature: samples.size() must be N+1");
    if (weight == QuadWeight::ExpDecay && !(eps > 0))
        throw std::invalid_argument("weighted_quadrature: eps must be positive");
    double total = 0.0;
    for (int n = 0; n <= time.N; ++n) {
        double trap = (n == 0 || n == time.N) ? 0.5 : 1.0;
        double t = time.node(n);
        double w = 1.0;
        if (weight == QuadWeight::TMinusT) w = time.T - t;
        if (weight == QuadWeight::ExpDecay) {
            w = exp_weight(t, eps);
            if (w == 0.0) continue;
        }
        total += time.tau * trap * w * samples[n];
    }
    return total;
}

}  // namespace wide
