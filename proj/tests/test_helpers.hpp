#pragma once

#include "wide/functional.hpp"

#include <random>

namespace wide::testing {

inline Field random_field(std::mt19937_64& rng, int size, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    Field f(size);
    for (int i = 0; i < size; ++i) f[i] = dist(rng);
    return f;
}

inline Trajectory random_trajectory(std::mt19937_64& rng, const Grid& g, const TimeAxis& t,
                                    double scale = 0.5) {
    Trajectory traj = Trajectory::zeros(g, t);
    for (auto& level : traj.levels) level = random_field(rng, g.node_count(), scale);
    return traj;
}

/// Worst per-component relative deviation of grad_wide from central finite
/// differences of eval_wide.
inline double grad_fd_error(const Trajectory& traj, const WideParams& params) {
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

}  // namespace wide::testing
