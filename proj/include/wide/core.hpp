#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace wide {

using Scalar = double;
using Field = Eigen::VectorXd;
using FieldRef = Eigen::Ref<const Eigen::VectorXd>;

/// Uniform Cartesian mesh of interior nodes on (0,L)^dim with homogeneous
/// Dirichlet boundary. Operators treat all boundary values as exactly zero.
struct Grid {
    int dim = 1;          // 1 or 2
    int n_per_axis = 32;  // interior nodes per axis
    double length = 1.0;  // domain edge length L
    double h = 1.0 / 33;  // spacing L/(n_per_axis+1)

    static Grid make(int dim, int n_per_axis, double length = 1.0) {
        if (dim != 1 && dim != 2) throw std::invalid_argument("Grid: dim must be 1 or 2");
        if (n_per_axis < 1) throw std::invalid_argument("Grid: n_per_axis must be >= 1");
        if (!(length > 0)) throw std::invalid_argument("Grid: length must be positive");
        Grid g;
        g.dim = dim;
        g.n_per_axis = n_per_axis;
        g.length = length;
        g.h = length / (n_per_axis + 1);
        return g;
    }

    int node_count() const {
        return dim == 1 ? n_per_axis : n_per_axis * n_per_axis;
    }

    /// h^dim, the cell measure used by all discrete integrals.
    double cell_measure() const { return dim == 1 ? h : h * h; }

    /// Coordinate of interior node i along one axis, x_i = (i+1)h.
    double axis_coord(int i) const { return (i + 1) * h; }
};

/// Uniform partition of [0,T] into N steps; t_0 = 0 and t_N = T exactly.
struct TimeAxis {
    double T = 1.0;
    int N = 128;
    double tau = 1.0 / 128;

    static TimeAxis make(double T, int N) {
        if (!(T > 0)) throw std::invalid_argument("TimeAxis: T must be positive");
        if (N < 2) throw std::invalid_argument("TimeAxis: N must be >= 2");
        TimeAxis t;
        t.T = T;
        t.N = N;
        t.tau = T / N;
        return t;
    }

    double node(int n) const { return n == N ? T : n * tau; }
    double midpoint(int n) const { return (n - 0.5) * tau; }  // t_{n-1/2}
};

/// Space-time field U[0..N], one spatial Field per time level.
struct Trajectory {
    Grid grid;
    TimeAxis time;
    std::vector<Field> levels;  // size N+1

    static Trajectory zeros(const Grid& g, const TimeAxis& t) {
        Trajectory traj;
        traj.grid = g;
        traj.time = t;
        traj.levels.assign(t.N + 1, Field::Zero(g.node_count()));
        return traj;
    }

    int level_count() const { return static_cast<int>(levels.size()); }

    void require_consistent() const {
        if (level_count() != time.N + 1)
            throw std::invalid_argument("Trajectory: level count does not match time axis");
        for (const Field& f : levels)
            if (f.size() != grid.node_count())
                throw std::invalid_argument("Trajectory: field size does not match grid");
    }
};

}  // namespace wide
