#include "wide/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace wide {

std::string format_value(double v) {
    char buf[40];
    // %.17g round-trips; trim to the shortest representation that still does.
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) return buf;
    }
    return buf;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    traj.require_consistent();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
    out << "n,node,value\n";
    for (int n = 0; n < traj.level_count(); ++n)
        for (int i = 0; i < traj.levels[n].size(); ++i)
            out << n << ',' << i << ',' << format_value(traj.levels[n][i]) << '\n';
    if (!out) throw std::runtime_error("write_trajectory_csv: write failed for " + path);
}

void write_trajectory_binary(const Trajectory& traj, const std::string& path) {
    traj.require_consistent();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_trajectory_binary: cannot open " + path);
    const int64_t dim = traj.grid.dim;
    const int64_t n_per_axis = traj.grid.n_per_axis;
    const int64_t steps = traj.time.N;
    const double T = traj.time.T;
    out.write(reinterpret_cast<const char*>(&dim), 8);
    out.write(reinterpret_cast<const char*>(&n_per_axis), 8);
    out.write(reinterpret_cast<const char*>(&steps), 8);
    out.write(reinterpret_cast<const char*>(&T), 8);
    for (const Field& level : traj.levels)
        out.write(reinterpret_cast<const char*>(level.data()),
                  static_cast<std::streamsize>(level.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write_trajectory_binary: write failed for " + path);
}

Trajectory read_trajectory_binary(const std::string& path, double length) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_trajectory_binary: cannot open " + path);
    int64_t dim = 0, n_per_axis = 0, steps = 0;
    double T = 0.0;
    in.read(reinterpret_cast<char*>(&dim), 8);
    in.read(reinterpret_cast<char*>(&n_per_axis), 8);
    in.read(reinterpret_cast<char*>(&steps), 8);
    in.read(reinterpret_cast<char*>(&T), 8);
    if (!in) throw std::runtime_error("read_trajectory_binary: truncated header in " + path);

    Trajectory traj;
    traj.grid = Grid::make(static_cast<int>(dim), static_cast<int>(n_per_axis), length);
    traj.time = TimeAxis::make(T, static_cast<int>(steps));
    traj.levels.assign(traj.time.N + 1, Field::Zero(traj.grid.node_count()));
    for (Field& level : traj.levels) {
        in.read(reinterpret_cast<char*>(level.data()),
                static_cast<std::streamsize>(level.size() * sizeof(double)));
        if (!in) throw std::runtime_error("read_trajectory_binary: truncated data in " + path);
    }
    return traj;
}

}  // namespace wide
