#pragma once

#include "wide/core.hpp"

#include <string>

namespace wide {

/// CSV dump, one row per (n, node index, value), with a header row.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

/// Flat binary dump: 32-byte header {dim, n_per_axis, N : int64, T : double}
/// followed by the 8-byte reals of all levels in time-major order.
/// Round-trips bit-exactly.
void write_trajectory_binary(const Trajectory& traj, const std::string& path);

/// Loads a binary dump. The header does not carry the domain length, so the
/// caller supplies it (all experiment configs use the unit domain).
Trajectory read_trajectory_binary(const std::string& path, double length = 1.0);

/// Deterministic formatting used by every CSV/JSON writer: shortest
/// round-trippable decimal form of the double.
std::string format_value(double v);

}  // namespace wide
