#pragma once

#include "wide/config.hpp"

#include <iosfwd>

namespace wide {

/// Runs the invariant suite (gradient checks, prox residuals, quadrature
/// identity, convexity probes, operator symmetry) on the given configuration,
/// printing one PASS/FAIL line per check. Returns the failure count.
int run_selftest(const RunConfig& cfg, unsigned long long seed, std::ostream& out);

}  // namespace wide
