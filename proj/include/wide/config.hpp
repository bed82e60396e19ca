#pragma once

#include "wide/harness.hpp"

#include <map>
#include <string>

namespace wide {

/// Named analytic initial-data profiles: sine(k), bump, constant(c).
struct ProfileSpec {
    enum class Kind { Sine, Bump, Constant };
    Kind kind = Kind::Sine;
    int mode = 1;        // sine only
    double amplitude = 0.0;

    Field sample(const Grid& grid) const;
};

/// Thrown on malformed or out-of-range configuration; the message names the
/// offending key and the violated assumption.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct GammaConfig {
    double rho0 = 0.5;
    int halvings = 6;
    double s = 4.0;
};

/// Validated run description assembled from a config file.
struct RunConfig {
    Grid grid = Grid::make(1, 32, 1.0);
    TimeAxis time = TimeAxis::make(1.0, 128);
    WideParams params;
    ProfileSpec u0;
    ProfileSpec u1;
    SweepSpec sweep_spec;
    GammaConfig gamma;
    MinimizeOptions minimize_opts;
    bool has_modal_reference = false;  // sweep.reference = modal requested

    Field sample_u0() const { return u0.sample(grid); }
    Field sample_u1() const { return u1.sample(grid); }
};

/// Parses the flat key-value format: `[section]` headers, `key = value`
/// lines, `#` comments. Unknown keys and violated parameter ranges raise
/// ConfigError naming the key.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

/// The shipped default configuration (also used when selftest runs bare).
std::string default_config_text();

}  // namespace wide
