#include "wide/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace wide {

namespace {

std::string format_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

Field ProfileSpec::sample(const Grid& grid) const {
    Field f(grid.node_count());
    const double k = mode * M_PI / grid.length;
    auto axis = [&](int i) { return grid.axis_coord(i); };
    auto profile1d = [&](double x) {
        switch (kind) {
            case Kind::Sine:
                return amplitude * std::sin(k * x);
            case Kind::Bump: {
                double s = 2.0 * x / grid.length - 1.0;  // (-1,1) across the domain
                return s * s < 1.0 ? amplitude * std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
            }
            case Kind::Constant:
                return amplitude;
        }
        return 0.0;
    };
    if (grid.dim == 1) {
        for (int i = 0; i < grid.n_per_axis; ++i) f[i] = profile1d(axis(i));
        return f;
    }
    for (int i = 0; i < grid.n_per_axis; ++i)
        for (int j = 0; j < grid.n_per_axis; ++j) {
            double v;
            if (kind == Kind::Constant) {
                v = amplitude;
            } else if (kind == Kind::Sine) {
                v = amplitude * std::sin(k * axis(i)) * std::sin(k * axis(j));
            } else {
                double a = profile1d(axis(i)) * profile1d(axis(j));
                v = amplitude != 0.0 ? a / amplitude : 0.0;  // keep peak at amplitude
            }
            f[i * grid.n_per_axis + j] = v;
        }
    return f;
}

namespace {

struct KeyValueMap {
    std::map<std::string, std::string> values;
    mutable std::set<std::string> consumed;

    bool has(const std::string& key) const { return values.count(key) > 0; }

    std::string get(const std::string& key, const std::string& fallback) const {
        auto it = values.find(key);
        if (it == values.end()) return fallback;
        consumed.insert(key);
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values.find(key);
        if (it == values.end()) return fallback;
        consumed.insert(key);
        try {
            size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(key + " = " + it->second + ": not a number");
        }
    }

    int get_int(const std::string& key, int fallback) const {
        double v = get_double(key, fallback);
        if (v != std::floor(v)) throw ConfigError(key + ": expected an integer");
        return static_cast<int>(v);
    }

    std::vector<double> get_list(const std::string& key,
                                 const std::vector<double>& fallback) const {
        auto it = values.find(key);
        if (it == values.end()) return fallback;
        consumed.insert(key);
        std::vector<double> out;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto b = item.find_first_not_of(" \t");
            auto e = item.find_last_not_of(" \t");
            if (b == std::string::npos) continue;
            try {
                out.push_back(std::stod(item.substr(b, e - b + 1)));
            } catch (const std::exception&) {
                throw ConfigError(key + ": malformed list entry '" + item + "'");
            }
        }
        return out;
    }

    void check_all_consumed() const {
        for (const auto& [key, value] : values)
            if (!consumed.count(key)) throw ConfigError("unknown configuration key: " + key);
    }
};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

KeyValueMap tokenize(const std::string& text) {
    KeyValueMap kv;
    std::string section;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        kv.values[section.empty() ? key : section + "." + key] = value;
    }
    return kv;
}

PotentialSpec parse_potential(const KeyValueMap& kv, const std::string& prefix,
                              const std::string& exp_key, double def_exponent) {
    std::string kind = kv.get(prefix + ".kind", "power");
    double exponent = kv.get_double(prefix + "." + exp_key, def_exponent);
    double c = kv.get_double(prefix + ".c", 1.0);
    double delta = kv.get_double(prefix + ".delta", kind == "smoothed_power" ? 1e-6 : 0.0);
    if (!(c >= 0)) throw ConfigError(prefix + ".c = " + format_number(c) + ": violates \"c >= 0\"");
    if (!(delta >= 0)) throw ConfigError(prefix + ".delta: violates \"delta >= 0\"");
    if (kind == "power") return PotentialSpec::power(exponent, c);
    if (kind == "smoothed_power") return PotentialSpec::smoothed_power(exponent, c, delta);
    throw ConfigError(prefix + ".kind = " + kind + ": expected power | smoothed_power");
}

ProfileSpec parse_profile(const KeyValueMap& kv, const std::string& prefix, double def_amp) {
    ProfileSpec p;
    std::string kind = kv.get(prefix + ".profile", prefix == "data.u0" ? "sine" : "constant");
    if (kind == "sine")
        p.kind = ProfileSpec::Kind::Sine;
    else if (kind == "bump")
        p.kind = ProfileSpec::Kind::Bump;
    else if (kind == "constant")
        p.kind = ProfileSpec::Kind::Constant;
    else
        throw ConfigError(prefix + ".profile = " + kind + ": expected sine | bump | constant");
    p.mode = kv.get_int(prefix + ".k", 1);
    if (p.mode < 1) throw ConfigError(prefix + ".k: violates \"k >= 1\"");
    p.amplitude = kv.get_double(prefix + ".amp", def_amp);
    return p;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    KeyValueMap kv = tokenize(text);
    RunConfig cfg;

    int dim = kv.get_int("grid.dim", 1);
    int n = kv.get_int("grid.n", 32);
    double length = kv.get_double("grid.length", 1.0);
    if (dim != 1 && dim != 2) throw ConfigError("grid.dim: violates \"d in {1,2}\"");
    if (n < 1) throw ConfigError("grid.n: violates \"n >= 1\"");
    if (!(length > 0)) throw ConfigError("grid.length: violates \"L > 0\"");
    cfg.grid = Grid::make(dim, n, length);

    double T = kv.get_double("time.T", 1.0);
    int N = kv.get_int("time.N", 128);
    if (!(T > 0)) throw ConfigError("time.T: violates \"T > 0\"");
    if (N < 2) throw ConfigError("time.N: violates \"N >= 2\"");
    cfg.time = TimeAxis::make(T, N);

    cfg.params.rho = kv.get_double("params.rho", 1.0);
    cfg.params.eps = kv.get_double("params.eps", 0.1);
    cfg.params.nu = kv.get_double("params.nu", 1.0);
    cfg.params.reg.lambda = kv.get_double("params.lambda", 0.0);
    cfg.params.reg.mu = kv.get_double("params.mu", 0.0);
    if (!(cfg.params.rho >= 0)) throw ConfigError("params.rho: violates \"rho >= 0\"");
    if (!(cfg.params.eps > 0)) throw ConfigError("params.eps: violates \"eps > 0\"");
    if (!(cfg.params.nu > 0)) throw ConfigError("params.nu: violates \"nu > 0\"");
    if (!(cfg.params.reg.lambda >= 0)) throw ConfigError("params.lambda: violates \"lambda >= 0\"");
    if (!(cfg.params.reg.mu >= 0)) throw ConfigError("params.mu: violates \"mu >= 0\"");

    cfg.params.G = parse_potential(kv, "potentials.G", "p", 2.0);
    cfg.params.F = parse_potential(kv, "potentials.F", "r", 2.0);
    const double p = cfg.params.G.exponent;
    const double r = cfg.params.F.exponent;
    if (!(p >= 2.0 && p < 4.0))
        throw ConfigError("potentials.G.p = " + format_number(p) + ": violates \"2 <= p < 4\"");
    if (!(r >= 1.0 && r <= p))
        throw ConfigError("potentials.F.r = " + format_number(r) + ": violates \"r in [1,p]\"");

    cfg.u0 = parse_profile(kv, "data.u0", 1.0);
    cfg.u1 = parse_profile(kv, "data.u1", 0.0);

    std::string mode = kv.get("sweep.mode", "causal");
    if (mode == "causal")
        cfg.sweep_spec.mode = SweepMode::Causal;
    else if (mode == "viscous")
        cfg.sweep_spec.mode = SweepMode::Viscous;
    else if (mode == "diagonal")
        cfg.sweep_spec.mode = SweepMode::Diagonal;
    else
        throw ConfigError("sweep.mode = " + mode + ": expected causal | viscous | diagonal");
    cfg.sweep_spec.eps_list = kv.get_list("sweep.eps_list", {0.2, 0.1, 0.05, 0.025});
    cfg.sweep_spec.rho_list = kv.get_list("sweep.rho_list", {1e-1, 1e-2, 1e-3, 1e-4});

    std::string norms = kv.get("sweep.norms", "L2L2,LpV,L2X");
    cfg.sweep_spec.norms.clear();
    std::stringstream ns(norms);
    std::string item;
    while (std::getline(ns, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        if (item == "L2L2")
            cfg.sweep_spec.norms.push_back(ErrorNorm::L2L2);
        else if (item == "LpV")
            cfg.sweep_spec.norms.push_back(ErrorNorm::LpV);
        else if (item == "L2X")
            cfg.sweep_spec.norms.push_back(ErrorNorm::L2X);
        else
            throw ConfigError("sweep.norms: unknown norm '" + item + "'");
    }

    std::string reference = kv.get("sweep.reference", "auto");
    if (reference == "modal" ||
        (reference == "auto" && cfg.grid.dim == 1 && p == 2.0 && r == 2.0 &&
         cfg.params.G.coefficient == 1.0 && cfg.u0.kind == ProfileSpec::Kind::Sine &&
         (cfg.u1.kind == ProfileSpec::Kind::Sine ? cfg.u1.mode == cfg.u0.mode
                                                 : cfg.u1.amplitude == 0.0))) {
        if (cfg.grid.dim != 1 || p != 2.0 || r != 2.0 || cfg.u0.kind != ProfileSpec::Kind::Sine)
            throw ConfigError(
                "sweep.reference = modal: needs d = 1, p = 2, r = 2 and sine initial data");
        ModalSpec modal;
        modal.mode = cfg.u0.mode;
        modal.amp0 = cfg.u0.amplitude;
        modal.amp1 = cfg.u1.kind == ProfileSpec::Kind::Sine ? cfg.u1.amplitude : 0.0;
        modal.c = cfg.params.F.coefficient;
        cfg.sweep_spec.modal = modal;
        cfg.has_modal_reference = true;
    } else if (reference != "auto" && reference != "stepper") {
        throw ConfigError("sweep.reference = " + reference + ": expected auto | modal | stepper");
    }

    cfg.gamma.rho0 = kv.get_double("gamma.rho0", 0.5);
    cfg.gamma.halvings = kv.get_int("gamma.halvings", 6);
    cfg.gamma.s = kv.get_double("gamma.s", 4.0);
    if (!(cfg.gamma.s > 3.0)) throw ConfigError("gamma.s: violates \"s > 3\"");
    if (!(cfg.gamma.rho0 > 0)) throw ConfigError("gamma.rho0: violates \"rho0 > 0\"");
    if (cfg.gamma.halvings < 1) throw ConfigError("gamma.halvings: violates \"halvings >= 1\"");

    cfg.minimize_opts.grad_tol = kv.get_double("solver.grad_tol", 1e-9);
    cfg.minimize_opts.grad_tol_relative =
        kv.get_int("solver.grad_tol_relative", 1) != 0;
    cfg.minimize_opts.max_newton = kv.get_int("solver.max_newton", 100);
    cfg.minimize_opts.max_cg = kv.get_int("solver.max_cg", 0);
    if (!(cfg.minimize_opts.grad_tol > 0)) throw ConfigError("solver.grad_tol: violates \"> 0\"");
    cfg.sweep_spec.minimize_opts = cfg.minimize_opts;
    cfg.sweep_spec.params = cfg.params;

    kv.check_all_consumed();
    cfg.params.validate();
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string default_config_text() {
    return R"(# default experiment: linear sub-case on the unit interval
[grid]
dim = 1
n = 32
length = 1.0

[time]
T = 1.0
N = 128

[params]
rho = 1.0
eps = 0.1
nu = 1.0
lambda = 0.0
mu = 0.0

[potentials]
G.kind = power
G.p = 2.0
G.c = 1.0
F.kind = power
F.r = 2.0
F.c = 1.0

[data]
u0.profile = sine
u0.k = 1
u0.amp = 1.0
u1.profile = constant
u1.amp = 0.0

[sweep]
mode = causal
eps_list = 0.2, 0.1, 0.05, 0.025
rho_list = 0.1, 0.01, 0.001, 0.0001
norms = L2L2, LpV, L2X
reference = auto

[gamma]
rho0 = 0.5
halvings = 6
s = 4.0

[solver]
grad_tol = 1e-9
grad_tol_relative = 1
max_newton = 100
max_cg = 0
)";
}

}  // namespace wide
