#include "wide/config.hpp"
#include "wide/io.hpp"
#include "wide/selftest.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

wide::RunConfig load_config(const std::string& path) {
    if (path.empty()) return wide::parse_config_text(wide::default_config_text());
    return wide::parse_config(path);
}

void ensure_out_dir(const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        throw std::runtime_error("cannot create output directory: " + out_dir);
}

int cmd_minimize(const wide::RunConfig& cfg, const std::string& out_dir) {
    wide::MinimizeResult res = wide::minimize_wide(cfg.params, cfg.grid, cfg.time,
                                                   cfg.sample_u0(), cfg.sample_u1(),
                                                   cfg.minimize_opts);
    wide::write_trajectory_csv(res.traj, out_dir + "/trajectory.csv");
    wide::write_trajectory_binary(res.traj, out_dir + "/trajectory.bin");

    double tol = std::max(1e-8, 100.0 * cfg.minimize_opts.grad_tol);
    wide::StationarityReport rep = wide::verify_stationarity(res.traj, cfg.params, tol);
    json j;
    j["converged"] = res.stats.converged;
    j["newton_iterations"] = res.stats.newton_iterations;
    j["cg_iterations"] = res.stats.cg_iterations;
    j["final_gradient_norm"] = res.stats.final_grad_norm;
    j["final_value"] = res.stats.final_value;
    j["stationarity"] = {{"max_interior", rep.max_interior},
                         {"terminal_acc", rep.terminal_acc},
                         {"terminal_jet", rep.terminal_jet},
                         {"tol", rep.tol},
                         {"pass", rep.pass}};
    std::ofstream out(out_dir + "/stationarity.json");
    out << j.dump(2) << '\n';

    std::cout << (res.stats.converged ? "minimize: converged" : "minimize: NOT converged")
              << ", value " << res.stats.final_value << ", |grad| "
              << res.stats.final_grad_norm << "\n"
              << "stationarity: max interior " << rep.max_interior << ", terminal acc "
              << rep.terminal_acc << ", terminal jet " << rep.terminal_jet << " ("
              << (rep.pass ? "pass" : "fail") << " at tol " << rep.tol << ")\n";
    return res.stats.converged ? 0 : 1;
}

int cmd_timestep(const wide::RunConfig& cfg, const std::string& out_dir) {
    wide::Trajectory traj;
    if (cfg.params.rho > 0) {
        traj = wide::solve_hyperbolic(cfg.params, cfg.grid, cfg.time, cfg.sample_u0(),
                                      cfg.sample_u1());
    } else {
        traj = wide::solve_parabolic(cfg.params, cfg.grid, cfg.time, cfg.sample_u0());
    }
    wide::write_trajectory_csv(traj, out_dir + "/trajectory.csv");
    wide::write_trajectory_binary(traj, out_dir + "/trajectory.bin");

    wide::EnergyLedger ledger = wide::energy_ledger(traj, cfg.params);
    std::ofstream out(out_dir + "/ledger.csv");
    out << "n,energy,dissipated,residual\n";
    for (const auto& row : ledger.rows)
        out << row.n << ',' << wide::format_value(row.energy) << ','
            << wide::format_value(row.dissipated) << ',' << wide::format_value(row.residual)
            << '\n';
    std::cout << "timestep: " << (cfg.params.rho > 0 ? "hyperbolic" : "parabolic")
              << " run done; max |ledger residual| " << ledger.max_abs_residual
              << (ledger.budget_nonincreasing ? " (budget nonincreasing)" : " (budget INCREASED)")
              << "\n";
    return 0;
}

int cmd_sweep(const wide::RunConfig& cfg, const std::string& out_dir, int threads) {
    wide::SweepSpec spec = cfg.sweep_spec;
    spec.threads = threads;
    wide::ConvergenceTable table = wide::sweep(spec, cfg.grid, cfg.time, cfg.sample_u0(),
                                               cfg.sample_u1());
    table.write_csv(out_dir + "/sweep.csv");
    table.write_json(out_dir + "/sweep.json");
    bool all_ok = true;
    for (const auto& row : table.rows) all_ok = all_ok && row.solver_ok;
    std::cout << "sweep: " << table.rows.size() << " points written to " << out_dir
              << "/sweep.{csv,json}" << (all_ok ? "" : " (with solver failures)") << "\n";
    return all_ok ? 0 : 1;
}

int cmd_gamma(const wide::RunConfig& cfg, const std::string& out_dir) {
    wide::WideParams base = cfg.params;
    base.rho = 0.0;
    wide::Trajectory u = wide::solve_parabolic(base, cfg.grid, cfg.time, cfg.sample_u0());
    wide::GammaTable table = wide::gamma_sweep(u, cfg.gamma.rho0, cfg.gamma.halvings,
                                               cfg.gamma.s, cfg.params.eps, cfg.sample_u1(),
                                               cfg.params);
    table.write_csv(out_dir + "/gamma.csv");
    table.write_json(out_dir + "/gamma.json");
    std::cout << "gamma: " << table.rows.size() << " rho points, gap slope " << table.slope
              << " per halving\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"space-time variational solver for damped nonlinear waves"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    int threads = 1;
    unsigned long long seed = 0;
    app.add_option("--config", config_path, "configuration file (defaults built in)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads for sweep points")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "seed for randomized probes");

    auto* sub_minimize = app.add_subcommand("minimize", "minimize the trajectory functional");
    auto* sub_timestep = app.add_subcommand("timestep", "run the causal reference stepper");
    auto* sub_sweep = app.add_subcommand("sweep", "run the configured limit sweep");
    auto* sub_gamma = app.add_subcommand("gamma", "run the recovery-sequence experiment");
    auto* sub_selftest = app.add_subcommand("selftest", "run the invariant suite");

    CLI11_PARSE(app, argc, argv);

    wide::RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (sub_selftest->parsed()) return wide::run_selftest(cfg, seed, std::cout) == 0 ? 0 : 1;
        ensure_out_dir(out_dir);
        if (sub_minimize->parsed()) return cmd_minimize(cfg, out_dir);
        if (sub_timestep->parsed()) return cmd_timestep(cfg, out_dir);
        if (sub_sweep->parsed()) return cmd_sweep(cfg, out_dir, threads);
        if (sub_gamma->parsed()) return cmd_gamma(cfg, out_dir);
    } catch (const wide::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
