#include "wide/harness.hpp"

#include "wide/discretization.hpp"
#include "wide/io.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

namespace wide {

void run_indexed(int count, int threads, const std::function<void(int)>& job) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void SweepSpec::validate() const {
    params.validate();
    auto strictly_decreasing = [](const std::vector<double>& v) {
        for (size_t i = 1; i < v.size(); ++i)
            if (!(v[i] < v[i - 1])) return false;
        return true;
    };
    if (mode == SweepMode::Causal) {
        if (eps_list.size() < 1) throw std::invalid_argument("sweep: causal mode needs eps_list");
        if (!strictly_decreasing(eps_list))
            throw std::invalid_argument("sweep: eps_list must be strictly decreasing");
    }
    if (mode == SweepMode::Viscous) {
        if (rho_list.size() < 1) throw std::invalid_argument("sweep: viscous mode needs rho_list");
        if (!strictly_decreasing(rho_list))
            throw std::invalid_argument("sweep: rho_list must be strictly decreasing");
    }
    if (mode == SweepMode::Diagonal) {
        if (eps_list.size() != rho_list.size() || eps_list.empty())
            throw std::invalid_argument("sweep: diagonal mode pairs eps_list with rho_list");
        if (!strictly_decreasing(eps_list) || !strictly_decreasing(rho_list))
            throw std::invalid_argument("sweep: diagonal lists must be strictly decreasing");
    }
}

double AprioriDiagnostics::value(int k) const {
    switch (k) {
        case 0: return inertia;
        case 1: return dissipation_integral;
        case 2: return energy_integral;
        case 3: return terminal_velocity_gap;
        case 4: return sup_v_norm;
    }
    throw std::out_of_range("AprioriDiagnostics: index");
}

const char* AprioriDiagnostics::name(int k) {
    static const char* names[5] = {"eps_rho_d2_sq", "int_psi", "int_phi", "rho_velocity_gap_T",
                                   "sup_lp_norm"};
    return names[k];
}

AprioriDiagnostics apriori_report(const Trajectory& traj, const WideParams& params) {
    traj.require_consistent();
    const int N = traj.time.N;
    const double tau = traj.time.tau;
    const double meas = traj.grid.cell_measure();
    AprioriDiagnostics d;

    for (int n = 1; n <= N - 1; ++n) {
        Field d2 = (traj.levels[n + 1] - 2.0 * traj.levels[n] + traj.levels[n - 1]) / (tau * tau);
        d.inertia += tau * meas * d2.squaredNorm();
    }
    d.inertia *= params.eps * params.rho;

    for (int n = 1; n <= N; ++n) {
        Field v = (traj.levels[n] - traj.levels[n - 1]) / tau;
        d.dissipation_integral += tau * dissipation_psi(params.G, traj.grid, v, params.reg.lambda);
    }
    for (int n = 0; n <= N; ++n) {
        double trap = (n == 0 || n == N) ? 0.5 : 1.0;
        double phi = params.reg.mu > 0
                         ? energy_phi_envelope(params.F, traj.grid, traj.levels[n], params.reg.mu)
                         : energy_phi(params.F, traj.grid, traj.levels[n]);
        d.energy_integral += tau * trap * phi;
    }
    // u1 recovered from the shared start-up convention D1 U^1 = u1.
    Field v1 = (traj.levels[1] - traj.levels[0]) / tau;
    Field vN = (traj.levels[N] - traj.levels[N - 1]) / tau;
    d.terminal_velocity_gap = params.rho * meas * (vN - v1).squaredNorm();

    const double p = std::min(std::max(params.G.exponent, 2.0), 4.0 - 1e-12);
    for (int n = 0; n <= N; ++n)
        d.sup_v_norm = std::max(d.sup_v_norm, norm(traj.grid, traj.levels[n], NormKind::Lp, p));
    return d;
}

double trajectory_error(const Trajectory& a, const Trajectory& b, ErrorNorm norm_kind, double p) {
    a.require_consistent();
    b.require_consistent();
    if (a.level_count() != b.level_count())
        throw std::invalid_argument("trajectory_error: level counts differ");
    const int N = a.time.N;
    const double tau = a.time.tau;
    switch (norm_kind) {
        case ErrorNorm::L2L2: {
            double s = 0.0;
            for (int n = 0; n <= N; ++n) {
                double trap = (n == 0 || n == N) ? 0.5 : 1.0;
                double e = norm(a.grid, a.levels[n] - b.levels[n], NormKind::L2);
                s += tau * trap * e * e;
            }
            return std::sqrt(s);
        }
        case ErrorNorm::LpV: {
            const double pp = std::min(std::max(p, 2.0), 4.0 - 1e-12);
            double s = 0.0;
            for (int n = 1; n <= N; ++n) {
                Field dv = (a.levels[n] - a.levels[n - 1] - b.levels[n] + b.levels[n - 1]) / tau;
                double e = norm(a.grid, dv, NormKind::Lp, pp);
                s += tau * std::pow(e, pp);
            }
            return std::pow(s, 1.0 / pp);
        }
        case ErrorNorm::L2X: {
            double s = 0.0;
            for (int n = 0; n <= N; ++n) {
                double trap = (n == 0 || n == N) ? 0.5 : 1.0;
                double e = norm(a.grid, a.levels[n] - b.levels[n], NormKind::H10);
                s += tau * trap * e * e;
            }
            return std::sqrt(s);
        }
    }
    throw std::logic_error("trajectory_error: unknown norm");
}

ConvergenceTable sweep(const SweepSpec& spec, const Grid& grid, const TimeAxis& time,
                       FieldRef u0, FieldRef u1) {
    spec.validate();
    const int count = spec.mode == SweepMode::Viscous ? static_cast<int>(spec.rho_list.size())
                                                      : static_cast<int>(spec.eps_list.size());

    // Reference trajectory shared by all points.
    Trajectory reference;
    if (spec.mode == SweepMode::Causal) {
        if (spec.modal) {
            reference = modal_reference(spec.params.rho, spec.params.nu, spec.modal->c, grid, time,
                                        spec.modal->mode, spec.modal->amp0, spec.modal->amp1);
        } else {
            reference = solve_hyperbolic(spec.params, grid, time, u0, u1);
        }
    } else {
        WideParams pr = spec.params;
        pr.rho = 0.0;
        reference = solve_parabolic(pr, grid, time, u0);
    }

    ConvergenceTable table;
    table.rows.assign(count, ConvergenceRow{});
    run_indexed(count, spec.threads, [&](int i) {
        ConvergenceRow& row = table.rows[i];
        try {
            WideParams pp = spec.params;
            Trajectory traj;
            if (spec.mode == SweepMode::Causal) {
                pp.eps = spec.eps_list[i];
                row.parameter = pp.eps;
                MinimizeResult mr = minimize_wide(pp, grid, time, u0, u1, spec.minimize_opts);
                if (!mr.stats.converged) row.note = "minimizer not converged";
                traj = std::move(mr.traj);
            } else if (spec.mode == SweepMode::Viscous) {
                pp.rho = spec.rho_list[i];
                row.parameter = pp.rho;
                traj = solve_hyperbolic(pp, grid, time, u0, u1);
            } else {
                pp.eps = spec.eps_list[i];
                pp.rho = spec.rho_list[i];
                row.parameter = pp.rho;
                MinimizeResult mr = minimize_wide(pp, grid, time, u0, u1, spec.minimize_opts);
                if (!mr.stats.converged) row.note = "minimizer not converged";
                traj = std::move(mr.traj);
            }
            for (ErrorNorm nk : spec.norms)
                row.err[static_cast<int>(nk)] =
                    trajectory_error(traj, reference, nk, spec.params.G.exponent);
            row.apriori = apriori_report(traj, pp);
        } catch (const std::exception& e) {
            row.solver_ok = false;
            row.note = e.what();
            for (double& v : row.err) v = std::nan("");
        }
    });

    for (int i = 0; i < count; ++i) {
        for (int k = 0; k < 3; ++k) {
            if (i == 0) {
                table.rows[i].order[k] = std::nan("");
                continue;
            }
            double p0 = table.rows[i - 1].parameter, p1 = table.rows[i].parameter;
            double e0 = table.rows[i - 1].err[k], e1 = table.rows[i].err[k];
            table.rows[i].order[k] =
                (e0 > 0 && e1 > 0) ? std::log(e0 / e1) / std::log(p0 / p1) : std::nan("");
        }
    }
    return table;
}

bool ConvergenceTable::apriori_bounded(double factor) const {
    if (rows.empty()) return true;
    for (int k = 0; k < 5; ++k) {
        double base = rows.front().apriori.value(k);
        double floor = 1e-12 * (1.0 + std::abs(base));
        for (const ConvergenceRow& row : rows)
            if (row.apriori.value(k) > factor * base + floor) return false;
    }
    return true;
}

bool ConvergenceTable::errors_strictly_decreasing(int which) const {
    for (size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].err[which] < rows[i - 1].err[which])) return false;
    return !rows.empty();
}

void ConvergenceTable::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("ConvergenceTable: cannot open " + path);
    out << "parameter,err_L2L2,err_LpV,err_L2X,order_L2L2,order_LpV,order_L2X";
    for (int k = 0; k < 5; ++k) out << ",apriori_" << (k + 1);
    out << ",solver_ok\n";
    for (const ConvergenceRow& r : rows) {
        out << format_value(r.parameter);
        for (int k = 0; k < 3; ++k) out << ',' << format_value(r.err[k]);
        for (int k = 0; k < 3; ++k) out << ',' << format_value(r.order[k]);
        for (int k = 0; k < 5; ++k) out << ',' << format_value(r.apriori.value(k));
        out << ',' << (r.solver_ok ? 1 : 0) << '\n';
    }
}

namespace {

nlohmann::json row_to_json(const ConvergenceRow& r) {
    nlohmann::json j;
    j["parameter"] = r.parameter;
    j["err_L2L2"] = r.err[0];
    j["err_LpV"] = r.err[1];
    j["err_L2X"] = r.err[2];
    j["order_L2L2"] = r.order[0];
    j["order_LpV"] = r.order[1];
    j["order_L2X"] = r.order[2];
    for (int k = 0; k < 5; ++k) j[std::string("apriori_") + std::to_string(k + 1)] =
        r.apriori.value(k);
    j["solver_ok"] = r.solver_ok;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

}  // namespace

void ConvergenceTable::write_json(const std::string& path) const {
    nlohmann::json j;
    j["caveat"] = caveat;
    j["rows"] = nlohmann::json::array();
    for (const ConvergenceRow& r : rows) j["rows"].push_back(row_to_json(r));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("ConvergenceTable: cannot open " + path);
    out << j.dump(2) << '\n';
}

GammaRecovery gamma_recovery(const Trajectory& u, double rho, double eps, double s, FieldRef u1,
                             const WideParams& params) {
    u.require_consistent();
    if (!(rho > 0)) throw std::invalid_argument("gamma_recovery: rho must be positive");
    if (!(s > 3.0)) throw std::invalid_argument("gamma_recovery: s must exceed 3");

    const int N = u.time.N;
    const double tau = u.time.tau;
    const double rho_tilde = std::pow(rho, 1.0 / s);
    if (rho_tilde >= std::min(1.0, u.time.T))
        throw std::invalid_argument("gamma_recovery: mollifier support exceeds the time axis");

    // Discrete bump kernel on (-rho_tilde, rho_tilde), unit discrete mass.
    const int J = static_cast<int>(std::ceil(rho_tilde / tau)) - 1;
    std::vector<double> kernel(2 * J + 1, 0.0);
    double mass = 0.0;
    for (int j = -J; j <= J; ++j) {
        double x = (j * tau) / rho_tilde;
        double v = x * x < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
        kernel[j + J] = v;
        mass += tau * v;
    }
    for (double& v : kernel) v /= mass;

    auto extended = [&](int m) -> const Field& {
        if (m < 0) return u.levels[0];      // u(t) = u0 for t < 0
        if (m > N) return u.levels[N];      // constant continuation past T
        return u.levels[m];
    };

    GammaRecovery out;
    out.rho_tilde = rho_tilde;
    out.recovered = Trajectory::zeros(u.grid, u.time);
    std::vector<Field> conv(N + 1, Field::Zero(u.grid.node_count()));
    for (int n = 0; n <= N; ++n)
        for (int j = -J; j <= J; ++j) conv[n] += (tau * kernel[j + J]) * extended(n - j);

    // Corrector coefficient scaled by the discrete slope of zeta(t) = t e^{-t/rho_tilde}
    // so that (U^1 - U^0)/tau = u1 holds exactly.
    Field v1 = (conv[1] - conv[0]) / tau;
    const double zeta_slope = std::exp(-tau / rho_tilde);
    Field corrector = (u1 - v1) / zeta_slope;

    for (int n = 0; n <= N; ++n) {
        double t = u.time.node(n);
        double zeta = t * std::exp(-t / rho_tilde);
        out.recovered.levels[n] = conv[n] + (u.levels[0] - conv[0]) + zeta * corrector;
    }

    WideParams with_inertia = params;
    with_inertia.rho = rho;
    with_inertia.eps = eps;
    WideParams no_inertia = params;
    no_inertia.rho = 0.0;
    no_inertia.eps = eps;
    out.I_val = eval_wide(out.recovered, with_inertia);
    out.Ibar_val = eval_wide(u, no_inertia);
    out.gap = std::abs(out.I_val - out.Ibar_val);
    return out;
}

GammaTable gamma_sweep(const Trajectory& u, double rho0, int halvings, double s, double eps,
                       FieldRef u1, const WideParams& params) {
    GammaTable table;
    double rho = rho0;
    for (int k = 0; k <= halvings; ++k) {
        GammaRecovery rec = gamma_recovery(u, rho, eps, s, u1, params);
        table.rows.push_back({rho, rec.rho_tilde, rec.I_val, rec.Ibar_val, rec.gap});
        rho *= 0.5;
    }
    double acc = 0.0;
    int terms = 0;
    for (size_t i = 1; i < table.rows.size(); ++i) {
        if (table.rows[i - 1].gap > 0 && table.rows[i].gap > 0) {
            acc += std::log2(table.rows[i - 1].gap / table.rows[i].gap);
            ++terms;
        }
    }
    table.slope = terms > 0 ? acc / terms : 0.0;
    return table;
}

void GammaTable::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("GammaTable: cannot open " + path);
    out << "rho,rho_tilde,I_val,Ibar_val,gap\n";
    for (const Row& r : rows)
        out << format_value(r.rho) << ',' << format_value(r.rho_tilde) << ','
            << format_value(r.I_val) << ',' << format_value(r.Ibar_val) << ','
            << format_value(r.gap) << '\n';
}

void GammaTable::write_json(const std::string& path) const {
    nlohmann::json j;
    j["slope"] = slope;
    j["rows"] = nlohmann::json::array();
    for (const Row& r : rows) {
        nlohmann::json row;
        row["rho"] = r.rho;
        row["rho_tilde"] = r.rho_tilde;
        row["I_val"] = r.I_val;
        row["Ibar_val"] = r.Ibar_val;
        row["gap"] = r.gap;
        j["rows"].push_back(row);
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("GammaTable: cannot open " + path);
    out << j.dump(2) << '\n';
}

}  // namespace wide
