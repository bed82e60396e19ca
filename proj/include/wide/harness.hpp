#pragma once

#include "wide/minimize.hpp"
#include "wide/steppers.hpp"

#include <functional>
#include <optional>
#include <string>

namespace wide {

enum class SweepMode { Causal, Viscous, Diagonal };
enum class ErrorNorm { L2L2, LpV, L2X };

/// Single-mode analytic reference for the linear sub-case; `c` is the linear
/// coefficient of f.
struct ModalSpec {
    int mode = 1;
    double amp0 = 1.0;
    double amp1 = 0.0;
    double c = 0.0;
};

struct SweepSpec {
    SweepMode mode = SweepMode::Causal;
    std::vector<double> eps_list;   // causal / diagonal
    std::vector<double> rho_list;   // viscous / diagonal (paired with eps_list)
    WideParams params;              // template; eps/rho overridden per point
    std::vector<ErrorNorm> norms = {ErrorNorm::L2L2, ErrorNorm::LpV, ErrorNorm::L2X};
    std::optional<ModalSpec> modal; // causal reference override
    MinimizeOptions minimize_opts;
    int threads = 1;

    void validate() const;
};

/// The five uniform-boundedness diagnostics monitored along every sweep:
/// eps rho sum tau |D2 U|^2, sum tau psi_h(D1 U), sum tau phi_h(U),
/// rho |D1 U^N - u1|^2, sup_n |U^n|_Lp.
struct AprioriDiagnostics {
    double inertia = 0.0;
    double dissipation_integral = 0.0;
    double energy_integral = 0.0;
    double terminal_velocity_gap = 0.0;
    double sup_v_norm = 0.0;

    double value(int k) const;
    static const char* name(int k);  // k = 0..4
};

AprioriDiagnostics apriori_report(const Trajectory& traj, const WideParams& params);

struct ConvergenceRow {
    double parameter = 0.0;
    double err[3] = {0, 0, 0};     // L2L2, LpV, L2X
    double order[3] = {0, 0, 0};   // log-ratio orders, NaN on the first row
    AprioriDiagnostics apriori;
    bool solver_ok = true;
    std::string note;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    // The limit theorems guarantee subsequence convergence only; the table
    // measures the full parameter sequence.
    std::string caveat =
        "errors are measured along the full parameter sequence; the limit "
        "statements guarantee convergence up to subsequences only";

    /// Every diagnostic stays within `factor` of its value at the coarsest
    /// parameter point (uniform boundedness monitor).
    bool apriori_bounded(double factor = 3.0) const;
    bool errors_strictly_decreasing(int which) const;

    void write_csv(const std::string& path) const;
    void write_json(const std::string& path) const;
};

/// Runs the requested limit experiment. Causal/diagonal points minimize the
/// functional at each epsilon; viscous points run the hyperbolic stepper at
/// each rho. References: causal -> hyperbolic stepper at the sweep's rho (or
/// the modal solution when given); viscous/diagonal -> parabolic stepper.
/// Solver failures are recorded per row and the sweep continues.
ConvergenceTable sweep(const SweepSpec& spec, const Grid& grid, const TimeAxis& time,
                       FieldRef u0, FieldRef u1);

/// Discrete error norms between two trajectories on the same mesh.
double trajectory_error(const Trajectory& a, const Trajectory& b, ErrorNorm norm_kind, double p);

struct GammaRecovery {
    Trajectory recovered;
    double I_val = 0.0;     // eval_wide at (rho, eps) on the recovered trajectory
    double Ibar_val = 0.0;  // eval_wide at (rho = 0, eps) on the input trajectory
    double gap = 0.0;
    double rho_tilde = 0.0;
};

/// Builds the recovery trajectory for the inertial-to-parabolic functional
/// limit: mollification in time (bump kernel on (-rho_tilde, rho_tilde),
/// normalized to unit discrete mass, input extended by u0 before t = 0 and by
/// its final level after t = T) plus the corrector t exp(-t/rho_tilde) scaled
/// so the discrete velocity constraint holds exactly. rho_tilde = rho^(1/s).
GammaRecovery gamma_recovery(const Trajectory& u, double rho, double eps, double s, FieldRef u1,
                             const WideParams& params);

struct GammaTable {
    struct Row {
        double rho = 0.0;
        double rho_tilde = 0.0;
        double I_val = 0.0;
        double Ibar_val = 0.0;
        double gap = 0.0;
    };
    std::vector<Row> rows;
    double slope = 0.0;  // mean log2 gap ratio per rho halving

    void write_csv(const std::string& path) const;
    void write_json(const std::string& path) const;
};

GammaTable gamma_sweep(const Trajectory& u, double rho0, int halvings, double s, double eps,
                       FieldRef u1, const WideParams& params);

/// Bounded worker pool; jobs are indexed and results merged by index, so the
/// outcome does not depend on the thread count.
void run_indexed(int count, int threads, const std::function<void(int)>& job);

}  // namespace wide
