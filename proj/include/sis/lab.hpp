#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sis/bounds.hpp"
#include "sis/master.hpp"
#include "sis/meanfield.hpp"
#include "sis/model.hpp"
#include "sis/ssa.hpp"

// Experiment harness: two-sided enclosure checks, moment-inequality
// audits, exact and sampled mean-square error, convergence sweeps over n,
// and the CSV files other tools plot from.

namespace sis {

// Tolerance for the enclosure assertions. Dominated by RK4 grid error at
// the default steps, far above 1e-12 identity noise, far below the
// O(1/n) gaps at the population sizes the suites run.
inline constexpr double kSandwichTol = 1e-6;

// Population guard for convergence sweeps (each n costs a dense solve).
inline constexpr int kMaxStudyN = 4096;

struct SandwichViolation {
    double time = 0.0;
    std::string quantity;  // "m1<=y", "z1<=m1" or "m2<=z2"
    double gap = 0.0;      // negative by more than the tolerance
};

struct SandwichReport {
    TimeGrid grid;
    std::vector<double> y;         // mean-field solution
    std::vector<double> m1, m2;    // exact moments
    std::vector<double> z1_lower;  // decoupled lower bound for E[i]
    std::vector<double> z2_upper;  // decoupled upper bound for E[i^2]
    std::vector<double> z1_coupled, z2_coupled;  // reported, never asserted
    std::vector<double> mse_exact;
    std::vector<SandwichViolation> violations;
};

struct JensenSlack {
    double variance_slack = 0.0;      // min over the grid of m2 - m1^2
    double third_moment_slack = 0.0;  // min over the grid of m3 - m2^1.5
};

struct ConvergenceRow {
    int n = 0;
    double sup_mse_exact = 0.0;
    std::optional<double> sup_mse_sampled;
    double sup_gap_upper = 0.0;  // sup of y - m1
    double sup_gap_lower = 0.0;  // sup of m1 - z1
    double init_gap = 0.0;       // |k0/n - u|, the rounding offset at t = 0
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;          // sorted by n
    std::optional<double> slope;               // log sup-MSE vs log n; absent for < 2 rows
};

// Parameter triple shared by a sweep; n varies per row.
struct BaseParams {
    double tau = 2.0;
    double gamma = 1.0;
    double u = 0.1;
    ModelParams with_n(int n) const { return ModelParams{tau, gamma, n, u}; }
};

struct PhasePath {
    TimeGrid grid;
    std::vector<double> m1, m2;
    std::vector<double> z1_coupled, z2_coupled;
};

// Per-node E[(i - y)^2] = m2 - 2*y*m1 + y^2, clamped at 0 against -1e-12
// rounding. Grids must match.
std::vector<double> exact_mse(const MomentTrajectory& mt, const MeanFieldSolution& y);

// Runs the exact solve, the mean-field solve and both bound variants,
// then checks pointwise that z1 - tol <= m1 <= y + tol and
// m2 <= z2 + tol. Violations are reported, not thrown.
SandwichReport sandwich_check(const ModelParams& p, const TimeGrid& grid);

// Worst-case slack of the two moment inequalities along a trajectory;
// both are >= -1e-12 for anything the exact solver produces.
JensenSlack jensen_audit(const MomentTrajectory& mt);

// Per-n sup-over-grid exact MSE against the mean-field solution (sampled
// MSE too when cfg is given), plus the fitted log-log slope. n_list must
// be ascending; entries past kMaxStudyN raise CapabilityError.
ConvergenceReport convergence_study(const BaseParams& base, std::span<const int> n_list,
                                    const TimeGrid& grid,
                                    const std::optional<SsaConfig>& cfg = std::nullopt,
                                    unsigned threads = 1);

// Exact moments next to the coupled-system path, for phase plots.
PhasePath phase_path_export(const ModelParams& p, const TimeGrid& grid);

// CSV emission. Header contracts, byte-exact:
//   curves:      t,y,m1,m2,var,z1_app,z2_app,z1_coupled,z2_coupled,mse_exact
//   convergence: n,sup_mse_exact,sup_mse_sampled,sup_gap_upper,sup_gap_lower
//   phase:       t,m1,m2,z1_coupled,z2_coupled
// var = m2 - m1^2; missing sampled entries are written as nan.
void write_curves_csv(const std::filesystem::path& path, const SandwichReport& report);
void write_convergence_csv(const std::filesystem::path& path, const ConvergenceReport& report);
void write_phase_csv(const std::filesystem::path& path, const PhasePath& path_data);

}  // namespace sis
