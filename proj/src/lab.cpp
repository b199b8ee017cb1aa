#include "sis/lab.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "sis/csv.hpp"
#include "sis/errors.hpp"

namespace sis {

namespace {

double sup_of(std::span<const double> v) {
    double worst = -std::numeric_limits<double>::infinity();
    for (double x : v) worst = std::max(worst, x);
    return worst;
}

struct StudyRowInputs {
    ModelParams p;
    const TimeGrid* grid;
    std::optional<SsaConfig> cfg;
    unsigned threads;
};

ConvergenceRow study_row(const StudyRowInputs& in) {
    const MomentTrajectory mt = solve_master(in.p, *in.grid);
    const MeanFieldSolution y = mf_closed_form_solution(in.p, *in.grid);
    const std::vector<double> mse = exact_mse(mt, y);

    ConvergenceRow row;
    row.n = in.p.n;
    row.sup_mse_exact = sup_of(mse);

    double gap_upper = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < y.y.size(); ++i)
        gap_upper = std::max(gap_upper, y.y[i] - mt.moments[i].m1);
    row.sup_gap_upper = gap_upper;

    const std::vector<double> z2 = solve_decoupled_z2(in.p, *in.grid);
    const std::vector<double> z1 = solve_decoupled_z1(in.p, *in.grid, z2);
    double gap_lower = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < z1.size(); ++i)
        gap_lower = std::max(gap_lower, mt.moments[i].m1 - z1[i]);
    row.sup_gap_lower = gap_lower;

    row.init_gap = std::abs(static_cast<double>(initial_infected_count(in.p)) / in.p.n - in.p.u);

    if (in.cfg) {
        const MonteCarloEstimate est = estimate_mse(in.p, *in.grid, *in.cfg, y, in.threads);
        row.sup_mse_sampled = sup_of(est.mse_hat);
    }
    return row;
}

}  // namespace

std::vector<double> exact_mse(const MomentTrajectory& mt, const MeanFieldSolution& y) {
    if (!mt.grid.same_as(y.grid))
        throw std::domain_error("moment trajectory and mean-field solution use different grids");
    std::vector<double> mse(y.y.size());
    for (size_t i = 0; i < y.y.size(); ++i) {
        const double v = mt.moments[i].m2 - 2.0 * y.y[i] * mt.moments[i].m1 + y.y[i] * y.y[i];
        mse[i] = v < 0.0 ? 0.0 : v;
    }
    return mse;
}

SandwichReport sandwich_check(const ModelParams& p, const TimeGrid& grid) {
    const MomentTrajectory mt = solve_master(p, grid);
    const MeanFieldSolution y = mf_solve(p, grid);
    const std::vector<double> z2 = solve_decoupled_z2(p, grid);
    const std::vector<double> z1 = solve_decoupled_z1(p, grid, z2);
    const BoundTrajectory coupled = solve_coupled(p, grid);

    SandwichReport rep;
    rep.grid = grid;
    rep.y = y.y;
    rep.z1_lower = z1;
    rep.z2_upper = z2;
    rep.z1_coupled = coupled.z1;
    rep.z2_coupled = coupled.z2;
    rep.mse_exact = exact_mse(mt, y);
    rep.m1.resize(mt.moments.size());
    rep.m2.resize(mt.moments.size());
    for (size_t i = 0; i < mt.moments.size(); ++i) {
        rep.m1[i] = mt.moments[i].m1;
        rep.m2[i] = mt.moments[i].m2;
    }

    for (size_t i = 0; i < rep.m1.size(); ++i) {
        const double t = grid.times[i];
        const double upper_gap = rep.y[i] - rep.m1[i];
        if (upper_gap < -kSandwichTol) rep.violations.push_back({t, "m1<=y", upper_gap});
        const double lower_gap = rep.m1[i] - rep.z1_lower[i];
        if (lower_gap < -kSandwichTol) rep.violations.push_back({t, "z1<=m1", lower_gap});
        const double second_gap = rep.z2_upper[i] - rep.m2[i];
        if (second_gap < -kSandwichTol) rep.violations.push_back({t, "m2<=z2", second_gap});
    }
    return rep;
}

JensenSlack jensen_audit(const MomentTrajectory& mt) {
    if (mt.moments.empty()) throw std::domain_error("empty moment trajectory");
    JensenSlack slack;
    slack.variance_slack = std::numeric_limits<double>::infinity();
    slack.third_moment_slack = std::numeric_limits<double>::infinity();
    for (const Moments& m : mt.moments) {
        slack.variance_slack = std::min(slack.variance_slack, m.m2 - m.m1 * m.m1);
        slack.third_moment_slack =
            std::min(slack.third_moment_slack, m.m3 - m.m2 * std::sqrt(std::max(m.m2, 0.0)));
    }
    return slack;
}

ConvergenceReport convergence_study(const BaseParams& base, std::span<const int> n_list,
                                    const TimeGrid& grid, const std::optional<SsaConfig>& cfg,
                                    unsigned threads) {
    if (n_list.empty()) throw std::invalid_argument("n_list must not be empty");
    for (size_t i = 0; i + 1 < n_list.size(); ++i)
        if (!(n_list[i] < n_list[i + 1]))
            throw std::invalid_argument("n_list must be strictly ascending");
    for (int n : n_list)
        if (n > kMaxStudyN)
            throw CapabilityError("convergence study handles n <= " + std::to_string(kMaxStudyN));

    std::vector<StudyRowInputs> inputs;
    inputs.reserve(n_list.size());
    for (int n : n_list) inputs.push_back({base.with_n(n), &grid, cfg, threads});

    ConvergenceReport report;
    report.rows.resize(n_list.size());
    if (threads > 1) {
        std::vector<std::future<ConvergenceRow>> futures;
        futures.reserve(inputs.size());
        for (const StudyRowInputs& in : inputs)
            futures.push_back(std::async(std::launch::async, study_row, in));
        for (size_t i = 0; i < futures.size(); ++i) report.rows[i] = futures[i].get();
    } else {
        for (size_t i = 0; i < inputs.size(); ++i) report.rows[i] = study_row(inputs[i]);
    }

    if (report.rows.size() >= 2) {
        bool positive = true;
        for (const ConvergenceRow& row : report.rows)
            if (!(row.sup_mse_exact > 0.0)) positive = false;
        if (positive) {
            double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
            const double count = static_cast<double>(report.rows.size());
            for (const ConvergenceRow& row : report.rows) {
                const double x = std::log(static_cast<double>(row.n));
                const double yv = std::log(row.sup_mse_exact);
                sx += x;
                sy += yv;
                sxx += x * x;
                sxy += x * yv;
            }
            const double denom = sxx - sx * sx / count;
            if (denom > 0.0) report.slope = (sxy - sx * sy / count) / denom;
        }
    }
    return report;
}

PhasePath phase_path_export(const ModelParams& p, const TimeGrid& grid) {
    const MomentTrajectory mt = solve_master(p, grid);
    const BoundTrajectory coupled = solve_coupled(p, grid);

    PhasePath path;
    path.grid = grid;
    path.z1_coupled = coupled.z1;
    path.z2_coupled = coupled.z2;
    path.m1.resize(mt.moments.size());
    path.m2.resize(mt.moments.size());
    for (size_t i = 0; i < mt.moments.size(); ++i) {
        path.m1[i] = mt.moments[i].m1;
        path.m2[i] = mt.moments[i].m2;
    }
    return path;
}

void write_curves_csv(const std::filesystem::path& path, const SandwichReport& report) {
    std::string text = "t,y,m1,m2,var,z1_app,z2_app,z1_coupled,z2_coupled,mse_exact\n";
    for (size_t i = 0; i < report.grid.times.size(); ++i) {
        const double var = report.m2[i] - report.m1[i] * report.m1[i];
        text += format_double(report.grid.times[i]);
        text += ',';
        text += format_double(report.y[i]);
        text += ',';
        text += format_double(report.m1[i]);
        text += ',';
        text += format_double(report.m2[i]);
        text += ',';
        text += format_double(var);
        text += ',';
        text += format_double(report.z1_lower[i]);
        text += ',';
        text += format_double(report.z2_upper[i]);
        text += ',';
        text += format_double(report.z1_coupled[i]);
        text += ',';
        text += format_double(report.z2_coupled[i]);
        text += ',';
        text += format_double(report.mse_exact[i]);
        text += '\n';
    }
    atomic_write_text(path, text);
}

void write_convergence_csv(const std::filesystem::path& path, const ConvergenceReport& report) {
    std::string text = "n,sup_mse_exact,sup_mse_sampled,sup_gap_upper,sup_gap_lower\n";
    for (const ConvergenceRow& row : report.rows) {
        text += std::to_string(row.n);
        text += ',';
        text += format_double(row.sup_mse_exact);
        text += ',';
        text += row.sup_mse_sampled ? format_double(*row.sup_mse_sampled) : "nan";
        text += ',';
        text += format_double(row.sup_gap_upper);
        text += ',';
        text += format_double(row.sup_gap_lower);
        text += '\n';
    }
    atomic_write_text(path, text);
}

void write_phase_csv(const std::filesystem::path& path, const PhasePath& path_data) {
    std::string text = "t,m1,m2,z1_coupled,z2_coupled\n";
    for (size_t i = 0; i < path_data.grid.times.size(); ++i) {
        text += format_double(path_data.grid.times[i]);
        text += ',';
        text += format_double(path_data.m1[i]);
        text += ',';
        text += format_double(path_data.m2[i]);
        text += ',';
        text += format_double(path_data.z1_coupled[i]);
        text += ',';
        text += format_double(path_data.z2_coupled[i]);
        text += '\n';
    }
    atomic_write_text(path, text);
}

}  // namespace sis
