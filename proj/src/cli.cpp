#include "sis/cli.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "sis/csv.hpp"
#include "sis/lab.hpp"
#include "sis/ssa.hpp"

namespace sis::cli {

namespace {

void add_common_flags(CLI::App* sub, RunConfig& cfg, bool with_n) {
    sub->add_option("--tau", cfg.params.tau, "infection pressure per unit time")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--gamma", cfg.params.gamma, "recovery rate per unit time")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--u", cfg.params.u, "initial infected fraction")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    if (with_n)
        sub->add_option("--n", cfg.params.n, "node count")
            ->check(CLI::Range(1, 1000000000))
            ->capture_default_str();
    sub->add_option("--t-end", cfg.t_end, "time horizon")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--points", cfg.num_points, "grid nodes including t = 0")
        ->check(CLI::Range(2, 10000000))
        ->capture_default_str();
    sub->add_option("--out", cfg.out, "output CSV path (default <subcommand>.csv)");
}

void add_ssa_flags(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--reps", cfg.reps, "Monte Carlo replications")
        ->check(CLI::Range(static_cast<long long>(1), static_cast<long long>(100000000)))
        ->capture_default_str();
    sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    sub->add_option("--threads", cfg.threads, "worker threads (results do not depend on this)")
        ->check(CLI::Range(1, 256))
        ->capture_default_str();
}

std::string command_name(Command c) {
    switch (c) {
        case Command::meanfield: return "meanfield";
        case Command::master: return "master";
        case Command::bounds: return "bounds";
        case Command::ssa: return "ssa";
        case Command::sandwich: return "sandwich";
        case Command::converge: return "converge";
        case Command::phase: return "phase";
    }
    return "unknown";
}

std::string summary_num(double v) { return format_double(v); }

void write_table(const std::filesystem::path& path, const std::string& header,
                 const std::vector<std::span<const double>>& columns, size_t rows) {
    std::string text = header;
    text += '\n';
    for (size_t i = 0; i < rows; ++i) {
        for (size_t c = 0; c < columns.size(); ++c) {
            if (c > 0) text += ',';
            text += format_double(columns[c][i]);
        }
        text += '\n';
    }
    atomic_write_text(path, text);
}

int run_meanfield(const RunConfig& cfg, const TimeGrid& grid) {
    const MeanFieldSolution numeric = mf_solve(cfg.params, grid);
    const MeanFieldSolution closed = mf_closed_form_solution(cfg.params, grid);
    double max_dev = 0.0;
    for (size_t i = 0; i < numeric.y.size(); ++i)
        max_dev = std::max(max_dev, std::abs(numeric.y[i] - closed.y[i]));
    write_table(cfg.out, "t,y_numeric,y_closed", {grid.times, numeric.y, closed.y},
                grid.times.size());
    std::cout << "meanfield: max|y_numeric-y_closed|=" << summary_num(max_dev)
              << " out=" << cfg.out.string() << "\n";
    return 0;
}

int run_master(const RunConfig& cfg, const TimeGrid& grid) {
    const SandwichReport rep = sandwich_check(cfg.params, grid);
    write_curves_csv(cfg.out, rep);
    if (cfg.retain_distributions) {
        const MomentTrajectory mt = solve_master(cfg.params, grid, true);
        std::string text = "t,k,prob\n";
        for (size_t i = 0; i < mt.distributions.size(); ++i)
            for (size_t k = 0; k < mt.distributions[i].probs.size(); ++k) {
                text += format_double(grid.times[i]);
                text += ',';
                text += std::to_string(k);
                text += ',';
                text += format_double(mt.distributions[i].probs[k]);
                text += '\n';
            }
        std::filesystem::path dist_path = cfg.out;
        dist_path.replace_extension();
        dist_path += "_distributions.csv";
        atomic_write_text(dist_path, text);
    }
    double sup_mse = 0.0;
    for (double v : rep.mse_exact) sup_mse = std::max(sup_mse, v);
    std::cout << "master: sup_mse_exact=" << summary_num(sup_mse) << " out=" << cfg.out.string()
              << "\n";
    return 0;
}

int run_bounds(const RunConfig& cfg, const TimeGrid& grid) {
    const BoundTrajectory coupled = solve_coupled(cfg.params, grid);
    const BoundTrajectory limit = solve_limit(cfg.params, grid);
    const std::vector<double> z2 = solve_decoupled_z2(cfg.params, grid, cfg.forcing);
    const std::vector<double> z1 = solve_decoupled_z1(cfg.params, grid, z2);
    write_table(cfg.out, "t,z1_coupled,z2_coupled,z1_app,z2_app,z1_limit,z2_limit",
                {grid.times, coupled.z1, coupled.z2, z1, z2, limit.z1, limit.z2},
                grid.times.size());
    double sup_dev = 0.0;
    for (size_t i = 0; i < z1.size(); ++i)
        sup_dev = std::max(sup_dev, std::abs(coupled.z1[i] - limit.z1[i]));
    std::cout << "bounds: n=" << cfg.params.n << " sup|z1_coupled-z1_limit|="
              << summary_num(sup_dev) << " out=" << cfg.out.string() << "\n";
    return 0;
}

int run_ssa(const RunConfig& cfg, const TimeGrid& grid) {
    const MeanFieldSolution y = mf_closed_form_solution(cfg.params, grid);
    const SsaConfig ssa_cfg{cfg.reps, cfg.seed};
    const MonteCarloEstimate est = estimate_mse(cfg.params, grid, ssa_cfg, y, cfg.threads);
    write_table(cfg.out, "t,m1_hat,se1,m2_hat,se2,mse_hat,mse_se",
                {grid.times, est.m1_hat, est.se1, est.m2_hat, est.se2, est.mse_hat, est.mse_se},
                grid.times.size());
    double sup_mse = 0.0;
    for (double v : est.mse_hat) sup_mse = std::max(sup_mse, v);
    std::cout << "ssa: reps=" << cfg.reps << " sup_mse_hat=" << summary_num(sup_mse)
              << " out=" << cfg.out.string() << "\n";
    return 0;
}

int run_sandwich(const RunConfig& cfg, const TimeGrid& grid) {
    const SandwichReport rep = sandwich_check(cfg.params, grid);
    write_curves_csv(cfg.out, rep);
    double sup_mse = 0.0;
    for (double v : rep.mse_exact) sup_mse = std::max(sup_mse, v);
    std::cout << "sandwich: violations: " << rep.violations.size()
              << " sup_mse_exact=" << summary_num(sup_mse) << " out=" << cfg.out.string() << "\n";
    return rep.violations.empty() ? 0 : 3;
}

int run_converge(const RunConfig& cfg, const TimeGrid& grid) {
    const BaseParams base{cfg.params.tau, cfg.params.gamma, cfg.params.u};
    std::optional<SsaConfig> ssa_cfg;
    if (cfg.with_ssa) ssa_cfg = SsaConfig{cfg.reps, cfg.seed};
    const ConvergenceReport report =
        convergence_study(base, cfg.n_list, grid, ssa_cfg, cfg.threads);
    write_convergence_csv(cfg.out, report);
    std::cout << "converge: rows=" << report.rows.size() << " slope="
              << (report.slope ? summary_num(*report.slope) : std::string("n/a"))
              << " out=" << cfg.out.string() << "\n";
    return 0;
}

int run_phase(const RunConfig& cfg, const TimeGrid& grid) {
    const PhasePath path = phase_path_export(cfg.params, grid);
    write_phase_csv(cfg.out, path);
    std::cout << "phase: rows=" << path.grid.times.size() << " out=" << cfg.out.string() << "\n";
    return 0;
}

}  // namespace

RunConfig parse_args(const std::vector<std::string>& args) {
    RunConfig cfg;

    CLI::App app{"Numerical laboratory for the SIS process on a complete graph"};
    app.require_subcommand(1);

    CLI::App* meanfield = app.add_subcommand("meanfield", "deterministic approximation y(t)");
    CLI::App* master = app.add_subcommand("master", "exact forward-equation solve plus bounds");
    CLI::App* bounds = app.add_subcommand("bounds", "the two-moment bound systems");
    CLI::App* ssa = app.add_subcommand("ssa", "Monte Carlo moment estimates");
    CLI::App* sandwich = app.add_subcommand("sandwich", "enclosure check z1 <= m1 <= y, m2 <= z2");
    CLI::App* converge = app.add_subcommand("converge", "sup-MSE sweep over population sizes");
    CLI::App* phase = app.add_subcommand("phase", "exact moments next to the coupled-system path");

    add_common_flags(meanfield, cfg, false);
    add_common_flags(master, cfg, true);
    add_common_flags(bounds, cfg, true);
    add_common_flags(ssa, cfg, true);
    add_common_flags(sandwich, cfg, true);
    add_common_flags(converge, cfg, false);
    add_common_flags(phase, cfg, true);

    add_ssa_flags(ssa, cfg);
    add_ssa_flags(converge, cfg);

    master->add_flag("--retain-distributions", cfg.retain_distributions,
                     "also dump every distribution (large)");
    converge->add_option("--n-list", cfg.n_list, "ascending population sizes")
        ->delimiter(',')
        ->capture_default_str();
    converge->add_flag("--ssa", cfg.with_ssa, "add the sampled-MSE column");

    const std::map<std::string, Z2Forcing> forcing_names{{"loose", Z2Forcing::loose},
                                                         {"tight", Z2Forcing::tight}};
    bounds->add_option("--z2-forcing", cfg.forcing, "decoupled z2 forcing constant")
        ->transform(CLI::CheckedTransformer(forcing_names, CLI::ignore_case))
        ->default_str("loose");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::ostringstream help;
        help << app.help();
        throw HelpRequested{help.str()};
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    if (meanfield->parsed()) cfg.command = Command::meanfield;
    else if (master->parsed()) cfg.command = Command::master;
    else if (bounds->parsed()) cfg.command = Command::bounds;
    else if (ssa->parsed()) cfg.command = Command::ssa;
    else if (sandwich->parsed()) cfg.command = Command::sandwich;
    else if (converge->parsed()) cfg.command = Command::converge;
    else if (phase->parsed()) cfg.command = Command::phase;

    if (cfg.command == Command::converge) {
        if (cfg.n_list.empty()) throw UsageError("--n-list must not be empty");
        for (size_t i = 0; i + 1 < cfg.n_list.size(); ++i)
            if (!(cfg.n_list[i] < cfg.n_list[i + 1]))
                throw UsageError("--n-list must be strictly ascending");
        for (int n : cfg.n_list)
            if (n < 1) throw UsageError("--n-list entries must be >= 1");
    }

    try {
        validate(cfg.params);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (cfg.out.empty()) cfg.out = command_name(cfg.command) + ".csv";
    return cfg;
}

int run(const RunConfig& cfg) {
    const TimeGrid grid = TimeGrid::uniform(cfg.t_end, cfg.num_points);
    switch (cfg.command) {
        case Command::meanfield: return run_meanfield(cfg, grid);
        case Command::master: return run_master(cfg, grid);
        case Command::bounds: return run_bounds(cfg, grid);
        case Command::ssa: return run_ssa(cfg, grid);
        case Command::sandwich: return run_sandwich(cfg, grid);
        case Command::converge: return run_converge(cfg, grid);
        case Command::phase: return run_phase(cfg, grid);
    }
    return 2;
}

int main(int argc, char** argv) {
    std::vector<std::string> args;
    args.reserve(static_cast<size_t>(argc > 0 ? argc - 1 : 0));
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    try {
        const RunConfig cfg = parse_args(args);
        return run(cfg);
    } catch (const HelpRequested& help) {
        std::cout << help.text;
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace sis::cli
