#include "sis/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sis/ode.hpp"

namespace sis {

namespace {

// Step ceiling for the bound systems. They are 1-2 dimensional but
// ill-conditioned in supercritical regimes (saddle trajectory, see
// integrate_extended), so the step is pushed well below the explicit
// stability bound; the cost is still milliseconds per solve.
double small_system_step(const ModelParams& p) {
    return std::min(5e-5, 0.1 / (p.tau + p.gamma + 1.0));
}

int grid_substeps(const ModelParams& p, const TimeGrid& grid) {
    return substeps_for(grid.times[1] - grid.times[0], small_system_step(p));
}

long double pow_3_2(long double z) {
    if (z <= 0.0L) return 0.0L;
    return z * sqrtl(z);
}

long double first_moment_rhs(long double z1, long double z2, long double tau,
                             long double gamma) {
    return tau * (z1 - z2) - gamma * z1;
}

long double second_moment_core(long double z2, long double tau, long double gamma) {
    return 2.0L * tau * (z2 - pow_3_2(z2)) - 2.0L * gamma * z2;
}

BoundTrajectory from_trajectory(const Trajectory& traj, BoundKind kind, int n) {
    BoundTrajectory out;
    out.grid = traj.grid;
    out.kind = kind;
    out.n = n;
    out.z1.resize(traj.states.size());
    out.z2.resize(traj.states.size());
    for (size_t i = 0; i < traj.states.size(); ++i) {
        out.z1[i] = traj.states[i][0];
        out.z2[i] = traj.states[i][1];
    }
    return out;
}

void check_z2_floor(const BoundTrajectory& b) {
    for (size_t i = 0; i < b.z2.size(); ++i)
        if (b.z2[i] < -1e-9)
            throw IntegrationError("z2 drifted below -1e-9", b.grid.times[i], 1);
}

// Piecewise-linear read of a per-node series at an off-node time.
long double interpolate(const TimeGrid& grid, std::span<const double> values, long double t) {
    if (t <= static_cast<long double>(grid.times.front()))
        return static_cast<long double>(values.front());
    if (t >= static_cast<long double>(grid.times.back()))
        return static_cast<long double>(values.back());
    const double td = static_cast<double>(t);
    const auto it = std::upper_bound(grid.times.begin(), grid.times.end(), td);
    const size_t hi = static_cast<size_t>(it - grid.times.begin());
    const size_t lo = hi - 1;
    const long double w = (t - static_cast<long double>(grid.times[lo])) /
                          (static_cast<long double>(grid.times[hi]) -
                           static_cast<long double>(grid.times[lo]));
    return static_cast<long double>(values[lo]) +
           w * (static_cast<long double>(values[hi]) - static_cast<long double>(values[lo]));
}

}  // namespace

double z2_pow_3_2(double z2) { return static_cast<double>(pow_3_2(z2)); }

Deriv2 coupled_rhs(double z1, double z2, const ModelParams& p) {
    Deriv2 d;
    d.dz1 = p.tau * (z1 - z2) - p.gamma * z1;
    d.dz2 = static_cast<double>(second_moment_core(z2, p.tau, p.gamma)) +
            (p.tau * (z1 - z2) + p.gamma * z1) / static_cast<double>(p.n);
    return d;
}

Deriv2 limit_rhs(double z1, double z2, const ModelParams& p) {
    Deriv2 d;
    d.dz1 = p.tau * (z1 - z2) - p.gamma * z1;
    d.dz2 = static_cast<double>(second_moment_core(z2, p.tau, p.gamma));
    return d;
}

double decoupled_z2_forcing(const ModelParams& p, Z2Forcing f) {
    validate(p);
    const double base = (p.tau + p.gamma) / static_cast<double>(p.n);
    return f == Z2Forcing::loose ? 2.0 * base : base;
}

double decoupled_z2_rhs(double z2, const ModelParams& p, double forcing) {
    return static_cast<double>(second_moment_core(z2, p.tau, p.gamma)) + forcing;
}

BoundTrajectory solve_coupled(const ModelParams& p, const TimeGrid& grid) {
    validate(p);
    const long double tau = p.tau;
    const long double gamma = p.gamma;
    const long double inv_n = 1.0L / static_cast<long double>(p.n);
    VectorFieldX field;
    field.dimension = 2;
    field.eval = [=](long double, std::span<const long double> z, std::span<long double> dz) {
        dz[0] = first_moment_rhs(z[0], z[1], tau, gamma);
        dz[1] = second_moment_core(z[1], tau, gamma) +
                inv_n * (tau * (z[0] - z[1]) + gamma * z[0]);
    };
    const double z0[2] = {p.u, p.u * p.u};
    Trajectory traj = integrate_extended(field, z0, grid, grid_substeps(p, grid));
    // No z2 floor check here: for small n the coupled system genuinely
    // leaves the positive quadrant in supercritical regimes.
    return from_trajectory(traj, BoundKind::coupled, p.n);
}

BoundTrajectory solve_limit(const ModelParams& p, const TimeGrid& grid) {
    validate(p);
    const long double tau = p.tau;
    const long double gamma = p.gamma;
    VectorFieldX field;
    field.dimension = 2;
    field.eval = [=](long double, std::span<const long double> z, std::span<long double> dz) {
        dz[0] = first_moment_rhs(z[0], z[1], tau, gamma);
        dz[1] = second_moment_core(z[1], tau, gamma);
    };
    const double z0[2] = {p.u, p.u * p.u};
    Trajectory traj = integrate_extended(field, z0, grid, grid_substeps(p, grid));
    BoundTrajectory out = from_trajectory(traj, BoundKind::limit, 0);
    check_z2_floor(out);
    return out;
}

std::vector<double> solve_decoupled_z2(const ModelParams& p, const TimeGrid& grid, Z2Forcing f) {
    return solve_decoupled_z2_with_forcing(p, grid, decoupled_z2_forcing(p, f));
}

std::vector<double> solve_decoupled_z2_with_forcing(const ModelParams& p, const TimeGrid& grid,
                                                    double forcing) {
    validate(p);
    if (!(forcing >= 0.0) || !std::isfinite(forcing))
        throw std::invalid_argument("forcing must be finite and >= 0");
    const long double tau = p.tau;
    const long double gamma = p.gamma;
    const long double force = forcing;
    VectorFieldX field;
    field.dimension = 1;
    field.eval = [=](long double, std::span<const long double> z, std::span<long double> dz) {
        dz[0] = second_moment_core(z[0], tau, gamma) + force;
    };
    const double z0[1] = {p.u * p.u};
    Trajectory traj = integrate_extended(field, z0, grid, grid_substeps(p, grid));
    std::vector<double> z2(traj.states.size());
    for (size_t i = 0; i < traj.states.size(); ++i) {
        z2[i] = traj.states[i][0];
        if (z2[i] < -1e-9)
            throw IntegrationError("z2 drifted below -1e-9", grid.times[i], 0);
    }
    return z2;
}

std::vector<double> solve_decoupled_z1(const ModelParams& p, const TimeGrid& grid,
                                       std::span<const double> z2) {
    validate(p);
    if (z2.size() != grid.times.size())
        throw std::domain_error("z2 series does not match the grid");
    const long double tau = p.tau;
    const long double gamma = p.gamma;
    VectorFieldX field;
    field.dimension = 1;
    field.eval = [&grid, z2, tau, gamma](long double t, std::span<const long double> z,
                                         std::span<long double> dz) {
        dz[0] = first_moment_rhs(z[0], interpolate(grid, z2, t), tau, gamma);
    };
    const double z0[1] = {p.u};
    Trajectory traj = integrate_extended(field, z0, grid, grid_substeps(p, grid));
    std::vector<double> z1(traj.states.size());
    for (size_t i = 0; i < traj.states.size(); ++i) z1[i] = traj.states[i][0];
    return z1;
}

}  // namespace sis
