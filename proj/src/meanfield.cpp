#include "sis/meanfield.hpp"

#include <cmath>
#include <stdexcept>

#include "sis/ode.hpp"

namespace sis {

namespace {

// Accuracy-driven ceiling for the 1-2 dimensional systems; the explicit
// stability bound 0.1/(tau+gamma+1) only binds for very stiff parameters.
double small_system_step(const ModelParams& p) {
    const double stability = 0.1 / (p.tau + p.gamma + 1.0);
    return std::min(1e-3, stability);
}

}  // namespace

double mf_rhs(double y, const ModelParams& p) {
    return p.tau * y * (1.0 - y) - p.gamma * y;
}

double mf_closed_form(double t, const ModelParams& p) {
    validate(p);
    if (!(t >= 0.0))
        throw std::domain_error("mf_closed_form requires t >= 0");
    if (p.u == 0.0) return 0.0;
    if (t == 0.0) return p.u;
    if (p.tau == 0.0) return p.u * std::exp(-p.gamma * t);
    const double r = p.tau - p.gamma;
    if (std::abs(r) < 1e-12) return p.u / (1.0 + p.tau * p.u * t);
    // y = u*r / (tau*u + (r - tau*u) * exp(-r*t)); exp argument <= 0 for r > 0,
    // and for r < 0 the growing denominator drives y -> 0 without overflowing
    // into NaN.
    const double tu = p.tau * p.u;
    return p.u * r / (tu + (r - tu) * std::exp(-r * t));
}

MeanFieldSolution mf_closed_form_solution(const ModelParams& p, const TimeGrid& grid) {
    MeanFieldSolution sol;
    sol.grid = grid;
    sol.source = SolutionSource::closed_form;
    sol.y.resize(grid.times.size());
    for (size_t i = 0; i < grid.times.size(); ++i) {
        double v = mf_closed_form(grid.times[i], p);
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        sol.y[i] = v;
    }
    return sol;
}

MeanFieldSolution mf_solve(const ModelParams& p, const TimeGrid& grid) {
    validate(p);
    VectorField field;
    field.dimension = 1;
    field.eval = [p](double, std::span<const double> y, std::span<double> dydt) {
        dydt[0] = mf_rhs(y[0], p);
    };
    const double y0[1] = {p.u};
    const int substeps = substeps_for(grid.times[1] - grid.times[0], small_system_step(p));
    Trajectory traj = integrate(field, y0, grid, substeps);

    MeanFieldSolution sol;
    sol.grid = grid;
    sol.source = SolutionSource::numerical;
    sol.y.resize(traj.states.size());
    for (size_t i = 0; i < traj.states.size(); ++i) {
        double v = traj.states[i][0];
        if (v < -1e-9 || v > 1.0 + 1e-9)
            throw IntegrationError("mean-field solution left [0, 1]", grid.times[i], 0);
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        sol.y[i] = v;
    }
    sol.y[0] = p.u;
    return sol;
}

}  // namespace sis
