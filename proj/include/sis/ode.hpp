#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sis/model.hpp"

// Fixed-step classical RK4 for the smooth initial-value problems used
// throughout: the forward equations, the mean-field ODE and the bound
// systems. Deterministic by construction: identical inputs produce
// bit-identical trajectories.

namespace sis {

// Thrown when a field returns a non-finite derivative or a solver
// invariant drifts past tolerance. `component` is -1 when the failure
// is not tied to a single coordinate.
struct IntegrationError : std::runtime_error {
    double time;
    int component;
    IntegrationError(const std::string& what, double t, int comp)
        : std::runtime_error(what), time(t), component(comp) {}
};

struct VectorField {
    int dimension = 0;
    std::function<void(double t, std::span<const double> y, std::span<double> dydt)> eval;
};

// One classical RK4 step of length h > 0.
std::vector<double> rk4_step(const VectorField& f, double t, std::span<const double> y, double h);

struct Trajectory {
    TimeGrid grid;
    std::vector<std::vector<double>> states;  // states[i] at grid.times[i]; states[0] == y0
};

// Fixed-step RK4 with `substeps` internal steps per grid interval.
// States are recorded exactly at the grid nodes.
Trajectory integrate(const VectorField& f, std::span<const double> y0, const TimeGrid& grid,
                     int substeps);

// Extended-precision variant for ill-conditioned small systems. The bound
// systems ride a saddle trajectory whose transverse error grows like
// exp((tau-gamma)t) -- about 5e8 over the default horizon -- which floors
// plain double integration near 1e-7 no matter the step. Carrying the
// state in 80-bit floats keeps the recorded nodes below 1e-9.
struct VectorFieldX {
    int dimension = 0;
    std::function<void(long double t, std::span<const long double> y,
                       std::span<long double> dydt)>
        eval;
};

Trajectory integrate_extended(const VectorFieldX& f, std::span<const double> y0,
                              const TimeGrid& grid, int substeps);

// Smallest substep count keeping the internal step length <= h_max.
int substeps_for(double node_dt, double h_max);

}  // namespace sis
