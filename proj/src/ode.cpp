#include "sis/ode.hpp"

#include <cmath>

namespace sis {

namespace {

template <typename Real, typename Field>
void eval_checked(const Field& f, Real t, std::span<const Real> y, std::span<Real> dydt) {
    f.eval(t, y, dydt);
    for (size_t j = 0; j < dydt.size(); ++j) {
        if (!std::isfinite(static_cast<double>(dydt[j])))
            throw IntegrationError("non-finite derivative", static_cast<double>(t),
                                   static_cast<int>(j));
    }
}

template <typename Real, typename Field>
struct Rk4Workspace {
    std::vector<Real> k1, k2, k3, k4, tmp;

    explicit Rk4Workspace(size_t dim) : k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim) {}

    void step(const Field& f, Real t, std::span<const Real> y, Real h, std::span<Real> out) {
        const size_t dim = y.size();
        const Real half = Real(0.5) * h;
        eval_checked<Real>(f, t, y, {k1});
        for (size_t j = 0; j < dim; ++j) tmp[j] = y[j] + half * k1[j];
        eval_checked<Real>(f, t + half, {tmp}, {k2});
        for (size_t j = 0; j < dim; ++j) tmp[j] = y[j] + half * k2[j];
        eval_checked<Real>(f, t + half, {tmp}, {k3});
        for (size_t j = 0; j < dim; ++j) tmp[j] = y[j] + h * k3[j];
        eval_checked<Real>(f, t + h, {tmp}, {k4});
        const Real sixth = h / Real(6);
        for (size_t j = 0; j < dim; ++j)
            out[j] = y[j] + sixth * (k1[j] + Real(2) * k2[j] + Real(2) * k3[j] + k4[j]);
    }
};

template <typename Real, typename Field>
Trajectory integrate_impl(const Field& f, std::span<const double> y0, const TimeGrid& grid,
                          int substeps) {
    if (f.dimension < 1 || y0.size() != static_cast<size_t>(f.dimension))
        throw std::domain_error("initial state dimension does not match the field");
    if (substeps < 1)
        throw std::invalid_argument("substeps must be >= 1");
    if (grid.num_points < 2 || grid.times.size() != static_cast<size_t>(grid.num_points))
        throw std::domain_error("malformed time grid");

    Trajectory out;
    out.grid = grid;
    out.states.resize(grid.times.size());
    out.states[0].assign(y0.begin(), y0.end());

    Rk4Workspace<Real, Field> ws(y0.size());
    std::vector<Real> cur(y0.begin(), y0.end());
    std::vector<Real> next(y0.size());

    for (size_t i = 0; i + 1 < grid.times.size(); ++i) {
        const Real t0 = static_cast<Real>(grid.times[i]);
        const Real h =
            (static_cast<Real>(grid.times[i + 1]) - t0) / static_cast<Real>(substeps);
        for (int s = 0; s < substeps; ++s) {
            const Real t = t0 + h * static_cast<Real>(s);
            ws.step(f, t, cur, h, next);
            cur.swap(next);
        }
        out.states[i + 1].resize(cur.size());
        for (size_t j = 0; j < cur.size(); ++j)
            out.states[i + 1][j] = static_cast<double>(cur[j]);
    }
    return out;
}

}  // namespace

std::vector<double> rk4_step(const VectorField& f, double t, std::span<const double> y, double h) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw std::invalid_argument("step length must be finite and > 0");
    if (f.dimension < 1 || y.size() != static_cast<size_t>(f.dimension))
        throw std::domain_error("state dimension does not match the field");
    Rk4Workspace<double, VectorField> ws(y.size());
    std::vector<double> out(y.size());
    ws.step(f, t, y, h, out);
    return out;
}

Trajectory integrate(const VectorField& f, std::span<const double> y0, const TimeGrid& grid,
                     int substeps) {
    return integrate_impl<double>(f, y0, grid, substeps);
}

Trajectory integrate_extended(const VectorFieldX& f, std::span<const double> y0,
                              const TimeGrid& grid, int substeps) {
    return integrate_impl<long double>(f, y0, grid, substeps);
}

int substeps_for(double node_dt, double h_max) {
    if (!(node_dt > 0.0) || !(h_max > 0.0))
        throw std::invalid_argument("substeps_for needs positive interval and step bound");
    const double ratio = node_dt / h_max;
    if (ratio <= 1.0) return 1;
    return static_cast<int>(std::ceil(ratio));
}

}  // namespace sis
