#pragma once

#include <vector>

#include "sis/model.hpp"

// The deterministic approximation y' = tau*y*(1-y) - gamma*y, y(0) = u:
// right-hand side, closed-form solution, and RK4 solution. The closed
// form is trusted only because the substitution and solver-agreement
// tests gate it.

namespace sis {

enum class SolutionSource { closed_form, numerical };

struct MeanFieldSolution {
    TimeGrid grid;
    std::vector<double> y;  // y[0] == u; all values in [0, 1]
    SolutionSource source = SolutionSource::numerical;
};

double mf_rhs(double y, const ModelParams& p);

// Exact solution at time t >= 0. Branches: tau == 0 decays exponentially,
// |tau - gamma| < 1e-12 uses the algebraic form to dodge cancellation,
// otherwise the logistic-with-decay expression written so the exponential
// always decays (no overflow for either sign of tau - gamma).
double mf_closed_form(double t, const ModelParams& p);

MeanFieldSolution mf_closed_form_solution(const ModelParams& p, const TimeGrid& grid);

// RK4 solution on the grid; agrees with the closed form to 1e-8.
MeanFieldSolution mf_solve(const ModelParams& p, const TimeGrid& grid);

}  // namespace sis
