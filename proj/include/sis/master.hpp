#pragma once

#include <utility>
#include <vector>

#include "sis/model.hpp"

// Exact solution of the lumped SIS chain: Kolmogorov forward equations
// over the n+1 birth-death states, a dense matrix-exponential reference
// for small n, and the algebraic moment-derivative identities.
//
// Generator convention (used everywhere): columns index the source state,
// so the forward equations read dx/dt = Q^T x.

namespace sis {

struct MomentTrajectory {
    TimeGrid grid;
    std::vector<Moments> moments;                 // one per grid node
    std::vector<StateDistribution> distributions; // filled only when retained
};

// Birth-death stencil: dx_k/dt = a_{k-1} x_{k-1} - (a_k + c_k) x_k + c_{k+1} x_{k+1}
// with a_k = infection_rate(k), c_k = recovery_rate(k). Sums to zero up to
// rounding (<= 1e-14 * n at unit mass).
std::vector<double> forward_rhs(const StateDistribution& d, const ModelParams& p);

// Dense-state solves refuse populations past this (time/memory guard).
inline constexpr int kMaxMasterN = 16384;

// RK4 solve of the forward equations from the point-mass initial
// distribution. Probability mass and nonnegativity are checked to 1e-9 at
// every output node. Retained distributions are clamped to [0,1] and
// renormalized; moments always come from the raw solver states.
MomentTrajectory solve_master(const ModelParams& p, const TimeGrid& grid,
                              bool retain_distributions = false);

// Dense exp(t*Q^T) * x(0) by scaling-and-squaring with a Taylor series,
// for n <= 12. Independent reference path for solve_master.
StateDistribution matexp_oracle(const ModelParams& p, double t);
inline constexpr int kMaxOracleN = 12;

// Residuals of the first- and second-moment derivative identities:
//   r1 = sum_k x'_k (k/n)   - [tau*(m1 - m2) - gamma*m1]
//   r2 = sum_k x'_k (k/n)^2 - [2tau*(m2 - m3) - 2gamma*m2
//                              + (1/n)*(tau*(m1 - m2) + gamma*m1)]
// Both sides are computed independently (stencil vs. moment formula), and
// both vanish identically for every distribution, so |r1|, |r2| <= 1e-12.
std::pair<double, double> moment_identity_residuals(const StateDistribution& d,
                                                    const ModelParams& p);

}  // namespace sis
