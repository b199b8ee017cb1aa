#pragma once

#include <span>
#include <vector>

#include "sis/model.hpp"

// The two-moment bound systems enclosing the exact process:
//  - coupled:   z1' = tau*(z1 - z2) - gamma*z1
//               z2' = 2tau*(z2 - z2^1.5) - 2gamma*z2
//                     + (1/n)*(tau*(z1 - z2) + gamma*z1)
//  - decoupled: z2 solved alone with a constant forcing term, then z1
//               driven by that z2 as an exogenous function. This is the
//               variant with a scalar-comparison guarantee, so hard
//               assertions elsewhere use it; the coupled variant is
//               reported as data only.
//  - limit:     the n-independent system whose solution is (y, y^2).
// Initial conditions are always z1(0) = u, z2(0) = u^2.

namespace sis {

enum class BoundKind { coupled, decoupled, limit };

struct BoundTrajectory {
    TimeGrid grid;
    std::vector<double> z1;
    std::vector<double> z2;
    BoundKind kind = BoundKind::limit;
    int n = 0;  // population the bound was computed for; 0 for the limit
};

struct Deriv2 {
    double dz1 = 0.0;
    double dz2 = 0.0;
};

// z2^1.5 as z2*sqrt(z2) with negatives clamped to 0 first, so -1e-15
// drift cannot produce NaN.
double z2_pow_3_2(double z2);

Deriv2 coupled_rhs(double z1, double z2, const ModelParams& p);
Deriv2 limit_rhs(double z1, double z2, const ModelParams& p);

// Forcing constant for the decoupled z2 equation. `loose` is (2/n)*(tau+gamma);
// `tight` is the (1/n)*(tau+gamma) variant implied by the exact second-moment
// equation. Loose is the default and is what the guarantees are stated for.
enum class Z2Forcing { loose, tight };
double decoupled_z2_forcing(const ModelParams& p, Z2Forcing f);

double decoupled_z2_rhs(double z2, const ModelParams& p, double forcing);

BoundTrajectory solve_coupled(const ModelParams& p, const TimeGrid& grid);
BoundTrajectory solve_limit(const ModelParams& p, const TimeGrid& grid);

// Scalar solve of the decoupled z2 equation (upper bound for E[i^2]).
std::vector<double> solve_decoupled_z2(const ModelParams& p, const TimeGrid& grid,
                                       Z2Forcing f = Z2Forcing::loose);
std::vector<double> solve_decoupled_z2_with_forcing(const ModelParams& p, const TimeGrid& grid,
                                                    double forcing);

// Scalar solve of z1' = tau*(z1 - z2(t)) - gamma*z1 (lower bound for E[i]),
// with z2 given per grid node and interpolated linearly for the RK4
// substeps. z2 must match the grid length.
std::vector<double> solve_decoupled_z1(const ModelParams& p, const TimeGrid& grid,
                                       std::span<const double> z2);

}  // namespace sis
