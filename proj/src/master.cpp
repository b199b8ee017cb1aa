#include "sis/master.hpp"

#include <cmath>
#include <stdexcept>

#include "sis/errors.hpp"
#include "sis/ode.hpp"

namespace sis {

namespace {

// Accuracy-driven step factor. The explicit-stability ceiling is
// 0.5/maxRate; the tighter 0.02/maxRate keeps the RK4 trajectory within
// 1e-8 of the matrix exponential over the default horizons.
constexpr double kMasterStepFactor = 0.02;

struct RateTable {
    std::vector<double> a;  // infection
    std::vector<double> c;  // recovery
};

RateTable rate_table(const ModelParams& p) {
    RateTable t;
    t.a.resize(static_cast<size_t>(p.n) + 1);
    t.c.resize(static_cast<size_t>(p.n) + 1);
    for (int k = 0; k <= p.n; ++k) {
        t.a[static_cast<size_t>(k)] = infection_rate(k, p);
        t.c[static_cast<size_t>(k)] = recovery_rate(k, p);
    }
    return t;
}

void stencil(const RateTable& t, std::span<const double> x, std::span<double> dx) {
    const size_t dim = x.size();
    for (size_t k = 0; k < dim; ++k) {
        double v = -(t.a[k] + t.c[k]) * x[k];
        if (k > 0) v += t.a[k - 1] * x[k - 1];
        if (k + 1 < dim) v += t.c[k + 1] * x[k + 1];
        dx[k] = v;
    }
}

Moments moments_of_span(std::span<const double> x, int n) {
    const double inv_n = 1.0 / static_cast<double>(n);
    Moments m;
    for (size_t k = 0; k < x.size(); ++k) {
        const double i = static_cast<double>(k) * inv_n;
        m.m1 += x[k] * i;
        m.m2 += x[k] * i * i;
        m.m3 += x[k] * i * i * i;
    }
    return m;
}

size_t check_dimension(const StateDistribution& d, const ModelParams& p) {
    if (d.n != p.n || d.probs.size() != static_cast<size_t>(p.n) + 1)
        throw std::domain_error("distribution dimension does not match the model");
    return d.probs.size();
}

// Dense row-major matrix helpers for the oracle; dimensions stay <= 13.
using Matrix = std::vector<double>;

Matrix identity(size_t d) {
    Matrix m(d * d, 0.0);
    for (size_t i = 0; i < d; ++i) m[i * d + i] = 1.0;
    return m;
}

Matrix multiply(const Matrix& lhs, const Matrix& rhs, size_t d) {
    Matrix out(d * d, 0.0);
    for (size_t i = 0; i < d; ++i)
        for (size_t k = 0; k < d; ++k) {
            const double v = lhs[i * d + k];
            if (v == 0.0) continue;
            for (size_t j = 0; j < d; ++j) out[i * d + j] += v * rhs[k * d + j];
        }
    return out;
}

double norm_inf(const Matrix& m) {
    double worst = 0.0;
    for (double v : m) worst = std::max(worst, std::abs(v));
    return worst;
}

}  // namespace

std::vector<double> forward_rhs(const StateDistribution& d, const ModelParams& p) {
    validate(p);
    check_dimension(d, p);
    const RateTable t = rate_table(p);
    std::vector<double> dx(d.probs.size());
    stencil(t, d.probs, dx);
    return dx;
}

MomentTrajectory solve_master(const ModelParams& p, const TimeGrid& grid,
                              bool retain_distributions) {
    validate(p);
    if (p.n > kMaxMasterN)
        throw CapabilityError("solve_master handles n <= " + std::to_string(kMaxMasterN));

    const RateTable table = rate_table(p);
    VectorField field;
    field.dimension = p.n + 1;
    field.eval = [&table](double, std::span<const double> x, std::span<double> dx) {
        stencil(table, x, dx);
    };

    const double max_rate = max_total_rate(p);
    const double node_dt = grid.times[1] - grid.times[0];
    const double h_max = max_rate > 0.0 ? kMasterStepFactor / max_rate : node_dt;
    const int substeps = substeps_for(node_dt, h_max);

    const StateDistribution x0 = initial_distribution(p);
    Trajectory traj = integrate(field, x0.probs, grid, substeps);

    MomentTrajectory out;
    out.grid = grid;
    out.moments.resize(traj.states.size());
    if (retain_distributions) out.distributions.resize(traj.states.size());

    for (size_t i = 0; i < traj.states.size(); ++i) {
        const std::vector<double>& x = traj.states[i];
        double sum = 0.0;
        for (size_t k = 0; k < x.size(); ++k) {
            if (x[k] < -1e-9)
                throw IntegrationError("probability went below -1e-9", grid.times[i],
                                       static_cast<int>(k));
            sum += x[k];
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw IntegrationError("probability mass drifted past 1e-9", grid.times[i], -1);

        out.moments[i] = moments_of_span(x, p.n);

        if (retain_distributions) {
            StateDistribution d;
            d.n = p.n;
            d.probs.resize(x.size());
            double clamped_sum = 0.0;
            for (size_t k = 0; k < x.size(); ++k) {
                double v = x[k];
                if (v < 0.0) v = 0.0;
                if (v > 1.0) v = 1.0;
                d.probs[k] = v;
                clamped_sum += v;
            }
            for (double& v : d.probs) v /= clamped_sum;
            out.distributions[i] = std::move(d);
        }
    }
    return out;
}

StateDistribution matexp_oracle(const ModelParams& p, double t) {
    validate(p);
    if (!(t >= 0.0) || !std::isfinite(t))
        throw std::domain_error("matexp_oracle requires finite t >= 0");
    if (p.n > kMaxOracleN)
        throw CapabilityError("matexp_oracle handles n <= " + std::to_string(kMaxOracleN));

    const size_t d = static_cast<size_t>(p.n) + 1;
    const RateTable table = rate_table(p);

    // A = t * Q^T, row-major: A[row][col] is the flow rate from state col.
    Matrix a(d * d, 0.0);
    for (size_t k = 0; k < d; ++k) {
        a[k * d + k] = -t * (table.a[k] + table.c[k]);
        if (k + 1 < d) a[(k + 1) * d + k] = t * table.a[k];
        if (k > 0) a[(k - 1) * d + k] = t * table.c[k];
    }

    double norm1 = 0.0;  // max column sum of |A|
    for (size_t col = 0; col < d; ++col) {
        double s = 0.0;
        for (size_t row = 0; row < d; ++row) s += std::abs(a[row * d + col]);
        norm1 = std::max(norm1, s);
    }
    int squarings = 0;
    if (norm1 > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
        const double scale = std::ldexp(1.0, -squarings);
        for (double& v : a) v *= scale;
    }

    // exp(A) by Taylor series; with |A| <= 0.5 thirty terms are far past
    // double precision.
    Matrix sum = identity(d);
    Matrix term = identity(d);
    for (int j = 1; j <= 40; ++j) {
        term = multiply(term, a, d);
        const double inv = 1.0 / static_cast<double>(j);
        for (double& v : term) v *= inv;
        for (size_t idx = 0; idx < sum.size(); ++idx) sum[idx] += term[idx];
        if (norm_inf(term) < 1e-20) break;
    }
    for (int s = 0; s < squarings; ++s) sum = multiply(sum, sum, d);

    const StateDistribution x0 = initial_distribution(p);
    StateDistribution out;
    out.n = p.n;
    out.probs.assign(d, 0.0);
    for (size_t row = 0; row < d; ++row) {
        double v = 0.0;
        for (size_t col = 0; col < d; ++col) v += sum[row * d + col] * x0.probs[col];
        out.probs[row] = v;
    }
    if (!distribution_is_valid(out))
        throw std::runtime_error("matrix exponential produced an invalid distribution");
    return out;
}

std::pair<double, double> moment_identity_residuals(const StateDistribution& d,
                                                    const ModelParams& p) {
    const std::vector<double> dx = forward_rhs(d, p);
    const Moments m = moments(d);

    const double inv_n = 1.0 / static_cast<double>(p.n);
    double dm1 = 0.0;
    double dm2 = 0.0;
    for (size_t k = 0; k < dx.size(); ++k) {
        const double i = static_cast<double>(k) * inv_n;
        dm1 += dx[k] * i;
        dm2 += dx[k] * i * i;
    }

    const double rhs1 = p.tau * (m.m1 - m.m2) - p.gamma * m.m1;
    const double rhs2 = 2.0 * p.tau * (m.m2 - m.m3) - 2.0 * p.gamma * m.m2 +
                        inv_n * (p.tau * (m.m1 - m.m2) + p.gamma * m.m1);
    return {dm1 - rhs1, dm2 - rhs2};
}

}  // namespace sis
