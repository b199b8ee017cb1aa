#include "sis/model.hpp"

#include <cmath>
#include <stdexcept>

namespace sis {

void validate(const ModelParams& p) {
    if (!std::isfinite(p.tau) || p.tau < 0.0)
        throw std::invalid_argument("tau must be finite and >= 0");
    if (!std::isfinite(p.gamma) || p.gamma < 0.0)
        throw std::invalid_argument("gamma must be finite and >= 0");
    if (p.n < 1)
        throw std::invalid_argument("n must be >= 1");
    if (!std::isfinite(p.u) || p.u < 0.0 || p.u > 1.0)
        throw std::invalid_argument("u must lie in [0, 1]");
}

int initial_infected_count(const ModelParams& p) {
    validate(p);
    long long k0 = std::llround(static_cast<double>(p.n) * p.u);
    if (k0 < 0) k0 = 0;
    if (k0 > p.n) k0 = p.n;
    return static_cast<int>(k0);
}

double infection_rate(int k, const ModelParams& p) {
    if (k < 0 || k > p.n)
        throw std::domain_error("infected count outside [0, n]");
    return (p.tau / p.n) * static_cast<double>(k) * static_cast<double>(p.n - k);
}

double recovery_rate(int k, const ModelParams& p) {
    if (k < 0 || k > p.n)
        throw std::domain_error("infected count outside [0, n]");
    return p.gamma * static_cast<double>(k);
}

double max_total_rate(const ModelParams& p) {
    validate(p);
    double worst = 0.0;
    for (int k = 0; k <= p.n; ++k) {
        const double total = infection_rate(k, p) + recovery_rate(k, p);
        if (total > worst) worst = total;
    }
    return worst;
}

bool distribution_is_valid(const StateDistribution& d, double tol) {
    if (d.n < 1 || d.probs.size() != static_cast<size_t>(d.n) + 1) return false;
    double sum = 0.0;
    for (double x : d.probs) {
        if (!std::isfinite(x) || x < -tol) return false;
        sum += x;
    }
    return std::abs(sum - 1.0) <= tol;
}

StateDistribution initial_distribution(const ModelParams& p) {
    const int k0 = initial_infected_count(p);
    StateDistribution d;
    d.n = p.n;
    d.probs.assign(static_cast<size_t>(p.n) + 1, 0.0);
    d.probs[static_cast<size_t>(k0)] = 1.0;
    return d;
}

Moments moments(const StateDistribution& d) {
    if (d.n < 1 || d.probs.size() != static_cast<size_t>(d.n) + 1)
        throw std::domain_error("distribution length does not match n + 1");
    const double inv_n = 1.0 / static_cast<double>(d.n);
    Moments m;
    for (size_t k = 0; k < d.probs.size(); ++k) {
        const double i = static_cast<double>(k) * inv_n;
        const double x = d.probs[k];
        m.m1 += x * i;
        m.m2 += x * i * i;
        m.m3 += x * i * i * i;
    }
    return m;
}

TimeGrid TimeGrid::uniform(double t_end, int num_points) {
    if (!std::isfinite(t_end) || t_end <= 0.0)
        throw std::invalid_argument("t_end must be finite and > 0");
    if (num_points < 2)
        throw std::invalid_argument("num_points must be >= 2");
    TimeGrid g;
    g.t_end = t_end;
    g.num_points = num_points;
    g.times.resize(static_cast<size_t>(num_points));
    const double denom = static_cast<double>(num_points - 1);
    for (int i = 0; i < num_points; ++i)
        g.times[static_cast<size_t>(i)] = t_end * (static_cast<double>(i) / denom);
    g.times.front() = 0.0;
    g.times.back() = t_end;
    for (int i = 0; i + 1 < num_points; ++i)
        if (!(g.times[static_cast<size_t>(i)] < g.times[static_cast<size_t>(i) + 1]))
            throw std::invalid_argument("grid nodes are not strictly increasing");
    return g;
}

bool TimeGrid::same_as(const TimeGrid& other) const {
    return num_points == other.num_points && t_end == other.t_end && times == other.times;
}

}  // namespace sis
