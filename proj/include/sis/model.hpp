#pragma once

#include <vector>

// Complete-graph SIS instance: parameters, distributions over the
// infected count, moment extraction, and the shared uniform time grid.
// Everything here is an immutable value object once built; operations
// are pure functions.

namespace sis {

struct ModelParams {
    double tau = 2.0;    // infection pressure per unit time (per edge: tau/n)
    double gamma = 1.0;  // recovery rate per unit time
    int n = 50;          // node count
    double u = 0.1;      // initial infected fraction
};

// Throws std::invalid_argument unless tau >= 0, gamma >= 0, n >= 1 and
// u in [0,1], all finite.
void validate(const ModelParams& p);

// round(n*u), half away from zero. Always in [0, n].
int initial_infected_count(const ModelParams& p);

// Aggregate transition rates of the lumped chain at k infected nodes.
// k outside [0, n] -> std::domain_error.
double infection_rate(int k, const ModelParams& p);  // (tau/n) * k * (n-k)
double recovery_rate(int k, const ModelParams& p);   // gamma * k

// max over k of infection_rate(k) + recovery_rate(k); used for step control.
double max_total_rate(const ModelParams& p);

struct StateDistribution {
    int n = 0;
    std::vector<double> probs;  // length n+1; probs[k] = P(k infected)
};

// Entries >= -tol and total mass within tol of 1.
bool distribution_is_valid(const StateDistribution& d, double tol = 1e-9);

// Point mass at initial_infected_count(p).
StateDistribution initial_distribution(const ModelParams& p);

// First three moments of the infected fraction i = k/n.
struct Moments {
    double m1 = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
};

// m_r = sum_k probs[k] * (k/n)^r; linear in the distribution.
Moments moments(const StateDistribution& d);

struct TimeGrid {
    double t_end = 0.0;
    int num_points = 0;
    std::vector<double> times;  // strictly increasing, times[0] == 0, back() == t_end

    // Uniformly spaced nodes over [0, t_end]; t_end > 0, num_points >= 2.
    static TimeGrid uniform(double t_end, int num_points);

    bool same_as(const TimeGrid& other) const;
};

}  // namespace sis
