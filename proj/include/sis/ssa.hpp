#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sis/meanfield.hpp"
#include "sis/model.hpp"

// Event-driven simulation of the lumped SIS chain and Monte Carlo
// estimation of its moments. Stream-split rule: replication r draws from
// an mt19937_64 seeded with splitmix64(seed + (r+1)*0x9e3779b97f4a7c15),
// so results never depend on how replications are scheduled across
// workers. Aggregation reduces fixed-size replication blocks in index
// order, which keeps estimates bit-identical for any thread count.

namespace sis {

struct SsaConfig {
    long long reps = 10000;
    std::uint64_t seed = 42;
};

std::uint64_t splitmix64(std::uint64_t x);
std::mt19937_64 replication_engine(std::uint64_t seed, long long rep);

// Uniform draw on the open interval (0,1); safe under log().
double uniform_open01(std::mt19937_64& eng);

// One exact path: from state k wait Exponential(a_k + c_k), step to k+1
// with probability a_k/(a_k + c_k), else to k-1. The pre-jump state is
// recorded at every grid node strictly before the jump time. Total rate
// zero stops the clock (k = 0 always; k = n when gamma = 0).
std::vector<double> sample_path(const ModelParams& p, const TimeGrid& grid,
                                std::mt19937_64& stream);

struct MonteCarloEstimate {
    TimeGrid grid;
    std::vector<double> m1_hat, se1;
    std::vector<double> m2_hat, se2;
    std::vector<double> mse_hat, mse_se;  // filled only when a reference y was supplied
};

// Sample means of i and i^2 per node with standard errors.
MonteCarloEstimate estimate_moments(const ModelParams& p, const TimeGrid& grid,
                                    const SsaConfig& cfg, unsigned threads = 1);

// Adds the direct sample mean of (i - y)^2 per node; y must live on the
// same grid. The same replications as estimate_moments are drawn, so
// mse_hat agrees with m2_hat - 2*y*m1_hat + y^2 up to rounding.
MonteCarloEstimate estimate_mse(const ModelParams& p, const TimeGrid& grid, const SsaConfig& cfg,
                                const MeanFieldSolution& y, unsigned threads = 1);

}  // namespace sis
