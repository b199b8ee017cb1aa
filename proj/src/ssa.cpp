#include "sis/ssa.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace sis {

namespace {

constexpr long long kBlockReps = 64;

void sample_path_into(const ModelParams& p, const TimeGrid& grid, std::mt19937_64& eng,
                      std::vector<double>& out) {
    const size_t num_points = grid.times.size();
    out.resize(num_points);
    const double inv_n = 1.0 / static_cast<double>(p.n);

    int k = initial_infected_count(p);
    double t = 0.0;
    size_t idx = 0;

    while (true) {
        const double a = infection_rate(k, p);
        const double c = recovery_rate(k, p);
        const double total = a + c;
        if (total <= 0.0) break;  // absorbed

        const double wait = -std::log(uniform_open01(eng)) / total;
        const int jump = uniform_open01(eng) * total < a ? 1 : -1;
        const double t_jump = t + wait;

        while (idx < num_points && grid.times[idx] < t_jump)
            out[idx++] = static_cast<double>(k) * inv_n;
        if (t_jump > grid.t_end) break;

        k += jump;
        t = t_jump;
    }
    while (idx < num_points) out[idx++] = static_cast<double>(k) * inv_n;
}

struct Accumulator {
    std::vector<double> s1, s2, s4, smse, smse2;

    explicit Accumulator(size_t num_points, bool with_mse)
        : s1(num_points, 0.0), s2(num_points, 0.0), s4(num_points, 0.0) {
        if (with_mse) {
            smse.assign(num_points, 0.0);
            smse2.assign(num_points, 0.0);
        }
    }

    void add_path(const std::vector<double>& path, const std::vector<double>* y) {
        for (size_t j = 0; j < path.size(); ++j) {
            const double i = path[j];
            const double i2 = i * i;
            s1[j] += i;
            s2[j] += i2;
            s4[j] += i2 * i2;
            if (y) {
                const double e = i - (*y)[j];
                const double e2 = e * e;
                smse[j] += e2;
                smse2[j] += e2 * e2;
            }
        }
    }

    void merge(const Accumulator& other) {
        for (size_t j = 0; j < s1.size(); ++j) {
            s1[j] += other.s1[j];
            s2[j] += other.s2[j];
            s4[j] += other.s4[j];
        }
        for (size_t j = 0; j < smse.size(); ++j) {
            smse[j] += other.smse[j];
            smse2[j] += other.smse2[j];
        }
    }
};

// Standard error of a sample mean from the raw sum and sum of squares.
double se_of_mean(double sum, double sum_sq, long long reps) {
    if (reps < 2) return 0.0;
    const double r = static_cast<double>(reps);
    double var = (sum_sq - sum * sum / r) / (r - 1.0);
    if (var < 0.0) var = 0.0;
    return std::sqrt(var / r);
}

MonteCarloEstimate run_ensemble(const ModelParams& p, const TimeGrid& grid, const SsaConfig& cfg,
                                const std::vector<double>* y, unsigned threads) {
    validate(p);
    if (cfg.reps < 1) throw std::invalid_argument("reps must be >= 1");

    const size_t num_points = grid.times.size();
    const bool with_mse = y != nullptr;
    const long long num_blocks = (cfg.reps + kBlockReps - 1) / kBlockReps;

    std::vector<Accumulator> partials(static_cast<size_t>(num_blocks),
                                      Accumulator(num_points, with_mse));

    auto run_block = [&](long long b) {
        Accumulator& acc = partials[static_cast<size_t>(b)];
        std::vector<double> path;
        const long long lo = b * kBlockReps;
        const long long hi = std::min(cfg.reps, lo + kBlockReps);
        for (long long r = lo; r < hi; ++r) {
            std::mt19937_64 eng = replication_engine(cfg.seed, r);
            sample_path_into(p, grid, eng, path);
            acc.add_path(path, y);
        }
    };

    unsigned workers = threads == 0 ? std::thread::hardware_concurrency() : threads;
    if (workers < 1) workers = 1;
    workers = std::min<unsigned>(workers, static_cast<unsigned>(num_blocks));

    if (workers <= 1) {
        for (long long b = 0; b < num_blocks; ++b) run_block(b);
    } else {
        std::atomic<long long> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (long long b = next.fetch_add(1); b < num_blocks; b = next.fetch_add(1))
                    run_block(b);
            });
        for (std::thread& th : pool) th.join();
    }

    // Fixed-order reduction over block index.
    Accumulator total(num_points, with_mse);
    for (const Accumulator& part : partials) total.merge(part);

    MonteCarloEstimate est;
    est.grid = grid;
    est.m1_hat.resize(num_points);
    est.se1.resize(num_points);
    est.m2_hat.resize(num_points);
    est.se2.resize(num_points);
    if (with_mse) {
        est.mse_hat.resize(num_points);
        est.mse_se.resize(num_points);
    }
    const double r = static_cast<double>(cfg.reps);
    for (size_t j = 0; j < num_points; ++j) {
        est.m1_hat[j] = total.s1[j] / r;
        est.m2_hat[j] = total.s2[j] / r;
        est.se1[j] = se_of_mean(total.s1[j], total.s2[j], cfg.reps);
        est.se2[j] = se_of_mean(total.s2[j], total.s4[j], cfg.reps);
        if (with_mse) {
            est.mse_hat[j] = total.smse[j] / r;
            est.mse_se[j] = se_of_mean(total.smse[j], total.smse2[j], cfg.reps);
        }
    }
    return est;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 replication_engine(std::uint64_t seed, long long rep) {
    if (rep < 0) throw std::invalid_argument("replication index must be >= 0");
    const std::uint64_t stride = 0x9e3779b97f4a7c15ULL;
    return std::mt19937_64(splitmix64(seed + stride * (static_cast<std::uint64_t>(rep) + 1)));
}

double uniform_open01(std::mt19937_64& eng) {
    return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

std::vector<double> sample_path(const ModelParams& p, const TimeGrid& grid,
                                std::mt19937_64& stream) {
    validate(p);
    std::vector<double> out;
    sample_path_into(p, grid, stream, out);
    return out;
}

MonteCarloEstimate estimate_moments(const ModelParams& p, const TimeGrid& grid,
                                    const SsaConfig& cfg, unsigned threads) {
    return run_ensemble(p, grid, cfg, nullptr, threads);
}

MonteCarloEstimate estimate_mse(const ModelParams& p, const TimeGrid& grid, const SsaConfig& cfg,
                                const MeanFieldSolution& y, unsigned threads) {
    if (!grid.same_as(y.grid))
        throw std::domain_error("reference solution lives on a different grid");
    return run_ensemble(p, grid, cfg, &y.y, threads);
}

}  // namespace sis
