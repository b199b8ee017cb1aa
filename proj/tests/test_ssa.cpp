#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sis/master.hpp"
#include "sis/meanfield.hpp"
#include "sis/ssa.hpp"

using namespace sis;

TEST_CASE("open-interval uniforms never touch the endpoints") {
    std::mt19937_64 eng(1);
    for (int i = 0; i < 100000; ++i) {
        const double v = uniform_open01(eng);
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("replication engines are deterministic and distinct") {
    std::mt19937_64 a = replication_engine(42, 0);
    std::mt19937_64 b = replication_engine(42, 0);
    std::mt19937_64 c = replication_engine(42, 1);
    CHECK(a() == b());
    CHECK(a() != c());
}

TEST_CASE("absorbing start gives the all-zero path") {
    const ModelParams p{2.0, 1.0, 20, 0.0};
    std::mt19937_64 eng = replication_engine(42, 0);
    for (double v : sample_path(p, TimeGrid::uniform(10.0, 51), eng)) CHECK(v == 0.0);
}

TEST_CASE("no recovery from full infection gives the all-one path") {
    const ModelParams p{2.0, 0.0, 20, 1.0};
    std::mt19937_64 eng = replication_engine(42, 0);
    for (double v : sample_path(p, TimeGrid::uniform(10.0, 51), eng)) CHECK(v == 1.0);
}

TEST_CASE("single-node death times follow the exponential law") {
    // Path sits at 1 until an Exp(1) jump; censor-correct the grid reading
    // by half a node spacing.
    const ModelParams p{0.0, 1.0, 1, 1.0};
    const TimeGrid grid = TimeGrid::uniform(10.0, 2001);
    const double dt = grid.times[1] - grid.times[0];
    double sum = 0.0;
    const int reps = 100000;
    for (int r = 0; r < reps; ++r) {
        std::mt19937_64 eng = replication_engine(42, r);
        const std::vector<double> path = sample_path(p, grid, eng);
        size_t first_zero = path.size();
        for (size_t i = 0; i < path.size(); ++i)
            if (path[i] == 0.0) {
                first_zero = i;
                break;
            }
        // jumps past the horizon are recorded at t_end; the truncation bias
        // is exp(-10), far below the tolerance
        const double switch_time =
            first_zero == path.size() ? grid.t_end : grid.times[first_zero] - 0.5 * dt;
        sum += switch_time;
    }
    CHECK(std::abs(sum / reps - 1.0) <= 0.01);
}

TEST_CASE("estimates with one dead replication are all zero") {
    const ModelParams p{2.0, 1.0, 20, 0.0};
    const MonteCarloEstimate est = estimate_moments(p, TimeGrid::uniform(5.0, 11), SsaConfig{1, 7});
    for (size_t i = 0; i < est.m1_hat.size(); ++i) {
        CHECK(est.m1_hat[i] == 0.0);
        CHECK(est.m2_hat[i] == 0.0);
        CHECK(est.se1[i] == 0.0);
        CHECK(est.se2[i] == 0.0);
    }
}

TEST_CASE("same seed reruns are bit-identical, independent of threads") {
    const ModelParams p{2.0, 1.0, 30, 0.1};
    const TimeGrid grid = TimeGrid::uniform(5.0, 51);
    const SsaConfig cfg{500, 42};
    const MonteCarloEstimate a = estimate_moments(p, grid, cfg, 1);
    const MonteCarloEstimate b = estimate_moments(p, grid, cfg, 1);
    const MonteCarloEstimate c = estimate_moments(p, grid, cfg, 4);
    for (size_t i = 0; i < a.m1_hat.size(); ++i) {
        CHECK(a.m1_hat[i] == b.m1_hat[i]);
        CHECK(a.m1_hat[i] == c.m1_hat[i]);
        CHECK(a.m2_hat[i] == b.m2_hat[i]);
        CHECK(a.m2_hat[i] == c.m2_hat[i]);
        CHECK(a.se1[i] == c.se1[i]);
        CHECK(a.se2[i] == c.se2[i]);
    }
}

TEST_CASE("sampled moments agree with the exact solver") {
    // The 4-SE band needs enough surviving paths for the sample SE to mean
    // anything; the subcritical run is therefore checked over a horizon
    // where extinction is not yet near-total.
    struct Case {
        ModelParams p;
        double t_end;
    };
    const Case cases[] = {
        {{2.0, 1.0, 20, 0.1}, 10.0},
        {{1.0, 2.0, 20, 0.5}, 6.0},
        {{3.0, 1.0, 50, 0.1}, 10.0},
    };
    const SsaConfig cfg{10000, 42};
    for (const Case& c : cases) {
        const TimeGrid grid = TimeGrid::uniform(c.t_end, 101);
        const MomentTrajectory mt = solve_master(c.p, grid);
        const MonteCarloEstimate est = estimate_moments(c.p, grid, cfg, 2);
        int ok1 = 0;
        int ok2 = 0;
        for (size_t i = 0; i < grid.times.size(); ++i) {
            if (std::abs(est.m1_hat[i] - mt.moments[i].m1) <= 4.0 * est.se1[i] + 1e-12) ++ok1;
            if (std::abs(est.m2_hat[i] - mt.moments[i].m2) <= 4.0 * est.se2[i] + 1e-12) ++ok2;
        }
        const int need = static_cast<int>(0.95 * static_cast<double>(grid.times.size()));
        CHECK(ok1 >= need);
        CHECK(ok2 >= need);
    }
}

TEST_CASE("mse estimate matches its algebraic expansion on the same sample") {
    const ModelParams p{2.0, 1.0, 20, 0.1};
    const TimeGrid grid = TimeGrid::uniform(10.0, 51);
    const SsaConfig cfg{2000, 42};
    const MeanFieldSolution y = mf_closed_form_solution(p, grid);
    const MonteCarloEstimate est = estimate_mse(p, grid, cfg, y, 2);
    for (size_t i = 0; i < grid.times.size(); ++i) {
        const double expanded =
            est.m2_hat[i] - 2.0 * y.y[i] * est.m1_hat[i] + y.y[i] * y.y[i];
        CHECK(std::abs(est.mse_hat[i] - expanded) <= 1e-12);
    }
}

TEST_CASE("mse shrinks when the population grows") {
    const TimeGrid grid = TimeGrid::uniform(10.0, 101);
    const SsaConfig cfg{10000, 42};
    double sup_small = 0.0;
    double sup_large = 0.0;
    {
        const ModelParams p{2.0, 1.0, 50, 0.1};
        const MonteCarloEstimate est = estimate_mse(p, grid, cfg, mf_closed_form_solution(p, grid), 2);
        for (double v : est.mse_hat) sup_small = std::max(sup_small, v);
    }
    {
        const ModelParams p{2.0, 1.0, 400, 0.1};
        const MonteCarloEstimate est = estimate_mse(p, grid, cfg, mf_closed_form_solution(p, grid), 2);
        for (double v : est.mse_hat) sup_large = std::max(sup_large, v);
    }
    CHECK(sup_large < sup_small);
}

TEST_CASE("mse against the sampled path itself is zero") {
    const ModelParams p{2.0, 1.0, 20, 0.1};
    const TimeGrid grid = TimeGrid::uniform(5.0, 51);
    const SsaConfig cfg{1, 42};
    // replication 0 of the estimator draws exactly this path
    std::mt19937_64 eng = replication_engine(cfg.seed, 0);
    MeanFieldSolution contrived;
    contrived.grid = grid;
    contrived.y = sample_path(p, grid, eng);
    const MonteCarloEstimate est = estimate_mse(p, grid, cfg, contrived);
    for (double v : est.mse_hat) CHECK(v == 0.0);
}

TEST_CASE("mse rejects references on another grid") {
    const ModelParams p{2.0, 1.0, 20, 0.1};
    const MeanFieldSolution y = mf_closed_form_solution(p, TimeGrid::uniform(10.0, 11));
    CHECK_THROWS_AS(estimate_mse(p, TimeGrid::uniform(10.0, 21), SsaConfig{10, 1}, y),
                    std::domain_error);
}

TEST_CASE("extinction frequency matches the exact absorbing mass") {
    const ModelParams p{2.0, 1.0, 20, 0.1};
    const TimeGrid grid = TimeGrid::uniform(10.0, 21);
    const int reps = 10000;
    int absorbed = 0;
    for (int r = 0; r < reps; ++r) {
        std::mt19937_64 eng = replication_engine(42, r);
        if (sample_path(p, grid, eng).back() == 0.0) ++absorbed;
    }
    const MomentTrajectory mt = solve_master(p, grid, true);
    const double x0 = mt.distributions.back().probs[0];
    const double frac = static_cast<double>(absorbed) / reps;
    const double se = std::sqrt(x0 * (1.0 - x0) / reps);
    CHECK(std::abs(frac - x0) <= 4.0 * se);
}
