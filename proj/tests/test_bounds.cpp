#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "sis/bounds.hpp"
#include "sis/master.hpp"
#include "sis/meanfield.hpp"

using namespace sis;

namespace {

double sup_abs_diff(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

double uniform_open(std::mt19937_64& eng) {
    return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

const ModelParams kBattery[] = {
    {2.0, 1.0, 50, 0.1}, {2.0, 1.0, 50, 0.5}, {3.0, 1.0, 50, 0.1},
    {3.0, 1.0, 50, 0.5}, {1.0, 2.0, 50, 0.1}, {1.0, 2.0, 50, 0.5},
};

}  // namespace

TEST_CASE("half-power helper clamps negatives") {
    CHECK(z2_pow_3_2(0.0) == 0.0);
    CHECK(z2_pow_3_2(-1e-15) == 0.0);
    CHECK(z2_pow_3_2(0.01) == doctest::Approx(0.001).epsilon(1e-15));
    CHECK(z2_pow_3_2(0.25) == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("coupled right-hand side") {
    SUBCASE("disease-free fixed point") {
        const Deriv2 d = coupled_rhs(0.0, 0.0, ModelParams{2.0, 1.0, 10, 0.1});
        CHECK(d.dz1 == 0.0);
        CHECK(d.dz2 == 0.0);
    }
    SUBCASE("direct evaluation") {
        const Deriv2 d = coupled_rhs(0.5, 0.25, ModelParams{2.0, 1.0, 10, 0.1});
        CHECK(d.dz1 == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(d.dz2 == doctest::Approx(0.1).epsilon(1e-14));
    }
    SUBCASE("the finite-size correction is exactly the coupled/limit gap") {
        const ModelParams p{2.0, 1.0, 10, 0.1};
        const Deriv2 c = coupled_rhs(0.5, 0.25, p);
        const Deriv2 l = limit_rhs(0.5, 0.25, p);
        CHECK(c.dz1 == l.dz1);
        CHECK(c.dz2 - l.dz2 == doctest::Approx(0.1).epsilon(1e-14));
    }
}

TEST_CASE("limit right-hand side") {
    SUBCASE("origin is a fixed point") {
        const Deriv2 d = limit_rhs(0.0, 0.0, ModelParams{2.0, 1.0, 10, 0.1});
        CHECK(d.dz1 == 0.0);
        CHECK(d.dz2 == 0.0);
    }
    SUBCASE("on the parabola z2 = y^2 the second component is 2*y*y'") {
        const ModelParams p{2.0, 1.0, 10, 0.1};
        const double y = 0.3;
        const Deriv2 d = limit_rhs(y, y * y, p);
        CHECK(d.dz2 == doctest::Approx(2.0 * y * mf_rhs(y, p)).epsilon(1e-14));
        CHECK(d.dz2 == doctest::Approx(0.072).epsilon(1e-14));
    }
    SUBCASE("endemic fixed point") {
        const Deriv2 d = limit_rhs(0.5, 0.25, ModelParams{2.0, 1.0, 10, 0.1});
        CHECK(d.dz1 == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(d.dz2 == doctest::Approx(0.0).epsilon(1e-15));
    }
}

TEST_CASE("decoupled z2 forcing constants") {
    const ModelParams p{2.0, 1.0, 10, 0.1};
    CHECK(decoupled_z2_forcing(p, Z2Forcing::loose) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(decoupled_z2_forcing(p, Z2Forcing::tight) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(decoupled_z2_rhs(0.01, p, 0.6) == doctest::Approx(0.616).epsilon(1e-14));
}

TEST_CASE("limit solve reproduces (y, y^2) to 1e-8") {
    const TimeGrid grid = TimeGrid::uniform(10.0, 201);
    for (const ModelParams& p : kBattery) {
        const BoundTrajectory limit = solve_limit(p, grid);
        CHECK(limit.kind == BoundKind::limit);
        double worst1 = 0.0;
        double worst2 = 0.0;
        for (size_t i = 0; i < grid.times.size(); ++i) {
            const double y = mf_closed_form(grid.times[i], p);
            worst1 = std::max(worst1, std::abs(limit.z1[i] - y));
            worst2 = std::max(worst2, std::abs(limit.z2[i] - y * y));
        }
        CHECK(worst1 <= 1e-8);
        CHECK(worst2 <= 1e-8);
    }
}

TEST_CASE("initial conditions are exact") {
    const ModelParams p{2.0, 1.0, 25, 0.3};
    const TimeGrid grid = TimeGrid::uniform(2.0, 5);
    for (const BoundTrajectory& b : {solve_coupled(p, grid), solve_limit(p, grid)}) {
        CHECK(b.z1[0] == 0.3);
        CHECK(b.z2[0] == 0.3 * 0.3);
    }
    CHECK(solve_decoupled_z2(p, grid)[0] == 0.3 * 0.3);
}

TEST_CASE("u = 0 keeps the coupled and limit systems at the origin") {
    const ModelParams p{2.0, 1.0, 10, 0.0};
    const TimeGrid grid = TimeGrid::uniform(10.0, 41);
    const BoundTrajectory coupled = solve_coupled(p, grid);
    const BoundTrajectory limit = solve_limit(p, grid);
    for (size_t i = 0; i < grid.times.size(); ++i) {
        CHECK(coupled.z1[i] == 0.0);
        CHECK(coupled.z2[i] == 0.0);
        CHECK(limit.z1[i] == 0.0);
        CHECK(limit.z2[i] == 0.0);
    }
}

TEST_CASE("zero forcing and u = 0 keep the decoupled z2 at zero") {
    const ModelParams p{2.0, 1.0, 10, 0.0};
    const std::vector<double> z2 =
        solve_decoupled_z2_with_forcing(p, TimeGrid::uniform(10.0, 41), 0.0);
    for (double v : z2) CHECK(v == 0.0);
}

TEST_CASE("large n brings the finite-size systems to the limit") {
    SUBCASE("coupled, supercritical, short horizon") {
        const ModelParams p{2.0, 1.0, 1000000, 0.1};
        const TimeGrid grid = TimeGrid::uniform(2.0, 81);
        const BoundTrajectory coupled = solve_coupled(p, grid);
        double worst = 0.0;
        for (size_t i = 0; i < grid.times.size(); ++i) {
            const double y = mf_closed_form(grid.times[i], p);
            worst = std::max(worst, std::abs(coupled.z1[i] - y));
            worst = std::max(worst, std::abs(coupled.z2[i] - y * y));
        }
        CHECK(worst <= 1e-4);
    }
    SUBCASE("coupled, subcritical, full horizon") {
        const ModelParams p{1.0, 2.0, 1000000, 0.5};
        const TimeGrid grid = TimeGrid::uniform(10.0, 201);
        const BoundTrajectory coupled = solve_coupled(p, grid);
        const BoundTrajectory limit = solve_limit(p, grid);
        CHECK(sup_abs_diff(coupled.z1, limit.z1) <= 1e-4);
        CHECK(sup_abs_diff(coupled.z2, limit.z2) <= 1e-4);
    }
    SUBCASE("decoupled z2, supercritical, short horizon") {
        const ModelParams p{2.0, 1.0, 1000000, 0.1};
        const TimeGrid grid = TimeGrid::uniform(2.0, 81);
        const std::vector<double> z2 = solve_decoupled_z2(p, grid);
        double worst = 0.0;
        for (size_t i = 0; i < grid.times.size(); ++i) {
            const double y = mf_closed_form(grid.times[i], p);
            worst = std::max(worst, std::abs(z2[i] - y * y));
        }
        CHECK(worst <= 1e-4);
    }
}

TEST_CASE("decoupled z1 with zero forcing grows like u*exp((tau-gamma)t)") {
    const ModelParams p{2.0, 1.0, 10, 0.1};
    const TimeGrid grid = TimeGrid::uniform(5.0, 101);
    const std::vector<double> zeros(grid.times.size(), 0.0);
    const std::vector<double> z1 = solve_decoupled_z1(p, grid, zeros);
    for (size_t i = 0; i < grid.times.size(); ++i) {
        const double expected = 0.1 * std::exp(grid.times[i]);
        CHECK(std::abs(z1[i] - expected) <= 1e-9 * std::max(1.0, expected));
    }
}

TEST_CASE("decoupled z1 with u = 0 and zero drive stays zero") {
    const ModelParams p{2.0, 1.0, 10, 0.0};
    const TimeGrid grid = TimeGrid::uniform(5.0, 21);
    const std::vector<double> zeros(grid.times.size(), 0.0);
    for (double v : solve_decoupled_z1(p, grid, zeros)) CHECK(v == 0.0);
}

TEST_CASE("decoupled z1 rejects series on the wrong grid") {
    const ModelParams p{2.0, 1.0, 10, 0.1};
    const TimeGrid grid = TimeGrid::uniform(5.0, 21);
    const std::vector<double> wrong(grid.times.size() + 1, 0.0);
    CHECK_THROWS_AS(solve_decoupled_z1(p, grid, wrong), std::domain_error);
}

TEST_CASE("driving the decoupled z1 with y^2 reproduces y") {
    SUBCASE("subcritical, full horizon") {
        const ModelParams p{1.0, 2.0, 50, 0.5};
        const TimeGrid grid = TimeGrid::uniform(10.0, 5001);
        std::vector<double> ysq(grid.times.size());
        for (size_t i = 0; i < grid.times.size(); ++i) {
            const double y = mf_closed_form(grid.times[i], p);
            ysq[i] = y * y;
        }
        const std::vector<double> z1 = solve_decoupled_z1(p, grid, ysq);
        double worst = 0.0;
        for (size_t i = 0; i < grid.times.size(); ++i)
            worst = std::max(worst, std::abs(z1[i] - mf_closed_form(grid.times[i], p)));
        CHECK(worst <= 1e-6);
    }
    SUBCASE("supercritical, short horizon (the linear system amplifies drive error)") {
        const ModelParams p{2.0, 1.0, 50, 0.1};
        const TimeGrid grid = TimeGrid::uniform(2.0, 2001);
        std::vector<double> ysq(grid.times.size());
        for (size_t i = 0; i < grid.times.size(); ++i) {
            const double y = mf_closed_form(grid.times[i], p);
            ysq[i] = y * y;
        }
        const std::vector<double> z1 = solve_decoupled_z1(p, grid, ysq);
        double worst = 0.0;
        for (size_t i = 0; i < grid.times.size(); ++i)
            worst = std::max(worst, std::abs(z1[i] - mf_closed_form(grid.times[i], p)));
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("decoupled z2 is pointwise monotone in n") {
    const TimeGrid grid = TimeGrid::uniform(10.0, 201);
    int sizes[] = {10, 100, 1000};
    for (const ModelParams& base : kBattery) {
        std::vector<std::vector<double>> curves;
        for (int n : sizes) {
            ModelParams p = base;
            p.n = n;
            curves.push_back(solve_decoupled_z2(p, grid));
        }
        for (size_t s = 0; s + 1 < curves.size(); ++s)
            for (size_t i = 0; i < grid.times.size(); ++i)
                CHECK(curves[s][i] >= curves[s + 1][i] - 1e-9);
    }
}

TEST_CASE("both variants converge to the limit as n grows") {
    const TimeGrid grid = TimeGrid::uniform(10.0, 201);
    const ModelParams base{2.0, 1.0, 10, 0.1};
    const BoundTrajectory limit = solve_limit(base, grid);

    double prev_coupled = std::numeric_limits<double>::infinity();
    double prev_decoupled = std::numeric_limits<double>::infinity();
    for (int n : {10, 100, 1000, 10000, 100000, 1000000}) {
        ModelParams p = base;
        p.n = n;
        const BoundTrajectory coupled = solve_coupled(p, grid);
        const double dev_coupled =
            std::max(sup_abs_diff(coupled.z1, limit.z1), sup_abs_diff(coupled.z2, limit.z2));
        CHECK(dev_coupled < prev_coupled);
        prev_coupled = dev_coupled;

        const std::vector<double> z2 = solve_decoupled_z2(p, grid);
        const std::vector<double> z1 = solve_decoupled_z1(p, grid, z2);
        const double dev_decoupled =
            std::max(sup_abs_diff(z1, limit.z1), sup_abs_diff(z2, limit.z2));
        CHECK(dev_decoupled < prev_decoupled);
        prev_decoupled = dev_decoupled;
    }
}

TEST_CASE("the coupled first component is exactly the first-moment flow") {
    // Same identity the exact solver's residual test checks: feeding the
    // measured (m1, m2) of any distribution into g1 reproduces dm1/dt.
    std::mt19937_64 eng(59);
    std::exponential_distribution<double> exp_draw(1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(eng() % 60);
        const ModelParams p{4.0 * uniform_open(eng), 4.0 * uniform_open(eng), n, 0.5};
        StateDistribution d{n, std::vector<double>(static_cast<size_t>(n) + 1)};
        double sum = 0.0;
        for (double& x : d.probs) {
            x = exp_draw(eng);
            sum += x;
        }
        for (double& x : d.probs) x /= sum;

        const Moments m = moments(d);
        const Deriv2 g = coupled_rhs(m.m1, m.m2, p);
        CHECK(g.dz1 == p.tau * (m.m1 - m.m2) - p.gamma * m.m1);

        const std::vector<double> dx = forward_rhs(d, p);
        double dm1 = 0.0;
        for (size_t k = 0; k < dx.size(); ++k) dm1 += dx[k] * (static_cast<double>(k) / n);
        CHECK(std::abs(dm1 - g.dz1) <= 1e-12);
    }
}

TEST_CASE("tight forcing stays below loose forcing") {
    const ModelParams p{2.0, 1.0, 20, 0.1};
    const TimeGrid grid = TimeGrid::uniform(10.0, 101);
    const std::vector<double> loose = solve_decoupled_z2(p, grid, Z2Forcing::loose);
    const std::vector<double> tight = solve_decoupled_z2(p, grid, Z2Forcing::tight);
    for (size_t i = 0; i < grid.times.size(); ++i) CHECK(tight[i] <= loose[i] + 1e-12);
}
