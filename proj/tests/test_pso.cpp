#include "gaitid/pso.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gaitid;

namespace {

const std::array<double, 3> kCenter{0.7, -1.2, 2.1};

double bowl(const std::array<double, 3>& x) {
    double s = 0.0;
    for (std::size_t k = 0; k < 3; ++k) s += (x[k] - kCenter[k]) * (x[k] - kCenter[k]);
    return -s;
}

PSOConfig<3> box(std::uint64_t seed) {
    PSOConfig<3> c;
    c.bounds = {{{-3.0, 3.0}, {-3.0, 3.0}, {-3.0, 3.0}}};
    c.seed = seed;
    return c;
}

}  // namespace

TEST(Pso, BowlFoundWithinTolerance) {
    const auto grid = oracle::grid_argmax3([](const std::vector<double>& x) { return bowl({x[0], x[1], x[2]}); },
                                           -3.0, 3.0, 60);
    for (std::size_t k = 0; k < 3; ++k) ASSERT_NEAR(grid[k], kCenter[k], 0.05 + 1e-12);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto r = pso_maximize<3>(bowl, box(seed));
        for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(r.best_position[k], grid[k], 0.05) << "seed " << seed;
    }
}

TEST(Pso, HistoryNonDecreasing) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto r = pso_maximize<3>([](const auto& x) { return std::sin(5 * x[0]) * std::cos(3 * x[1]) - x[2] * x[2]; },
                                       box(seed));
        ASSERT_EQ(r.history.size(), 31u);
        for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_GE(r.history[i], r.history[i - 1]);
        EXPECT_EQ(r.history.back(), r.best_fitness);
    }
}

TEST(Pso, SeedDeterminism) {
    const auto a = pso_maximize<3>(bowl, box(42));
    const auto b = pso_maximize<3>(bowl, box(42));
    EXPECT_EQ(a.history, b.history);
    EXPECT_EQ(a.best_position, b.best_position);
}

TEST(Pso, ConstantFitness) {
    auto cfg = box(3);
    cfg.record_trajectory = true;
    const auto r = pso_maximize<3>([](const auto&) { return 0.25; }, cfg);
    for (double h : r.history) EXPECT_EQ(h, 0.25);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_GE(r.best_position[k], -3.0);
        EXPECT_LE(r.best_position[k], 3.0);
    }
}

TEST(Pso, PositionsStayInBounds) {
    PSOConfig<3> cfg;
    cfg.bounds = {{{-1.0, 0.0}, {2.0, 2.5}, {-3.0, 3.0}}};
    cfg.record_trajectory = true;
    // Optimum outside the box drives particles against the walls.
    const auto r = pso_maximize<3>([](const auto& x) { return x[0] + x[1] - x[2]; }, cfg);
    for (const auto& step : r.trajectory)
        for (const auto& p : step)
            for (std::size_t k = 0; k < 3; ++k) {
                EXPECT_GE(p[k], cfg.bounds[k].first);
                EXPECT_LE(p[k], cfg.bounds[k].second);
            }
    EXPECT_DOUBLE_EQ(r.best_position[0], 0.0);
}

// With c1 = c2 = 0 each displacement is w times the previous one until a wall is hit.
TEST(Pso, PureInertialDecay) {
    PSOConfig<1> cfg;
    cfg.swarm_size = 2;
    cfg.cognitive = 0.0;
    cfg.social = 0.0;
    cfg.bounds = {{{-100.0, 100.0}}};
    cfg.iterations = 20;
    cfg.record_trajectory = true;
    const auto r = pso_maximize<1>([](const auto& x) { return -x[0] * x[0]; }, cfg);
    for (std::size_t i = 0; i < cfg.swarm_size; ++i) {
        const double x0 = r.trajectory[0][i][0], x1 = r.trajectory[1][i][0];
        const double v0 = (x1 - x0) / cfg.inertia;
        for (std::size_t t = 1; t < r.trajectory.size(); ++t) {
            double closed = x0;
            for (std::size_t s = 1; s <= t; ++s) closed += v0 * std::pow(cfg.inertia, double(s));
            if (std::abs(closed) >= 100.0) break;
            EXPECT_NEAR(r.trajectory[t][i][0], closed, 1e-9);
        }
    }
}

TEST(Pso, NonFiniteScoredAsMinusInfinity) {
    const auto r = pso_maximize<3>([](const auto& x) { return x[0] > 0 ? NAN : -x[0]; }, box(5));
    EXPECT_GT(r.non_finite_evaluations, 0u);
    EXPECT_TRUE(std::isfinite(r.best_fitness));
    EXPECT_LE(r.best_position[0], 0.0);
}

TEST(Pso, AllNonFiniteFails) {
    EXPECT_THROW(pso_maximize<3>([](const auto&) { return NAN; }, box(6)), OptimizationError);
}

TEST(Pso, ConfigValidation) {
    auto cfg = box(7);
    cfg.swarm_size = 1;
    EXPECT_THROW(pso_maximize<3>(bowl, cfg), InvalidParameterError);
    cfg = box(7);
    cfg.bounds[1] = {1.0, 1.0};
    EXPECT_THROW(pso_maximize<3>(bowl, cfg), InvalidParameterError);
}

TEST(KernelSearch, LogSpaceMapping) {
    const auto cfg = default_kernel_search(9);
    const auto r = pso_optimize(
        [](const KernelParams& p) {
            return -(std::pow(std::log10(p.a) - 1.0, 2) + std::pow(std::log10(p.b) + 0.5, 2) +
                     std::pow(std::log10(p.C) - 2.0, 2));
        },
        cfg);
    EXPECT_NEAR(std::log10(r.params.a), 1.0, 0.05);
    EXPECT_NEAR(std::log10(r.params.b), -0.5, 0.05);
    EXPECT_NEAR(std::log10(r.params.C), 2.0, 0.05);
    EXPECT_NO_THROW(r.params.validate());
}
