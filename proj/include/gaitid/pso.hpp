#pragma once

#include "gaitid/core.hpp"
#include "gaitid/kelm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace gaitid {

template <std::size_t Dim>
struct PSOConfig {
    std::size_t swarm_size = 20;
    std::size_t iterations = 30;
    double inertia = 0.7298;
    double cognitive = 1.49618;
    double social = 1.49618;
    std::array<std::pair<double, double>, Dim> bounds{};
    std::uint64_t seed = 0;
    /// Keep every particle position per iteration (for diagnostics and tests).
    bool record_trajectory = false;

    void validate() const {
        if (swarm_size < 2) throw InvalidParameterError("PSO swarm size must be at least 2");
        if (iterations < 1) throw InvalidParameterError("PSO needs at least one iteration");
        for (const auto& [lo, hi] : bounds)
            if (!(lo < hi)) throw InvalidParameterError("PSO bounds need low < high in every dimension");
    }
};

template <std::size_t Dim>
struct Particle {
    std::array<double, Dim> position{};
    std::array<double, Dim> velocity{};
    std::array<double, Dim> best_position{};
    double best_fitness = -std::numeric_limits<double>::infinity();
};

template <std::size_t Dim>
struct PSOResult {
    std::array<double, Dim> best_position{};
    double best_fitness = -std::numeric_limits<double>::infinity();
    /// Global best after initialization (entry 0) and after each iteration.
    std::vector<double> history;
    std::size_t non_finite_evaluations = 0;
    std::vector<std::vector<std::array<double, Dim>>> trajectory;
};

namespace detail {

/// Independent stream per (iteration, particle) so results do not depend on evaluation order.
inline std::mt19937_64 split_rng(std::uint64_t seed, std::uint64_t iteration, std::uint64_t particle) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(iteration), static_cast<std::uint32_t>(particle), 0x9e3779b9u};
    return std::mt19937_64(seq);
}

}  // namespace detail

/// Global-best particle swarm maximizing `fitness` over a box:
/// v <- w v + c1 r1 (pbest - x) + c2 r2 (gbest - x), x <- clamp(x + v).
/// Velocities are clamped to half of each dimension's width.
template <std::size_t Dim, class Fitness>
PSOResult<Dim> pso_maximize(Fitness&& fitness, const PSOConfig<Dim>& cfg) {
    cfg.validate();
    std::vector<Particle<Dim>> swarm(cfg.swarm_size);
    PSOResult<Dim> result;
    std::array<double, Dim> vmax{};
    for (std::size_t k = 0; k < Dim; ++k) vmax[k] = 0.5 * (cfg.bounds[k].second - cfg.bounds[k].first);

    auto evaluate = [&](const std::array<double, Dim>& x) {
        const double f = fitness(x);
        if (!std::isfinite(f)) {
            ++result.non_finite_evaluations;
            return -std::numeric_limits<double>::infinity();
        }
        return f;
    };
    auto update_global = [&](const Particle<Dim>& p) {
        if (p.best_fitness > result.best_fitness) {
            result.best_fitness = p.best_fitness;
            result.best_position = p.best_position;
        }
    };

    for (std::size_t i = 0; i < swarm.size(); ++i) {
        auto rng = detail::split_rng(cfg.seed, 0, i);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        auto& p = swarm[i];
        for (std::size_t k = 0; k < Dim; ++k) {
            const auto [lo, hi] = cfg.bounds[k];
            p.position[k] = lo + u(rng) * (hi - lo);
            p.velocity[k] = (2.0 * u(rng) - 1.0) * 0.5 * vmax[k];
        }
        p.best_position = p.position;
    }
    if (cfg.record_trajectory) {
        result.trajectory.emplace_back();
        for (const auto& p : swarm) result.trajectory.back().push_back(p.position);
    }
    for (auto& p : swarm) {
        p.best_fitness = evaluate(p.position);
        update_global(p);
    }
    if (result.best_fitness == -std::numeric_limits<double>::infinity()) {
        // Nothing usable yet; keep a defined position for the first comparison.
        result.best_position = swarm.front().position;
    }
    result.history.push_back(result.best_fitness);

    for (std::size_t it = 1; it <= cfg.iterations; ++it) {
        const auto gbest = result.best_position;
        for (std::size_t i = 0; i < swarm.size(); ++i) {
            auto rng = detail::split_rng(cfg.seed, it, i);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            auto& p = swarm[i];
            for (std::size_t k = 0; k < Dim; ++k) {
                const double r1 = u(rng);
                const double r2 = u(rng);
                double v = cfg.inertia * p.velocity[k] + cfg.cognitive * r1 * (p.best_position[k] - p.position[k]) +
                           cfg.social * r2 * (gbest[k] - p.position[k]);
                v = std::clamp(v, -vmax[k], vmax[k]);
                p.velocity[k] = v;
                p.position[k] = std::clamp(p.position[k] + v, cfg.bounds[k].first, cfg.bounds[k].second);
            }
        }
        if (cfg.record_trajectory) {
            result.trajectory.emplace_back();
            for (const auto& p : swarm) result.trajectory.back().push_back(p.position);
        }
        for (auto& p : swarm) {
            const double f = evaluate(p.position);
            if (f > p.best_fitness) {
                p.best_fitness = f;
                p.best_position = p.position;
            }
        }
        for (const auto& p : swarm) update_global(p);
        result.history.push_back(result.best_fitness);
    }
    if (result.best_fitness == -std::numeric_limits<double>::infinity())
        throw OptimizationError("every PSO fitness evaluation was non-finite");
    return result;
}

/// Search over (log10 a, log10 b, log10 C).
using KernelSearchConfig = PSOConfig<3>;

inline KernelSearchConfig default_kernel_search(std::uint64_t seed = 0) {
    KernelSearchConfig cfg;
    cfg.bounds = {{{-3.0, 3.0}, {-3.0, 3.0}, {-3.0, 3.0}}};
    cfg.seed = seed;
    return cfg;
}

inline KernelParams kernel_params_from_log(const std::array<double, 3>& x) {
    return {std::pow(10.0, x[0]), std::pow(10.0, x[1]), std::pow(10.0, x[2])};
}

struct KernelSearchResult {
    KernelParams params;
    double best_fitness = 0.0;
    std::vector<double> history;
    std::size_t non_finite_evaluations = 0;
};

/// Tunes (a, b, C) to maximize `fitness(KernelParams)`.
inline KernelSearchResult pso_optimize(const std::function<double(const KernelParams&)>& fitness,
                                       const KernelSearchConfig& cfg) {
    auto res = pso_maximize<3>([&](const std::array<double, 3>& x) { return fitness(kernel_params_from_log(x)); },
                               cfg);
    return {kernel_params_from_log(res.best_position), res.best_fitness, std::move(res.history),
            res.non_finite_evaluations};
}

}  // namespace gaitid
