#pragma once

// Genetic algorithm with generalized opposition-based learning (GOL)
// mutation. Produces an in-bounds starting point for the local solver.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dgparam/boxmap.hpp"

namespace dgparam {

using Rng = std::mt19937_64;

/// Cost of a candidate; +inf marks an infeasible one.
using CostFn = std::function<double(const Eigen::VectorXd&)>;

struct Chromosome {
    Eigen::VectorXd theta;
    double cost = 0.0;
    double fitness = 0.0;
};

struct Population {
    std::vector<Chromosome> members;
    std::size_t generation = 0;
    Eigen::VectorXd dyn_lo;
    Eigen::VectorXd dyn_hi;

    /// Recomputes dyn_lo/dyn_hi as the per-parameter min/max over members.
    void update_dynamic_bounds();
    std::size_t best_index() const;
};

struct GaConfig {
    std::size_t population = 40;
    std::size_t generations = 10;
    double mutate_fraction = 0.2;
    std::size_t elite = 1;
    /// Sampling width for one-sided bounds, one entry per free parameter.
    /// Empty means 10 for every one-sided entry.
    std::vector<double> caps;

    void validate(std::size_t dimension) const;
};

inline constexpr double kFitnessEpsilon = 1e-30;

/// 1 / (cost + 1e-30); zero for infinite or non-finite cost.
double fitness_from_cost(double cost);

/// Uniform sampling inside the bounds; one-sided ranges are sampled over
/// [lo, lo + cap] or [hi - cap, hi].
Population init_population(std::span<const BoundSpec> specs, std::size_t size,
                           std::span<const double> caps, Rng& rng);

/// Fills cost and fitness of every member. Costs may be computed
/// concurrently; the random stream is never touched here.
void evaluate_fitness(Population& pop, const CostFn& cost, bool parallel = true);

/// Roulette-wheel draw of one member index. Throws AllInfeasible when every
/// fitness is zero.
std::size_t roulette_draw(const Population& pop, Rng& rng);

/// Draws `pairs` parent pairs with replacement, fitness proportionate.
std::vector<std::pair<std::size_t, std::size_t>> select_parents(const Population& pop,
                                                                std::size_t pairs, Rng& rng);

/// Arithmetic blend: child_k = (1-b) k + b l, child_l = b k + (1-b) l.
std::pair<Eigen::VectorXd, Eigen::VectorXd> crossover(const Eigen::VectorXd& parent_k,
                                                      const Eigen::VectorXd& parent_l,
                                                      double crossover_blend);
std::pair<Eigen::VectorXd, Eigen::VectorXd> crossover(const Eigen::VectorXd& parent_k,
                                                      const Eigen::VectorXd& parent_l, Rng& rng);

/// Opposition point b (lo + hi) - theta; nullopt if it falls outside [lo, hi].
std::optional<double> gol_candidate(double theta, double dyn_lo, double dyn_hi, double blend);

/// GOL mutation of member m against the population's dynamic bounds.
Eigen::VectorXd mutate_gol(const Population& pop, std::size_t m, Rng& rng);

struct GaResult {
    Chromosome best;
    std::vector<double> best_cost_trace;  // best-ever cost after init and each generation
    std::size_t evaluations = 0;
    std::size_t generations = 0;
    bool reinitialized = false;
};

/// Runs the configured number of generations and returns the best member
/// ever seen.
GaResult run_ga(const CostFn& cost, std::span<const BoundSpec> specs, const GaConfig& config,
                std::uint64_t seed, bool parallel = true);

}  // namespace dgparam
