#include "dgparam/golga.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dgparam/errors.hpp"
#include "dgparam/parallel.hpp"

namespace dgparam {

namespace {

constexpr double kDefaultCap = 10.0;

double uniform(Rng& rng, double lo, double hi) {
    if (!(hi > lo)) return lo;
    std::uniform_real_distribution<double> dist(lo, hi);
    return std::clamp(dist(rng), lo, hi);
}

void evaluate_members(Population& pop, std::span<const std::size_t> which, const CostFn& cost,
                      bool parallel) {
    auto run = [&](std::size_t i) {
        Chromosome& c = pop.members[which[i]];
        double h = std::numeric_limits<double>::infinity();
        try {
            h = cost(c.theta);
        } catch (const Error&) {
        }
        c.cost = std::isfinite(h) ? h : std::numeric_limits<double>::infinity();
        c.fitness = fitness_from_cost(c.cost);
    };
    if (parallel) {
        parallel_for(which.size(), run);
    } else {
        for (std::size_t i = 0; i < which.size(); ++i) run(i);
    }
}

bool all_infeasible(const Population& pop) {
    return std::none_of(pop.members.begin(), pop.members.end(),
                        [](const Chromosome& c) { return c.fitness > 0.0; });
}

}  // namespace

void Population::update_dynamic_bounds() {
    if (members.empty()) return;
    dyn_lo = members.front().theta;
    dyn_hi = members.front().theta;
    for (const Chromosome& c : members) {
        dyn_lo = dyn_lo.cwiseMin(c.theta);
        dyn_hi = dyn_hi.cwiseMax(c.theta);
    }
}

std::size_t Population::best_index() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < members.size(); ++i) {
        if (members[i].fitness > members[best].fitness) best = i;
    }
    return best;
}

void GaConfig::validate(std::size_t dimension) const {
    if (population < 4) throw Error("GA population must be at least 4");
    if (!(mutate_fraction >= 0.0 && mutate_fraction <= 1.0)) {
        throw Error("GA mutate fraction must lie in [0, 1]");
    }
    if (elite >= population) throw Error("GA elite count must be below the population size");
    if (!caps.empty() && caps.size() != dimension) {
        throw Error("GA caps must have one entry per free parameter");
    }
}

double fitness_from_cost(double cost) {
    if (!std::isfinite(cost) || cost < 0.0) return 0.0;
    return 1.0 / (cost + kFitnessEpsilon);
}

Population init_population(std::span<const BoundSpec> specs, std::size_t size,
                           std::span<const double> caps, Rng& rng) {
    if (size < 4) throw Error("GA population must be at least 4");
    validate_bounds(specs);
    const auto n = static_cast<Eigen::Index>(specs.size());
    Population pop;
    pop.members.resize(size);
    for (Chromosome& c : pop.members) {
        c.theta.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const BoundSpec& s = specs[static_cast<std::size_t>(i)];
            const double cap = caps.empty() ? kDefaultCap : caps[static_cast<std::size_t>(i)];
            switch (s.kind) {
                case BoundKind::TwoSided: c.theta[i] = uniform(rng, s.lo, s.hi); break;
                case BoundKind::LowerOnly: c.theta[i] = uniform(rng, s.lo, s.lo + cap); break;
                case BoundKind::UpperOnly: c.theta[i] = uniform(rng, s.hi - cap, s.hi); break;
                case BoundKind::Fixed: throw BadBounds("fixed parameters cannot be sampled");
            }
        }
    }
    pop.update_dynamic_bounds();
    return pop;
}

void evaluate_fitness(Population& pop, const CostFn& cost, bool parallel) {
    std::vector<std::size_t> all(pop.members.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    evaluate_members(pop, all, cost, parallel);
}

std::size_t roulette_draw(const Population& pop, Rng& rng) {
    double total = 0.0;
    for (const Chromosome& c : pop.members) total += c.fitness;
    if (!(total > 0.0)) throw AllInfeasible("every chromosome has zero fitness");
    const double target = uniform(rng, 0.0, total);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < pop.members.size(); ++i) {
        if (pop.members[i].fitness <= 0.0) continue;
        last_positive = i;
        acc += pop.members[i].fitness;
        if (target < acc) return i;
    }
    return last_positive;
}

std::vector<std::pair<std::size_t, std::size_t>> select_parents(const Population& pop,
                                                                std::size_t pairs, Rng& rng) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(pairs);
    for (std::size_t i = 0; i < pairs; ++i) {
        const std::size_t a = roulette_draw(pop, rng);
        const std::size_t b = roulette_draw(pop, rng);
        out.emplace_back(a, b);
    }
    return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> crossover(const Eigen::VectorXd& parent_k,
                                                      const Eigen::VectorXd& parent_l,
                                                      double crossover_blend) {
    const double b = crossover_blend;
    Eigen::VectorXd child_k = (1.0 - b) * parent_k + b * parent_l;
    Eigen::VectorXd child_l = b * parent_k + (1.0 - b) * parent_l;
    // Rounding can step a hair outside the parents' hull.
    const Eigen::VectorXd lo = parent_k.cwiseMin(parent_l);
    const Eigen::VectorXd hi = parent_k.cwiseMax(parent_l);
    child_k = child_k.cwiseMax(lo).cwiseMin(hi);
    child_l = child_l.cwiseMax(lo).cwiseMin(hi);
    return {std::move(child_k), std::move(child_l)};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> crossover(const Eigen::VectorXd& parent_k,
                                                      const Eigen::VectorXd& parent_l, Rng& rng) {
    return crossover(parent_k, parent_l, uniform(rng, 0.0, 1.0));
}

std::optional<double> gol_candidate(double theta, double dyn_lo, double dyn_hi, double blend) {
    const double candidate = blend * (dyn_lo + dyn_hi) - theta;
    if (candidate >= dyn_lo && candidate <= dyn_hi) return candidate;
    return std::nullopt;
}

Eigen::VectorXd mutate_gol(const Population& pop, std::size_t m, Rng& rng) {
    const Eigen::VectorXd& theta = pop.members.at(m).theta;
    Eigen::VectorXd out(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double lo = pop.dyn_lo[i];
        const double hi = pop.dyn_hi[i];
        const double blend = uniform(rng, 0.0, 1.0);
        const auto candidate = gol_candidate(theta[i], lo, hi, blend);
        out[i] = candidate ? *candidate : uniform(rng, lo, hi);
    }
    return out;
}

GaResult run_ga(const CostFn& cost, std::span<const BoundSpec> specs, const GaConfig& config,
                std::uint64_t seed, bool parallel) {
    config.validate(specs.size());
    Rng rng(seed);
    GaResult result;

    Population pop = init_population(specs, config.population, config.caps, rng);
    evaluate_fitness(pop, cost, parallel);
    result.evaluations += pop.members.size();
    if (all_infeasible(pop)) {
        pop = init_population(specs, config.population, config.caps, rng);
        evaluate_fitness(pop, cost, parallel);
        result.evaluations += pop.members.size();
        result.reinitialized = true;
        if (all_infeasible(pop)) {
            throw AllInfeasible("no feasible chromosome after reinitializing the population");
        }
    }
    result.best = pop.members[pop.best_index()];
    result.best_cost_trace.push_back(result.best.cost);

    const std::size_t size = config.population;
    const auto mutants = static_cast<std::size_t>(
        std::round(config.mutate_fraction * static_cast<double>(size)));

    for (std::size_t gen = 1; gen <= config.generations; ++gen) {
        // Elites survive unmodified.
        std::vector<std::size_t> order(size);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return pop.members[a].fitness > pop.members[b].fitness;
        });
        Population next;
        next.generation = gen;
        for (std::size_t e = 0; e < config.elite; ++e) next.members.push_back(pop.members[order[e]]);

        while (next.members.size() < size) {
            const auto [k, l] = select_parents(pop, 1, rng).front();
            auto [child_k, child_l] = crossover(pop.members[k].theta, pop.members[l].theta, rng);
            next.members.push_back(Chromosome{std::move(child_k), 0.0, 0.0});
            if (next.members.size() < size) {
                next.members.push_back(Chromosome{std::move(child_l), 0.0, 0.0});
            }
        }
        std::vector<std::size_t> offspring(size - config.elite);
        std::iota(offspring.begin(), offspring.end(), config.elite);
        evaluate_members(next, offspring, cost, parallel);
        result.evaluations += offspring.size();
        next.update_dynamic_bounds();

        // Worst offspring are replaced by their opposition points.
        std::stable_sort(offspring.begin(), offspring.end(), [&](std::size_t a, std::size_t b) {
            return next.members[a].fitness < next.members[b].fitness;
        });
        const std::size_t count = std::min(mutants, offspring.size());
        std::vector<std::size_t> mutated(offspring.begin(), offspring.begin() + count);
        std::vector<Eigen::VectorXd> replacements;
        replacements.reserve(count);
        for (std::size_t idx : mutated) replacements.push_back(mutate_gol(next, idx, rng));
        for (std::size_t i = 0; i < count; ++i) next.members[mutated[i]].theta = replacements[i];
        evaluate_members(next, mutated, cost, parallel);
        result.evaluations += count;
        next.update_dynamic_bounds();

        pop = std::move(next);
        const Chromosome& gen_best = pop.members[pop.best_index()];
        if (gen_best.fitness > result.best.fitness) result.best = gen_best;
        result.best_cost_trace.push_back(result.best.cost);
        result.generations = gen;
    }
    return result;
}

}  // namespace dgparam
