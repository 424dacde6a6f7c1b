#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "dgparam/errors.hpp"
#include "dgparam/golga.hpp"

using namespace dgparam;
using Catch::Approx;

namespace {

const std::vector<BoundSpec> kSpecs = {
    BoundSpec::two_sided(-2.0, 3.0),
    BoundSpec::lower(0.5),
    BoundSpec::upper(-1.0),
    BoundSpec::two_sided(10.0, 10.5),
};

double sphere(const Eigen::VectorXd& x) { return x.squaredNorm(); }

Population with_fitness(std::vector<double> fitness) {
    Population pop;
    for (double f : fitness) pop.members.push_back(Chromosome{Eigen::VectorXd::Zero(1), 0.0, f});
    return pop;
}

std::vector<BoundSpec> cube(std::size_t n, double lo, double hi) {
    return std::vector<BoundSpec>(n, BoundSpec::two_sided(lo, hi));
}

}  // namespace

TEST_CASE("initial population lies in the sampling ranges", "[golga]") {
    Rng rng(3);
    const std::vector<double> caps = {1.0, 4.0, 2.0, 1.0};
    const Population pop = init_population(kSpecs, 500, caps, rng);
    REQUIRE(pop.members.size() == 500);
    for (const Chromosome& c : pop.members) {
        CHECK(c.theta[0] >= -2.0);
        CHECK(c.theta[0] <= 3.0);
        CHECK(c.theta[1] >= 0.5);
        CHECK(c.theta[1] <= 4.5);
        CHECK(c.theta[2] >= -3.0);
        CHECK(c.theta[2] <= -1.0);
        CHECK(c.theta[3] >= 10.0);
        CHECK(c.theta[3] <= 10.5);
    }
    Rng again(3);
    const Population same = init_population(kSpecs, 500, caps, again);
    for (std::size_t i = 0; i < 500; ++i) CHECK(same.members[i].theta == pop.members[i].theta);
}

TEST_CASE("init rejects small populations and fixed entries", "[golga]") {
    Rng rng(1);
    CHECK_THROWS_AS(init_population(kSpecs, 3, {}, rng), Error);
    const std::vector<BoundSpec> fixed = {BoundSpec::fixed()};
    CHECK_THROWS_AS(init_population(fixed, 10, {}, rng), BadBounds);
}

TEST_CASE("dynamic bounds bracket the members", "[golga]") {
    Rng rng(5);
    Population pop = init_population(kSpecs, 30, {}, rng);
    for (const Chromosome& c : pop.members) {
        CHECK((c.theta.array() >= pop.dyn_lo.array()).all());
        CHECK((c.theta.array() <= pop.dyn_hi.array()).all());
    }
    for (Eigen::Index i = 0; i < 4; ++i) {
        bool lo_hit = false, hi_hit = false;
        for (const Chromosome& c : pop.members) {
            lo_hit = lo_hit || c.theta[i] == pop.dyn_lo[i];
            hi_hit = hi_hit || c.theta[i] == pop.dyn_hi[i];
        }
        CHECK(lo_hit);
        CHECK(hi_hit);
    }
}

TEST_CASE("fitness from cost", "[golga]") {
    CHECK(fitness_from_cost(1.0) == Approx(1.0));
    CHECK(fitness_from_cost(0.0) == Approx(1e30));
    CHECK(fitness_from_cost(std::numeric_limits<double>::infinity()) == 0.0);
    CHECK(fitness_from_cost(std::nan("")) == 0.0);
    double previous = INFINITY;
    for (double h : {1e-6, 1e-3, 0.1, 1.0, 7.0, 1e4}) {
        CHECK(fitness_from_cost(h) < previous);
        previous = fitness_from_cost(h);
    }
}

TEST_CASE("roulette selection", "[golga]") {
    SECTION("only positive member is drawn") {
        const Population pop = with_fitness({0.0, 0.0, 2.5, 0.0});
        Rng rng(11);
        for (int i = 0; i < 200; ++i) CHECK(roulette_draw(pop, rng) == 2);
    }
    SECTION("draw frequencies follow fitness") {
        const Population pop = with_fitness({3.0, 1.0});
        Rng rng(12);
        int first = 0;
        const int draws = 40000;
        for (int i = 0; i < draws; ++i) first += roulette_draw(pop, rng) == 0 ? 1 : 0;
        const double ratio = static_cast<double>(first) / (draws - first);
        CHECK(ratio == Approx(3.0).epsilon(0.1));
    }
    SECTION("all zero fitness") {
        const Population pop = with_fitness({0.0, 0.0, 0.0, 0.0});
        Rng rng(13);
        CHECK_THROWS_AS(roulette_draw(pop, rng), AllInfeasible);
        CHECK_THROWS_AS(select_parents(pop, 2, rng), AllInfeasible);
    }
    SECTION("parent pairs") {
        const Population pop = with_fitness({1.0, 1.0, 1.0, 1.0});
        Rng rng(14);
        const auto pairs = select_parents(pop, 7, rng);
        CHECK(pairs.size() == 7);
        for (auto [a, b] : pairs) {
            CHECK(a < 4);
            CHECK(b < 4);
        }
    }
}

TEST_CASE("arithmetic crossover", "[golga]") {
    Eigen::VectorXd k(3), l(3);
    k << 1.0, -2.0, 5.0;
    l << 3.0, 2.0, 5.0;
    auto [a0, b0] = crossover(k, l, 0.0);
    CHECK(a0 == k);
    CHECK(b0 == l);
    auto [a1, b1] = crossover(k, l, 1.0);
    CHECK(a1 == l);
    CHECK(b1 == k);
    auto [ah, bh] = crossover(k, l, 0.5);
    CHECK(ah == bh);
    CHECK(ah[0] == 2.0);
    CHECK(ah[1] == 0.0);
    CHECK(ah[2] == 5.0);

    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        auto [x, y] = crossover(k, l, rng);
        CHECK(((x.array() >= k.cwiseMin(l).array()) && (x.array() <= k.cwiseMax(l).array())).all());
        CHECK(((y.array() >= k.cwiseMin(l).array()) && (y.array() <= k.cwiseMax(l).array())).all());
        CHECK((x + y - k - l).norm() <= 1e-12);
    }
}

TEST_CASE("opposition candidate", "[golga]") {
    CHECK(gol_candidate(0.0, 0.0, 2.0, 0.5) == 1.0);
    CHECK(gol_candidate(0.5, 0.0, 2.0, 1.0) == 1.5);
    CHECK(gol_candidate(0.0, 0.0, 2.0, 1.0) == 2.0);
    CHECK_FALSE(gol_candidate(1.9, 0.0, 2.0, 0.1).has_value());
    CHECK_FALSE(gol_candidate(0.1, 1.0, 2.0, 1.0).has_value());
}

TEST_CASE("mutation stays inside the dynamic bounds", "[golga]") {
    Rng rng(31);
    const auto specs = cube(5, -1.0, 1.0);
    Population pop = init_population(specs, 20, {}, rng);
    for (int trial = 0; trial < 500; ++trial) {
        const Eigen::VectorXd m = mutate_gol(pop, static_cast<std::size_t>(trial % 20), rng);
        CHECK((m.array() >= pop.dyn_lo.array()).all());
        CHECK((m.array() <= pop.dyn_hi.array()).all());
    }
}

TEST_CASE("configuration validation", "[golga]") {
    GaConfig c;
    CHECK_NOTHROW(c.validate(4));
    c.caps = {1.0};
    CHECK_THROWS_AS(c.validate(4), Error);
    c.caps.clear();
    c.elite = c.population;
    CHECK_THROWS_AS(c.validate(4), Error);
    c.elite = 1;
    c.mutate_fraction = 1.5;
    CHECK_THROWS_AS(c.validate(4), Error);
}

TEST_CASE("GA with zero generations returns the initial best", "[golga]") {
    GaConfig c;
    c.generations = 0;
    const auto specs = cube(3, -5.0, 5.0);
    const GaResult r = run_ga(sphere, specs, c, 7, false);
    CHECK(r.generations == 0);
    CHECK(r.evaluations == c.population);
    REQUIRE(r.best_cost_trace.size() == 1);

    Rng rng(7);
    Population pop = init_population(specs, c.population, {}, rng);
    double best = INFINITY;
    for (const Chromosome& m : pop.members) best = std::min(best, sphere(m.theta));
    CHECK(r.best.cost == best);
}

TEST_CASE("GA best cost never increases and stays in bounds", "[golga]") {
    GaConfig c;
    c.generations = 25;
    const auto specs = cube(4, -3.0, 7.0);
    std::size_t outside = 0;
    const auto cost = [&](const Eigen::VectorXd& x) {
        if ((x.array() < -3.0).any() || (x.array() > 7.0).any()) ++outside;
        return sphere(x);
    };
    const GaResult r = run_ga(cost, specs, c, 9, false);
    CHECK(outside == 0);
    CHECK(r.best_cost_trace.size() == 26);
    for (std::size_t i = 1; i < r.best_cost_trace.size(); ++i) {
        CHECK(r.best_cost_trace[i] <= r.best_cost_trace[i - 1]);
    }
    CHECK(r.best.cost == r.best_cost_trace.back());
    CHECK(r.best.cost == sphere(r.best.theta));
}

TEST_CASE("GA is reproducible and independent of threading", "[golga]") {
    GaConfig c;
    c.generations = 15;
    const auto specs = cube(6, -4.0, 4.0);
    const GaResult a = run_ga(sphere, specs, c, 42, false);
    const GaResult b = run_ga(sphere, specs, c, 42, true);
    CHECK(a.best.theta == b.best.theta);
    CHECK(a.best_cost_trace == b.best_cost_trace);
    const GaResult other = run_ga(sphere, specs, c, 43, false);
    CHECK(other.best.theta != a.best.theta);
}

TEST_CASE("GA improves on a sphere and beats random sampling", "[golga]") {
    GaConfig c;
    c.generations = 30;
    const auto specs = cube(6, -5.0, 5.0);
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const GaResult r = run_ga(sphere, specs, c, seed, false);
        CHECK(r.best_cost_trace.back() * 10.0 <= r.best_cost_trace.front());

        // Same evaluation budget spent on uniform samples.
        Rng rng(seed + 1000);
        std::uniform_real_distribution<double> u(-5.0, 5.0);
        double random_best = INFINITY;
        for (std::size_t e = 0; e < r.evaluations; ++e) {
            Eigen::VectorXd x(6);
            for (Eigen::Index i = 0; i < 6; ++i) x[i] = u(rng);
            random_best = std::min(random_best, sphere(x));
        }
        wins += r.best.cost < random_best ? 1 : 0;
    }
    CHECK(wins >= 9);
}

TEST_CASE("GA reinitializes once, then gives up", "[golga]") {
    GaConfig c;
    c.generations = 2;
    const auto specs = cube(2, 0.0, 1.0);
    int calls = 0;
    const GaResult r = run_ga([&](const Eigen::VectorXd& x) {
        return ++calls <= static_cast<int>(c.population) ? INFINITY : sphere(x);
    }, specs, c, 1, false);
    CHECK(r.reinitialized);
    CHECK(std::isfinite(r.best.cost));
    CHECK_THROWS_AS(run_ga([](const Eigen::VectorXd&) { return INFINITY; }, specs, c, 1, false),
                    AllInfeasible);
}
