#pragma once
// Non-learned baselines: fixed budget schedules crossed with greedy node
// selectors for influence episodes, a greedy router for orienteering, and a
// genetic search over daily allocation sequences.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ssco/aim.hpp"
#include "ssco/errors.hpp"
#include "ssco/graph.hpp"
#include "ssco/rng.hpp"
#include "ssco/sop.hpp"

namespace ssco {

enum class ScheduleKind { Average, Normal, Static };

struct BudgetSchedule {
    ScheduleKind kind = ScheduleKind::Average;
    int cycle_length = 2;  // Static only
};

// Budget given to one stage. Average spreads the remainder over the earliest
// stages; Normal spends everything at stage 0; Static splits evenly across
// cycle starts.
inline int budget_allocate(const BudgetSchedule& schedule, int total_budget, int horizon,
                           int stage) {
    if (stage < 0 || stage >= horizon) throw InvalidInstanceError("budget_allocate: bad stage");
    switch (schedule.kind) {
        case ScheduleKind::Average: {
            const int base = total_budget / horizon;
            const int remainder = total_budget % horizon;
            return base + (stage < remainder ? 1 : 0);
        }
        case ScheduleKind::Normal:
            return stage == 0 ? total_budget : 0;
        case ScheduleKind::Static: {
            const int cycle = std::max(1, schedule.cycle_length);
            if (stage % cycle != 0) return 0;
            const int starts = (horizon + cycle - 1) / cycle;
            const int index = stage / cycle;
            const int base = total_budget / starts;
            const int remainder = total_budget % starts;
            return base + (index < remainder ? 1 : 0);
        }
    }
    return 0;
}

enum class SelectorKind { Degree, Score };

namespace detail {

template <typename ScoreFn>
std::vector<int> top_legal_nodes(const std::vector<std::uint8_t>& mask, int count,
                                 ScoreFn&& score) {
    std::vector<int> legal;
    for (int v = 0; v < static_cast<int>(mask.size()); ++v)
        if (mask[static_cast<std::size_t>(v)]) legal.push_back(v);
    std::stable_sort(legal.begin(), legal.end(), [&](int a, int b) {
        const double sa = score(a), sb = score(b);
        if (sa != sb) return sa > sb;
        return a < b;
    });
    if (static_cast<int>(legal.size()) > count) legal.resize(static_cast<std::size_t>(count));
    return legal;
}

}  // namespace detail

// Top-`count` legal nodes by out-degree, ties by lowest index.
inline std::vector<int> select_by_degree(const GraphInstance& g,
                                         const std::vector<std::uint8_t>& mask, int count) {
    return detail::top_legal_nodes(mask, count, [&](int v) {
        return static_cast<double>(g.out_degree[static_cast<std::size_t>(v)]);
    });
}

// Top-`count` legal nodes by summed incoming edge probability.
inline std::vector<int> select_by_score(const GraphInstance& g,
                                        const std::vector<std::uint8_t>& mask, int count) {
    return detail::top_legal_nodes(mask, count,
                                   [&](int v) { return g.in_prob_sum[static_cast<std::size_t>(v)]; });
}

// One full influence episode for a (schedule, selector) baseline pair.
inline double run_aim_heuristic_episode(AimEnv& env, const BudgetSchedule& schedule,
                                        SelectorKind selector, std::uint64_t episode_seed) {
    env.reset(episode_seed);
    double total = 0.0;
    const int horizon = env.horizon();
    const int total_budget = env.total_budget();
    for (int stage = 0; stage < horizon; ++stage) {
        int allocation = budget_allocate(schedule, total_budget, horizon, stage);
        allocation = std::min(allocation, env.remaining_budget());
        for (int i = 0; i < allocation; ++i) {
            const auto mask = env.legal_mask();
            const auto picks = selector == SelectorKind::Degree
                                   ? select_by_degree(env.instance(), mask, 1)
                                   : select_by_score(env.instance(), mask, 1);
            if (picks.empty()) break;
            total += env.primitive_step(picks[0]);
        }
        total += env.end_of_day();
    }
    return total;
}

// Highest-profit city reachable within the day's remaining limit; if nothing
// is reachable penalty-free, the highest-profit legal city (penalties then
// apply through the environment). Ties break toward the lowest index.
// Returns -1 when no legal city exists.
inline int sop_greedy_policy(const SopInstance& inst, const SopState& s) {
    const auto mask = sop_legal_mask(inst, s);
    const double slack = inst.daily_limit - s.day_distance;
    int best_reachable = -1, best_any = -1;
    for (int c = 0; c < inst.city_count(); ++c) {
        if (!mask[static_cast<std::size_t>(c)]) continue;
        const double p = s.profits[static_cast<std::size_t>(c)];
        if (best_any < 0 || p > s.profits[static_cast<std::size_t>(best_any)]) best_any = c;
        if (inst.distance(s.current_city, c) <= slack) {
            if (best_reachable < 0 || p > s.profits[static_cast<std::size_t>(best_reachable)])
                best_reachable = c;
        }
    }
    return best_reachable >= 0 ? best_reachable : best_any;
}

// One orienteering episode with a fixed daily allocation and greedy selection.
inline double run_sop_allocation_episode(SopEnv& env, const std::vector<int>& allocation,
                                         std::uint64_t episode_seed) {
    env.reset(episode_seed);
    double total = 0.0;
    for (int stage = 0; stage < env.horizon(); ++stage) {
        int budget = stage < static_cast<int>(allocation.size())
                         ? allocation[static_cast<std::size_t>(stage)]
                         : 0;
        budget = std::min(budget, env.remaining_budget());
        for (int i = 0; i < budget; ++i) {
            const int city = sop_greedy_policy(env.instance(), env.state());
            if (city < 0) break;
            total += env.primitive_step(city);
        }
        total += env.end_of_day();
    }
    return total;
}

inline double run_sop_heuristic_episode(SopEnv& env, const BudgetSchedule& schedule,
                                        std::uint64_t episode_seed) {
    std::vector<int> allocation(static_cast<std::size_t>(env.horizon()));
    for (int t = 0; t < env.horizon(); ++t)
        allocation[static_cast<std::size_t>(t)] =
            budget_allocate(schedule, env.total_budget(), env.horizon(), t);
    return run_sop_allocation_episode(env, allocation, episode_seed);
}

struct GaConfig {
    int population = 16;
    int generations = 20;
    double mutation_rate = 0.2;
    double crossover_rate = 0.8;
    int elitism = 2;
    int eval_episodes = 4;  // common random numbers across individuals
};

struct GaResult {
    std::vector<int> allocation;
    double fitness = 0.0;
};

namespace detail {

// Scales a non-negative vector so it sums to `total`; remainders go to the
// largest fractional parts, ties toward the lowest index.
inline std::vector<int> repair_allocation(std::vector<double> raw, int total) {
    if (raw.empty()) throw InvalidInstanceError("ga: cannot repair empty allocation");
    double sum = 0.0;
    for (double& x : raw) {
        if (x < 0.0) x = 0.0;
        sum += x;
    }
    std::vector<int> fixed(raw.size(), 0);
    if (sum <= 0.0) {
        // Degenerate individual: spread evenly.
        for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = 1.0;
        sum = static_cast<double>(raw.size());
    }
    std::vector<std::pair<double, std::size_t>> fractional;
    int assigned = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double scaled = raw[i] * static_cast<double>(total) / sum;
        fixed[i] = static_cast<int>(std::floor(scaled));
        assigned += fixed[i];
        fractional.push_back({scaled - std::floor(scaled), i});
    }
    std::stable_sort(fractional.begin(), fractional.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (int r = 0; r < total - assigned; ++r)
        ++fixed[fractional[static_cast<std::size_t>(r) % fractional.size()].second];
    return fixed;
}

}  // namespace detail

// Genetic search over daily allocation sequences, evaluated with the greedy
// router under common random numbers.
inline GaResult ga_optimize(const SopInstance& inst, int horizon, int total_budget,
                            const GaConfig& config, std::uint64_t seed) {
    if (config.population < 2) throw InvalidInstanceError("ga: population must be >= 2");
    if (horizon < 1) throw InvalidInstanceError("ga: horizon must be >= 1");
    Rng rng = Rng::from_key({0x6761ULL /*"ga"*/, seed, inst.instance_id});

    SopEnv env(&inst, horizon, total_budget);
    auto fitness_of = [&](const std::vector<int>& allocation) {
        double total = 0.0;
        for (int e = 0; e < config.eval_episodes; ++e)
            total += run_sop_allocation_episode(env, allocation, static_cast<std::uint64_t>(e));
        return total / static_cast<double>(config.eval_episodes);
    };

    auto random_individual = [&]() {
        std::vector<int> a(static_cast<std::size_t>(horizon), 0);
        for (int unit = 0; unit < total_budget; ++unit)
            ++a[static_cast<std::size_t>(rng.uniform_int(static_cast<std::uint64_t>(horizon)))];
        return a;
    };

    std::vector<std::vector<int>> population;
    for (int i = 0; i < config.population; ++i) population.push_back(random_individual());
    std::vector<double> fit(population.size());
    for (std::size_t i = 0; i < population.size(); ++i) fit[i] = fitness_of(population[i]);

    auto best_index = [&]() {
        std::size_t best = 0;
        for (std::size_t i = 1; i < population.size(); ++i)
            if (fit[i] > fit[best]) best = i;
        return best;
    };

    for (int gen = 0; gen < config.generations; ++gen) {
        std::vector<std::size_t> order(population.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });

        std::vector<std::vector<int>> next;
        for (int e = 0; e < std::min(config.elitism, config.population); ++e)
            next.push_back(population[order[static_cast<std::size_t>(e)]]);

        auto tournament = [&]() -> const std::vector<int>& {
            const std::size_t a = rng.uniform_int(population.size());
            const std::size_t b = rng.uniform_int(population.size());
            return fit[a] >= fit[b] ? population[a] : population[b];
        };

        while (static_cast<int>(next.size()) < config.population) {
            const auto& pa = tournament();
            const auto& pb = tournament();
            std::vector<double> child(static_cast<std::size_t>(horizon));
            const bool cross = rng.bernoulli(config.crossover_rate);
            for (int t = 0; t < horizon; ++t) {
                const auto& src = (cross && rng.bernoulli(0.5)) ? pb : pa;
                child[static_cast<std::size_t>(t)] = static_cast<double>(src[static_cast<std::size_t>(t)]);
            }
            for (int t = 0; t < horizon; ++t)
                if (rng.bernoulli(config.mutation_rate))
                    child[static_cast<std::size_t>(t)] =
                        std::max(0.0, child[static_cast<std::size_t>(t)] + (rng.bernoulli(0.5) ? 1.0 : -1.0));
            next.push_back(detail::repair_allocation(child, total_budget));
        }
        population = std::move(next);
        for (std::size_t i = 0; i < population.size(); ++i) fit[i] = fitness_of(population[i]);
    }

    const std::size_t best = best_index();
    return {population[best], fit[best]};
}

}  // namespace ssco
