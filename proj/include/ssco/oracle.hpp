#pragma once
// Exact stochastic expectimax for small influence instances. Per day the
// solver maximizes over seed subsets (within-day seeding order is irrelevant
// to the cascade), then takes the expectation over propagation outcomes.
// Values are memoized on a packed (status, budget, day) key.

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "ssco/aim.hpp"
#include "ssco/errors.hpp"
#include "ssco/graph.hpp"

namespace ssco {

struct OracleConfig {
    int chance_edge_cap = 20;  // max frontier-out-edges to inactive targets per expansion
    bool use_memo = true;
};

struct OracleResult {
    double optimal_value = 0.0;
    std::vector<int> optimal_first_allocation;
    std::uint64_t node_expansions = 0;
};

namespace detail {

// 2 bits per node status, then budget and day. Fits 16 nodes in 64 bits.
inline std::uint64_t pack_oracle_key(const std::vector<NodeStatus>& status, int budget, int day) {
    std::uint64_t key = 0;
    for (std::size_t v = 0; v < status.size(); ++v)
        key |= static_cast<std::uint64_t>(status[v]) << (2 * v);
    key |= static_cast<std::uint64_t>(budget) << (2 * status.size());
    key |= static_cast<std::uint64_t>(day) << (2 * status.size() + 6);
    return key;
}

// One inactive node reachable from the frontier, with its combined
// activation probability 1 - prod(1 - p_e) over incoming frontier edges.
struct ChanceTarget {
    int node;
    double prob;
};

}  // namespace detail

class ExactOracle {
public:
    ExactOracle(const GraphInstance& g, int horizon, int total_budget, OracleConfig config = {})
        : graph_(g), horizon_(horizon), total_budget_(total_budget), config_(config) {
        if (g.node_count > 16)
            throw IntractableInstanceError("oracle: packed key supports at most 16 nodes");
    }

    OracleResult solve() {
        OracleResult result;
        AimState root = aim_initial_state(graph_, total_budget_);
        result.optimal_value = value(root);
        result.optimal_first_allocation = best_allocation(root);
        result.node_expansions = expansions_;
        return result;
    }

    // Optimal seed set at `state` (ties resolved toward the lexicographically
    // smallest set). Empty at or beyond the horizon.
    std::vector<int> policy_step(const AimState& state) {
        if (state.day >= horizon_) return {};
        const std::uint64_t key =
            detail::pack_oracle_key(state.status, state.remaining_budget, state.day);
        if (config_.use_memo) {
            auto it = policy_memo_.find(key);
            if (it != policy_memo_.end()) return it->second;
        }
        auto best = best_allocation(state);
        if (config_.use_memo) policy_memo_[key] = best;
        return best;
    }

    // Expected total influence-to-go from `state`.
    double value(const AimState& state) {
        if (state.day >= horizon_) return 0.0;
        if (state.frontier.empty() &&
            (state.remaining_budget == 0 || count_inactive(state) == 0))
            return 0.0;  // nothing can change any more
        const std::uint64_t key =
            detail::pack_oracle_key(state.status, state.remaining_budget, state.day);
        if (config_.use_memo) {
            auto it = memo_.find(key);
            if (it != memo_.end()) return it->second;
        }
        ++expansions_;
        double best = -1.0;
        std::vector<int> best_set;
        enumerate_seed_sets(state, [&](const std::vector<int>& seeds) {
            const double v = seeded_value(state, seeds);
            if (v > best || (v == best && std::lexicographical_compare(
                                              seeds.begin(), seeds.end(), best_set.begin(),
                                              best_set.end()))) {
                best = v;
                best_set = seeds;
            }
        });
        if (config_.use_memo) memo_[key] = best;
        return best;
    }

    std::uint64_t expansions() const { return expansions_; }

private:
    int count_inactive(const AimState& state) const {
        int n = 0;
        for (auto st : state.status)
            if (st == NodeStatus::Inactive) ++n;
        return n;
    }

    // Applies all seeds, then averages over propagation outcomes. Targets
    // activate independently, so the chance node factorizes per target.
    double seeded_value(const AimState& state, const std::vector<int>& seeds) {
        AimState s = state;
        double immediate = 0.0;
        for (int node : seeds) immediate += aim_primitive_step(s, node);

        std::vector<detail::ChanceTarget> targets;
        int edge_count = 0;
        {
            std::vector<double> miss_prob(s.status.size(), 1.0);
            std::vector<std::uint8_t> touched(s.status.size(), 0);
            for (int u : s.frontier) {
                for (const auto& [v, p] : graph_.out_edges[static_cast<std::size_t>(u)]) {
                    if (s.status[static_cast<std::size_t>(v)] != NodeStatus::Inactive) continue;
                    ++edge_count;
                    miss_prob[static_cast<std::size_t>(v)] *= 1.0 - p;
                    touched[static_cast<std::size_t>(v)] = 1;
                }
            }
            if (edge_count > config_.chance_edge_cap)
                throw IntractableInstanceError("oracle: chance enumeration cap exceeded");
            for (int v = 0; v < graph_.node_count; ++v)
                if (touched[static_cast<std::size_t>(v)])
                    targets.push_back({v, 1.0 - miss_prob[static_cast<std::size_t>(v)]});
        }

        AimState base = s;
        for (int u : base.frontier) base.status[static_cast<std::size_t>(u)] = NodeStatus::Removed;
        base.frontier.clear();
        ++base.day;

        const std::size_t outcomes = std::size_t{1} << targets.size();
        double expected = 0.0;
        for (std::size_t mask = 0; mask < outcomes; ++mask) {
            double prob = 1.0;
            AimState next = base;
            int activated = 0;
            for (std::size_t t = 0; t < targets.size(); ++t) {
                if (mask & (std::size_t{1} << t)) {
                    prob *= targets[t].prob;
                    next.status[static_cast<std::size_t>(targets[t].node)] = NodeStatus::Active;
                    next.frontier.push_back(targets[t].node);
                    ++activated;
                } else {
                    prob *= 1.0 - targets[t].prob;
                }
            }
            if (prob == 0.0) continue;
            next.influenced_count += activated;
            expected += prob * (static_cast<double>(activated) + value(next));
        }
        return immediate + expected;
    }

    std::vector<int> best_allocation(const AimState& state) {
        double best = -1.0;
        std::vector<int> best_set;
        enumerate_seed_sets(state, [&](const std::vector<int>& seeds) {
            const double v = seeded_value(state, seeds);
            if (v > best || (v == best && std::lexicographical_compare(
                                              seeds.begin(), seeds.end(), best_set.begin(),
                                              best_set.end()))) {
                best = v;
                best_set = seeds;
            }
        });
        return best_set;
    }

    // All subsets of inactive nodes with size <= remaining budget, empty set
    // included (a day may be skipped).
    template <typename Fn>
    void enumerate_seed_sets(const AimState& state, Fn&& fn) {
        std::vector<int> inactive;
        for (int v = 0; v < graph_.node_count; ++v)
            if (state.status[static_cast<std::size_t>(v)] == NodeStatus::Inactive)
                inactive.push_back(v);
        const int max_size = std::min<int>(state.remaining_budget, static_cast<int>(inactive.size()));
        std::vector<int> chosen;
        enumerate_rec(inactive, 0, max_size, chosen, fn);
    }

    template <typename Fn>
    void enumerate_rec(const std::vector<int>& pool, std::size_t start, int remaining,
                       std::vector<int>& chosen, Fn&& fn) {
        fn(chosen);
        if (remaining == 0) return;
        for (std::size_t i = start; i < pool.size(); ++i) {
            chosen.push_back(pool[i]);
            enumerate_rec(pool, i + 1, remaining - 1, chosen, fn);
            chosen.pop_back();
        }
    }

    const GraphInstance& graph_;
    int horizon_;
    int total_budget_;
    OracleConfig config_;
    std::unordered_map<std::uint64_t, double> memo_;
    std::unordered_map<std::uint64_t, std::vector<int>> policy_memo_;
    std::uint64_t expansions_ = 0;
};

inline OracleResult oracle_solve(const GraphInstance& g, int horizon, int total_budget,
                                 OracleConfig config = {}) {
    ExactOracle oracle(g, horizon, total_budget, config);
    return oracle.solve();
}

}  // namespace ssco
