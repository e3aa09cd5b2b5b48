#pragma once
// Adaptive influence maximization under the independent-cascade model.
// Seeding is the primitive action; one propagation step runs at each day
// boundary, after the day's seed selections.

#include <cstdint>
#include <vector>

#include "ssco/errors.hpp"
#include "ssco/graph.hpp"
#include "ssco/rng.hpp"

namespace ssco {

enum class NodeStatus : std::uint8_t { Inactive = 0, Active = 1, Removed = 2 };

struct AimState {
    std::vector<NodeStatus> status;
    std::vector<int> frontier;  // active nodes that have not yet propagated
    int remaining_budget = 0;
    int day = 0;
    int influenced_count = 0;
};

inline AimState aim_initial_state(const GraphInstance& g, int total_budget) {
    AimState s;
    s.status.assign(static_cast<std::size_t>(g.node_count), NodeStatus::Inactive);
    s.remaining_budget = total_budget;
    return s;
}

// Seeds one inactive node. Returns the reward (+1, the newly influenced node).
inline double aim_primitive_step(AimState& s, int node) {
    if (node < 0 || node >= static_cast<int>(s.status.size()) ||
        s.status[static_cast<std::size_t>(node)] != NodeStatus::Inactive)
        throw MaskedActionError("aim: node not seedable");
    if (s.remaining_budget <= 0) throw BudgetExhaustedError("aim: no budget left");
    s.status[static_cast<std::size_t>(node)] = NodeStatus::Active;
    s.frontier.insert(std::lower_bound(s.frontier.begin(), s.frontier.end(), node), node);
    --s.remaining_budget;
    ++s.influenced_count;
    return 1.0;
}

// One independent-cascade propagation step. Every frontier node attempts each
// inactive out-neighbor once; attempting nodes are then removed. Returns the
// number of newly activated nodes.
inline double aim_end_of_day(const GraphInstance& g, AimState& s, Rng& rng) {
    std::vector<std::uint8_t> newly(static_cast<std::size_t>(g.node_count), 0);
    for (int u : s.frontier) {
        for (const auto& [v, p] : g.out_edges[static_cast<std::size_t>(u)]) {
            if (s.status[static_cast<std::size_t>(v)] != NodeStatus::Inactive) continue;
            if (rng.bernoulli(p)) newly[static_cast<std::size_t>(v)] = 1;
        }
    }
    for (int u : s.frontier) s.status[static_cast<std::size_t>(u)] = NodeStatus::Removed;
    s.frontier.clear();
    int activated = 0;
    for (int v = 0; v < g.node_count; ++v) {
        if (!newly[static_cast<std::size_t>(v)]) continue;
        s.status[static_cast<std::size_t>(v)] = NodeStatus::Active;
        s.frontier.push_back(v);
        ++activated;
    }
    s.influenced_count += activated;
    ++s.day;
    return static_cast<double>(activated);
}

inline std::vector<std::uint8_t> aim_legal_mask(const AimState& s) {
    std::vector<std::uint8_t> mask(s.status.size(), 0);
    if (s.remaining_budget <= 0) return mask;
    for (std::size_t v = 0; v < s.status.size(); ++v)
        mask[v] = (s.status[v] == NodeStatus::Inactive) ? 1 : 0;
    return mask;
}

// Episode wrapper: owns the state and derives one random stream per day from
// (instance_id, episode_seed, day), so trajectories replay exactly.
class AimEnv {
public:
    AimEnv(const GraphInstance* instance, int horizon, int total_budget)
        : instance_(instance), horizon_(horizon), total_budget_(total_budget) {
        // Message passing runs over both edge directions so a node's
        // representation can see the saturation of its out-neighborhood;
        // cascade propagation itself stays directed.
        message_edges_ = instance->edges;
        for (const auto& [u, v] : instance->edges) message_edges_.push_back({v, u});
        std::sort(message_edges_.begin(), message_edges_.end());
        message_edges_.erase(std::unique(message_edges_.begin(), message_edges_.end()),
                             message_edges_.end());
    }

    void reset(std::uint64_t episode_seed) {
        episode_seed_ = episode_seed;
        state_ = aim_initial_state(*instance_, total_budget_);
    }

    const GraphInstance& instance() const { return *instance_; }
    const AimState& state() const { return state_; }
    AimState& mutable_state() { return state_; }

    int action_count() const { return instance_->node_count; }
    int horizon() const { return horizon_; }
    int total_budget() const { return total_budget_; }
    int day() const { return state_.day; }
    int remaining_budget() const { return state_.remaining_budget; }
    bool episode_done() const { return state_.day >= horizon_; }

    std::vector<std::uint8_t> legal_mask() const { return aim_legal_mask(state_); }

    double primitive_step(int node) { return aim_primitive_step(state_, node); }

    double end_of_day() {
        Rng rng = Rng::from_key({instance_->instance_id, episode_seed_,
                                 static_cast<std::uint64_t>(state_.day)});
        return aim_end_of_day(*instance_, state_, rng);
    }

    // Node features: status one-hot, degrees scaled to the graph's maximum,
    // remaining-budget fraction broadcast to every node.
    static constexpr int kFeatDim = 6;
    int feature_dim() const { return kFeatDim; }
    void node_features(std::vector<double>& out) const {
        const int n = instance_->node_count;
        out.assign(static_cast<std::size_t>(n) * kFeatDim, 0.0);
        int max_in = 1, max_out = 1;
        for (int v = 0; v < n; ++v) {
            max_in = std::max(max_in, instance_->in_degree[static_cast<std::size_t>(v)]);
            max_out = std::max(max_out, instance_->out_degree[static_cast<std::size_t>(v)]);
        }
        const double budget_frac =
            total_budget_ > 0 ? static_cast<double>(state_.remaining_budget) / total_budget_ : 0.0;
        for (int v = 0; v < n; ++v) {
            double* row = out.data() + static_cast<std::size_t>(v) * kFeatDim;
            row[static_cast<int>(state_.status[static_cast<std::size_t>(v)])] = 1.0;
            row[3] = instance_->in_degree[static_cast<std::size_t>(v)] / static_cast<double>(max_in);
            row[4] = instance_->out_degree[static_cast<std::size_t>(v)] / static_cast<double>(max_out);
            row[5] = budget_frac;
        }
    }

    const std::vector<std::pair<int, int>>& message_edges() const { return message_edges_; }

    double max_primitive_reward() const { return static_cast<double>(instance_->node_count); }

private:
    const GraphInstance* instance_;
    int horizon_;
    int total_budget_;
    std::vector<std::pair<int, int>> message_edges_;
    std::uint64_t episode_seed_ = 0;
    AimState state_;
};

}  // namespace ssco
