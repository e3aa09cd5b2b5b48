#pragma once
// PUCT tree search over the learned subgoal dictionary in latent space.
// Selection walks edges maximizing Q + c(N) * P * sqrt(sum N) / (1 + N);
// expansion applies the latent dynamics once per new node; backups apply the
// decision-time discount per high-level step. The search never mutates the
// model or the environment.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ssco/rng.hpp"
#include "ssco/vec.hpp"

namespace ssco {

struct SearchConfig {
    int n_sim = 32;
    double c_init = 2.5;
    double c_base = 19652.0;
    double dirichlet_alpha = 0.30;
    double noise_mix = 0.30;
    double temperature = 1.0;
    double gamma = 0.997;
};

struct EdgeStats {
    double prior = 0.0;
    double value_sum = 0.0;
    double reward = 0.0;  // predicted macro reward along this edge
    int visits = 0;
    int child = -1;

    double q() const { return visits > 0 ? value_sum / visits : 0.0; }
};

struct SearchNode {
    Vec latent;
    double predicted_value = 0.0;
    bool terminal = false;
    int depth = 0;
    std::vector<EdgeStats> edges;  // one per subgoal; empty when terminal
};

struct SearchTree {
    std::vector<SearchNode> nodes;
    int root = 0;

    int visit_total(int node) const {
        int total = 0;
        for (const auto& e : nodes[static_cast<std::size_t>(node)].edges) total += e.visits;
        return total;
    }
};

struct SearchResult {
    Vec visit_policy;    // proportional to N^(1/temperature)
    Vec visit_counts;
    double root_value = 0.0;  // visit-weighted mean backed-up value
    SearchTree tree;
};

// Exploration coefficient with the standard log growth in total visits.
inline double puct_exploration_coeff(int parent_visits, const SearchConfig& cfg) {
    return cfg.c_init +
           std::log((static_cast<double>(parent_visits) + cfg.c_base + 1.0) / cfg.c_base);
}

// Argmax of the PUCT score; ties go to the lowest subgoal index. The node's
// expansion counts as one visit, so a fresh node selects by prior.
inline int puct_select(const SearchNode& node, const SearchConfig& cfg) {
    int parent_visits = 1;
    for (const auto& e : node.edges) parent_visits += e.visits;
    const double coeff = puct_exploration_coeff(parent_visits, cfg);
    const double sqrt_total = std::sqrt(static_cast<double>(parent_visits));
    int best = 0;
    double best_score = -1e300;
    for (std::size_t z = 0; z < node.edges.size(); ++z) {
        const auto& e = node.edges[z];
        const double score = e.q() + coeff * e.prior * sqrt_total / (1.0 + e.visits);
        if (score > best_score) {
            best_score = score;
            best = static_cast<int>(z);
        }
    }
    return best;
}

// Mixes Dirichlet noise into the root priors (training only).
inline void add_root_noise(SearchNode& root, double alpha, double mix, Rng& rng) {
    if (mix <= 0.0 || root.edges.empty()) return;
    Vec noise(root.edges.size());
    rng.dirichlet(alpha, noise);
    for (std::size_t z = 0; z < root.edges.size(); ++z)
        root.edges[z].prior = (1.0 - mix) * root.edges[z].prior + mix * noise[z];
}

// Discounted backup along the selected path: walking leaf-to-root,
// G <- R_edge + gamma * G starting from the leaf evaluation.
inline void backup(SearchTree& tree, const std::vector<std::pair<int, int>>& path,
                   double leaf_value, const SearchConfig& cfg) {
    double value = leaf_value;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        auto& edge = tree.nodes[static_cast<std::size_t>(it->first)].edges[static_cast<std::size_t>(it->second)];
        value = edge.reward + cfg.gamma * value;
        edge.value_sum += value;
        edge.visits += 1;
    }
}

// Runs the full search from an encoded decision-time state. `decisions_left`
// is the number of high-level decisions remaining including this one; a
// simulated path that exhausts it reaches a terminal leaf of value 0.
template <typename Model>
SearchResult run_search(const Model& model, const Vec& root_latent, int decisions_left,
                        const SearchConfig& cfg, Rng& rng, bool training) {
    const int subgoals = model.subgoal_count();
    SearchResult result;
    SearchTree& tree = result.tree;

    auto make_node = [&](Vec latent, int depth) {
        SearchNode node;
        node.latent = std::move(latent);
        node.depth = depth;
        node.terminal = depth >= decisions_left;
        if (!node.terminal) {
            auto [prior, value] = model.predict(node.latent);
            node.predicted_value = value;
            node.edges.resize(static_cast<std::size_t>(subgoals));
            for (int z = 0; z < subgoals; ++z)
                node.edges[static_cast<std::size_t>(z)].prior = prior[static_cast<std::size_t>(z)];
        }
        tree.nodes.push_back(std::move(node));
        return static_cast<int>(tree.nodes.size()) - 1;
    };

    tree.root = make_node(root_latent, 0);
    if (training)
        add_root_noise(tree.nodes[static_cast<std::size_t>(tree.root)], cfg.dirichlet_alpha,
                       cfg.noise_mix, rng);

    std::vector<std::pair<int, int>> path;
    for (int sim = 0; sim < cfg.n_sim; ++sim) {
        path.clear();
        int node = tree.root;
        for (;;) {
            if (tree.nodes[static_cast<std::size_t>(node)].terminal) {
                backup(tree, path, 0.0, cfg);
                break;
            }
            const int z = puct_select(tree.nodes[static_cast<std::size_t>(node)], cfg);
            path.push_back({node, z});
            auto& edge = tree.nodes[static_cast<std::size_t>(node)].edges[static_cast<std::size_t>(z)];
            if (edge.child >= 0) {
                node = edge.child;
                continue;
            }
            auto [next_latent, reward] =
                model.dynamics_step(tree.nodes[static_cast<std::size_t>(node)].latent, z);
            const int child = make_node(std::move(next_latent),
                                        tree.nodes[static_cast<std::size_t>(node)].depth + 1);
            // make_node may reallocate; re-fetch the edge.
            auto& edge2 = tree.nodes[static_cast<std::size_t>(node)].edges[static_cast<std::size_t>(z)];
            edge2.child = child;
            edge2.reward = reward;
            const auto& child_node = tree.nodes[static_cast<std::size_t>(child)];
            backup(tree, path, child_node.terminal ? 0.0 : child_node.predicted_value, cfg);
            break;
        }
    }

    const auto& root = tree.nodes[static_cast<std::size_t>(tree.root)];
    result.visit_counts.resize(root.edges.size());
    result.visit_policy.resize(root.edges.size());
    double value_total = 0.0;
    int visit_total = 0;
    for (std::size_t z = 0; z < root.edges.size(); ++z) {
        result.visit_counts[z] = static_cast<double>(root.edges[z].visits);
        value_total += root.edges[z].value_sum;
        visit_total += root.edges[z].visits;
    }
    result.root_value = visit_total > 0 ? value_total / visit_total : 0.0;

    double policy_total = 0.0;
    for (std::size_t z = 0; z < root.edges.size(); ++z) {
        result.visit_policy[z] =
            result.visit_counts[z] > 0.0
                ? std::pow(result.visit_counts[z], 1.0 / cfg.temperature)
                : 0.0;
        policy_total += result.visit_policy[z];
    }
    if (policy_total > 0.0)
        for (double& p : result.visit_policy) p /= policy_total;
    return result;
}

// Greedy subgoal choice: argmax visit count, ties to the lowest index.
inline int argmax_visits(const SearchResult& result) {
    int best = 0;
    for (std::size_t z = 1; z < result.visit_counts.size(); ++z)
        if (result.visit_counts[z] > result.visit_counts[static_cast<std::size_t>(best)])
            best = static_cast<int>(z);
    return best;
}

}  // namespace ssco
