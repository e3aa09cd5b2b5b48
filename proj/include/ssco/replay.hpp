#pragma once
// Replayable experience: primitive transitions for the low-level learner and
// high-level transitions carrying search targets and realized durations.

#include <cstdint>
#include <deque>
#include <vector>

#include "ssco/rng.hpp"
#include "ssco/vec.hpp"
#include "ssco/world_model.hpp"

namespace ssco {

struct LlTransition {
    EncoderInput state;
    int subgoal = 0;
    int action = 0;
    double reward = 0.0;  // day-boundary reward folds into the day's last step
    EncoderInput next_state;
    std::vector<std::uint8_t> next_mask;
    bool terminal = false;
};

struct HlTransition {
    EncoderInput state;       // s_k at decision time
    EncoderInput next_state;  // s_{k+1} after the day boundary
    int subgoal = 0;          // z_k
    int budget = 0;           // b_k sampled
    int feasible = 0;         // B_k feasibility cap at decision time
    int duration = 0;         // tau_k, number of primitive selections
    double macro_reward = 0.0;       // R_k, gamma_LL-discounted within the decision
    double day_end_reward = 0.0;     // reward arriving at the day boundary when tau = 0
    Vec search_policy;               // pi_TS at s_k
    double search_value = 0.0;       // v_TS at s_k
    double next_search_value = 0.0;  // v_TS at s_{k+1}; 0 at episode end
    bool next_terminal = false;
    std::vector<double> prim_rewards;        // as stored in the LL buffer
    std::vector<EncoderInput> prim_states;   // s'_t .. s'_{t+tau} (tau+1 snapshots)
};

struct EpisodeRecord {
    std::vector<HlTransition> steps;
    double total_return = 0.0;
    int instance_index = 0;
};

struct ReplayBuffers {
    std::size_t hl_capacity = 1000;   // episodes
    std::size_t ll_capacity = 10000;  // transitions
    std::deque<EpisodeRecord> hl;
    std::deque<LlTransition> ll;

    void push_episode(EpisodeRecord episode) {
        hl.push_back(std::move(episode));
        while (hl.size() > hl_capacity) hl.pop_front();
    }

    void push_ll(LlTransition t) {
        ll.push_back(std::move(t));
        while (ll.size() > ll_capacity) ll.pop_front();
    }

    const HlTransition& sample_hl_transition(Rng& rng) const {
        const auto& ep = hl[rng.uniform_int(hl.size())];
        return ep.steps[rng.uniform_int(ep.steps.size())];
    }

    // Rejection-samples a transition that executed subgoal `z`; falls back to
    // a uniform draw when none is found within the try budget.
    const HlTransition& sample_hl_transition_for_subgoal(int z, Rng& rng,
                                                         int max_tries = 64) const {
        for (int t = 0; t < max_tries; ++t) {
            const auto& candidate = sample_hl_transition(rng);
            if (candidate.subgoal == z) return candidate;
        }
        return sample_hl_transition(rng);
    }

    // Uniform (episode, start index) pair for unrolled updates.
    std::pair<const EpisodeRecord*, int> sample_segment(Rng& rng) const {
        const auto& ep = hl[rng.uniform_int(hl.size())];
        return {&ep, static_cast<int>(rng.uniform_int(ep.steps.size()))};
    }

    const LlTransition& sample_ll(Rng& rng) const { return ll[rng.uniform_int(ll.size())]; }
};

}  // namespace ssco
