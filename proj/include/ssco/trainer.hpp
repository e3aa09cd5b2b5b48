#pragma once
// End-to-end training: self-play with tree search over subgoals, the combined
// high-level objective (search-target losses + geometry losses + budget
// actor-critic), and the subgoal-conditioned low-level Q-learner with a
// periodically copied target network.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ssco/geometry.hpp"
#include "ssco/heuristics.hpp"
#include "ssco/nn.hpp"
#include "ssco/planner.hpp"
#include "ssco/replay.hpp"
#include "ssco/rng.hpp"
#include "ssco/tape.hpp"
#include "ssco/world_model.hpp"

namespace ssco {

struct TrainConfig {
    double gamma_ll = 0.997;
    int unroll = 5;
    int hl_batch = 8;
    int ll_batch = 8;
    double hl_lr = 1e-3;
    double ll_lr = 1e-3;
    double weight_decay = 1e-5;
    double clip_norm = 5.0;
    double eps_start = 0.90;
    double eps_end = 0.05;
    double eps_decay = 0.995;
    int target_update_period = 100;
    double entropy_beta = 0.01;
    int warmup_epochs = 3;
    int stratified_order_pairs = 1;  // uniform pair draws when 0
    int order_pairs = 0;              // pairs per update; 0 means hl_batch
    double w_pi = 1.0, w_v = 1.0, w_r = 1.0;
    double lambda_mts = 1.0, lambda_bud = 1.0;
    double w_bc = 1.0, w_ba = 1.0, w_ent = 1.0;
    int epochs = 60;
    int episodes_per_epoch = 4;
    int hl_updates_per_epoch = 8;
    int ll_updates_per_epoch = 16;
    int eval_period = 10;
    int eval_episodes = 16;
    std::size_t hl_buffer_capacity = 1000;
    std::size_t ll_buffer_capacity = 10000;
    int min_hl_episodes = 2;
    int min_ll_transitions = 16;
};

inline double epsilon_schedule(int epoch, double start = 0.90, double floor = 0.05,
                               double decay = 0.995) {
    return std::max(floor, start * std::pow(decay, epoch));
}

struct HlLossBreakdown {
    double policy = 0.0;
    double value = 0.0;
    double reward = 0.0;
    double cap = 0.0;
    double push = 0.0;
    double order = 0.0;
    double margin_reg = 0.0;
    double budget_critic = 0.0;
    double budget_actor = 0.0;
    double budget_entropy = 0.0;
    double total = 0.0;
};

template <typename TEnv>
class Trainer {
public:
    Trainer(std::vector<TEnv> envs, WorldModel model, LowLevelModel ll_model, TrainConfig tcfg,
            SearchConfig scfg, GeometryConfig gcfg, std::uint64_t seed)
        : envs_(std::move(envs)),
          model_(std::move(model)),
          ll_model_(std::move(ll_model)),
          ll_target_(ll_model_.clone()),
          tcfg_(tcfg),
          scfg_(scfg),
          gcfg_(gcfg),
          rng_search_(Rng::from_key({seed, 0x736561ULL})),
          rng_ll_(Rng::from_key({seed, 0x6c6cULL})),
          rng_replay_(Rng::from_key({seed, 0x726570ULL})),
          run_seed_(seed) {
        buffers_.hl_capacity = tcfg_.hl_buffer_capacity;
        buffers_.ll_capacity = tcfg_.ll_buffer_capacity;
        hl_opt_ = {tcfg_.hl_lr, tcfg_.weight_decay, tcfg_.clip_norm, 0.9, 0.999, 1e-8};
        ll_opt_ = {tcfg_.ll_lr, tcfg_.weight_decay, tcfg_.clip_norm, 0.9, 0.999, 1e-8};
    }

    WorldModel& model() { return model_; }
    const WorldModel& model() const { return model_; }
    LowLevelModel& ll_model() { return ll_model_; }
    ReplayBuffers& buffers() { return buffers_; }
    const TrainConfig& train_config() const { return tcfg_; }
    const SearchConfig& search_config() const { return scfg_; }
    const GeometryConfig& geometry_config() const { return gcfg_; }

    static EncoderInput snapshot(const TEnv& env) {
        EncoderInput in;
        env.node_features(in.features);
        in.edges = &env.message_edges();
        in.nodes = env.action_count();
        return in;
    }

    // One full episode. In training mode experience lands in the replay
    // buffers and exploration noise is on; in greedy mode the subgoal is the
    // argmax visit, the budget the argmax probability, epsilon zero.
    EpisodeRecord play_episode(int instance_index, std::uint64_t episode_seed, bool training,
                               int epoch) {
        TEnv& env = envs_[static_cast<std::size_t>(instance_index)];
        env.reset(episode_seed);
        EpisodeRecord record;
        record.instance_index = instance_index;
        const int horizon = env.horizon();
        const double epsilon =
            training ? epsilon_schedule(epoch, tcfg_.eps_start, tcfg_.eps_end, tcfg_.eps_decay)
                     : 0.0;

        for (int k = 0; k < horizon; ++k) {
            if (decision_snapshot_sink_) decision_snapshot_sink_->push_back(env);
            HlTransition hl;
            hl.state = snapshot(env);
            const Vec root_latent = model_.encode(hl.state);
            const SearchResult search = run_search(model_, root_latent, horizon - k, scfg_,
                                                   rng_search_, training);
            hl.search_policy = search.visit_policy;
            hl.search_value = search.root_value;
            if (k > 0) {
                record.steps.back().next_search_value = search.root_value;
                record.steps.back().next_terminal = false;
            }

            const int z = training ? static_cast<int>(rng_search_.categorical(search.visit_policy))
                                   : argmax_visits(search);
            hl.subgoal = z;
            hl.feasible = std::min(env.remaining_budget(), model_.config().budget_max);

            int budget = 0;
            if (training && epoch < tcfg_.warmup_epochs) {
                budget = std::min(
                    budget_allocate({ScheduleKind::Average, 2}, env.total_budget(), horizon, k),
                    hl.feasible);
            } else {
                const Vec dist = model_.budget_distribution(root_latent, z, hl.feasible);
                if (training) {
                    budget = static_cast<int>(rng_search_.categorical(dist));
                } else {
                    budget = 0;
                    for (std::size_t b = 1; b < dist.size(); ++b)
                        if (dist[b] > dist[static_cast<std::size_t>(budget)]) budget = static_cast<int>(b);
                }
            }
            hl.budget = budget;

            // Low-level execution, up to `budget` primitive selections.
            const Vec z_emb = model_.subgoal_embedding(z);
            hl.prim_states.push_back(hl.state);
            std::vector<LlTransition> day_transitions;
            for (int i = 0; i < budget; ++i) {
                const auto mask = env.legal_mask();
                if (std::find(mask.begin(), mask.end(), std::uint8_t{1}) == mask.end()) break;
                LlTransition t;
                t.state = hl.prim_states.back();
                t.subgoal = z;
                t.action = choose_ll_action(t.state, z_emb, mask, epsilon, training);
                t.reward = env.primitive_step(t.action);
                t.next_state = snapshot(env);
                t.next_mask = env.legal_mask();
                hl.prim_states.push_back(t.next_state);
                day_transitions.push_back(std::move(t));
            }
            hl.duration = static_cast<int>(day_transitions.size());

            const double day_end_reward = env.end_of_day();
            const EncoderInput post_day = snapshot(env);
            const bool done = env.episode_done();
            if (!day_transitions.empty()) {
                // The day boundary belongs to the decision: fold its reward and
                // outcome state into the day's final primitive transition.
                auto& last = day_transitions.back();
                last.reward += day_end_reward;
                last.next_state = post_day;
                last.next_mask = env.legal_mask();
                last.terminal = done;
                hl.prim_states.back() = post_day;
            } else {
                hl.day_end_reward = day_end_reward;
                hl.prim_states.push_back(post_day);
            }
            hl.next_state = post_day;
            hl.next_terminal = done;
            hl.next_search_value = 0.0;

            double macro = 0.0;
            double discount = 1.0;
            for (const auto& t : day_transitions) {
                hl.prim_rewards.push_back(t.reward);
                macro += discount * t.reward;
                discount *= tcfg_.gamma_ll;
                record.total_return += t.reward;
            }
            if (day_transitions.empty()) {
                macro = day_end_reward;
                record.total_return += day_end_reward;
            }
            hl.macro_reward = macro;

            if (training)
                for (auto& t : day_transitions) buffers_.push_ll(std::move(t));
            record.steps.push_back(std::move(hl));
        }
        if (training) buffers_.push_episode(record);
        return record;
    }

    // One sampled batch for the combined high-level objective.
    struct HlBatch {
        std::vector<std::pair<const EpisodeRecord*, int>> segments;
        std::vector<CapPair> cap_pairs;
        std::vector<std::pair<DecisionSample, DecisionSample>> order_pairs;
    };

    HlBatch sample_hl_batch() {
        HlBatch batch;
        for (int b = 0; b < tcfg_.hl_batch; ++b)
            batch.segments.push_back(buffers_.sample_segment(rng_replay_));
        for (int b = 0; b < tcfg_.hl_batch && !buffers_.ll.empty(); ++b) {
            const auto& t = buffers_.sample_ll(rng_replay_);
            batch.cap_pairs.push_back({t.state, t.next_state});
        }
        const int pair_count = tcfg_.order_pairs > 0 ? tcfg_.order_pairs : tcfg_.hl_batch;
        for (int b = 0; b < pair_count; ++b) {
            // Stratify pairs over the subgoal dictionary: uniform transition
            // draws starve rarely-executed subgoal pairs of ranking signal.
            if (tcfg_.stratified_order_pairs) {
                const int m = model_.subgoal_count();
                const int zi = static_cast<int>(rng_replay_.uniform_int(static_cast<std::uint64_t>(m)));
                int zj = static_cast<int>(rng_replay_.uniform_int(static_cast<std::uint64_t>(m)));
                if (m > 1 && zj == zi) zj = (zj + 1) % m;
                const auto& lhs = buffers_.sample_hl_transition_for_subgoal(zi, rng_replay_);
                const auto& rhs = buffers_.sample_hl_transition_for_subgoal(zj, rng_replay_);
                batch.order_pairs.push_back({{lhs.state, lhs.subgoal, lhs.duration},
                                             {rhs.state, rhs.subgoal, rhs.duration}});
            } else {
                const auto& lhs = buffers_.sample_hl_transition(rng_replay_);
                const auto& rhs = buffers_.sample_hl_transition(rng_replay_);
                batch.order_pairs.push_back({{lhs.state, lhs.subgoal, lhs.duration},
                                             {rhs.state, rhs.subgoal, rhs.duration}});
            }
        }
        return batch;
    }

    // Combined high-level objective: search-target losses over an unrolled
    // latent trajectory, geometry losses, and (after warm-up) the budget
    // actor-critic. One optimizer step with global-norm clipping.
    HlLossBreakdown hl_update(int epoch) {
        const HlBatch batch = sample_hl_batch();
        Tape tape;
        HlLossBreakdown out;
        const Tape::Var total = build_hl_loss(tape, batch, epoch, out);
        model_.params().zero_grad();
        tape.backward(total);
        set_budget_head_frozen(epoch < tcfg_.warmup_epochs);
        optimizer_step(model_.params(), hl_opt_);
        return out;
    }

    // Builds (but does not apply) the full combined objective on a tape.
    Tape::Var build_hl_loss(Tape& tape, const HlBatch& batch, int epoch, HlLossBreakdown& out) {
        const bool budget_on = epoch >= tcfg_.warmup_epochs;
        const auto& segments = batch.segments;

        Tape::Var policy_loss = tape.constant_scalar(0.0);
        Tape::Var value_loss = tape.constant_scalar(0.0);
        Tape::Var reward_loss = tape.constant_scalar(0.0);
        Tape::Var budget_critic = tape.constant_scalar(0.0);
        Tape::Var budget_actor = tape.constant_scalar(0.0);
        Tape::Var budget_entropy = tape.constant_scalar(0.0);
        std::vector<DecisionSample> push_samples;

        for (const auto& [episode, start] : segments) {
            const auto& steps = episode->steps;
            const int horizon = static_cast<int>(steps.size());
            Tape::Var h = model_.encode_t(tape, steps[static_cast<std::size_t>(start)].state);

            for (int u = 0; u <= tcfg_.unroll; ++u) {
                const int idx = start + u;
                const bool in_range = idx < horizon;
                Tape::Var value = model_.value_t(tape, h);
                if (in_range) {
                    const auto& step = steps[static_cast<std::size_t>(idx)];
                    Tape::Var logits = model_.policy_logits_t(tape, h);
                    policy_loss =
                        tape.add(policy_loss, tape.softmax_cross_entropy(logits, step.search_policy));
                    Tape::Var vdiff = tape.sub(value, tape.constant_scalar(step.search_value));
                    value_loss = tape.add(value_loss, tape.mul(vdiff, vdiff));
                } else {
                    // Absorbing terminal: value trains toward 0, policy unsupervised.
                    value_loss = tape.add(value_loss, tape.mul(value, value));
                }
                if (u < tcfg_.unroll) {
                    const int step_idx = std::min(idx, horizon - 1);
                    const int z = steps[static_cast<std::size_t>(step_idx)].subgoal;
                    auto [next, rhat] = model_.dynamics_step_t(tape, h, z);
                    const double r_target =
                        in_range ? steps[static_cast<std::size_t>(idx)].macro_reward : 0.0;
                    Tape::Var rdiff = tape.sub(rhat, tape.constant_scalar(r_target));
                    reward_loss = tape.add(reward_loss, tape.mul(rdiff, rdiff));
                    h = next;
                }
            }

            // Budget actor-critic on the segment root (stop-gradient advantage).
            const auto& root_step = steps[static_cast<std::size_t>(start)];
            push_samples.push_back({root_step.state, root_step.subgoal, root_step.duration});
            if (budget_on) {
                Tape::Var h0 = model_.encode_t(tape, root_step.state);
                Tape::Var critic = model_.critic_t(tape, h0, root_step.subgoal);
                const double g_target =
                    root_step.macro_reward +
                    (root_step.next_terminal ? 0.0 : scfg_.gamma * root_step.next_search_value);
                Tape::Var cdiff = tape.sub(critic, tape.constant_scalar(g_target));
                budget_critic = tape.add(budget_critic, tape.mul(cdiff, cdiff));

                const double advantage = g_target - tape.scalar(critic);
                Tape::Var logits = model_.budget_logits_t(tape, h0, root_step.subgoal);
                Tape::Var logp =
                    tape.masked_log_softmax(logits, model_.budget_mask(root_step.feasible),
                                            model_.config().mask_fill);
                Tape::Var logp_b = tape.pick(logp, static_cast<std::size_t>(root_step.budget));
                budget_actor = tape.add(budget_actor, tape.scale(logp_b, -advantage));
                Tape::Var ent = tape.scale(tape.sum(tape.mul(tape.exp(logp), logp)), -1.0);
                budget_entropy = tape.add(budget_entropy, ent);
            }
        }

        const double inv_batch = 1.0 / static_cast<double>(tcfg_.hl_batch);
        policy_loss = tape.scale(policy_loss, inv_batch);
        value_loss = tape.scale(value_loss, inv_batch);
        reward_loss = tape.scale(reward_loss, inv_batch);
        budget_critic = tape.scale(budget_critic, inv_batch);
        budget_actor = tape.scale(budget_actor, inv_batch);
        budget_entropy = tape.scale(budget_entropy, inv_batch);

        const GeometryLossVars geo =
            unified_loss(tape, model_, batch.cap_pairs, push_samples, batch.order_pairs, gcfg_);

        Tape::Var total = tape.constant_scalar(0.0);
        total = tape.add(total, tape.scale(policy_loss, tcfg_.w_pi));
        total = tape.add(total, tape.scale(value_loss, tcfg_.w_v));
        total = tape.add(total, tape.scale(reward_loss, tcfg_.w_r));
        total = tape.add(total, tape.scale(geo.total, tcfg_.lambda_mts));
        if (budget_on) {
            Tape::Var budget_total = tape.scale(budget_critic, tcfg_.w_bc);
            budget_total = tape.add(budget_total, tape.scale(budget_actor, tcfg_.w_ba));
            budget_total = tape.add(
                budget_total, tape.scale(budget_entropy, -tcfg_.w_ent * tcfg_.entropy_beta));
            total = tape.add(total, tape.scale(budget_total, tcfg_.lambda_bud));
        }

        out.policy = tape.scalar(policy_loss);
        out.value = tape.scalar(value_loss);
        out.reward = tape.scalar(reward_loss);
        out.cap = tape.scalar(geo.cap);
        out.push = tape.scalar(geo.push);
        out.order = tape.scalar(geo.order);
        out.margin_reg = tape.scalar(geo.margin_reg);
        out.budget_critic = tape.scalar(budget_critic);
        out.budget_actor = tape.scalar(budget_actor);
        out.budget_entropy = tape.scalar(budget_entropy);
        out.total = tape.scalar(total);
        return total;
    }

    // Standalone budget actor-critic step over sampled transitions (the
    // default loop folds these terms into hl_update's combined objective).
    HlLossBreakdown budget_update() {
        Tape tape;
        HlLossBreakdown out;
        std::vector<const HlTransition*> transitions;
        for (int b = 0; b < tcfg_.hl_batch; ++b)
            transitions.push_back(&buffers_.sample_hl_transition(rng_replay_));
        Tape::Var loss = build_budget_loss(tape, transitions, out);
        model_.params().zero_grad();
        tape.backward(loss);
        optimizer_step(model_.params(), hl_opt_);
        return out;
    }

    Tape::Var build_budget_loss(Tape& tape, const std::vector<const HlTransition*>& transitions,
                                HlLossBreakdown& out) {
        Tape::Var critic_loss = tape.constant_scalar(0.0);
        Tape::Var actor_loss = tape.constant_scalar(0.0);
        Tape::Var entropy = tape.constant_scalar(0.0);
        for (const auto* t : transitions) {
            Tape::Var h = model_.encode_t(tape, t->state);
            Tape::Var critic = model_.critic_t(tape, h, t->subgoal);
            const double g_target =
                t->macro_reward + (t->next_terminal ? 0.0 : scfg_.gamma * t->next_search_value);
            Tape::Var cdiff = tape.sub(critic, tape.constant_scalar(g_target));
            critic_loss = tape.add(critic_loss, tape.mul(cdiff, cdiff));

            const double advantage = g_target - tape.scalar(critic);  // stop-gradient
            Tape::Var logits = model_.budget_logits_t(tape, h, t->subgoal);
            Tape::Var logp = tape.masked_log_softmax(logits, model_.budget_mask(t->feasible),
                                                     model_.config().mask_fill);
            Tape::Var logp_b = tape.pick(logp, static_cast<std::size_t>(t->budget));
            actor_loss = tape.add(actor_loss, tape.scale(logp_b, -advantage));
            entropy = tape.add(entropy, tape.scale(tape.sum(tape.mul(tape.exp(logp), logp)), -1.0));
        }
        const double inv = 1.0 / static_cast<double>(transitions.size());
        critic_loss = tape.scale(critic_loss, inv);
        actor_loss = tape.scale(actor_loss, inv);
        entropy = tape.scale(entropy, inv);
        out.budget_critic = tape.scalar(critic_loss);
        out.budget_actor = tape.scalar(actor_loss);
        out.budget_entropy = tape.scalar(entropy);
        Tape::Var total = tape.scale(critic_loss, tcfg_.w_bc);
        total = tape.add(total, tape.scale(actor_loss, tcfg_.w_ba));
        total = tape.add(total, tape.scale(entropy, -tcfg_.w_ent * tcfg_.entropy_beta));
        out.total = tape.scalar(total);
        return total;
    }

    // One DQN step on the low-level Q network with target-network targets.
    double ll_update() {
        Tape tape;
        Tape::Var loss = tape.constant_scalar(0.0);
        for (int b = 0; b < tcfg_.ll_batch; ++b) {
            const auto& t = buffers_.sample_ll(rng_replay_);
            const Vec z_emb = model_.subgoal_embedding(t.subgoal);
            double target = t.reward;
            if (!t.terminal) {
                bool any = false;
                double best = 0.0;
                const Vec next_q = ll_target_.q_values(t.next_state, z_emb);
                for (std::size_t a = 0; a < t.next_mask.size(); ++a) {
                    if (!t.next_mask[a]) continue;
                    if (!any || next_q[a] > best) best = next_q[a];
                    any = true;
                }
                if (any) target += tcfg_.gamma_ll * best;
            }
            Tape::Var q = ll_model_.q_values_t(tape, t.state, z_emb);
            Tape::Var qa = tape.pick(q, static_cast<std::size_t>(t.action));
            Tape::Var diff = tape.sub(qa, tape.constant_scalar(target));
            loss = tape.add(loss, tape.mul(diff, diff));
        }
        loss = tape.scale(loss, 1.0 / static_cast<double>(tcfg_.ll_batch));
        const double value = tape.scalar(loss);
        ll_model_.params().zero_grad();
        tape.backward(loss);
        optimizer_step(ll_model_.params(), ll_opt_);
        ++ll_steps_;
        if (ll_steps_ % tcfg_.target_update_period == 0) ll_target_.copy_values_from(ll_model_);
        return value;
    }

    struct EvalStats {
        double mean = 0.0;
        double sem_value = 0.0;
        std::vector<double> returns;
    };

    EvalStats evaluate_greedy(int episodes, std::uint64_t seed_base = 0x65766cULL) {
        EvalStats stats;
        for (int e = 0; e < episodes; ++e) {
            const int inst = e % static_cast<int>(envs_.size());
            const auto record =
                play_episode(inst, Rng::from_key({seed_base, static_cast<std::uint64_t>(e)}).next_u64(),
                             false, 0);
            stats.returns.push_back(record.total_return);
        }
        stats.mean = mean(stats.returns);
        stats.sem_value = sem(stats.returns);
        return stats;
    }

    // Metrics sink receives one line-delimited record per evaluation.
    using MetricsSink = std::function<void(const std::string&)>;

    void train(const MetricsSink& sink = {});

    int episodes_played() const { return episode_counter_; }

private:
    int choose_ll_action(const EncoderInput& state, const Vec& z_emb,
                         const std::vector<std::uint8_t>& mask, double epsilon, bool training) {
        std::vector<int> legal;
        for (std::size_t a = 0; a < mask.size(); ++a)
            if (mask[a]) legal.push_back(static_cast<int>(a));
        if (training && rng_ll_.uniform01() < epsilon)
            return legal[rng_ll_.uniform_int(legal.size())];
        const Vec q = ll_model_.q_values(state, z_emb);
        int best = legal[0];
        for (int a : legal)
            if (q[static_cast<std::size_t>(a)] > q[static_cast<std::size_t>(best)]) best = a;
        return best;
    }

    void set_budget_head_frozen(bool frozen) {
        for (auto& [name, p] : model_.params()) {
            if (name.rfind("budget", 0) == 0 || name.rfind("critic", 0) == 0)
                p.lr_scale = frozen ? 0.0 : 1.0;
        }
    }

    std::vector<TEnv> envs_;
    WorldModel model_;
    LowLevelModel ll_model_;
    LowLevelModel ll_target_;
    TrainConfig tcfg_;
    SearchConfig scfg_;
    GeometryConfig gcfg_;
    OptimizerConfig hl_opt_, ll_opt_;
    ReplayBuffers buffers_;
    Rng rng_search_, rng_ll_, rng_replay_;
    std::uint64_t run_seed_ = 0;
    int ll_steps_ = 0;
    int episode_counter_ = 0;

    std::vector<TEnv>* decision_snapshot_sink_ = nullptr;

public:
    // Exposed for the training loop, tests, and harness.
    int ll_steps() const { return ll_steps_; }
    int episode_counter() const { return episode_counter_; }
    int env_count() const { return static_cast<int>(envs_.size()); }
    void set_run_seed(std::uint64_t seed) { run_seed_ = seed; }
    const LowLevelModel& ll_target() const { return ll_target_; }
    void set_decision_snapshot_sink(std::vector<TEnv>* sink) { decision_snapshot_sink_ = sink; }

    // Executes one subgoal from a decision-time snapshot with a budget drawn
    // from the learned head and a greedy low-level policy; returns the
    // realized duration. Used by the duration-ordering validation protocol.
    int execute_subgoal(TEnv env, int z, Rng& rng) {
        const EncoderInput in = snapshot(env);
        const Vec latent = model_.encode(in);
        const int feasible = std::min(env.remaining_budget(), model_.config().budget_max);
        const Vec dist = model_.budget_distribution(latent, z, feasible);
        const int budget = static_cast<int>(rng.categorical(dist));
        const Vec z_emb = model_.subgoal_embedding(z);
        int steps = 0;
        for (int i = 0; i < budget; ++i) {
            const auto mask = env.legal_mask();
            if (std::find(mask.begin(), mask.end(), std::uint8_t{1}) == mask.end()) break;
            EncoderInput state = snapshot(env);
            const int action = choose_ll_action(state, z_emb, mask, 0.0, false);
            env.primitive_step(action);
            ++steps;
        }
        return steps;
    }
};

}  // namespace ssco

#include "ssco/trainer_loop.hpp"
