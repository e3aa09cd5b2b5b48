#pragma once
// Outer training loop: self-play collection, high- and low-level updates,
// periodic greedy evaluation with geometry diagnostics, metrics emission.

#include <json.hpp>

#include "ssco/diagnostics.hpp"
#include "ssco/trainer.hpp"

namespace ssco {

template <typename TEnv>
void Trainer<TEnv>::train(const MetricsSink& sink) {
    for (int epoch = 0; epoch < tcfg_.epochs; ++epoch) {
        for (int e = 0; e < tcfg_.episodes_per_epoch; ++e) {
            const int inst = episode_counter_ % static_cast<int>(envs_.size());
            const std::uint64_t episode_seed =
                Rng::from_key({run_seed_, 0x657069ULL, static_cast<std::uint64_t>(episode_counter_)})
                    .next_u64();
            play_episode(inst, episode_seed, true, epoch);
            ++episode_counter_;
        }

        HlLossBreakdown loss_acc;
        int hl_done = 0;
        double ll_loss_acc = 0.0;
        int ll_done = 0;
        if (static_cast<int>(buffers_.hl.size()) >= tcfg_.min_hl_episodes) {
            for (int u = 0; u < tcfg_.hl_updates_per_epoch; ++u) {
                const auto l = hl_update(epoch);
                loss_acc.policy += l.policy;
                loss_acc.value += l.value;
                loss_acc.reward += l.reward;
                loss_acc.cap += l.cap;
                loss_acc.push += l.push;
                loss_acc.order += l.order;
                loss_acc.margin_reg += l.margin_reg;
                loss_acc.budget_critic += l.budget_critic;
                loss_acc.budget_actor += l.budget_actor;
                loss_acc.budget_entropy += l.budget_entropy;
                loss_acc.total += l.total;
                ++hl_done;
            }
        }
        if (static_cast<int>(buffers_.ll.size()) >= tcfg_.min_ll_transitions) {
            for (int u = 0; u < tcfg_.ll_updates_per_epoch; ++u) {
                ll_loss_acc += ll_update();
                ++ll_done;
            }
        }

        const bool last_epoch = epoch + 1 == tcfg_.epochs;
        if (sink && (last_epoch || (epoch + 1) % tcfg_.eval_period == 0)) {
            const auto eval = evaluate_greedy(tcfg_.eval_episodes);
            const auto transitions = recent_transitions(buffers_, 500);
            const auto diag = compute_geometry_diagnostics(model_, transitions, gcfg_.kappa);

            nlohmann::json record;
            record["epoch"] = epoch;
            record["episodes"] = episode_counter_;
            record["eval_return_mean"] = eval.mean;
            record["eval_return_sem"] = eval.sem_value;
            nlohmann::json loss;
            const double inv = hl_done > 0 ? 1.0 / hl_done : 0.0;
            loss["policy"] = loss_acc.policy * inv;
            loss["value"] = loss_acc.value * inv;
            loss["reward"] = loss_acc.reward * inv;
            loss["cap"] = loss_acc.cap * inv;
            loss["push"] = loss_acc.push * inv;
            loss["order"] = loss_acc.order * inv;
            loss["margin_reg"] = loss_acc.margin_reg * inv;
            loss["budget_critic"] = loss_acc.budget_critic * inv;
            loss["budget_actor"] = loss_acc.budget_actor * inv;
            loss["budget_entropy"] = loss_acc.budget_entropy * inv;
            loss["total"] = loss_acc.total * inv;
            loss["ll"] = ll_done > 0 ? ll_loss_acc / ll_done : 0.0;
            record["loss"] = loss;
            nlohmann::json geo;
            geo["cap_risk"] = diag.cap_risk;
            geo["eps_cap"] = diag.eps_cap;
            geo["eps_dyn"] = diag.eps_dyn;
            geo["mean_displacement"] = diag.mean_displacement;
            geo["mean_duration"] = diag.mean_duration;
            geo["kendall_tau"] = diag.kendall_tau;
            geo["per_subgoal_margin"] = diag.per_subgoal_margin;
            geo["per_subgoal_mean_duration"] = diag.per_subgoal_mean_duration;
            record["geometry"] = geo;
            sink(record.dump());
        }
    }
}

}  // namespace ssco
