#pragma once
// Evaluation and validation protocols: seeded greedy evaluation with s.e.m.
// reporting, the duration-ordering rank-correlation protocol, value-geometry
// calibration with bootstrap intervals, and the results table format.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "ssco/config.hpp"
#include "ssco/diagnostics.hpp"
#include "ssco/stats.hpp"
#include "ssco/trainer.hpp"

namespace ssco {

struct EvalReport {
    std::vector<double> per_seed_means;
    double mean = 0.0;
    double sem_value = 0.0;
    std::string fingerprint;
};

// Greedy evaluation: `play(instance_index, episode_seed)` runs one episode
// and returns its undiscounted return. Each evaluation seed aggregates over
// every instance and `episodes_per_seed` episodes.
inline EvalReport evaluate(const std::function<double(int, std::uint64_t)>& play,
                           int instance_count, int seeds, int episodes_per_seed,
                           const std::string& fingerprint = "") {
    EvalReport report;
    report.fingerprint = fingerprint;
    for (int s = 0; s < seeds; ++s) {
        std::vector<double> returns;
        for (int inst = 0; inst < instance_count; ++inst) {
            for (int e = 0; e < episodes_per_seed; ++e) {
                const std::uint64_t episode_seed =
                    Rng::from_key({0x6576616cULL, static_cast<std::uint64_t>(s),
                                   static_cast<std::uint64_t>(inst), static_cast<std::uint64_t>(e)})
                        .next_u64();
                returns.push_back(play(inst, episode_seed));
            }
        }
        report.per_seed_means.push_back(mean(returns));
    }
    report.mean = mean(report.per_seed_means);
    report.sem_value = sem(report.per_seed_means);
    return report;
}

struct KendallReport {
    std::vector<double> per_state_taus;
    double mean_tau = 0.0;
    double sem_tau = 0.0;
};

// Duration-ordering protocol: sample decision-time states from greedy
// rollouts; rank all subgoals by score (displacement + margin) and by mean
// realized duration over repeated executions; report the average tie-aware
// rank correlation across states.
template <typename TEnv>
KendallReport kendall_protocol(Trainer<TEnv>& trainer, int states_to_sample, int executions,
                               Rng& rng) {
    std::vector<TEnv> pool;
    trainer.set_decision_snapshot_sink(&pool);
    int episode = 0;
    while (static_cast<int>(pool.size()) < states_to_sample * 4 && episode < 256) {
        trainer.play_episode(episode % trainer.env_count(),
                             /*episode_seed=*/0x6b656eULL + static_cast<std::uint64_t>(episode),
                             false, 0);
        ++episode;
    }
    trainer.set_decision_snapshot_sink(nullptr);
    // Exhausted-budget states force every subgoal to duration zero and carry
    // no ordering information; sample only states where execution can differ.
    std::erase_if(pool, [](const TEnv& env) { return env.remaining_budget() <= 0; });

    KendallReport report;
    if (pool.empty()) return report;
    const int subgoals = trainer.model().subgoal_count();
    for (int s = 0; s < states_to_sample; ++s) {
        const TEnv& env = pool[rng.uniform_int(pool.size())];
        const EncoderInput in = Trainer<TEnv>::snapshot(env);
        const Vec latent = trainer.model().encode(in);
        Vec scores(static_cast<std::size_t>(subgoals));
        Vec durations(static_cast<std::size_t>(subgoals));
        for (int z = 0; z < subgoals; ++z) {
            const auto [next, reward] = trainer.model().dynamics_step(latent, z);
            (void)reward;
            scores[static_cast<std::size_t>(z)] =
                chordal_distance(latent, next) + trainer.model().margin(z);
            double total = 0.0;
            for (int e = 0; e < executions; ++e)
                total += trainer.execute_subgoal(env, z, rng);
            durations[static_cast<std::size_t>(z)] = total / executions;
        }
        report.per_state_taus.push_back(kendall_tau_b(scores, durations));
    }
    report.mean_tau = mean(report.per_state_taus);
    report.sem_tau = sem(report.per_state_taus);
    return report;
}

struct CalibrationReport {
    BootstrapCi tau;
    BootstrapCi rho;
    std::size_t pairs = 0;
};

// Value-geometry calibration: chordal distance of each modeled macro
// transition against the absolute change in search-backed value targets,
// with percentile-bootstrap confidence intervals on the rank correlations.
inline CalibrationReport calibration(const WorldModel& model,
                                     const std::vector<EpisodeRecord>& records, int resamples,
                                     Rng& rng) {
    std::vector<double> distances, value_deltas;
    for (const auto& record : records) {
        for (const auto& step : record.steps) {
            const Vec h = model.encode(step.state);
            const auto [next, reward] = model.dynamics_step(h, step.subgoal);
            (void)reward;
            distances.push_back(chordal_distance(h, next));
            value_deltas.push_back(std::fabs(step.search_value - step.next_search_value));
        }
    }
    CalibrationReport report;
    report.pairs = distances.size();
    if (distances.size() < 3) return report;
    report.tau = bootstrap_ci_pairs(
        distances, value_deltas,
        [](std::span<const double> a, std::span<const double> b) { return kendall_tau_b(a, b); },
        resamples, rng);
    report.rho = bootstrap_ci_pairs(
        distances, value_deltas,
        [](std::span<const double> a, std::span<const double> b) { return spearman_rho(a, b); },
        resamples, rng);
    return report;
}

struct ResultRow {
    std::string method;
    std::string env;
    int nodes = 0;
    int horizon = 0;
    int budget = 0;
    double mean = 0.0;
    double sem_value = 0.0;
    int seeds = 0;
};

inline void write_results_table(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << "method\tenv\tN\tT\tK\tmean\tsem\tseeds\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.6f", r.mean);
        out << r.method << "\t" << r.env << "\t" << r.nodes << "\t" << r.horizon << "\t"
            << r.budget << "\t" << buf << "\t";
        std::snprintf(buf, sizeof(buf), "%.6f", r.sem_value);
        out << buf << "\t" << r.seeds << "\n";
    }
}

// ---------------------------------------------------------------------------
// Instance workspaces: own the generated instances so environments can hold
// stable pointers into them.

struct AimLab {
    RunConfig config;
    std::vector<GraphInstance> train_instances;
    std::vector<GraphInstance> eval_instances;

    static AimLab make(const RunConfig& cfg) {
        AimLab lab;
        lab.config = cfg;
        for (int i = 0; i < cfg.instance_count; ++i)
            lab.train_instances.push_back(
                aim_generate(cfg.nodes, cfg.instance_seed + static_cast<std::uint64_t>(i),
                             cfg.avg_degree, cfg.cascade_c));
        for (int i = 0; i < cfg.eval_instance_count; ++i)
            lab.eval_instances.push_back(
                aim_generate(cfg.nodes, cfg.instance_seed + 1000 + static_cast<std::uint64_t>(i),
                             cfg.avg_degree, cfg.cascade_c));
        return lab;
    }

    std::vector<AimEnv> envs(const std::vector<GraphInstance>& instances) const {
        std::vector<AimEnv> out;
        for (const auto& g : instances) out.emplace_back(&g, config.horizon, config.total_budget);
        return out;
    }
};

struct SopLab {
    RunConfig config;
    std::vector<SopInstance> train_instances;
    std::vector<SopInstance> eval_instances;

    static SopLab make(const RunConfig& cfg) {
        SopLab lab;
        lab.config = cfg;
        for (int i = 0; i < cfg.instance_count; ++i)
            lab.train_instances.push_back(
                sop_generate(cfg.nodes, cfg.instance_seed + static_cast<std::uint64_t>(i),
                             cfg.sop_daily_limit, cfg.sop_penalty_rate, cfg.sop_profit_max,
                             cfg.sop_noise_frac));
        for (int i = 0; i < cfg.eval_instance_count; ++i)
            lab.eval_instances.push_back(
                sop_generate(cfg.nodes, cfg.instance_seed + 1000 + static_cast<std::uint64_t>(i),
                             cfg.sop_daily_limit, cfg.sop_penalty_rate, cfg.sop_profit_max,
                             cfg.sop_noise_frac));
        return lab;
    }

    std::vector<SopEnv> envs(const std::vector<SopInstance>& instances) const {
        std::vector<SopEnv> out;
        for (const auto& inst : instances)
            out.emplace_back(&inst, config.horizon, config.total_budget, config.sop_rho);
        return out;
    }
};

template <typename TEnv>
Trainer<TEnv> make_trainer(const RunConfig& cfg, std::vector<TEnv> envs, std::uint64_t seed) {
    const ModelConfig mc = cfg.model_config(TEnv::kFeatDim);
    WorldModel model(mc, seed);
    LowLevelModel ll(TEnv::kFeatDim, mc.latent_dim, cfg.ll_hidden, seed ^ 0x5a5a5a5aULL);
    return Trainer<TEnv>(std::move(envs), std::move(model), std::move(ll), cfg.train, cfg.search,
                         cfg.geometry, seed);
}

}  // namespace ssco
