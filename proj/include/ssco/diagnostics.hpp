#pragma once
// Measured geometry diagnostics over executed high-level transitions, and the
// Monte-Carlo forms of the macro-micro displacement bound and the per-subgoal
// duration lower bound.

#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "ssco/geometry.hpp"
#include "ssco/replay.hpp"
#include "ssco/stats.hpp"
#include "ssco/vec.hpp"
#include "ssco/world_model.hpp"

namespace ssco {

struct TransitionGeometry {
    int subgoal = 0;
    int duration = 0;
    double displacement = 0.0;  // d(h(s_k), h(s_{k+1}))
    double model_displacement = 0.0;  // d_theta(s_k, z_k)
    double dyn_error = 0.0;     // d(g(h_k, z_k), h(s_{k+1}))
    double push_residual = 0.0; // (m(z) - d_theta)_+
    double score = 0.0;         // d_theta + m(z)
    std::vector<double> step_displacements;  // per primitive hop (empty when tau = 0)
};

inline TransitionGeometry measure_transition(const WorldModel& model, const HlTransition& t) {
    TransitionGeometry g;
    g.subgoal = t.subgoal;
    g.duration = t.duration;
    const Vec h0 = model.encode(t.state);
    const Vec h1 = model.encode(t.next_state);
    g.displacement = chordal_distance(h0, h1);
    auto [pred_next, reward] = model.dynamics_step(h0, t.subgoal);
    (void)reward;
    g.model_displacement = chordal_distance(h0, pred_next);
    g.dyn_error = chordal_distance(pred_next, h1);
    const double m = model.margin(t.subgoal);
    g.push_residual = std::max(0.0, m - g.model_displacement);
    g.score = g.model_displacement + m;
    if (t.duration > 0) {
        Vec prev = model.encode(t.prim_states.front());
        for (std::size_t i = 1; i < t.prim_states.size(); ++i) {
            Vec cur = model.encode(t.prim_states[i]);
            g.step_displacements.push_back(chordal_distance(prev, cur));
            prev = std::move(cur);
        }
    }
    return g;
}

inline GeometryDiagnostics compute_geometry_diagnostics(
    const WorldModel& model, const std::vector<const HlTransition*>& transitions, double kappa) {
    GeometryDiagnostics diag;
    diag.transition_count = transitions.size();
    const int subgoals = model.subgoal_count();
    diag.per_subgoal_margin.resize(static_cast<std::size_t>(subgoals), 0.0);
    for (int z = 0; z < subgoals; ++z)
        diag.per_subgoal_margin[static_cast<std::size_t>(z)] = model.margin(z);

    std::vector<double> durations, displacements;
    std::map<int, std::vector<double>> tau_by_z, score_by_z;
    double cap_sq_sum = 0.0;
    std::size_t cap_steps = 0;
    double dyn_sum = 0.0;
    for (const auto* t : transitions) {
        const auto g = measure_transition(model, *t);
        durations.push_back(static_cast<double>(g.duration));
        displacements.push_back(g.displacement);
        dyn_sum += g.dyn_error;
        for (double d : g.step_displacements) {
            const double x = std::max(0.0, d - kappa);
            cap_sq_sum += x * x;
            ++cap_steps;
        }
        tau_by_z[g.subgoal].push_back(static_cast<double>(g.duration));
        score_by_z[g.subgoal].push_back(g.score);
    }
    diag.cap_risk = cap_steps > 0 ? cap_sq_sum / static_cast<double>(cap_steps) : 0.0;
    diag.eps_cap = std::sqrt(diag.cap_risk);
    diag.eps_dyn = transitions.empty() ? 0.0 : dyn_sum / static_cast<double>(transitions.size());
    diag.mean_displacement = mean(displacements);
    diag.mean_duration = mean(durations);

    diag.per_subgoal_mean_duration.assign(static_cast<std::size_t>(subgoals), 0.0);
    std::vector<double> mean_tau_list, mean_score_list;
    for (const auto& [z, taus] : tau_by_z) {
        const double mt = mean(taus);
        diag.per_subgoal_mean_duration[static_cast<std::size_t>(z)] = mt;
        mean_tau_list.push_back(mt);
        mean_score_list.push_back(mean(score_by_z[z]));
    }
    diag.kendall_tau =
        mean_tau_list.size() >= 2 ? kendall_tau_b(mean_score_list, mean_tau_list) : 0.0;
    return diag;
}

// Macro-micro control, Monte-Carlo form: mean displacement across executed
// transitions must not exceed mean duration times (kappa + eps_cap), within
// three standard errors of the displacement mean.
struct MacroMicroCheck {
    double lhs = 0.0;        // mean displacement
    double rhs = 0.0;        // mean tau * (kappa + eps_cap) + 3 se
    double mean_tau = 0.0;
    double eps_cap = 0.0;
    double se = 0.0;
    std::size_t transitions = 0;
    bool holds = false;
};

inline MacroMicroCheck check_macro_micro(const WorldModel& model,
                                         const std::vector<const HlTransition*>& transitions,
                                         double kappa) {
    MacroMicroCheck check;
    check.transitions = transitions.size();
    std::vector<double> displacements, durations;
    double cap_sq_sum = 0.0;
    std::size_t cap_steps = 0;
    for (const auto* t : transitions) {
        const auto g = measure_transition(model, *t);
        displacements.push_back(g.displacement);
        durations.push_back(static_cast<double>(g.duration));
        for (double d : g.step_displacements) {
            const double x = std::max(0.0, d - kappa);
            cap_sq_sum += x * x;
            ++cap_steps;
        }
    }
    check.eps_cap = cap_steps > 0 ? std::sqrt(cap_sq_sum / static_cast<double>(cap_steps)) : 0.0;
    check.lhs = mean(displacements);
    check.mean_tau = mean(durations);
    check.se = sem(displacements);
    check.rhs = check.mean_tau * (kappa + check.eps_cap) + 3.0 * check.se;
    check.holds = check.lhs <= check.rhs;
    return check;
}

// Per-subgoal duration lower bound from the learned margin: mean duration of
// z must be at least (m(z) - mean push residual - eps_dyn)/(kappa + eps_cap),
// within three standard errors of the duration mean.
struct DurationBoundRow {
    int subgoal = 0;
    double mean_tau = 0.0;
    double bound = 0.0;
    double margin = 0.0;
    double push_residual = 0.0;
    std::size_t count = 0;
    bool holds = false;
};

struct DurationBoundCheck {
    std::vector<DurationBoundRow> rows;
    double eps_cap = 0.0;
    double eps_dyn = 0.0;
    bool all_hold = true;
};

inline DurationBoundCheck check_duration_bound(const WorldModel& model,
                                               const std::vector<const HlTransition*>& transitions,
                                               double kappa) {
    DurationBoundCheck check;
    std::map<int, std::vector<double>> tau_by_z;
    std::map<int, std::vector<double>> residual_by_z;
    double cap_sq_sum = 0.0;
    std::size_t cap_steps = 0;
    double dyn_sum = 0.0;
    for (const auto* t : transitions) {
        const auto g = measure_transition(model, *t);
        tau_by_z[g.subgoal].push_back(static_cast<double>(g.duration));
        residual_by_z[g.subgoal].push_back(g.push_residual);
        dyn_sum += g.dyn_error;
        for (double d : g.step_displacements) {
            const double x = std::max(0.0, d - kappa);
            cap_sq_sum += x * x;
            ++cap_steps;
        }
    }
    check.eps_cap = cap_steps > 0 ? std::sqrt(cap_sq_sum / static_cast<double>(cap_steps)) : 0.0;
    check.eps_dyn = transitions.empty() ? 0.0 : dyn_sum / static_cast<double>(transitions.size());
    for (const auto& [z, taus] : tau_by_z) {
        DurationBoundRow row;
        row.subgoal = z;
        row.count = taus.size();
        row.mean_tau = mean(taus);
        row.margin = model.margin(z);
        row.push_residual = mean(residual_by_z[z]);
        row.bound = (row.margin - row.push_residual - check.eps_dyn) / (kappa + check.eps_cap) -
                    3.0 * sem(taus);
        row.holds = row.mean_tau >= row.bound;
        check.rows.push_back(row);
        if (!row.holds) check.all_hold = false;
    }
    return check;
}

// Most recent executed transitions, newest episodes last.
inline std::vector<const HlTransition*> recent_transitions(const ReplayBuffers& buffers,
                                                           std::size_t limit) {
    std::vector<const HlTransition*> out;
    for (auto it = buffers.hl.rbegin(); it != buffers.hl.rend() && out.size() < limit; ++it)
        for (const auto& step : it->steps) {
            if (out.size() >= limit) break;
            out.push_back(&step);
        }
    return out;
}

}  // namespace ssco
