#pragma once
// Latent-sphere geometry losses that give the shared latent space its
// multi-timescale structure:
//   cap   - consecutive primitive encodings stay within a per-step cap
//           (squared hinge above kappa),
//   push  - a macro transition's displacement must reach the learned
//           per-subgoal margin (hinge below the margin),
//   order - pairwise hinge aligning score = displacement + margin with the
//           ranking of realized durations.
// The combined loss adds an L2 regularizer on the margin outputs.

#include <cstddef>
#include <vector>

#include "ssco/tape.hpp"
#include "ssco/vec.hpp"
#include "ssco/world_model.hpp"

namespace ssco {

struct GeometryConfig {
    double kappa = 0.10;
    double w_cap = 0.10;
    double w_push = 0.10;
    double w_order = 0.10;
    double margin_l2 = 1e-4;
};

// A consecutive primitive-state pair for the cap term.
struct CapPair {
    EncoderInput before;
    EncoderInput after;
};

// A decision-time state with its executed subgoal and realized duration.
struct DecisionSample {
    EncoderInput state;
    int subgoal = 0;
    int duration = 0;
};

// sigma(s,z) = d(h, g(h,z)) + m(z), on the tape.
inline Tape::Var subgoal_score_t(Tape& tape, WorldModel& model, Tape::Var latent, int z) {
    auto [next, reward] = model.dynamics_step_t(tape, latent, z);
    (void)reward;
    Tape::Var displacement = tape.chordal(latent, next);
    return tape.add(displacement, model.margin_t(tape, z));
}

// Mean squared hinge of per-step displacement above kappa.
inline Tape::Var cap_loss(Tape& tape, WorldModel& model, const std::vector<CapPair>& pairs,
                          double kappa) {
    if (pairs.empty()) return tape.constant_scalar(0.0);
    Tape::Var total = tape.constant_scalar(0.0);
    for (const auto& pair : pairs) {
        Tape::Var ha = model.encode_t(tape, pair.before);
        Tape::Var hb = model.encode_t(tape, pair.after);
        Tape::Var excess = tape.relu(tape.sub(tape.chordal(ha, hb), tape.constant_scalar(kappa)));
        total = tape.add(total, tape.mul(excess, excess));
    }
    return tape.scale(total, 1.0 / static_cast<double>(pairs.size()));
}

// Mean hinge of margin above displacement for executed (state, subgoal) pairs.
inline Tape::Var push_loss(Tape& tape, WorldModel& model,
                           const std::vector<DecisionSample>& samples) {
    if (samples.empty()) return tape.constant_scalar(0.0);
    Tape::Var total = tape.constant_scalar(0.0);
    for (const auto& sample : samples) {
        Tape::Var h = model.encode_t(tape, sample.state);
        auto [next, reward] = model.dynamics_step_t(tape, h, sample.subgoal);
        (void)reward;
        Tape::Var displacement = tape.chordal(h, next);
        Tape::Var residual = tape.relu(tape.sub(model.margin_t(tape, sample.subgoal), displacement));
        total = tape.add(total, residual);
    }
    return tape.scale(total, 1.0 / static_cast<double>(samples.size()));
}

// Mean pairwise hinge (1 - Y * (sigma_i - sigma_j))_+ with Y the sign of the
// duration difference. Tied durations contribute a constant 1.
inline Tape::Var order_loss(Tape& tape, WorldModel& model,
                            const std::vector<std::pair<DecisionSample, DecisionSample>>& pairs) {
    if (pairs.empty()) return tape.constant_scalar(0.0);
    Tape::Var total = tape.constant_scalar(0.0);
    for (const auto& [lhs, rhs] : pairs) {
        const int label = lhs.duration > rhs.duration ? 1 : (lhs.duration < rhs.duration ? -1 : 0);
        if (label == 0) {
            total = tape.add(total, tape.constant_scalar(1.0));
            continue;
        }
        Tape::Var score_i = subgoal_score_t(tape, model, model.encode_t(tape, lhs.state), lhs.subgoal);
        Tape::Var score_j = subgoal_score_t(tape, model, model.encode_t(tape, rhs.state), rhs.subgoal);
        Tape::Var delta = tape.sub(score_i, score_j);
        Tape::Var hinge = tape.relu(
            tape.sub(tape.constant_scalar(1.0), tape.scale(delta, static_cast<double>(label))));
        total = tape.add(total, hinge);
    }
    return tape.scale(total, 1.0 / static_cast<double>(pairs.size()));
}

// L2 of the margin head outputs over the whole dictionary.
inline Tape::Var margin_regularizer(Tape& tape, WorldModel& model) {
    Tape::Var total = tape.constant_scalar(0.0);
    for (int z = 0; z < model.subgoal_count(); ++z) {
        Tape::Var m = model.margin_t(tape, z);
        total = tape.add(total, tape.mul(m, m));
    }
    return total;
}

struct GeometryLossVars {
    Tape::Var cap;
    Tape::Var push;
    Tape::Var order;
    Tape::Var margin_reg;
    Tape::Var total;
};

inline GeometryLossVars unified_loss(
    Tape& tape, WorldModel& model, const std::vector<CapPair>& cap_pairs,
    const std::vector<DecisionSample>& push_samples,
    const std::vector<std::pair<DecisionSample, DecisionSample>>& order_pairs,
    const GeometryConfig& cfg) {
    GeometryLossVars vars;
    vars.cap = cap_loss(tape, model, cap_pairs, cfg.kappa);
    vars.push = push_loss(tape, model, push_samples);
    vars.order = order_loss(tape, model, order_pairs);
    vars.margin_reg = margin_regularizer(tape, model);
    vars.total = tape.add(
        tape.add(tape.scale(vars.cap, cfg.w_cap), tape.scale(vars.push, cfg.w_push)),
        tape.add(tape.scale(vars.order, cfg.w_order), tape.scale(vars.margin_reg, cfg.margin_l2)));
    return vars;
}

// Measured quantities behind the macro-micro and duration-bound diagnostics.
struct GeometryDiagnostics {
    double cap_risk = 0.0;           // mean squared hinge over primitive pairs
    double eps_cap = 0.0;            // sqrt(cap_risk)
    double eps_dyn = 0.0;            // mean chordal error of dynamics vs next encodings
    double mean_displacement = 0.0;  // mean d(h_k, h_{k+1}) over HL transitions
    double mean_duration = 0.0;
    std::vector<double> per_subgoal_margin;
    std::vector<double> per_subgoal_mean_duration;
    double kendall_tau = 0.0;  // score vs duration over subgoals
    std::size_t transition_count = 0;
};

}  // namespace ssco
