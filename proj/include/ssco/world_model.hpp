#pragma once
// The high-level world model: a shared graph encoder onto the unit sphere, a
// subgoal-conditioned latent dynamics head with scalar macro-reward output, a
// prediction head (subgoal prior + value), a feasibility-masked budget head,
// a critic for the budget actor, and the per-subgoal margin head.
//
// Every head has two forward paths that must agree: a tape path used for
// training and a plain path used for search and acting.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ssco/errors.hpp"
#include "ssco/nn.hpp"
#include "ssco/rng.hpp"
#include "ssco/tape.hpp"
#include "ssco/vec.hpp"

namespace ssco {

struct ModelConfig {
    int latent_dim = 32;
    int hidden_dim = 64;
    int gnn_hidden = 32;
    int subgoal_count = 8;
    int budget_max = 4;
    int node_feat_dim = 6;
    double mask_fill = -1e9;
};

// A state snapshot sufficient to re-encode it later: node features plus the
// (instance-owned) message edges.
struct EncoderInput {
    Vec features;  // row-major nodes x feat_dim
    const std::vector<std::pair<int, int>>* edges = nullptr;
    int nodes = 0;
};

class WorldModel {
public:
    WorldModel() = default;

    WorldModel(ModelConfig config, std::uint64_t init_seed) : cfg_(config) {
        Rng rng = Rng::from_key({0x6d6f64656cULL /*"model"*/, init_seed});
        encoder_ = {"enc", static_cast<std::size_t>(cfg_.node_feat_dim),
                    static_cast<std::size_t>(cfg_.gnn_hidden),
                    static_cast<std::size_t>(cfg_.latent_dim)};
        graph_encoder_init(params_, encoder_, rng);

        const auto d = static_cast<std::size_t>(cfg_.latent_dim);
        const auto h = static_cast<std::size_t>(cfg_.hidden_dim);
        const auto m = static_cast<std::size_t>(cfg_.subgoal_count);
        dyn_latent_ = {"dyn.latent", {2 * d, h, h, d}};
        dyn_reward_ = {"dyn.reward", {2 * d, h, 1}};
        policy_ = {"pred.policy", {d, h, m}};
        value_ = {"pred.value", {d, h, 1}};
        budget_ = {"budget", {2 * d, h, static_cast<std::size_t>(cfg_.budget_max) + 1}};
        critic_ = {"critic", {2 * d, h, 1}};
        margin_ = {"margin", {d, 32, 1}};
        for (const auto* spec : {&dyn_latent_, &dyn_reward_, &policy_, &value_, &budget_,
                                 &critic_, &margin_})
            mlp_init(params_, *spec, rng);
        // Small initial margins: softplus(-2) ~ 0.13.
        params_.at("margin.l1.b").value()[0] = -2.0;

        Vec emb(m * d);
        for (double& x : emb) x = rng.normal() * 0.5;
        params_.add("subgoals", {m, d}, std::move(emb));
    }

    const ModelConfig& config() const { return cfg_; }
    ParameterSet& params() { return params_; }
    const ParameterSet& params() const { return params_; }
    int subgoal_count() const { return cfg_.subgoal_count; }

    Vec subgoal_embedding(int z) const {
        const auto d = static_cast<std::size_t>(cfg_.latent_dim);
        const Vec& all = params_.at("subgoals").value();
        return Vec(all.begin() + static_cast<long>(z) * static_cast<long>(d),
                   all.begin() + static_cast<long>(z + 1) * static_cast<long>(d));
    }

    // ---- plain forward paths -------------------------------------------

    Vec encode(const EncoderInput& in) const {
        Vec latent = graph_encode_fast(params_, encoder_, *in.edges, in.features,
                                       static_cast<std::size_t>(in.nodes));
        l2_normalize_inplace(latent);
        return latent;
    }

    std::pair<Vec, double> dynamics_step(const Vec& latent, int z) const {
        Vec joint = latent;
        const Vec emb = subgoal_embedding(z);
        joint.insert(joint.end(), emb.begin(), emb.end());
        Vec next = mlp_forward_fast(params_, dyn_latent_, joint);
        l2_normalize_inplace(next);
        const double reward = mlp_forward_fast(params_, dyn_reward_, joint)[0];
        return {std::move(next), reward};
    }

    std::pair<Vec, double> predict(const Vec& latent) const {
        Vec logits = mlp_forward_fast(params_, policy_, latent);
        double max_l = logits[0];
        for (double l : logits) max_l = std::max(max_l, l);
        double zsum = 0.0;
        for (double& l : logits) {
            l = std::exp(l - max_l);
            zsum += l;
        }
        for (double& l : logits) l /= zsum;
        const double value = mlp_forward_fast(params_, value_, latent)[0];
        return {std::move(logits), value};
    }

    Vec budget_logits(const Vec& latent, int z) const {
        Vec joint = latent;
        const Vec emb = subgoal_embedding(z);
        joint.insert(joint.end(), emb.begin(), emb.end());
        return mlp_forward_fast(params_, budget_, joint);
    }

    // Masked softmax over {0..feasible}; probabilities above the feasible
    // budget are exactly zero.
    Vec budget_distribution(const Vec& latent, int z, int feasible) const {
        if (feasible < 0) throw ConfigError("budget_distribution: negative feasible budget");
        if (feasible > cfg_.budget_max)
            throw ConfigError("budget_distribution: feasible exceeds budget_max");
        Vec logits = budget_logits(latent, z);
        Vec probs(logits.size(), 0.0);
        double max_l = -1e300;
        for (int b = 0; b <= feasible; ++b) max_l = std::max(max_l, logits[static_cast<std::size_t>(b)]);
        double zsum = 0.0;
        for (int b = 0; b <= feasible; ++b) {
            probs[static_cast<std::size_t>(b)] = std::exp(logits[static_cast<std::size_t>(b)] - max_l);
            zsum += probs[static_cast<std::size_t>(b)];
        }
        for (int b = 0; b <= feasible; ++b) probs[static_cast<std::size_t>(b)] /= zsum;
        return probs;
    }

    double critic_value(const Vec& latent, int z) const {
        Vec joint = latent;
        const Vec emb = subgoal_embedding(z);
        joint.insert(joint.end(), emb.begin(), emb.end());
        return mlp_forward_fast(params_, critic_, joint)[0];
    }

    double margin(int z) const {
        const Vec out = mlp_forward_fast(params_, margin_, subgoal_embedding(z));
        const double x = out[0];
        return x > 30.0 ? x : std::log1p(std::exp(x));
    }

    // ---- tape forward paths --------------------------------------------

    Tape::Var encode_t(Tape& tape, const EncoderInput& in) {
        Tape::Var feats = tape.constant(in.features);
        Tape::Var latent = graph_encode(tape, params_, encoder_, *in.edges, feats,
                                        static_cast<std::size_t>(in.nodes));
        return tape.l2_normalize(latent);
    }

    Tape::Var subgoal_embedding_t(Tape& tape, int z) {
        return tape.gather_row(tape.param(params_.at("subgoals")), static_cast<std::size_t>(z),
                               static_cast<std::size_t>(cfg_.latent_dim));
    }

    std::pair<Tape::Var, Tape::Var> dynamics_step_t(Tape& tape, Tape::Var latent, int z) {
        Tape::Var joint = tape.concat(latent, subgoal_embedding_t(tape, z));
        Tape::Var next = tape.l2_normalize(mlp_forward(tape, params_, dyn_latent_, joint));
        Tape::Var reward = mlp_forward(tape, params_, dyn_reward_, joint);
        return {next, reward};
    }

    Tape::Var policy_logits_t(Tape& tape, Tape::Var latent) {
        return mlp_forward(tape, params_, policy_, latent);
    }

    Tape::Var value_t(Tape& tape, Tape::Var latent) {
        return mlp_forward(tape, params_, value_, latent);
    }

    Tape::Var budget_logits_t(Tape& tape, Tape::Var latent, int z) {
        Tape::Var joint = tape.concat(latent, subgoal_embedding_t(tape, z));
        return mlp_forward(tape, params_, budget_, joint);
    }

    Tape::Var critic_t(Tape& tape, Tape::Var latent, int z) {
        Tape::Var joint = tape.concat(latent, subgoal_embedding_t(tape, z));
        return mlp_forward(tape, params_, critic_, joint);
    }

    Tape::Var margin_t(Tape& tape, int z) {
        return tape.softplus(mlp_forward(tape, params_, margin_, subgoal_embedding_t(tape, z)));
    }

    std::vector<std::uint8_t> budget_mask(int feasible) const {
        std::vector<std::uint8_t> mask(static_cast<std::size_t>(cfg_.budget_max) + 1, 0);
        for (int b = 0; b <= feasible && b <= cfg_.budget_max; ++b) mask[static_cast<std::size_t>(b)] = 1;
        return mask;
    }

private:
    ModelConfig cfg_;
    ParameterSet params_;
    GraphEncoderSpec encoder_;
    MlpSpec dyn_latent_, dyn_reward_, policy_, value_, budget_, critic_, margin_;
};

// Subgoal-conditioned per-node Q network for the low-level controller: two
// message-passing rounds over [node features ; subgoal embedding], then a
// per-node scalar head. The subgoal embedding enters as a constant input, so
// low-level updates do not touch the high-level dictionary.
class LowLevelModel {
public:
    LowLevelModel() = default;

    LowLevelModel(int node_feat_dim, int subgoal_dim, int hidden, std::uint64_t init_seed)
        : feat_dim_(node_feat_dim), subgoal_dim_(subgoal_dim), hidden_(hidden) {
        Rng rng = Rng::from_key({0x6c6c71ULL /*"llq"*/, init_seed});
        const auto in = static_cast<std::size_t>(feat_dim_ + subgoal_dim_);
        const auto h = static_cast<std::size_t>(hidden_);
        add_affine_params(params_, "q.r0.agg", h, in, rng);
        add_affine_params(params_, "q.r0.self", h, in, rng);
        add_affine_params(params_, "q.r1.agg", h, h, rng);
        add_affine_params(params_, "q.r1.self", h, h, rng);
        add_affine_params(params_, "q.out", 1, h, rng);
    }

    ParameterSet& params() { return params_; }
    const ParameterSet& params() const { return params_; }

    // Per-node Q values for one subgoal context.
    Vec q_values(const EncoderInput& in, const Vec& subgoal_emb) const {
        const auto nodes = static_cast<std::size_t>(in.nodes);
        const auto fin = static_cast<std::size_t>(feat_dim_ + subgoal_dim_);
        Vec h(nodes * fin);
        for (std::size_t v = 0; v < nodes; ++v) {
            const double* src = in.features.data() + v * static_cast<std::size_t>(feat_dim_);
            double* dst = h.data() + v * fin;
            for (int c = 0; c < feat_dim_; ++c) dst[static_cast<std::size_t>(c)] = src[c];
            for (int c = 0; c < subgoal_dim_; ++c)
                dst[static_cast<std::size_t>(feat_dim_ + c)] = subgoal_emb[static_cast<std::size_t>(c)];
        }
        std::size_t width = fin;
        Vec messages, next;
        for (int round = 0; round < 2; ++round) {
            const std::string prefix = "q.r" + std::to_string(round);
            const Vec& wa = params_.at(prefix + ".agg.w").value();
            const Vec& ba = params_.at(prefix + ".agg.b").value();
            const Vec& ws = params_.at(prefix + ".self.w").value();
            const Vec& bs = params_.at(prefix + ".self.b").value();
            messages.assign(nodes * width, 0.0);
            for (const auto& [u, v] : *in.edges) {
                const double* src = h.data() + static_cast<std::size_t>(u) * width;
                double* dst = messages.data() + static_cast<std::size_t>(v) * width;
                for (std::size_t c = 0; c < width; ++c) dst[c] += src[c];
            }
            const auto hw = static_cast<std::size_t>(hidden_);
            next.assign(nodes * hw, 0.0);
            // Same accumulation order as the tape path: two affines, then add.
            for (std::size_t v = 0; v < nodes; ++v) {
                const double* mrow = messages.data() + v * width;
                const double* hrow = h.data() + v * width;
                double* orow = next.data() + v * hw;
                for (std::size_t r = 0; r < hw; ++r) {
                    double acc_agg = ba[r];
                    const double* war = wa.data() + r * width;
                    for (std::size_t c = 0; c < width; ++c) acc_agg += war[c] * mrow[c];
                    double acc_self = bs[r];
                    const double* wsr = ws.data() + r * width;
                    for (std::size_t c = 0; c < width; ++c) acc_self += wsr[c] * hrow[c];
                    const double acc = acc_agg + acc_self;
                    orow[r] = acc > 0.0 ? acc : 0.0;
                }
            }
            h = next;
            width = hw;
        }
        const Vec& wo = params_.at("q.out.w").value();
        const Vec& bo = params_.at("q.out.b").value();
        Vec q(nodes);
        for (std::size_t v = 0; v < nodes; ++v) {
            double acc = bo[0];
            const double* hrow = h.data() + v * width;
            for (std::size_t c = 0; c < width; ++c) acc += wo[c] * hrow[c];
            q[v] = acc;
        }
        return q;
    }

    // Tape twin of q_values.
    Tape::Var q_values_t(Tape& tape, const EncoderInput& in, const Vec& subgoal_emb) {
        const auto nodes = static_cast<std::size_t>(in.nodes);
        const auto fin = static_cast<std::size_t>(feat_dim_ + subgoal_dim_);
        Vec joined(nodes * fin);
        for (std::size_t v = 0; v < nodes; ++v) {
            const double* src = in.features.data() + v * static_cast<std::size_t>(feat_dim_);
            double* dst = joined.data() + v * fin;
            for (int c = 0; c < feat_dim_; ++c) dst[static_cast<std::size_t>(c)] = src[c];
            for (int c = 0; c < subgoal_dim_; ++c)
                dst[static_cast<std::size_t>(feat_dim_ + c)] = subgoal_emb[static_cast<std::size_t>(c)];
        }
        Tape::Var h = tape.constant(std::move(joined));
        std::size_t width = fin;
        for (int round = 0; round < 2; ++round) {
            const std::string prefix = "q.r" + std::to_string(round);
            Tape::Var msg = tape.adjacency_matmul(*in.edges, h, nodes, width);
            Tape::Var agg = tape.node_affine(tape.param(params_.at(prefix + ".agg.w")),
                                             tape.param(params_.at(prefix + ".agg.b")), msg, nodes,
                                             width, static_cast<std::size_t>(hidden_));
            Tape::Var self = tape.node_affine(tape.param(params_.at(prefix + ".self.w")),
                                              tape.param(params_.at(prefix + ".self.b")), h, nodes,
                                              width, static_cast<std::size_t>(hidden_));
            h = tape.relu(tape.add(agg, self));
            width = static_cast<std::size_t>(hidden_);
        }
        return tape.node_affine(tape.param(params_.at("q.out.w")),
                                tape.param(params_.at("q.out.b")), h, nodes, width, 1);
    }

    // Deep copy used for the target network.
    LowLevelModel clone() const {
        LowLevelModel copy;
        copy.feat_dim_ = feat_dim_;
        copy.subgoal_dim_ = subgoal_dim_;
        copy.hidden_ = hidden_;
        for (const auto& [name, p] : params_)
            copy.params_.add(name, p.tensor.shape, p.tensor.data);
        return copy;
    }

    void copy_values_from(const LowLevelModel& other) {
        for (auto& [name, p] : params_) p.value() = other.params_.at(name).value();
    }

    int feat_dim() const { return feat_dim_; }
    int subgoal_dim() const { return subgoal_dim_; }

private:
    int feat_dim_ = 0;
    int subgoal_dim_ = 0;
    int hidden_ = 32;
    ParameterSet params_;
};

}  // namespace ssco
