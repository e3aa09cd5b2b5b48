#pragma once
// Network building blocks over the tape: MLPs, the two-round message-passing
// graph encoder, the Adam-style optimizer with global-norm clipping, and the
// finite-difference gradient checker.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ssco/rng.hpp"
#include "ssco/tape.hpp"
#include "ssco/vec.hpp"

namespace ssco {

// ---------------------------------------------------------------------------
// Initialization

inline Vec glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Vec w(rows * cols);
    for (double& x : w) x = (2.0 * rng.uniform01() - 1.0) * bound;
    return w;
}

inline void add_affine_params(ParameterSet& ps, const std::string& prefix, std::size_t out_dim,
                              std::size_t in_dim, Rng& rng) {
    ps.add(prefix + ".w", {out_dim, in_dim}, glorot_uniform(out_dim, in_dim, rng));
    ps.add(prefix + ".b", {out_dim}, Vec(out_dim, 0.0));
}

// ---------------------------------------------------------------------------
// MLP: affine-ReLU stack, final layer affine only.

struct MlpSpec {
    std::string prefix;
    std::vector<std::size_t> dims;  // input, hidden..., output

    std::size_t layer_count() const { return dims.size() - 1; }
    std::string layer_name(std::size_t l) const { return prefix + ".l" + std::to_string(l); }
};

inline void mlp_init(ParameterSet& ps, const MlpSpec& spec, Rng& rng) {
    for (std::size_t l = 0; l + 1 < spec.dims.size(); ++l)
        add_affine_params(ps, spec.layer_name(l), spec.dims[l + 1], spec.dims[l], rng);
}

inline Tape::Var mlp_forward(Tape& tape, ParameterSet& ps, const MlpSpec& spec, Tape::Var input) {
    Tape::Var h = input;
    for (std::size_t l = 0; l + 1 < spec.dims.size(); ++l) {
        const auto name = spec.layer_name(l);
        h = tape.affine(tape.param(ps.at(name + ".w")), tape.param(ps.at(name + ".b")), h,
                        spec.dims[l + 1], spec.dims[l]);
        if (l + 2 < spec.dims.size()) h = tape.relu(h);
    }
    return h;
}

// Inference path without a tape; must match mlp_forward exactly.
inline Vec mlp_forward_fast(const ParameterSet& ps, const MlpSpec& spec, const Vec& input) {
    Vec h = input;
    for (std::size_t l = 0; l + 1 < spec.dims.size(); ++l) {
        const auto name = spec.layer_name(l);
        const Vec& w = ps.at(name + ".w").value();
        const Vec& b = ps.at(name + ".b").value();
        const std::size_t rows = spec.dims[l + 1];
        const std::size_t cols = spec.dims[l];
        Vec out(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            double acc = b[r];
            const double* wr = w.data() + r * cols;
            for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * h[c];
            out[r] = acc;
        }
        if (l + 2 < spec.dims.size())
            for (double& x : out) x = x > 0.0 ? x : 0.0;
        h = std::move(out);
    }
    return h;
}

// ---------------------------------------------------------------------------
// Graph encoder: two rounds of h <- ReLU(W (A h) + U h + b), mean pooling,
// and a final linear projection. The adjacency aggregation is linear.

struct GraphEncoderSpec {
    std::string prefix;
    std::size_t feat_dim = 0;
    std::size_t hidden_dim = 32;
    std::size_t out_dim = 32;
    static constexpr std::size_t kRounds = 2;

    std::string round_name(std::size_t r, const char* part) const {
        return prefix + ".r" + std::to_string(r) + "." + part;
    }
};

inline void graph_encoder_init(ParameterSet& ps, const GraphEncoderSpec& spec, Rng& rng) {
    std::size_t in = spec.feat_dim;
    for (std::size_t r = 0; r < GraphEncoderSpec::kRounds; ++r) {
        add_affine_params(ps, spec.round_name(r, "agg"), spec.hidden_dim, in, rng);
        add_affine_params(ps, spec.round_name(r, "self"), spec.hidden_dim, in, rng);
        in = spec.hidden_dim;
    }
    add_affine_params(ps, spec.prefix + ".proj", spec.out_dim, spec.hidden_dim, rng);
}

// Pre-normalization latent for a node-feature matrix (row-major nodes x feat).
inline Tape::Var graph_encode(Tape& tape, ParameterSet& ps, const GraphEncoderSpec& spec,
                              const std::vector<std::pair<int, int>>& edges, Tape::Var feats,
                              std::size_t nodes) {
    Tape::Var h = feats;
    std::size_t in = spec.feat_dim;
    for (std::size_t r = 0; r < GraphEncoderSpec::kRounds; ++r) {
        const auto agg = spec.round_name(r, "agg");
        const auto self = spec.round_name(r, "self");
        Tape::Var messages = tape.adjacency_matmul(edges, h, nodes, in);
        Tape::Var from_agg = tape.node_affine(tape.param(ps.at(agg + ".w")),
                                              tape.param(ps.at(agg + ".b")), messages, nodes, in,
                                              spec.hidden_dim);
        Tape::Var from_self = tape.node_affine(tape.param(ps.at(self + ".w")),
                                               tape.param(ps.at(self + ".b")), h, nodes, in,
                                               spec.hidden_dim);
        h = tape.relu(tape.add(from_agg, from_self));
        in = spec.hidden_dim;
    }
    Tape::Var pooled = tape.mean_pool(h, nodes, spec.hidden_dim);
    return tape.affine(tape.param(ps.at(spec.prefix + ".proj.w")),
                       tape.param(ps.at(spec.prefix + ".proj.b")), pooled, spec.out_dim,
                       spec.hidden_dim);
}

inline Vec graph_encode_fast(const ParameterSet& ps, const GraphEncoderSpec& spec,
                             const std::vector<std::pair<int, int>>& edges, const Vec& feats,
                             std::size_t nodes) {
    Vec h = feats;
    std::size_t in = spec.feat_dim;
    Vec messages, next;
    for (std::size_t r = 0; r < GraphEncoderSpec::kRounds; ++r) {
        messages.assign(nodes * in, 0.0);
        for (const auto& [u, v] : edges) {
            const double* src = h.data() + static_cast<std::size_t>(u) * in;
            double* dst = messages.data() + static_cast<std::size_t>(v) * in;
            for (std::size_t c = 0; c < in; ++c) dst[c] += src[c];
        }
        const Vec& wa = ps.at(spec.round_name(r, "agg") + ".w").value();
        const Vec& ba = ps.at(spec.round_name(r, "agg") + ".b").value();
        const Vec& ws = ps.at(spec.round_name(r, "self") + ".w").value();
        const Vec& bs = ps.at(spec.round_name(r, "self") + ".b").value();
        next.assign(nodes * spec.hidden_dim, 0.0);
        // Accumulation order mirrors the tape path (two affines, then add) so
        // both forwards agree bit-for-bit.
        for (std::size_t v = 0; v < nodes; ++v) {
            const double* mrow = messages.data() + v * in;
            const double* hrow = h.data() + v * in;
            double* orow = next.data() + v * spec.hidden_dim;
            for (std::size_t rr = 0; rr < spec.hidden_dim; ++rr) {
                double acc_agg = ba[rr];
                const double* war = wa.data() + rr * in;
                for (std::size_t c = 0; c < in; ++c) acc_agg += war[c] * mrow[c];
                double acc_self = bs[rr];
                const double* wsr = ws.data() + rr * in;
                for (std::size_t c = 0; c < in; ++c) acc_self += wsr[c] * hrow[c];
                const double acc = acc_agg + acc_self;
                orow[rr] = acc > 0.0 ? acc : 0.0;
            }
        }
        h = next;
        in = spec.hidden_dim;
    }
    Vec pooled(spec.hidden_dim, 0.0);
    for (std::size_t v = 0; v < nodes; ++v)
        for (std::size_t c = 0; c < spec.hidden_dim; ++c) pooled[c] += h[v * spec.hidden_dim + c];
    const double inv = 1.0 / static_cast<double>(nodes);
    for (double& x : pooled) x *= inv;
    const Vec& wp = ps.at(spec.prefix + ".proj.w").value();
    const Vec& bp = ps.at(spec.prefix + ".proj.b").value();
    Vec out(spec.out_dim);
    for (std::size_t r = 0; r < spec.out_dim; ++r) {
        double acc = bp[r];
        const double* wr = wp.data() + r * spec.hidden_dim;
        for (std::size_t c = 0; c < spec.hidden_dim; ++c) acc += wr[c] * pooled[c];
        out[r] = acc;
    }
    return out;
}

inline void l2_normalize_inplace(Vec& v) {
    const double n = std::max(norm2(v), 1e-12);
    for (double& x : v) x /= n;
}

// ---------------------------------------------------------------------------
// Optimizer: global-norm clip, Adam moments, decoupled weight decay.

struct OptimizerConfig {
    double learning_rate = 1e-3;
    double weight_decay = 1e-5;
    double clip_norm = 5.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

inline double global_grad_norm(const ParameterSet& ps) {
    double acc = 0.0;
    for (const auto& [name, p] : ps)
        for (double g : p.grad) acc += g * g;
    return std::sqrt(acc);
}

inline void optimizer_step(ParameterSet& ps, const OptimizerConfig& cfg) {
    const double norm = global_grad_norm(ps);
    const double clip_scale = (cfg.clip_norm > 0.0 && norm > cfg.clip_norm)
                                  ? cfg.clip_norm / norm
                                  : 1.0;
    ps.step_count += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, ps.step_count);
    const double bc2 = 1.0 - std::pow(cfg.beta2, ps.step_count);
    for (auto& [name, p] : ps) {
        const double lr = cfg.learning_rate * p.lr_scale;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double g = p.grad[i] * clip_scale;
            p.adam_m[i] = cfg.beta1 * p.adam_m[i] + (1.0 - cfg.beta1) * g;
            p.adam_v[i] = cfg.beta2 * p.adam_v[i] + (1.0 - cfg.beta2) * g * g;
            const double mhat = p.adam_m[i] / bc1;
            const double vhat = p.adam_v[i] / bc2;
            p.value()[i] -= lr * (mhat / (std::sqrt(vhat) + cfg.epsilon) +
                                  cfg.weight_decay * p.value()[i]);
        }
    }
}

// ---------------------------------------------------------------------------
// Gradient checking against central finite differences.

struct GradCheckReport {
    bool passed = true;
    double worst_rel_err = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    std::size_t checked = 0;
};

// `loss_fn` evaluates the loss for the current parameter values (forward
// only). Analytic gradients must already be accumulated in `ps` grads.
inline GradCheckReport grad_check(ParameterSet& ps, const std::function<double()>& loss_fn,
                                  double tolerance = 1e-4, double step = 1e-5,
                                  std::size_t max_coords_per_param = 0) {
    GradCheckReport report;
    for (auto& [name, p] : ps) {
        const std::size_t n = p.size();
        const std::size_t stride =
            (max_coords_per_param > 0 && n > max_coords_per_param) ? n / max_coords_per_param : 1;
        for (std::size_t i = 0; i < n; i += stride) {
            const double saved = p.value()[i];
            p.value()[i] = saved + step;
            const double up = loss_fn();
            p.value()[i] = saved - step;
            const double down = loss_fn();
            p.value()[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double analytic = p.grad[i];
            const double denom = std::max({std::fabs(numeric), std::fabs(analytic), 1.0});
            const double rel = std::fabs(numeric - analytic) / denom;
            ++report.checked;
            if (rel > report.worst_rel_err) {
                report.worst_rel_err = rel;
                report.worst_param = name;
                report.worst_index = i;
            }
            if (rel > tolerance) report.passed = false;
        }
    }
    return report;
}

}  // namespace ssco
