#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ssco/nn.hpp"

using namespace ssco;

namespace {

double mlp_loss(ParameterSet& ps, const MlpSpec& spec, const Vec& input, bool backward) {
    Tape tape;
    Tape::Var out = mlp_forward(tape, ps, spec, tape.constant(input));
    Tape::Var loss = tape.dot(out, out);
    const double v = tape.scalar(loss);
    if (backward) {
        ps.zero_grad();
        tape.backward(loss);
    }
    return v;
}

}  // namespace

TEST_CASE("zero weights and bias give zero output", "[nn]") {
    ParameterSet ps;
    MlpSpec spec{"m", {3, 4, 2}};
    Rng rng(0);
    mlp_init(ps, spec, rng);
    for (auto& [name, p] : ps) std::fill(p.value().begin(), p.value().end(), 0.0);
    const Vec out = mlp_forward_fast(ps, spec, {1.0, -2.0, 3.0});
    REQUIRE(out == Vec{0.0, 0.0});
}

TEST_CASE("identity single layer passes input through", "[nn]") {
    ParameterSet ps;
    MlpSpec spec{"m", {3, 3}};
    ps.add("m.l0.w", {3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    ps.add("m.l0.b", {3}, {0, 0, 0});
    const Vec in{0.4, -1.2, 2.5};
    REQUIRE(mlp_forward_fast(ps, spec, in) == in);
}

TEST_CASE("mlp tape and fast paths agree", "[nn]") {
    ParameterSet ps;
    MlpSpec spec{"m", {5, 8, 8, 3}};
    Rng rng(3);
    mlp_init(ps, spec, rng);
    Vec in(5);
    for (double& x : in) x = rng.normal();
    Tape tape;
    Tape::Var out = mlp_forward(tape, ps, spec, tape.constant(in));
    const Vec fast = mlp_forward_fast(ps, spec, in);
    REQUIRE(tape.value(out) == fast);
}

TEST_CASE("mlp gradient matches central differences", "[nn]") {
    ParameterSet ps;
    MlpSpec spec{"m", {4, 6, 2}};
    Rng rng(7);
    mlp_init(ps, spec, rng);
    Vec in(4);
    for (double& x : in) x = rng.normal();
    mlp_loss(ps, spec, in, true);
    const auto report = grad_check(ps, [&]() { return mlp_loss(ps, spec, in, false); }, 1e-4);
    INFO("worst " << report.worst_param << " rel " << report.worst_rel_err);
    REQUIRE(report.passed);
}

TEST_CASE("graph encoder with zero adjacency reduces to per-node mlp + mean", "[nn]") {
    ParameterSet ps;
    GraphEncoderSpec spec{"enc", 3, 8, 4};
    Rng rng(5);
    graph_encoder_init(ps, spec, rng);
    const std::vector<std::pair<int, int>> no_edges;
    Rng frng(9);
    Vec feats(5 * 3);
    for (double& x : feats) x = frng.normal();

    const Vec pooled_graph = graph_encode_fast(ps, spec, no_edges, feats, 5);

    // Same computation done per node by hand: messages are zero, so each
    // round is ReLU(self(h) + agg(0)).
    auto round = [&](const Vec& h, std::size_t in_dim, int r) {
        const Vec& wa = ps.at(spec.round_name(r, "agg") + ".w").value();
        const Vec& ba = ps.at(spec.round_name(r, "agg") + ".b").value();
        const Vec& ws = ps.at(spec.round_name(r, "self") + ".w").value();
        const Vec& bs = ps.at(spec.round_name(r, "self") + ".b").value();
        Vec out(spec.hidden_dim);
        for (std::size_t o = 0; o < spec.hidden_dim; ++o) {
            double acc = ba[o] + bs[o];
            for (std::size_t c = 0; c < in_dim; ++c) acc += ws[o * in_dim + c] * h[c];
            (void)wa;
            out[o] = std::max(0.0, acc);
        }
        return out;
    };
    Vec mean_hidden(spec.hidden_dim, 0.0);
    for (int v = 0; v < 5; ++v) {
        Vec h(feats.begin() + v * 3, feats.begin() + (v + 1) * 3);
        h = round(h, 3, 0);
        h = round(h, spec.hidden_dim, 1);
        for (std::size_t c = 0; c < spec.hidden_dim; ++c) mean_hidden[c] += h[c] / 5.0;
    }
    const Vec& wp = ps.at("enc.proj.w").value();
    const Vec& bp = ps.at("enc.proj.b").value();
    Vec expected(spec.out_dim);
    for (std::size_t o = 0; o < spec.out_dim; ++o) {
        double acc = bp[o];
        for (std::size_t c = 0; c < spec.hidden_dim; ++c) acc += wp[o * spec.hidden_dim + c] * mean_hidden[c];
        expected[o] = acc;
    }
    for (std::size_t o = 0; o < spec.out_dim; ++o)
        REQUIRE(pooled_graph[o] == Catch::Approx(expected[o]).margin(1e-12));
}

TEST_CASE("graph encoder is permutation invariant after pooling", "[nn]") {
    ParameterSet ps;
    GraphEncoderSpec spec{"enc", 2, 6, 4};
    Rng rng(11);
    graph_encoder_init(ps, spec, rng);

    const std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}, {2, 0}, {3, 1}};
    Vec feats{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    const Vec base = graph_encode_fast(ps, spec, edges, feats, 4);

    // Permute nodes with sigma = (3,0,2,1): node v moves to sigma[v].
    const std::vector<int> sigma{3, 0, 2, 1};
    std::vector<std::pair<int, int>> perm_edges;
    for (auto [u, v] : edges) perm_edges.push_back({sigma[static_cast<std::size_t>(u)], sigma[static_cast<std::size_t>(v)]});
    Vec perm_feats(8);
    for (int v = 0; v < 4; ++v)
        for (int c = 0; c < 2; ++c)
            perm_feats[static_cast<std::size_t>(sigma[static_cast<std::size_t>(v)] * 2 + c)] =
                feats[static_cast<std::size_t>(v * 2 + c)];
    const Vec permuted = graph_encode_fast(ps, spec, perm_edges, perm_feats, 4);
    for (std::size_t o = 0; o < base.size(); ++o)
        REQUIRE(permuted[o] == Catch::Approx(base[o]).margin(1e-12));
}

TEST_CASE("graph encoder gradient check on a 5-node graph", "[nn]") {
    ParameterSet ps;
    GraphEncoderSpec spec{"enc", 3, 5, 4};
    Rng rng(13);
    graph_encoder_init(ps, spec, rng);
    const std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {1, 3}};
    Vec feats(15);
    for (double& x : feats) x = rng.normal();

    auto loss_fn = [&](bool backward) {
        Tape tape;
        Tape::Var latent = graph_encode(tape, ps, spec, edges, tape.constant(feats), 5);
        Tape::Var norm = tape.l2_normalize(latent);
        Tape::Var loss = tape.dot(norm, norm);
        Tape::Var mixed = tape.add(loss, tape.pick(latent, 2));
        const double v = tape.scalar(mixed);
        if (backward) {
            ps.zero_grad();
            tape.backward(mixed);
        }
        return v;
    };
    loss_fn(true);
    const auto report = grad_check(ps, [&]() { return loss_fn(false); }, 1e-4);
    INFO("worst " << report.worst_param << " rel " << report.worst_rel_err);
    REQUIRE(report.passed);
}

TEST_CASE("graph encoder tape and fast paths agree", "[nn]") {
    ParameterSet ps;
    GraphEncoderSpec spec{"enc", 4, 6, 5};
    Rng rng(17);
    graph_encoder_init(ps, spec, rng);
    const std::vector<std::pair<int, int>> edges{{0, 2}, {1, 2}, {2, 0}};
    Vec feats(12);
    for (double& x : feats) x = rng.normal();
    Tape tape;
    Tape::Var out = graph_encode(tape, ps, spec, edges, tape.constant(feats), 3);
    REQUIRE(tape.value(out) == graph_encode_fast(ps, spec, edges, feats, 3));
}
