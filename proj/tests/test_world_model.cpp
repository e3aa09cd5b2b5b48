#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "ssco/aim.hpp"
#include "ssco/checkpoint.hpp"
#include "ssco/world_model.hpp"

using namespace ssco;

namespace {

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.latent_dim = 8;
    cfg.hidden_dim = 12;
    cfg.gnn_hidden = 6;
    cfg.subgoal_count = 4;
    cfg.budget_max = 5;
    cfg.node_feat_dim = AimEnv::kFeatDim;
    return cfg;
}

struct Fixture {
    GraphInstance graph = aim_generate(6, 17, 2.0);
    AimEnv env{&graph, 4, 3};
    WorldModel model{tiny_config(), 21};

    Fixture() { env.reset(0); }

    EncoderInput input() const {
        EncoderInput in;
        env.node_features(in.features);
        in.edges = &env.message_edges();
        in.nodes = env.action_count();
        return in;
    }
};

}  // namespace

TEST_CASE("encode is unit-norm and deterministic", "[world-model]") {
    Fixture f;
    const Vec a = f.model.encode(f.input());
    const Vec b = f.model.encode(f.input());
    REQUIRE(a == b);
    REQUIRE(std::fabs(norm2(a) - 1.0) <= 1e-6);
}

TEST_CASE("distinct statuses give distinct latents", "[world-model]") {
    Fixture f;
    const Vec before = f.model.encode(f.input());
    f.env.primitive_step(0);
    const Vec after = f.model.encode(f.input());
    REQUIRE(chordal_distance(before, after) > 1e-9);
}

TEST_CASE("dynamics output is unit-norm and repeatable", "[world-model]") {
    Fixture f;
    const Vec h = f.model.encode(f.input());
    const auto [h1, r1] = f.model.dynamics_step(h, 2);
    const auto [h2, r2] = f.model.dynamics_step(h, 2);
    REQUIRE(h1 == h2);
    REQUIRE(r1 == r2);
    REQUIRE(std::fabs(norm2(h1) - 1.0) <= 1e-6);
}

TEST_CASE("prediction prior is a simplex point; zero logits give uniform", "[world-model]") {
    Fixture f;
    const Vec h = f.model.encode(f.input());
    auto [prior, value] = f.model.predict(h);
    (void)value;
    double total = 0.0;
    for (double p : prior) total += p;
    REQUIRE(std::fabs(total - 1.0) <= 1e-9);

    // Zero the policy output layer: logits all 0 -> uniform prior.
    auto& w = f.model.params().at("pred.policy.l1.w").value();
    auto& b = f.model.params().at("pred.policy.l1.b").value();
    std::fill(w.begin(), w.end(), 0.0);
    std::fill(b.begin(), b.end(), 0.0);
    auto [uniform, v2] = f.model.predict(h);
    (void)v2;
    for (double p : uniform) REQUIRE(p == Catch::Approx(0.25).margin(1e-12));
}

TEST_CASE("budget distribution masks infeasible allocations exactly", "[world-model]") {
    Fixture f;
    const Vec h = f.model.encode(f.input());

    // Equal logits: zero the output layer.
    auto& w = f.model.params().at("budget.l1.w").value();
    auto& b = f.model.params().at("budget.l1.b").value();
    std::fill(w.begin(), w.end(), 0.0);
    std::fill(b.begin(), b.end(), 0.0);
    const Vec dist = f.model.budget_distribution(h, 1, 3);
    for (int bb = 0; bb <= 3; ++bb) REQUIRE(dist[static_cast<std::size_t>(bb)] == Catch::Approx(0.25));
    REQUIRE(dist[4] == 0.0);
    REQUIRE(dist[5] == 0.0);

    const Vec point = f.model.budget_distribution(h, 1, 0);
    REQUIRE(point[0] == 1.0);
    for (std::size_t i = 1; i < point.size(); ++i) REQUIRE(point[i] == 0.0);

    REQUIRE_THROWS_AS(f.model.budget_distribution(h, 1, -1), ConfigError);
    REQUIRE_THROWS_AS(f.model.budget_distribution(h, 1, 6), ConfigError);
}

TEST_CASE("budget probabilities sum to one for every feasible cap", "[world-model]") {
    Fixture f;
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        // Randomize the budget head output layer.
        auto& w = f.model.params().at("budget.l1.w").value();
        for (double& x : w) x = rng.normal();
        const Vec h = f.model.encode(f.input());
        for (int cap = 0; cap <= f.model.config().budget_max; ++cap) {
            const Vec dist = f.model.budget_distribution(h, trial % 4, cap);
            double total = 0.0;
            for (double p : dist) total += p;
            REQUIRE(std::fabs(total - 1.0) <= 1e-9);
            for (int bb = cap + 1; bb <= f.model.config().budget_max; ++bb)
                REQUIRE(dist[static_cast<std::size_t>(bb)] == 0.0);
        }
    }
}

TEST_CASE("margin head is non-negative", "[world-model]") {
    Fixture f;
    for (int z = 0; z < f.model.subgoal_count(); ++z) {
        REQUIRE(f.model.margin(z) >= 0.0);
        REQUIRE(std::isfinite(f.model.margin(z)));
    }
}

TEST_CASE("tape and fast paths agree for all heads", "[world-model]") {
    Fixture f;
    const auto in = f.input();
    Tape tape;
    Tape::Var h_t = f.model.encode_t(tape, in);
    const Vec h = f.model.encode(in);
    REQUIRE(tape.value(h_t) == h);

    auto [next_t, reward_t] = f.model.dynamics_step_t(tape, h_t, 1);
    const auto [next, reward] = f.model.dynamics_step(h, 1);
    REQUIRE(tape.value(next_t) == next);
    REQUIRE(tape.scalar(reward_t) == reward);

    Tape::Var value_t = f.model.value_t(tape, h_t);
    auto [prior, value] = f.model.predict(h);
    (void)prior;
    REQUIRE(tape.scalar(value_t) == value);

    Tape::Var critic_t = f.model.critic_t(tape, h_t, 2);
    REQUIRE(tape.scalar(critic_t) == f.model.critic_value(h, 2));

    Tape::Var margin_t = f.model.margin_t(tape, 3);
    REQUIRE(tape.scalar(margin_t) == Catch::Approx(f.model.margin(3)).margin(1e-15));

    Tape::Var budget_t = f.model.budget_logits_t(tape, h_t, 0);
    REQUIRE(tape.value(budget_t) == f.model.budget_logits(h, 0));
}

TEST_CASE("checkpoints round-trip bit-exactly", "[world-model]") {
    Fixture f;
    LowLevelModel ll(AimEnv::kFeatDim, f.model.config().latent_dim, 6, 3);
    std::stringstream buf;
    save_parameter_sets(buf, {{"hl", &f.model.params()}, {"ll", &ll.params()}},
                        {{"fingerprint", "abc123"}});

    WorldModel restored(tiny_config(), 99);  // different init
    LowLevelModel ll_restored(AimEnv::kFeatDim, f.model.config().latent_dim, 6, 77);
    const auto meta =
        load_parameter_sets(buf, {{"hl", &restored.params()}, {"ll", &ll_restored.params()}});
    REQUIRE(meta.at("fingerprint") == "abc123");
    for (const auto& [name, p] : f.model.params())
        REQUIRE(restored.params().at(name).value() == p.value());
    for (const auto& [name, p] : ll.params())
        REQUIRE(ll_restored.params().at(name).value() == p.value());
}

TEST_CASE("low-level q network: tape equals fast path and respects shape", "[world-model]") {
    Fixture f;
    LowLevelModel ll(AimEnv::kFeatDim, f.model.config().latent_dim, 8, 5);
    const auto in = f.input();
    const Vec z_emb = f.model.subgoal_embedding(2);
    const Vec q = ll.q_values(in, z_emb);
    REQUIRE(q.size() == static_cast<std::size_t>(in.nodes));
    Tape tape;
    Tape::Var q_t = ll.q_values_t(tape, in, z_emb);
    REQUIRE(tape.value(q_t) == q);
}
