#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "ssco/aim.hpp"
#include "ssco/geometry.hpp"
#include "ssco/nn.hpp"

using namespace ssco;

namespace {

ModelConfig micro_config() {
    ModelConfig cfg;
    cfg.latent_dim = 6;
    cfg.hidden_dim = 8;
    cfg.gnn_hidden = 5;
    cfg.subgoal_count = 3;
    cfg.budget_max = 3;
    cfg.node_feat_dim = AimEnv::kFeatDim;
    return cfg;
}

struct Fixture {
    GraphInstance graph = aim_generate(5, 3, 2.0);
    AimEnv env{&graph, 4, 3};
    WorldModel model{micro_config(), 8};
    GeometryConfig gcfg;

    Fixture() { env.reset(0); }

    EncoderInput state() const {
        EncoderInput in;
        env.node_features(in.features);
        in.edges = &env.message_edges();
        in.nodes = env.action_count();
        return in;
    }

    EncoderInput stepped_state(int node) {
        AimEnv copy = env;
        copy.primitive_step(node);
        EncoderInput in;
        copy.node_features(in.features);
        in.edges = &env.message_edges();
        in.nodes = copy.action_count();
        return in;
    }
};

double run_geometry_loss(Fixture& f,
                         const std::function<Tape::Var(Tape&, Fixture&)>& build, bool backward) {
    Tape tape;
    Tape::Var loss = build(tape, f);
    const double v = tape.scalar(loss);
    if (backward) {
        f.model.params().zero_grad();
        tape.backward(loss);
    }
    return v;
}

void require_geometry_grad(Fixture& f, const std::function<Tape::Var(Tape&, Fixture&)>& build) {
    run_geometry_loss(f, build, true);
    const auto report = grad_check(
        f.model.params(), [&]() { return run_geometry_loss(f, build, false); }, 1e-4);
    INFO("worst " << report.worst_param << "[" << report.worst_index << "] rel "
                  << report.worst_rel_err);
    REQUIRE(report.passed);
}

}  // namespace

TEST_CASE("chordal distance basics", "[geometry]") {
    REQUIRE(chordal_distance(Vec{1, 0}, Vec{1, 0}) == 0.0);
    REQUIRE(chordal_distance(Vec{1, 0}, Vec{-1, 0}) == 2.0);
    REQUIRE(chordal_distance(Vec{1, 0}, Vec{0, 1}) == Catch::Approx(std::sqrt(2.0)));
}

TEST_CASE("cap loss vanishes on identical pairs and matches recompute otherwise", "[geometry]") {
    Fixture f;
    const auto s0 = f.state();
    {
        Tape tape;
        Tape::Var loss = cap_loss(tape, f.model, {{s0, s0}}, f.gcfg.kappa);
        REQUIRE(tape.scalar(loss) == 0.0);
    }
    const auto s1 = f.stepped_state(0);
    const auto s2 = f.stepped_state(1);
    Tape tape;
    Tape::Var loss = cap_loss(tape, f.model, {{s0, s1}, {s1, s2}}, f.gcfg.kappa);
    auto hinge_sq = [&](const EncoderInput& a, const EncoderInput& b) {
        const double d = chordal_distance(f.model.encode(a), f.model.encode(b));
        const double x = std::max(0.0, d - f.gcfg.kappa);
        return x * x;
    };
    const double expected = 0.5 * (hinge_sq(s0, s1) + hinge_sq(s1, s2));
    REQUIRE(tape.scalar(loss) == Catch::Approx(expected).margin(1e-12));
    REQUIRE(expected > 0.0);  // a random encoder starts above the cap
}

TEST_CASE("cap loss single pair formula: distance kappa+0.1 contributes 0.01", "[geometry]") {
    // Formula-level check on the hinge itself with a controlled distance.
    Tape tape;
    Tape::Var d = tape.constant_scalar(0.1 + 0.1);
    Tape::Var excess = tape.relu(tape.sub(d, tape.constant_scalar(0.1)));
    REQUIRE(tape.scalar(tape.mul(excess, excess)) == Catch::Approx(0.01));
}

TEST_CASE("cap loss gradient check", "[geometry]") {
    Fixture f;
    const auto s0 = f.state();
    const auto s1 = f.stepped_state(0);
    require_geometry_grad(f, [&](Tape& tape, Fixture& fx) {
        return cap_loss(tape, fx.model, {{s0, s1}}, fx.gcfg.kappa);
    });
}

TEST_CASE("push loss: zero margin gives zero loss; formula matches recompute", "[geometry]") {
    Fixture f;
    const auto s0 = f.state();
    {
        // Drive the margin head to (numerically exact) zero output.
        auto& b = f.model.params().at("margin.l1.b").value();
        const double saved = b[0];
        b[0] = -700.0;  // softplus underflows to 0
        Tape tape;
        Tape::Var loss = push_loss(tape, f.model, {{s0, 0, 1}});
        REQUIRE(tape.scalar(loss) == 0.0);
        b[0] = saved;
    }
    Tape tape;
    Tape::Var loss = push_loss(tape, f.model, {{s0, 1, 2}});
    const Vec h = f.model.encode(s0);
    const auto [next, reward] = f.model.dynamics_step(h, 1);
    (void)reward;
    const double expected = std::max(0.0, f.model.margin(1) - chordal_distance(h, next));
    REQUIRE(tape.scalar(loss) == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("push hinge arithmetic: displacement 0.2 against margin 0.5 leaves 0.3", "[geometry]") {
    Tape tape;
    Tape::Var residual = tape.relu(tape.sub(tape.constant_scalar(0.5), tape.constant_scalar(0.2)));
    REQUIRE(tape.scalar(residual) == Catch::Approx(0.3));
}

TEST_CASE("push loss gradients reach encoder, dynamics, and margin head", "[geometry]") {
    Fixture f;
    const auto s0 = f.state();
    // Make the margin comfortably exceed the displacement so the hinge is active.
    f.model.params().at("margin.l1.b").value()[0] = 3.0;
    require_geometry_grad(f, [&](Tape& tape, Fixture& fx) {
        return push_loss(tape, fx.model, {{s0, 0, 1}, {s0, 2, 2}});
    });
    run_geometry_loss(f, [&](Tape& tape, Fixture& fx) {
        return push_loss(tape, fx.model, {{s0, 0, 1}});
    }, true);
    auto grad_norm_of = [&](const std::string& name) {
        double acc = 0.0;
        for (double g : f.model.params().at(name).grad) acc += g * g;
        return std::sqrt(acc);
    };
    REQUIRE(grad_norm_of("enc.proj.w") > 0.0);
    REQUIRE(grad_norm_of("dyn.latent.l0.w") > 0.0);
    REQUIRE(grad_norm_of("margin.l0.w") > 0.0);
}

TEST_CASE("order loss: tied durations contribute exactly one", "[geometry]") {
    Fixture f;
    const auto s0 = f.state();
    Tape tape;
    Tape::Var loss = order_loss(tape, f.model, {{{s0, 0, 2}, {s0, 1, 2}}});
    REQUIRE(tape.scalar(loss) == 1.0);
    // And no gradient flows from a tied pair.
    f.model.params().zero_grad();
    tape.backward(loss);
    for (const auto& [name, p] : f.model.params())
        for (double g : p.grad) REQUIRE(g == 0.0);
}

TEST_CASE("order loss: satisfied hinge vanishes, formula matches recompute", "[geometry]") {
    Fixture f;
    const auto s0 = f.state();
    const auto s1 = f.stepped_state(0);

    auto sigma = [&](const EncoderInput& in, int z) {
        const Vec h = f.model.encode(in);
        const auto [next, reward] = f.model.dynamics_step(h, z);
        (void)reward;
        return chordal_distance(h, next) + f.model.margin(z);
    };
    Tape tape;
    Tape::Var loss = order_loss(tape, f.model, {{{s0, 0, 3}, {s1, 1, 1}}});
    const double delta = sigma(s0, 0) - sigma(s1, 1);
    const double expected = std::max(0.0, 1.0 - 1.0 * delta);
    REQUIRE(tape.scalar(loss) == Catch::Approx(expected).margin(1e-12));

    // Formula check: Y=1 with a large positive score gap gives zero.
    Tape t2;
    Tape::Var hinge = t2.relu(t2.sub(t2.constant_scalar(1.0), t2.scale(t2.constant_scalar(2.0), 1.0)));
    REQUIRE(t2.scalar(hinge) == 0.0);
}

TEST_CASE("order loss gradient check", "[geometry]") {
    Fixture f;
    const auto s0 = f.state();
    const auto s1 = f.stepped_state(1);
    require_geometry_grad(f, [&](Tape& tape, Fixture& fx) {
        return order_loss(tape, fx.model, {{{s0, 0, 3}, {s1, 1, 1}}, {{s1, 2, 0}, {s0, 1, 2}}});
    });
}

TEST_CASE("unified loss: zero weights leave only the margin regularizer", "[geometry]") {
    Fixture f;
    const auto s0 = f.state();
    const auto s1 = f.stepped_state(0);
    GeometryConfig cfg;
    cfg.w_cap = cfg.w_push = cfg.w_order = 0.0;
    cfg.margin_l2 = 1e-4;
    Tape tape;
    const auto vars = unified_loss(tape, f.model, {{s0, s1}}, {{s0, 0, 1}},
                                   {{{s0, 0, 2}, {s1, 1, 1}}}, cfg);
    double reg = 0.0;
    for (int z = 0; z < f.model.subgoal_count(); ++z) reg += f.model.margin(z) * f.model.margin(z);
    REQUIRE(tape.scalar(vars.total) == Catch::Approx(1e-4 * reg).margin(1e-15));
}

TEST_CASE("unified loss composes its terms linearly", "[geometry]") {
    Fixture f;
    const auto s0 = f.state();
    const auto s1 = f.stepped_state(0);
    GeometryConfig cfg;  // defaults 0.1/0.1/0.1, 1e-4
    Tape tape;
    const auto vars = unified_loss(tape, f.model, {{s0, s1}}, {{s0, 0, 1}},
                                   {{{s0, 0, 2}, {s1, 1, 1}}}, cfg);
    const double expected = cfg.w_cap * tape.scalar(vars.cap) + cfg.w_push * tape.scalar(vars.push) +
                            cfg.w_order * tape.scalar(vars.order) +
                            cfg.margin_l2 * tape.scalar(vars.margin_reg);
    REQUIRE(tape.scalar(vars.total) == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("unified loss gradient equals the weighted sum of component gradients", "[geometry]") {
    Fixture f;
    const auto s0 = f.state();
    const auto s1 = f.stepped_state(0);
    GeometryConfig cfg;
    cfg.w_cap = 0.2;
    cfg.w_push = 0.3;
    cfg.w_order = 0.4;
    cfg.margin_l2 = 1e-3;
    // Keep the push hinge active so its gradient is non-trivial.
    f.model.params().at("margin.l1.b").value()[0] = 2.0;

    const std::vector<CapPair> caps{{s0, s1}};
    const std::vector<DecisionSample> pushes{{s0, 0, 1}};
    const std::vector<std::pair<DecisionSample, DecisionSample>> orders{{{s0, 0, 2}, {s1, 1, 1}}};

    auto grads_of = [&](const std::function<Tape::Var(Tape&)>& build) {
        Tape tape;
        Tape::Var loss = build(tape);
        f.model.params().zero_grad();
        tape.backward(loss);
        std::map<std::string, Vec> out;
        for (const auto& [name, p] : f.model.params()) out[name] = p.grad;
        return out;
    };

    const auto g_cap = grads_of([&](Tape& t) { return cap_loss(t, f.model, caps, cfg.kappa); });
    const auto g_push = grads_of([&](Tape& t) { return push_loss(t, f.model, pushes); });
    const auto g_order = grads_of([&](Tape& t) { return order_loss(t, f.model, orders); });
    const auto g_reg = grads_of([&](Tape& t) { return margin_regularizer(t, f.model); });
    const auto g_total = grads_of([&](Tape& t) {
        return unified_loss(t, f.model, caps, pushes, orders, cfg).total;
    });

    for (const auto& [name, g] : g_total) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double expected = cfg.w_cap * g_cap.at(name)[i] + cfg.w_push * g_push.at(name)[i] +
                                    cfg.w_order * g_order.at(name)[i] +
                                    cfg.margin_l2 * g_reg.at(name)[i];
            REQUIRE(g[i] == Catch::Approx(expected).margin(1e-10));
        }
    }
}
