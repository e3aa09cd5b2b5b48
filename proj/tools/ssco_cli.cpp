// Command-line front end: instance generation, training, evaluation, the
// exact oracle, heuristic baselines, model validation, and loss ablations.
//
// Exit codes: 0 success, 1 usage error, 2 failed validation assertion
// (only under --strict).

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ssco/checkpoint.hpp"
#include "ssco/config.hpp"
#include "ssco/diagnostics.hpp"
#include "ssco/harness.hpp"
#include "ssco/heuristics.hpp"
#include "ssco/oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ssco;

namespace {

struct CliOptions {
    std::string preset = "desk";
    std::string config_path;
    std::string out_dir = "out";
    std::string ckpt_path;
    std::string instances_dir;
    std::uint64_t seed = 0;
    bool strict = false;
};

RunConfig resolve_config(const CliOptions& opt) {
    RunConfig cfg = preset_by_name(opt.preset);
    if (!opt.config_path.empty()) load_config_file(cfg, opt.config_path);
    return cfg;
}

void ensure_out(const CliOptions& opt) { fs::create_directories(opt.out_dir); }

std::string out_path(const CliOptions& opt, const std::string& name) {
    return (fs::path(opt.out_dir) / name).string();
}

void append_results(const CliOptions& opt, const std::vector<ResultRow>& rows) {
    const std::string path = out_path(opt, "results.tsv");
    const bool fresh = !fs::exists(path);
    std::ofstream out(path, std::ios::app);
    if (fresh) {
        write_results_table(out, rows);
    } else {
        std::ostringstream buf;
        write_results_table(buf, rows);
        const std::string text = buf.str();
        out << text.substr(text.find('\n') + 1);  // skip the repeated header
    }
}

std::map<std::string, std::string> checkpoint_meta(const RunConfig& cfg, int feat_dim) {
    return {{"fingerprint", config_fingerprint(cfg)},
            {"env_kind", cfg.env_kind},
            {"latent_dim", std::to_string(cfg.latent_dim)},
            {"subgoal_count", std::to_string(cfg.subgoal_count)},
            {"budget_max", std::to_string(cfg.effective_budget_max())},
            {"node_feat_dim", std::to_string(feat_dim)}};
}

template <typename TEnv>
void save_agent(const CliOptions& opt, const RunConfig& cfg, Trainer<TEnv>& trainer,
                const std::string& name = "ckpt.txt") {
    save_parameter_sets(out_path(opt, name),
                        {{"hl", &trainer.model().params()},
                         {"ll", &trainer.ll_model().params()},
                         {"ll_target", &const_cast<LowLevelModel&>(trainer.ll_target()).params()}},
                        checkpoint_meta(cfg, TEnv::kFeatDim));
}

template <typename TEnv>
void load_agent(const std::string& path, Trainer<TEnv>& trainer) {
    auto& target = const_cast<LowLevelModel&>(trainer.ll_target());
    const auto meta = load_parameter_sets(
        path, {{"hl", &trainer.model().params()},
               {"ll", &trainer.ll_model().params()},
               {"ll_target", &target.params()}});
    if (meta.count("node_feat_dim") &&
        std::stoi(meta.at("node_feat_dim")) != TEnv::kFeatDim)
        throw ConfigError("checkpoint was written for a different environment kind");
}

// ---------------------------------------------------------------------------

template <typename Lab, typename TEnv>
int cmd_gen(const CliOptions& opt, const RunConfig& cfg) {
    ensure_out(opt);
    Lab lab = Lab::make(cfg);
    int index = 0;
    for (const auto& inst : lab.train_instances) {
        const std::string path =
            out_path(opt, cfg.env_kind + "_train_" + std::to_string(index++) + ".ssco");
        if constexpr (std::is_same_v<TEnv, AimEnv>) save_aim_instance(inst, path);
        else save_sop_instance(inst, path);
    }
    index = 0;
    for (const auto& inst : lab.eval_instances) {
        const std::string path =
            out_path(opt, cfg.env_kind + "_eval_" + std::to_string(index++) + ".ssco");
        if constexpr (std::is_same_v<TEnv, AimEnv>) save_aim_instance(inst, path);
        else save_sop_instance(inst, path);
    }
    std::ofstream cfg_out(out_path(opt, "run.cfg"));
    cfg_out << serialize_config(cfg);
    std::cout << "wrote " << lab.train_instances.size() << " train and "
              << lab.eval_instances.size() << " eval instances to " << opt.out_dir << "\n";
    return 0;
}

template <typename Lab, typename TEnv>
int cmd_train(const CliOptions& opt, const RunConfig& cfg) {
    ensure_out(opt);
    Lab lab = Lab::make(cfg);
    auto trainer = make_trainer<TEnv>(cfg, lab.envs(lab.train_instances), opt.seed);
    std::ofstream metrics(out_path(opt, "metrics.jsonl"));
    trainer.train([&](const std::string& line) {
        metrics << line << "\n";
        std::cout << line << "\n";
    });
    save_agent<TEnv>(opt, cfg, trainer);

    const auto eval = trainer.evaluate_greedy(cfg.train.eval_episodes);
    append_results(opt, {{"agent", cfg.env_kind, cfg.nodes, cfg.horizon, cfg.total_budget,
                          eval.mean, eval.sem_value, 1}});
    std::cout << "final greedy return " << eval.mean << " +/- " << eval.sem_value
              << "; checkpoint at " << out_path(opt, "ckpt.txt") << "\n";
    return 0;
}

template <typename Lab, typename TEnv>
int cmd_eval(const CliOptions& opt, const RunConfig& cfg) {
    ensure_out(opt);
    Lab lab = Lab::make(cfg);
    auto trainer = make_trainer<TEnv>(cfg, lab.envs(lab.eval_instances), opt.seed);
    const std::string ckpt = opt.ckpt_path.empty() ? out_path(opt, "ckpt.txt") : opt.ckpt_path;
    load_agent<TEnv>(ckpt, trainer);

    const auto report = evaluate(
        [&](int inst, std::uint64_t episode_seed) {
            return trainer.play_episode(inst, episode_seed, false, 0).total_return;
        },
        static_cast<int>(lab.eval_instances.size()), cfg.eval_seeds, cfg.eval_episodes_per_seed,
        config_fingerprint(cfg));
    append_results(opt, {{"agent", cfg.env_kind, cfg.nodes, cfg.horizon, cfg.total_budget,
                          report.mean, report.sem_value, cfg.eval_seeds}});
    std::cout << "eval mean " << report.mean << " +/- " << report.sem_value << " over "
              << cfg.eval_seeds << " seeds (fingerprint " << report.fingerprint << ")\n";
    return 0;
}

int cmd_oracle(const CliOptions& opt, const RunConfig& cfg) {
    if (cfg.env_kind != "aim")
        throw ConfigError("oracle: only influence instances are supported");
    ensure_out(opt);
    std::vector<GraphInstance> instances;
    if (!opt.instances_dir.empty()) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(opt.instances_dir))
            if (entry.path().extension() == ".ssco") files.push_back(entry.path().string());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) instances.push_back(load_aim_instance(f));
    } else {
        AimLab lab = AimLab::make(cfg);
        instances = lab.train_instances;
    }

    std::ofstream out(out_path(opt, "oracle.jsonl"));
    for (const auto& g : instances) {
        const auto start = std::chrono::steady_clock::now();
        OracleConfig ocfg;
        ocfg.chance_edge_cap = cfg.oracle_chance_cap;
        const auto result = oracle_solve(g, cfg.horizon, cfg.total_budget, ocfg);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json record;
        record["instance_seed"] = g.instance_id;
        record["nodes"] = g.node_count;
        record["horizon"] = cfg.horizon;
        record["budget"] = cfg.total_budget;
        record["value"] = result.optimal_value;
        record["first_allocation"] = result.optimal_first_allocation;
        record["expansions"] = result.node_expansions;
        record["seconds"] = seconds;
        out << record.dump() << "\n";
        std::cout << record.dump() << "\n";
    }
    return 0;
}

template <typename Lab, typename TEnv>
int cmd_baselines(const CliOptions& opt, const RunConfig& cfg) {
    ensure_out(opt);
    Lab lab = Lab::make(cfg);
    std::vector<ResultRow> rows;
    auto eval_policy = [&](const std::string& name,
                           const std::function<double(int, std::uint64_t)>& play) {
        const auto report = evaluate(play, static_cast<int>(lab.eval_instances.size()),
                                     cfg.eval_seeds, cfg.eval_episodes_per_seed);
        rows.push_back({name, cfg.env_kind, cfg.nodes, cfg.horizon, cfg.total_budget, report.mean,
                        report.sem_value, cfg.eval_seeds});
    };

    auto envs = lab.envs(lab.eval_instances);
    if constexpr (std::is_same_v<TEnv, AimEnv>) {
        for (const auto& [sname, kind] :
             std::vector<std::pair<std::string, ScheduleKind>>{{"average", ScheduleKind::Average},
                                                               {"normal", ScheduleKind::Normal},
                                                               {"static", ScheduleKind::Static}}) {
            for (const auto& [pname, sel] :
                 std::vector<std::pair<std::string, SelectorKind>>{{"degree", SelectorKind::Degree},
                                                                   {"score", SelectorKind::Score}}) {
                eval_policy(sname + "-" + pname, [&, kind, sel](int inst, std::uint64_t seed) {
                    return run_aim_heuristic_episode(envs[static_cast<std::size_t>(inst)],
                                                     {kind, 2}, sel, seed);
                });
            }
        }
    } else {
        eval_policy("greedy", [&](int inst, std::uint64_t seed) {
            return run_sop_heuristic_episode(envs[static_cast<std::size_t>(inst)],
                                             {ScheduleKind::Average, 2}, seed);
        });
        GaConfig ga;
        std::vector<std::vector<int>> allocations;
        for (std::size_t i = 0; i < lab.eval_instances.size(); ++i)
            allocations.push_back(
                ga_optimize(lab.eval_instances[i], cfg.horizon, cfg.total_budget, ga, opt.seed)
                    .allocation);
        eval_policy("ga", [&](int inst, std::uint64_t seed) {
            return run_sop_allocation_episode(envs[static_cast<std::size_t>(inst)],
                                              allocations[static_cast<std::size_t>(inst)], seed);
        });
    }
    append_results(opt, rows);
    write_results_table(std::cout, rows);
    return 0;
}

template <typename Lab, typename TEnv>
int cmd_validate(const CliOptions& opt, const RunConfig& cfg) {
    ensure_out(opt);
    Lab lab = Lab::make(cfg);
    auto trainer = make_trainer<TEnv>(cfg, lab.envs(lab.eval_instances), opt.seed);
    const std::string ckpt = opt.ckpt_path.empty() ? out_path(opt, "ckpt.txt") : opt.ckpt_path;
    load_agent<TEnv>(ckpt, trainer);

    // Collect executed transitions with the trained budget head active.
    std::vector<EpisodeRecord> records;
    const int warm = cfg.train.warmup_epochs;
    int episode = 0;
    while (static_cast<int>(trainer.buffers().hl.size()) * cfg.horizon < 500 && episode < 400) {
        records.push_back(trainer.play_episode(episode % trainer.env_count(),
                                               0xabcdULL + static_cast<std::uint64_t>(episode),
                                               true, warm));
        ++episode;
    }
    const auto transitions = recent_transitions(trainer.buffers(), 500);
    const auto diag = compute_geometry_diagnostics(trainer.model(), transitions, cfg.geometry.kappa);
    const auto macro_micro = check_macro_micro(trainer.model(), transitions, cfg.geometry.kappa);
    const auto duration = check_duration_bound(trainer.model(), transitions, cfg.geometry.kappa);

    Rng rng = Rng::from_key({opt.seed, 0x76616cULL});
    auto report = kendall_protocol(trainer, cfg.kendall_states, cfg.kendall_executions, rng);
    const auto calib = calibration(trainer.model(), records, cfg.bootstrap_resamples, rng);

    json out;
    out["fingerprint"] = config_fingerprint(cfg);
    out["transitions"] = transitions.size();
    out["geometry"] = {{"cap_risk", diag.cap_risk},
                       {"eps_cap", diag.eps_cap},
                       {"eps_dyn", diag.eps_dyn},
                       {"mean_displacement", diag.mean_displacement},
                       {"mean_duration", diag.mean_duration},
                       {"kendall_tau_quick", diag.kendall_tau}};
    out["macro_micro"] = {{"lhs", macro_micro.lhs},
                          {"rhs", macro_micro.rhs},
                          {"holds", macro_micro.holds}};
    json duration_rows = json::array();
    for (const auto& row : duration.rows)
        duration_rows.push_back({{"subgoal", row.subgoal},
                                 {"mean_tau", row.mean_tau},
                                 {"bound", row.bound},
                                 {"margin", row.margin},
                                 {"holds", row.holds}});
    out["duration_bound"] = {{"rows", duration_rows}, {"all_hold", duration.all_hold}};
    out["kendall"] = {{"mean_tau", report.mean_tau},
                      {"sem", report.sem_tau},
                      {"states", report.per_state_taus.size()},
                      {"meets_threshold", report.mean_tau >= 0.5}};
    out["calibration"] = {{"pairs", calib.pairs},
                          {"tau", {calib.tau.point, calib.tau.lo, calib.tau.hi}},
                          {"spearman", {calib.rho.point, calib.rho.lo, calib.rho.hi}}};

    std::ofstream file(out_path(opt, "validate.json"));
    file << out.dump(2) << "\n";
    std::cout << out.dump(2) << "\n";

    if (opt.strict) {
        const bool ok = macro_micro.holds && duration.all_hold && report.mean_tau >= 0.5;
        if (!ok) {
            std::cerr << "validate --strict: assertion failed\n";
            return 2;
        }
    }
    return 0;
}

template <typename Lab, typename TEnv>
int cmd_ablate(const CliOptions& opt, const RunConfig& base_cfg) {
    ensure_out(opt);
    std::vector<ResultRow> rows;
    const std::vector<std::pair<std::string, std::function<void(RunConfig&)>>> variants = {
        {"agent-full", [](RunConfig&) {}},
        {"agent-no-cap", [](RunConfig& c) { c.geometry.w_cap = 0.0; }},
        {"agent-no-push", [](RunConfig& c) { c.geometry.w_push = 0.0; }},
        {"agent-no-order", [](RunConfig& c) { c.geometry.w_order = 0.0; }},
    };
    for (const auto& [name, mutate] : variants) {
        RunConfig cfg = base_cfg;
        mutate(cfg);
        Lab lab = Lab::make(cfg);
        auto trainer = make_trainer<TEnv>(cfg, lab.envs(lab.train_instances), opt.seed);
        trainer.train({});
        const auto eval = trainer.evaluate_greedy(cfg.train.eval_episodes);
        rows.push_back({name, cfg.env_kind, cfg.nodes, cfg.horizon, cfg.total_budget, eval.mean,
                        eval.sem_value, 1});
        std::cout << name << ": " << eval.mean << " +/- " << eval.sem_value << "\n";
    }
    append_results(opt, rows);
    return 0;
}

int dispatch(const RunConfig& cfg, const std::function<int()>& aim_cmd,
             const std::function<int()>& sop_cmd) {
    if (cfg.env_kind == "aim") return aim_cmd();
    if (cfg.env_kind == "sop") return sop_cmd();
    throw ConfigError("env.kind must be 'aim' or 'sop'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale stochastic combinatorial planning lab"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    CliOptions opt;
    app.add_option("--preset", opt.preset, "configuration preset: desk, paper-aim, paper-sop");
    app.add_option("--config", opt.config_path, "config file overlaying the preset");
    app.add_option("--seed", opt.seed, "run seed");
    app.add_option("--out", opt.out_dir, "output directory");

    auto* gen = app.add_subcommand("gen", "generate and write instance files");
    auto* train = app.add_subcommand("train", "train the hierarchical agent");
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    eval->add_option("--ckpt", opt.ckpt_path, "checkpoint path (default <out>/ckpt.txt)");
    auto* oracle = app.add_subcommand("oracle", "exact expectimax on small influence instances");
    oracle->add_option("--instances", opt.instances_dir, "directory of .ssco instance files");
    auto* baselines = app.add_subcommand("baselines", "run the non-learned baselines");
    auto* validate = app.add_subcommand("validate", "geometry diagnostics + rank validation");
    validate->add_option("--ckpt", opt.ckpt_path, "checkpoint path (default <out>/ckpt.txt)");
    validate->add_flag("--strict", opt.strict, "exit 2 when a validation assertion fails");
    auto* ablate = app.add_subcommand("ablate", "retrain with individual geometry terms disabled");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const RunConfig cfg = resolve_config(opt);
        if (gen->parsed())
            return dispatch(cfg, [&] { return cmd_gen<AimLab, AimEnv>(opt, cfg); },
                            [&] { return cmd_gen<SopLab, SopEnv>(opt, cfg); });
        if (train->parsed())
            return dispatch(cfg, [&] { return cmd_train<AimLab, AimEnv>(opt, cfg); },
                            [&] { return cmd_train<SopLab, SopEnv>(opt, cfg); });
        if (eval->parsed())
            return dispatch(cfg, [&] { return cmd_eval<AimLab, AimEnv>(opt, cfg); },
                            [&] { return cmd_eval<SopLab, SopEnv>(opt, cfg); });
        if (oracle->parsed()) return cmd_oracle(opt, cfg);
        if (baselines->parsed())
            return dispatch(cfg, [&] { return cmd_baselines<AimLab, AimEnv>(opt, cfg); },
                            [&] { return cmd_baselines<SopLab, SopEnv>(opt, cfg); });
        if (validate->parsed())
            return dispatch(cfg, [&] { return cmd_validate<AimLab, AimEnv>(opt, cfg); },
                            [&] { return cmd_validate<SopLab, SopEnv>(opt, cfg); });
        if (ablate->parsed())
            return dispatch(cfg, [&] { return cmd_ablate<AimLab, AimEnv>(opt, cfg); },
                            [&] { return cmd_ablate<SopLab, SopEnv>(opt, cfg); });
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
