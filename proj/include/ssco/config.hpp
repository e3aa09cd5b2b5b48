#pragma once
// Run configuration: one flat document of section.key = value pairs covering
// the environment, model, search, geometry, and training knobs, with presets
// for the desk-scale defaults and the full-scale domain settings.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "ssco/errors.hpp"
#include "ssco/geometry.hpp"
#include "ssco/oracle.hpp"
#include "ssco/planner.hpp"
#include "ssco/trainer.hpp"
#include "ssco/world_model.hpp"

namespace ssco {

struct RunConfig {
    // env
    std::string env_kind = "aim";  // "aim" or "sop"
    int nodes = 10;
    int horizon = 4;       // T
    int total_budget = 4;  // K
    double avg_degree = 3.0;
    double cascade_c = 1.0;
    int instance_count = 1;
    int eval_instance_count = 2;
    std::uint64_t instance_seed = 1;
    double sop_daily_limit = 1.0;
    double sop_penalty_rate = 1.0;
    double sop_profit_max = 1.0;
    double sop_noise_frac = 0.1;
    double sop_rho = 0.9;

    // model
    int latent_dim = 32;
    int hidden_dim = 64;
    int gnn_hidden = 32;
    int subgoal_count = 8;
    int budget_max = 0;  // 0 -> defaults to the per-decision cap (= K)
    int ll_hidden = 32;

    // search
    SearchConfig search;
    int chance_budget_samples = 0;  // reserved; only 0 is supported

    // geometry
    GeometryConfig geometry;

    // train
    TrainConfig train;

    // oracle
    int oracle_chance_cap = 20;

    // harness
    int eval_seeds = 10;
    int eval_episodes_per_seed = 8;
    int kendall_instances = 10;
    int kendall_states = 20;
    int kendall_executions = 5;
    int bootstrap_resamples = 10000;

    int effective_budget_max() const { return budget_max > 0 ? budget_max : total_budget; }

    ModelConfig model_config(int node_feat_dim) const {
        ModelConfig cfg;
        cfg.latent_dim = latent_dim;
        cfg.hidden_dim = hidden_dim;
        cfg.gnn_hidden = gnn_hidden;
        cfg.subgoal_count = subgoal_count;
        cfg.budget_max = effective_budget_max();
        cfg.node_feat_dim = node_feat_dim;
        return cfg;
    }
};

namespace detail {

struct ConfigBinder {
    std::map<std::string, int*> ints;
    std::map<std::string, double*> doubles;
    std::map<std::string, std::string*> strings;
    std::map<std::string, std::uint64_t*> u64s;

    void bind(const std::string& key, int* p) { ints[key] = p; }
    void bind(const std::string& key, double* p) { doubles[key] = p; }
    void bind(const std::string& key, std::string* p) { strings[key] = p; }
    void bind(const std::string& key, std::uint64_t* p) { u64s[key] = p; }
};

inline void bind_config(RunConfig& c, ConfigBinder& b) {
    b.bind("env.kind", &c.env_kind);
    b.bind("env.nodes", &c.nodes);
    b.bind("env.horizon", &c.horizon);
    b.bind("env.total_budget", &c.total_budget);
    b.bind("env.avg_degree", &c.avg_degree);
    b.bind("env.cascade_c", &c.cascade_c);
    b.bind("env.instance_count", &c.instance_count);
    b.bind("env.eval_instance_count", &c.eval_instance_count);
    b.bind("env.instance_seed", &c.instance_seed);
    b.bind("env.sop_daily_limit", &c.sop_daily_limit);
    b.bind("env.sop_penalty_rate", &c.sop_penalty_rate);
    b.bind("env.sop_profit_max", &c.sop_profit_max);
    b.bind("env.sop_noise_frac", &c.sop_noise_frac);
    b.bind("env.sop_rho", &c.sop_rho);

    b.bind("model.latent_dim", &c.latent_dim);
    b.bind("model.hidden_dim", &c.hidden_dim);
    b.bind("model.gnn_hidden", &c.gnn_hidden);
    b.bind("model.subgoal_count", &c.subgoal_count);
    b.bind("model.budget_max", &c.budget_max);
    b.bind("model.ll_hidden", &c.ll_hidden);

    b.bind("search.n_sim", &c.search.n_sim);
    b.bind("search.c_init", &c.search.c_init);
    b.bind("search.c_base", &c.search.c_base);
    b.bind("search.dirichlet_alpha", &c.search.dirichlet_alpha);
    b.bind("search.noise_mix", &c.search.noise_mix);
    b.bind("search.temperature", &c.search.temperature);
    b.bind("search.gamma", &c.search.gamma);
    b.bind("search.chance_budget_samples", &c.chance_budget_samples);

    b.bind("geometry.kappa", &c.geometry.kappa);
    b.bind("geometry.w_cap", &c.geometry.w_cap);
    b.bind("geometry.w_push", &c.geometry.w_push);
    b.bind("geometry.w_order", &c.geometry.w_order);
    b.bind("geometry.margin_l2", &c.geometry.margin_l2);

    b.bind("train.gamma_ll", &c.train.gamma_ll);
    b.bind("train.unroll", &c.train.unroll);
    b.bind("train.hl_batch", &c.train.hl_batch);
    b.bind("train.ll_batch", &c.train.ll_batch);
    b.bind("train.hl_lr", &c.train.hl_lr);
    b.bind("train.ll_lr", &c.train.ll_lr);
    b.bind("train.weight_decay", &c.train.weight_decay);
    b.bind("train.clip_norm", &c.train.clip_norm);
    b.bind("train.eps_start", &c.train.eps_start);
    b.bind("train.eps_end", &c.train.eps_end);
    b.bind("train.eps_decay", &c.train.eps_decay);
    b.bind("train.target_update_period", &c.train.target_update_period);
    b.bind("train.entropy_beta", &c.train.entropy_beta);
    b.bind("train.warmup_epochs", &c.train.warmup_epochs);
    b.bind("train.stratified_order_pairs", &c.train.stratified_order_pairs);
    b.bind("train.order_pairs", &c.train.order_pairs);
    b.bind("train.w_pi", &c.train.w_pi);
    b.bind("train.w_v", &c.train.w_v);
    b.bind("train.w_r", &c.train.w_r);
    b.bind("train.lambda_mts", &c.train.lambda_mts);
    b.bind("train.lambda_bud", &c.train.lambda_bud);
    b.bind("train.w_bc", &c.train.w_bc);
    b.bind("train.w_ba", &c.train.w_ba);
    b.bind("train.w_ent", &c.train.w_ent);
    b.bind("train.epochs", &c.train.epochs);
    b.bind("train.episodes_per_epoch", &c.train.episodes_per_epoch);
    b.bind("train.hl_updates_per_epoch", &c.train.hl_updates_per_epoch);
    b.bind("train.ll_updates_per_epoch", &c.train.ll_updates_per_epoch);
    b.bind("train.eval_period", &c.train.eval_period);
    b.bind("train.eval_episodes", &c.train.eval_episodes);
    b.bind("train.hl_buffer_capacity", &c.train.hl_buffer_capacity);
    b.bind("train.ll_buffer_capacity", &c.train.ll_buffer_capacity);
    b.bind("train.min_hl_episodes", &c.train.min_hl_episodes);
    b.bind("train.min_ll_transitions", &c.train.min_ll_transitions);

    b.bind("oracle.chance_cap", &c.oracle_chance_cap);

    b.bind("harness.eval_seeds", &c.eval_seeds);
    b.bind("harness.eval_episodes_per_seed", &c.eval_episodes_per_seed);
    b.bind("harness.kendall_instances", &c.kendall_instances);
    b.bind("harness.kendall_states", &c.kendall_states);
    b.bind("harness.kendall_executions", &c.kendall_executions);
    b.bind("harness.bootstrap_resamples", &c.bootstrap_resamples);
}

inline std::string format_config_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace detail

// Serializes as INI-style sections; keys within a section sort alphabetically.
inline std::string serialize_config(const RunConfig& config) {
    RunConfig copy = config;
    detail::ConfigBinder b;
    detail::bind_config(copy, b);
    std::map<std::string, std::map<std::string, std::string>> sections;
    auto split = [](const std::string& key) {
        const auto dot = key.find('.');
        return std::make_pair(key.substr(0, dot), key.substr(dot + 1));
    };
    for (const auto& [key, p] : b.ints) sections[split(key).first][split(key).second] = std::to_string(*p);
    for (const auto& [key, p] : b.u64s) sections[split(key).first][split(key).second] = std::to_string(*p);
    for (const auto& [key, p] : b.doubles)
        sections[split(key).first][split(key).second] = detail::format_config_double(*p);
    for (const auto& [key, p] : b.strings) sections[split(key).first][split(key).second] = *p;
    std::ostringstream out;
    for (const auto& [section, entries] : sections) {
        out << "[" << section << "]\n";
        for (const auto& [key, value] : entries) out << key << " = " << value << "\n";
        out << "\n";
    }
    return out.str();
}

// Applies `section.key = value` text onto an existing config. Unknown keys
// are an error so typos fail loudly.
inline void apply_config_text(RunConfig& config, std::istream& in) {
    detail::ConfigBinder b;
    detail::bind_config(config, b);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        auto strip = [](std::string s) {
            const auto begin = s.find_first_not_of(" \t\r");
            if (begin == std::string::npos) return std::string();
            const auto end = s.find_last_not_of(" \t\r");
            return s.substr(begin, end - begin + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) + ": bad section");
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = section + "." + strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (auto it = b.ints.find(key); it != b.ints.end()) {
            *it->second = std::stoi(value);
        } else if (auto it2 = b.doubles.find(key); it2 != b.doubles.end()) {
            *it2->second = std::stod(value);
        } else if (auto it3 = b.strings.find(key); it3 != b.strings.end()) {
            *it3->second = value;
        } else if (auto it4 = b.u64s.find(key); it4 != b.u64s.end()) {
            *it4->second = std::stoull(value);
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
    if (config.chance_budget_samples != 0)
        throw ConfigError("search.chance_budget_samples: only 0 is supported");
}

inline void load_config_file(RunConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    apply_config_text(config, in);
}

// Desk-scale defaults: tiny instances and small nets, every structural
// hyperparameter intact.
inline RunConfig desk_preset() {
    RunConfig c;
    c.env_kind = "aim";
    c.nodes = 10;
    c.horizon = 4;
    c.total_budget = 4;
    c.latent_dim = 32;
    c.hidden_dim = 64;
    c.gnn_hidden = 32;
    c.subgoal_count = 8;
    c.search.n_sim = 32;
    c.train.epochs = 240;
    c.train.episodes_per_epoch = 4;
    c.train.hl_updates_per_epoch = 8;
    c.train.ll_updates_per_epoch = 32;
    c.train.eval_period = 40;
    c.train.eval_episodes = 32;
    // Short desk runs need faster schedules and fresher replay than the
    // full-scale settings; structural knobs (unroll, loss weights) carry over.
    c.train.eps_decay = 0.95;
    c.train.warmup_epochs = 20;
    c.train.entropy_beta = 0.08;
    c.train.hl_buffer_capacity = 100;
    c.train.ll_buffer_capacity = 4000;
    c.kendall_instances = 10;
    c.kendall_states = 20;
    return c;
}

// Full-scale settings for the influence domain.
inline RunConfig paper_aim_preset() {
    RunConfig c;
    c.env_kind = "aim";
    c.nodes = 500;
    c.horizon = 10;
    c.total_budget = 50;
    c.latent_dim = 128;
    c.hidden_dim = 64;
    c.gnn_hidden = 64;
    c.subgoal_count = 32;
    c.search.n_sim = 150;
    c.search.c_init = 2.5;
    c.search.dirichlet_alpha = 0.30;
    c.search.noise_mix = 0.30;
    c.search.temperature = 1.0;
    c.train.ll_lr = 1e-3;
    c.train.target_update_period = 100;
    c.train.entropy_beta = 0.01;
    c.train.eps_decay = 0.995;
    c.train.epochs = 400;
    c.train.episodes_per_epoch = 16;
    c.kendall_instances = 50;
    c.kendall_states = 100;
    return c;
}

// Full-scale settings for the orienteering domain.
inline RunConfig paper_sop_preset() {
    RunConfig c;
    c.env_kind = "sop";
    c.nodes = 500;
    c.horizon = 10;
    c.total_budget = 50;
    c.latent_dim = 128;
    c.hidden_dim = 64;
    c.gnn_hidden = 64;
    c.subgoal_count = 32;
    c.search.n_sim = 250;
    c.search.c_init = 1.5;
    c.search.dirichlet_alpha = 0.20;
    c.search.noise_mix = 0.20;
    c.search.temperature = 1.5;
    c.train.ll_lr = 5e-4;
    c.train.target_update_period = 200;
    c.train.entropy_beta = 0.02;
    c.train.eps_decay = 0.995;
    c.train.epochs = 400;
    c.train.episodes_per_epoch = 16;
    c.kendall_instances = 50;
    c.kendall_states = 100;
    return c;
}

inline RunConfig preset_by_name(const std::string& name) {
    if (name == "desk") return desk_preset();
    if (name == "paper-aim") return paper_aim_preset();
    if (name == "paper-sop") return paper_sop_preset();
    throw ConfigError("unknown preset '" + name + "'");
}

// FNV-1a over the serialized document; stable identifier for reports.
inline std::string config_fingerprint(const RunConfig& config) {
    const std::string text = serialize_config(config);
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace ssco
