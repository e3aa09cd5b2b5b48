#pragma once
// Stochastic orienteering: route over cities in the unit square under a daily
// travel limit with overage penalties. Collected day profit uses a
// rank-discounted aggregate, so marginal value diminishes with set size.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <vector>

#include "ssco/errors.hpp"
#include "ssco/graph.hpp"  // detail::format_double / header parsing
#include "ssco/rng.hpp"

namespace ssco {

struct SopInstance {
    std::vector<std::array<double, 2>> city_coords;
    int depot = 0;
    double daily_limit = 1.0;
    double penalty_rate = 1.0;
    std::vector<double> profit_init;
    double noise_scale = 0.1;
    double profit_max = 1.0;  // clamp bound for the profit process
    std::uint64_t instance_id = 0;

    int city_count() const { return static_cast<int>(city_coords.size()); }

    void validate() const {
        if (city_coords.empty()) throw InvalidInstanceError("sop: no cities");
        if (depot < 0 || depot >= city_count()) throw InvalidInstanceError("sop: bad depot");
        if (daily_limit <= 0.0) throw InvalidInstanceError("sop: daily_limit must be > 0");
        if (profit_init.size() != city_coords.size())
            throw InvalidInstanceError("sop: profit/city count mismatch");
        for (double p : profit_init)
            if (p < 0.0) throw InvalidInstanceError("sop: negative profit");
    }

    double distance(int a, int b) const {
        const double dx = city_coords[static_cast<std::size_t>(a)][0] -
                          city_coords[static_cast<std::size_t>(b)][0];
        const double dy = city_coords[static_cast<std::size_t>(a)][1] -
                          city_coords[static_cast<std::size_t>(b)][1];
        return std::sqrt(dx * dx + dy * dy);
    }
};

struct SopState {
    std::vector<double> profits;
    std::vector<std::uint8_t> visited;
    int current_city = 0;
    int day = 0;
    int remaining_budget = 0;
    double day_distance = 0.0;
    std::vector<double> day_collected;  // profits captured today, any order
};

inline SopInstance sop_generate(int n, std::uint64_t seed, double daily_limit = 1.0,
                                double penalty_rate = 1.0, double profit_max = 1.0,
                                double noise_frac = 0.1) {
    if (n < 2) throw InvalidInstanceError("sop_generate: need at least 2 cities");
    SopInstance inst;
    inst.instance_id = seed;
    inst.daily_limit = daily_limit;
    inst.penalty_rate = penalty_rate;
    inst.profit_max = profit_max;
    inst.noise_scale = noise_frac * profit_max;
    Rng rng = Rng::from_key({0x736f70ULL /*"sop"*/, seed, static_cast<std::uint64_t>(n)});
    inst.city_coords.resize(static_cast<std::size_t>(n));
    inst.profit_init.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        inst.city_coords[static_cast<std::size_t>(i)] = {rng.uniform01(), rng.uniform01()};
        inst.profit_init[static_cast<std::size_t>(i)] = rng.uniform01() * profit_max;
    }
    inst.depot = 0;
    inst.validate();
    return inst;
}

inline SopState sop_initial_state(const SopInstance& inst, int total_budget) {
    SopState s;
    s.profits = inst.profit_init;
    s.visited.assign(inst.city_coords.size(), 0);
    s.current_city = inst.depot;
    s.remaining_budget = total_budget;
    s.visited[static_cast<std::size_t>(inst.depot)] = 1;
    s.profits[static_cast<std::size_t>(inst.depot)] = 0.0;
    return s;
}

// Rank-discounted day profit: sum_j rho^j * p_(j) over descending profits.
// Monotone and submodular in the selected set for rho in (0,1].
inline double sop_day_profit(std::vector<double> selected_profits, double rho = 0.9) {
    for (double p : selected_profits)
        if (p < 0.0) throw InvalidInstanceError("sop_day_profit: negative profit");
    std::sort(selected_profits.begin(), selected_profits.end(), std::greater<double>());
    double total = 0.0;
    double weight = 1.0;
    for (double p : selected_profits) {
        total += weight * p;
        weight *= rho;
    }
    return total;
}

// Visits one city. The reward is the marginal day-profit contribution of the
// city under the rank-discounted aggregate, minus the incremental travel
// penalty beyond the daily limit.
inline double sop_primitive_step(const SopInstance& inst, SopState& s, int city,
                                 double rho = 0.9) {
    if (city < 0 || city >= inst.city_count() || s.visited[static_cast<std::size_t>(city)] ||
        city == s.current_city)
        throw MaskedActionError("sop: city not selectable");
    if (s.remaining_budget <= 0) throw BudgetExhaustedError("sop: no budget left");
    const double leg = inst.distance(s.current_city, city);
    const double over_before = std::max(0.0, s.day_distance - inst.daily_limit);
    s.day_distance += leg;
    const double over_after = std::max(0.0, s.day_distance - inst.daily_limit);
    const double penalty = inst.penalty_rate * (over_after - over_before);

    const double before = sop_day_profit(s.day_collected, rho);
    s.day_collected.push_back(s.profits[static_cast<std::size_t>(city)]);
    const double after = sop_day_profit(s.day_collected, rho);

    s.visited[static_cast<std::size_t>(city)] = 1;
    s.profits[static_cast<std::size_t>(city)] = 0.0;
    s.current_city = city;
    --s.remaining_budget;
    return (after - before) - penalty;
}

// Profits of unvisited cities take a clamped Gaussian step; the day odometer
// resets and the current position carries over.
inline void sop_end_of_day(const SopInstance& inst, SopState& s, Rng& rng) {
    for (std::size_t c = 0; c < s.profits.size(); ++c) {
        if (s.visited[c]) continue;
        const double jitter = inst.noise_scale > 0.0 ? rng.normal(0.0, inst.noise_scale) : 0.0;
        s.profits[c] = std::clamp(s.profits[c] + jitter, 0.0, inst.profit_max);
    }
    s.day_distance = 0.0;
    s.day_collected.clear();
    ++s.day;
}

inline std::vector<std::uint8_t> sop_legal_mask(const SopInstance& inst, const SopState& s) {
    std::vector<std::uint8_t> mask(s.visited.size(), 0);
    if (s.remaining_budget <= 0) return mask;
    for (int c = 0; c < inst.city_count(); ++c)
        mask[static_cast<std::size_t>(c)] = (!s.visited[static_cast<std::size_t>(c)] && c != s.current_city) ? 1 : 0;
    return mask;
}

inline void save_sop_instance(const SopInstance& inst, std::ostream& out) {
    out << "ssco-sop v1 n=" << inst.city_count() << " seed=" << inst.instance_id
        << " depot=" << inst.depot << " limit=" << detail::format_double(inst.daily_limit)
        << " penalty=" << detail::format_double(inst.penalty_rate)
        << " noise=" << detail::format_double(inst.noise_scale)
        << " pmax=" << detail::format_double(inst.profit_max) << "\n";
    for (int c = 0; c < inst.city_count(); ++c) {
        out << "city " << c << " " << detail::format_double(inst.city_coords[static_cast<std::size_t>(c)][0])
            << " " << detail::format_double(inst.city_coords[static_cast<std::size_t>(c)][1]) << " "
            << detail::format_double(inst.profit_init[static_cast<std::size_t>(c)]) << "\n";
    }
}

inline void save_sop_instance(const SopInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path + " for writing");
    save_sop_instance(inst, out);
}

inline SopInstance load_sop_instance(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("sop instance: empty file");
    std::istringstream header(line);
    std::string magic, version, n_tok, seed_tok, depot_tok, limit_tok, pen_tok, noise_tok, pmax_tok;
    header >> magic >> version >> n_tok >> seed_tok >> depot_tok >> limit_tok >> pen_tok >>
        noise_tok >> pmax_tok;
    if (magic != "ssco-sop" || version != "v1")
        throw ParseError("sop instance: bad header '" + line + "'");
    SopInstance inst;
    const int n = static_cast<int>(detail::parse_header_u64(n_tok, "n"));
    inst.instance_id = detail::parse_header_u64(seed_tok, "seed");
    inst.depot = static_cast<int>(detail::parse_header_u64(depot_tok, "depot"));
    inst.daily_limit = detail::parse_header_double(limit_tok, "limit");
    inst.penalty_rate = detail::parse_header_double(pen_tok, "penalty");
    inst.noise_scale = detail::parse_header_double(noise_tok, "noise");
    inst.profit_max = detail::parse_header_double(pmax_tok, "pmax");
    inst.city_coords.resize(static_cast<std::size_t>(n));
    inst.profit_init.resize(static_cast<std::size_t>(n));
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string tag;
        int idx = 0;
        double x = 0.0, y = 0.0, p = 0.0;
        row >> tag >> idx >> x >> y >> p;
        if (tag != "city" || row.fail() || idx < 0 || idx >= n)
            throw ParseError("sop instance: bad row '" + line + "'");
        inst.city_coords[static_cast<std::size_t>(idx)] = {x, y};
        inst.profit_init[static_cast<std::size_t>(idx)] = p;
        seen[static_cast<std::size_t>(idx)] = true;
    }
    for (bool b : seen)
        if (!b) throw ParseError("sop instance: missing city row");
    inst.validate();
    return inst;
}

inline SopInstance load_sop_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return load_sop_instance(in);
}

// Episode wrapper mirroring AimEnv. Day-boundary noise comes from a stream
// keyed by (instance_id, episode_seed, day).
class SopEnv {
public:
    SopEnv(const SopInstance* instance, int horizon, int total_budget, double rho = 0.9)
        : instance_(instance), horizon_(horizon), total_budget_(total_budget), rho_(rho) {}

    void reset(std::uint64_t episode_seed) {
        episode_seed_ = episode_seed;
        state_ = sop_initial_state(*instance_, total_budget_);
    }

    const SopInstance& instance() const { return *instance_; }
    const SopState& state() const { return state_; }
    SopState& mutable_state() { return state_; }

    int action_count() const { return instance_->city_count(); }
    int horizon() const { return horizon_; }
    int total_budget() const { return total_budget_; }
    int day() const { return state_.day; }
    int remaining_budget() const { return state_.remaining_budget; }
    bool episode_done() const { return state_.day >= horizon_; }

    std::vector<std::uint8_t> legal_mask() const { return sop_legal_mask(*instance_, state_); }

    double primitive_step(int city) { return sop_primitive_step(*instance_, state_, city, rho_); }

    double end_of_day() {
        Rng rng = Rng::from_key({instance_->instance_id, episode_seed_,
                                 static_cast<std::uint64_t>(state_.day)});
        sop_end_of_day(*instance_, state_, rng);
        return 0.0;
    }

    static constexpr int kFeatDim = 5;
    int feature_dim() const { return kFeatDim; }
    void node_features(std::vector<double>& out) const {
        const int n = instance_->city_count();
        out.assign(static_cast<std::size_t>(n) * kFeatDim, 0.0);
        for (int c = 0; c < n; ++c) {
            double* row = out.data() + static_cast<std::size_t>(c) * kFeatDim;
            row[0] = instance_->city_coords[static_cast<std::size_t>(c)][0];
            row[1] = instance_->city_coords[static_cast<std::size_t>(c)][1];
            row[2] = instance_->profit_max > 0.0
                         ? state_.profits[static_cast<std::size_t>(c)] / instance_->profit_max
                         : 0.0;
            row[3] = state_.visited[static_cast<std::size_t>(c)] ? 1.0 : 0.0;
            row[4] = (c == state_.current_city) ? 1.0 : 0.0;
        }
    }

    const std::vector<std::pair<int, int>>& message_edges() const {
        static const std::vector<std::pair<int, int>> kNone;
        return kNone;  // cities exchange no messages; the encoder sees node features only
    }

    double max_primitive_reward() const { return instance_->profit_max / (1.0 - rho_); }

    double rho() const { return rho_; }

private:
    const SopInstance* instance_;
    int horizon_;
    int total_budget_;
    double rho_;
    std::uint64_t episode_seed_ = 0;
    SopState state_;
};

}  // namespace ssco
