#pragma once
// Directed graph instances for influence-maximization episodes, plus the
// seeded generator and the line-oriented instance file format.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ssco/errors.hpp"
#include "ssco/rng.hpp"

namespace ssco {

struct GraphInstance {
    int node_count = 0;
    std::vector<std::pair<int, int>> edges;  // ordered (source, target)
    std::vector<double> edge_prob;           // parallel to edges
    std::uint64_t instance_id = 0;

    // Derived adjacency, built by finalize().
    std::vector<std::vector<std::pair<int, double>>> out_edges;  // target, probability
    std::vector<int> in_degree;
    std::vector<int> out_degree;
    std::vector<double> in_prob_sum;  // sum of incoming edge probabilities

    void finalize() {
        if (node_count < 1) throw InvalidInstanceError("graph: node_count must be positive");
        out_edges.assign(static_cast<std::size_t>(node_count), {});
        in_degree.assign(static_cast<std::size_t>(node_count), 0);
        out_degree.assign(static_cast<std::size_t>(node_count), 0);
        in_prob_sum.assign(static_cast<std::size_t>(node_count), 0.0);
        std::map<std::pair<int, int>, bool> seen;
        if (edge_prob.size() != edges.size())
            throw InvalidInstanceError("graph: edge/probability count mismatch");
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const auto [u, v] = edges[i];
            const double p = edge_prob[i];
            if (u < 0 || u >= node_count || v < 0 || v >= node_count)
                throw InvalidInstanceError("graph: edge endpoint out of range");
            if (u == v) throw InvalidInstanceError("graph: self-loop");
            if (p < 0.0 || p > 1.0) throw InvalidInstanceError("graph: probability outside [0,1]");
            if (seen.count({u, v})) throw InvalidInstanceError("graph: duplicate edge");
            seen[{u, v}] = true;
            out_edges[static_cast<std::size_t>(u)].push_back({v, p});
            ++out_degree[static_cast<std::size_t>(u)];
            ++in_degree[static_cast<std::size_t>(v)];
            in_prob_sum[static_cast<std::size_t>(v)] += p;
        }
        for (auto& adj : out_edges) std::sort(adj.begin(), adj.end());
    }

    double probability_of(int u, int v) const {
        for (const auto& [t, p] : out_edges[static_cast<std::size_t>(u)])
            if (t == v) return p;
        return 0.0;
    }
};

// Erdos-Renyi style directed graph with expected out-degree `avg_degree` and
// weighted-cascade edge probabilities p(u,v) = min(1, c / indegree(v)).
inline GraphInstance aim_generate(int n, std::uint64_t seed, double avg_degree,
                                  double cascade_c = 1.0) {
    if (n < 2) throw InvalidInstanceError("aim_generate: need at least 2 nodes");
    GraphInstance g;
    g.node_count = n;
    g.instance_id = seed;
    Rng rng = Rng::from_key({0x61696dULL /*"aim"*/, seed, static_cast<std::uint64_t>(n)});
    const double p_edge = std::min(1.0, avg_degree / static_cast<double>(n - 1));
    std::vector<int> indeg(static_cast<std::size_t>(n), 0);
    for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
            if (u == v) continue;
            if (rng.bernoulli(p_edge)) {
                g.edges.push_back({u, v});
                ++indeg[static_cast<std::size_t>(v)];
            }
        }
    }
    g.edge_prob.reserve(g.edges.size());
    for (const auto& [u, v] : g.edges) {
        (void)u;
        g.edge_prob.push_back(std::min(1.0, cascade_c / static_cast<double>(indeg[static_cast<std::size_t>(v)])));
    }
    g.finalize();
    return g;
}

namespace detail {

inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::uint64_t parse_header_u64(const std::string& token, const std::string& key) {
    if (token.rfind(key + "=", 0) != 0) throw ParseError("instance header: expected " + key + "=");
    return std::stoull(token.substr(key.size() + 1));
}

inline double parse_header_double(const std::string& token, const std::string& key) {
    if (token.rfind(key + "=", 0) != 0) throw ParseError("instance header: expected " + key + "=");
    return std::stod(token.substr(key.size() + 1));
}

}  // namespace detail

inline void save_aim_instance(const GraphInstance& g, std::ostream& out) {
    out << "ssco-aim v1 n=" << g.node_count << " seed=" << g.instance_id << "\n";
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        out << "edge " << g.edges[i].first << " " << g.edges[i].second << " "
            << detail::format_double(g.edge_prob[i]) << "\n";
    }
}

inline void save_aim_instance(const GraphInstance& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path + " for writing");
    save_aim_instance(g, out);
}

inline GraphInstance load_aim_instance(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("aim instance: empty file");
    std::istringstream header(line);
    std::string magic, version, n_tok, seed_tok;
    header >> magic >> version >> n_tok >> seed_tok;
    if (magic != "ssco-aim" || version != "v1")
        throw ParseError("aim instance: bad header '" + line + "'");
    GraphInstance g;
    g.node_count = static_cast<int>(detail::parse_header_u64(n_tok, "n"));
    g.instance_id = detail::parse_header_u64(seed_tok, "seed");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string tag;
        int u = 0, v = 0;
        double p = 0.0;
        row >> tag >> u >> v >> p;
        if (tag != "edge" || row.fail()) throw ParseError("aim instance: bad row '" + line + "'");
        g.edges.push_back({u, v});
        g.edge_prob.push_back(p);
    }
    g.finalize();
    return g;
}

inline GraphInstance load_aim_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return load_aim_instance(in);
}

}  // namespace ssco
