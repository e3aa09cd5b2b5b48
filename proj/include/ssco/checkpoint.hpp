#pragma once
// Versioned text checkpoints of named parameter arrays. Values are printed as
// hexadecimal floating point, so a save/load round trip is bit-exact.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ssco/errors.hpp"
#include "ssco/tape.hpp"

namespace ssco {

inline void save_parameter_sets(
    std::ostream& out,
    const std::vector<std::pair<std::string, const ParameterSet*>>& sets,
    const std::map<std::string, std::string>& meta = {}) {
    out << "ssco-ckpt v1\n";
    for (const auto& [key, value] : meta) out << "meta " << key << " " << value << "\n";
    char buf[40];
    for (const auto& [set_name, ps] : sets) {
        out << "set " << set_name << " " << ps->count() << "\n";
        for (const auto& [pname, param] : *ps) {
            out << "param " << pname << " " << param.tensor.shape.size();
            for (std::size_t d : param.tensor.shape) out << " " << d;
            out << "\n";
            for (std::size_t i = 0; i < param.tensor.data.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%a", param.tensor.data[i]);
                out << buf << (i + 1 == param.tensor.data.size() ? "" : " ");
            }
            out << "\n";
        }
    }
    out << "end\n";
}

inline void save_parameter_sets(
    const std::string& path, const std::vector<std::pair<std::string, const ParameterSet*>>& sets,
    const std::map<std::string, std::string>& meta = {}) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path + " for writing");
    save_parameter_sets(out, sets, meta);
}

// Loads values into already-constructed parameter sets; shapes must match.
// Returns the checkpoint's meta entries.
inline std::map<std::string, std::string> load_parameter_sets(
    std::istream& in, const std::vector<std::pair<std::string, ParameterSet*>>& sets) {
    std::string line;
    if (!std::getline(in, line) || line != "ssco-ckpt v1")
        throw ParseError("checkpoint: bad header '" + line + "'");
    std::map<std::string, ParameterSet*> lookup;
    for (const auto& [name, ps] : sets) lookup[name] = ps;
    std::map<std::string, std::string> meta;

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string tag;
        row >> tag;
        if (tag == "end") break;
        if (tag == "meta") {
            std::string key;
            row >> key;
            std::string value;
            std::getline(row, value);
            if (!value.empty() && value[0] == ' ') value.erase(0, 1);
            meta[key] = value;
            continue;
        }
        if (tag != "set") throw ParseError("checkpoint: expected set, got '" + line + "'");
        std::string set_name;
        std::size_t param_count = 0;
        row >> set_name >> param_count;
        auto it = lookup.find(set_name);
        if (it == lookup.end()) throw ParseError("checkpoint: unknown set " + set_name);
        ParameterSet& ps = *it->second;
        for (std::size_t p = 0; p < param_count; ++p) {
            if (!std::getline(in, line)) throw ParseError("checkpoint: truncated");
            std::istringstream header(line);
            std::string ptag, pname;
            std::size_t ndim = 0;
            header >> ptag >> pname >> ndim;
            if (ptag != "param") throw ParseError("checkpoint: expected param row");
            std::vector<std::size_t> shape(ndim);
            for (auto& d : shape) header >> d;
            if (!ps.contains(pname)) throw ParseError("checkpoint: unknown parameter " + pname);
            Param& param = ps.at(pname);
            if (param.tensor.shape != shape)
                throw ParseError("checkpoint: shape mismatch for " + pname);
            if (!std::getline(in, line)) throw ParseError("checkpoint: truncated values");
            const char* cursor = line.c_str();
            char* next = nullptr;
            for (std::size_t i = 0; i < param.tensor.data.size(); ++i) {
                const double v = std::strtod(cursor, &next);
                if (next == cursor) throw ParseError("checkpoint: bad value row for " + pname);
                param.tensor.data[i] = v;
                cursor = next;
            }
        }
    }
    return meta;
}

inline std::map<std::string, std::string> load_parameter_sets(
    const std::string& path, const std::vector<std::pair<std::string, ParameterSet*>>& sets) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return load_parameter_sets(in, sets);
}

}  // namespace ssco
