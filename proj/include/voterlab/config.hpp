#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "voterlab/acceptance.hpp"
#include "voterlab/dynamics.hpp"
#include "voterlab/errors.hpp"
#include "voterlab/graph.hpp"

namespace voterlab {

// One run description, normally supplied as a JSON document:
//
//   {
//     "model":  {"schedule": "async", "alpha01": 1.0, "alpha10": 0.5},
//     "graph":  {"kind": "clique", "n": 20, "with_loops": false},
//     "init":   {"k": 3},
//     "run":    {"trials": 100000, "max_steps": 0, "seed": 42},
//     "output": {"format": "json", "path": "", "per_trial": false}
//   }
//
// Flags override document keys by dotted name (e.g. run.seed), and the
// VOTERLAB_SEED environment variable overrides run.seed last.
struct RunConfig {
    Schedule schedule = Schedule::Async;
    double alpha01 = 1.0;
    double alpha10 = 1.0;

    std::string graph_kind = "clique";  // clique | cycle | star | file
    NodeId n = 0;
    bool with_loops = false;
    std::string graph_path;

    std::optional<NodeId> init_k;
    std::optional<std::vector<NodeId>> init_nodes;
    std::optional<std::string> init_bits;

    std::uint64_t trials = 1000;
    std::uint64_t max_steps = 0;  // 0 = automatic cap
    std::uint64_t seed = 42;

    std::string out_format = "json";  // json | csv
    std::string out_path;             // empty = stdout
    bool per_trial = false;
    std::string per_trial_path;  // empty = derive from out_path

    AcceptanceMatrix acceptance() const { return {alpha01, alpha10}; }
};

namespace detail {

template <typename T>
T get_number(const nlohmann::json& node, const std::string& key, T min_value, T max_value) {
    if (!node.is_number())
        throw invalid_parameter("config key '" + key + "' must be a number");
    const double v = node.get<double>();
    if (v < static_cast<double>(min_value) || v > static_cast<double>(max_value))
        throw invalid_parameter("config key '" + key + "' out of range");
    if constexpr (std::is_integral_v<T>) {
        if (v != static_cast<double>(static_cast<T>(v)))
            throw invalid_parameter("config key '" + key + "' must be an integer");
    }
    return static_cast<T>(node.get<double>());
}

inline std::string get_string(const nlohmann::json& node, const std::string& key) {
    if (!node.is_string())
        throw invalid_parameter("config key '" + key + "' must be a string");
    return node.get<std::string>();
}

inline void reject_unknown_keys(const nlohmann::json& section, const char* name,
                                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : section.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known)
            throw invalid_parameter("unknown config key '" + std::string(name) + "." + key + "'");
        (void)value;
    }
}

} // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw invalid_parameter("config must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (key != "model" && key != "graph" && key != "init" && key != "run" &&
            key != "output")
            throw invalid_parameter("unknown config section '" + key + "'");
        (void)value;
    }
    RunConfig cfg;

    if (doc.contains("model")) {
        const auto& m = doc.at("model");
        detail::reject_unknown_keys(m, "model", {"schedule", "alpha01", "alpha10"});
        if (m.contains("schedule"))
            cfg.schedule = schedule_from_string(detail::get_string(m["schedule"], "model.schedule"));
        if (m.contains("alpha01"))
            cfg.alpha01 = detail::get_number<double>(m["alpha01"], "model.alpha01", 0.0, 1.0);
        if (m.contains("alpha10"))
            cfg.alpha10 = detail::get_number<double>(m["alpha10"], "model.alpha10", 0.0, 1.0);
    }
    if (cfg.schedule == Schedule::SyncM2 && cfg.alpha01 != cfg.alpha10)
        throw invalid_parameter(
            "model.schedule: sync-m2 is defined only for the unbiased case (alpha01 = alpha10)");

    if (!doc.contains("graph") || !doc.at("graph").contains("kind"))
        throw invalid_parameter("config key 'graph.kind' is required");
    {
        const auto& g = doc.at("graph");
        detail::reject_unknown_keys(g, "graph", {"kind", "n", "with_loops", "path"});
        cfg.graph_kind = detail::get_string(g["kind"], "graph.kind");
        if (cfg.graph_kind == "file") {
            if (!g.contains("path"))
                throw invalid_parameter("config key 'graph.path' is required for kind=file");
            cfg.graph_path = detail::get_string(g["path"], "graph.path");
        } else if (cfg.graph_kind == "clique" || cfg.graph_kind == "cycle" ||
                   cfg.graph_kind == "star") {
            if (!g.contains("n"))
                throw invalid_parameter("config key 'graph.n' is required");
            cfg.n = detail::get_number<NodeId>(g["n"], "graph.n", 1, 100000000);
        } else {
            throw invalid_parameter("config key 'graph.kind' must be clique|cycle|star|file");
        }
        if (g.contains("with_loops")) {
            if (!g["with_loops"].is_boolean())
                throw invalid_parameter("config key 'graph.with_loops' must be a boolean");
            cfg.with_loops = g["with_loops"].get<bool>();
        }
    }

    if (doc.contains("init")) {
        const auto& init = doc.at("init");
        detail::reject_unknown_keys(init, "init", {"k", "nodes", "bits"});
        int forms = 0;
        if (init.contains("k")) {
            cfg.init_k = detail::get_number<NodeId>(init["k"], "init.k", 0, 100000000);
            ++forms;
        }
        if (init.contains("nodes")) {
            if (!init["nodes"].is_array())
                throw invalid_parameter("config key 'init.nodes' must be an array");
            std::vector<NodeId> nodes;
            for (const auto& v : init["nodes"])
                nodes.push_back(detail::get_number<NodeId>(v, "init.nodes[]", 0, 100000000));
            cfg.init_nodes = std::move(nodes);
            ++forms;
        }
        if (init.contains("bits")) {
            cfg.init_bits = detail::get_string(init["bits"], "init.bits");
            ++forms;
        }
        if (forms != 1)
            throw invalid_parameter("config section 'init' needs exactly one of k|nodes|bits");
    } else {
        throw invalid_parameter("config section 'init' is required");
    }

    if (doc.contains("run")) {
        const auto& r = doc.at("run");
        detail::reject_unknown_keys(r, "run", {"trials", "max_steps", "seed"});
        if (r.contains("trials"))
            cfg.trials = detail::get_number<std::uint64_t>(r["trials"], "run.trials", 1,
                                                           1000000000ULL);
        if (r.contains("max_steps"))
            cfg.max_steps = detail::get_number<std::uint64_t>(r["max_steps"], "run.max_steps", 0,
                                                              std::uint64_t{1} << 62);
        if (r.contains("seed"))
            cfg.seed = detail::get_number<std::uint64_t>(r["seed"], "run.seed", 0,
                                                         std::uint64_t{1} << 62);
    }

    if (doc.contains("output")) {
        const auto& o = doc.at("output");
        detail::reject_unknown_keys(o, "output",
                                    {"format", "path", "per_trial", "per_trial_path"});
        if (o.contains("format")) {
            cfg.out_format = detail::get_string(o["format"], "output.format");
            if (cfg.out_format != "json" && cfg.out_format != "csv")
                throw invalid_parameter("config key 'output.format' must be json|csv");
        }
        if (o.contains("path")) cfg.out_path = detail::get_string(o["path"], "output.path");
        if (o.contains("per_trial")) {
            if (!o["per_trial"].is_boolean())
                throw invalid_parameter("config key 'output.per_trial' must be a boolean");
            cfg.per_trial = o["per_trial"].get<bool>();
        }
        if (o.contains("per_trial_path"))
            cfg.per_trial_path = detail::get_string(o["per_trial_path"], "output.per_trial_path");
    }
    return cfg;
}

// Dotted-key override, value parsed as JSON when possible ("run.seed=7",
// "graph.kind=cycle", "init.nodes=[0,2,5]").
inline void apply_override(nlohmann::json& doc, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw invalid_parameter("override must look like section.key=value: " + assignment);
    std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    std::string pointer = "/";
    for (char c : key) pointer += (c == '.') ? '/' : c;
    nlohmann::json value;
    try {
        value = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception&) {
        value = raw;  // plain string
    }
    doc[nlohmann::json::json_pointer(pointer)] = value;
}

inline nlohmann::json load_config_document(const std::string& path) {
    std::string text;
    if (path.empty() || path == "-") {
        std::ostringstream buffer;
        buffer << std::cin.rdbuf();
        text = buffer.str();
        if (text.empty()) text = "{}";
    } else {
        std::ifstream in(path);
        if (!in) throw invalid_parameter("cannot open config file '" + path + "'");
        std::ostringstream buffer;
        buffer << in.rdbuf();
        text = buffer.str();
    }
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw invalid_parameter(std::string("config is not valid JSON: ") + e.what());
    }
}

inline Graph build_graph(const RunConfig& cfg) {
    if (cfg.graph_kind == "clique") return make_clique(cfg.n, cfg.with_loops);
    if (cfg.graph_kind == "cycle") return make_cycle(cfg.n);
    if (cfg.graph_kind == "star") return make_star(cfg.n);
    std::ifstream in(cfg.graph_path);
    if (!in) throw invalid_parameter("cannot open graph file '" + cfg.graph_path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_edge_list(buffer.str());
}

inline OpinionState build_initial(const RunConfig& cfg, const Graph& g) {
    const NodeId n = g.node_count();
    if (cfg.init_k) {
        if (*cfg.init_k > n) throw invalid_parameter("config key 'init.k' exceeds graph.n");
        return OpinionState::first_k(n, *cfg.init_k);
    }
    if (cfg.init_nodes) {
        for (NodeId u : *cfg.init_nodes)
            if (u >= n) throw invalid_parameter("config key 'init.nodes' has an index >= n");
        return OpinionState::from_nodes(n, *cfg.init_nodes);
    }
    if (cfg.init_bits->size() != n)
        throw invalid_parameter("config key 'init.bits' length must equal graph.n");
    return OpinionState::from_bits(*cfg.init_bits);
}

// Resolved-configuration echo included in every summary.
inline nlohmann::json config_echo(const RunConfig& cfg) {
    nlohmann::json init;
    if (cfg.init_k) init["k"] = *cfg.init_k;
    if (cfg.init_nodes) init["nodes"] = *cfg.init_nodes;
    if (cfg.init_bits) init["bits"] = *cfg.init_bits;
    nlohmann::json graph{{"kind", cfg.graph_kind}};
    if (cfg.graph_kind == "file")
        graph["path"] = cfg.graph_path;
    else
        graph["n"] = cfg.n;
    if (cfg.graph_kind == "clique") graph["with_loops"] = cfg.with_loops;
    return nlohmann::json{
        {"model",
         {{"schedule", to_string(cfg.schedule)},
          {"alpha01", cfg.alpha01},
          {"alpha10", cfg.alpha10}}},
        {"graph", graph},
        {"init", init},
        {"run", {{"trials", cfg.trials}, {"max_steps", cfg.max_steps}, {"seed", cfg.seed}}},
    };
}

// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace voterlab
