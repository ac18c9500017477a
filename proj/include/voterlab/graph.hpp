#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "voterlab/errors.hpp"

namespace voterlab {

using NodeId = std::uint32_t;

// Undirected graph with optional self-loops, stored as per-node sorted
// neighbor arrays so that uniform neighbor sampling and degree queries are
// O(1) after construction. Immutable once built; safe for concurrent reads.
//
// A self-loop contributes 1 to the degree of its node and makes the node
// its own neighbor. Isolated nodes are rejected: every node must have at
// least one neighbor so that sampling one is always well-defined.
class Graph {
public:
    // Builds from an undirected edge list; duplicates collapse, (u,u) is a
    // self-loop. Throws invalid_parameter on out-of-range endpoints or if
    // some node ends up isolated.
    static Graph from_edges(NodeId n, std::vector<std::pair<NodeId, NodeId>> edges) {
        if (n == 0) throw invalid_parameter("graph must have at least one node");
        for (auto& [u, v] : edges) {
            if (u >= n || v >= n)
                throw invalid_parameter("edge endpoint out of range");
            if (u > v) std::swap(u, v);
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

        Graph g;
        g.n_ = n;
        g.offsets_.assign(n + 1, 0);
        for (auto [u, v] : edges) {
            ++g.offsets_[u + 1];
            if (u != v) ++g.offsets_[v + 1];
            else g.allows_self_loops_ = true;
        }
        for (NodeId u = 0; u < n; ++u) {
            if (g.offsets_[u + 1] == 0)
                throw invalid_parameter("node " + std::to_string(u) + " is isolated");
            g.offsets_[u + 1] += g.offsets_[u];
        }
        g.neighbors_.resize(g.offsets_[n]);
        std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
        for (auto [u, v] : edges) {
            g.neighbors_[cursor[u]++] = v;
            if (u != v) g.neighbors_[cursor[v]++] = u;
        }
        for (NodeId u = 0; u < n; ++u)
            std::sort(g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u]),
                      g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u + 1]));
        return g;
    }

    NodeId node_count() const { return n_; }
    bool allows_self_loops() const { return allows_self_loops_; }

    NodeId degree(NodeId u) const {
        return static_cast<NodeId>(offsets_[u + 1] - offsets_[u]);
    }

    // Sorted neighbor list of u; includes u itself when u has a self-loop.
    const NodeId* neighbors_begin(NodeId u) const { return neighbors_.data() + offsets_[u]; }
    const NodeId* neighbors_end(NodeId u) const { return neighbors_.data() + offsets_[u + 1]; }

    NodeId neighbor_at(NodeId u, std::size_t i) const { return neighbors_[offsets_[u] + i]; }

    bool has_edge(NodeId u, NodeId v) const {
        return std::binary_search(neighbors_begin(u), neighbors_end(u), v);
    }

    std::size_t edge_count() const {
        std::size_t loops = 0;
        for (NodeId u = 0; u < n_; ++u)
            if (has_edge(u, u)) ++loops;
        return (neighbors_.size() - loops) / 2 + loops;
    }

    std::uint64_t degree_sum() const { return neighbors_.size(); }

    bool is_connected() const {
        if (n_ == 0) return false;
        std::vector<bool> seen(n_, false);
        std::vector<NodeId> stack{0};
        seen[0] = true;
        NodeId reached = 1;
        while (!stack.empty()) {
            NodeId u = stack.back();
            stack.pop_back();
            for (const NodeId* it = neighbors_begin(u); it != neighbors_end(u); ++it) {
                if (!seen[*it]) {
                    seen[*it] = true;
                    ++reached;
                    stack.push_back(*it);
                }
            }
        }
        return reached == n_;
    }

private:
    NodeId n_ = 0;
    bool allows_self_loops_ = false;
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> neighbors_;
};

// Complete graph on n >= 2 nodes; with_loops additionally attaches a
// self-loop to every node (degree n instead of n-1).
inline Graph make_clique(NodeId n, bool with_loops) {
    if (n < 2) throw invalid_parameter("clique needs n >= 2");
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2 + (with_loops ? n : 0));
    for (NodeId u = 0; u < n; ++u) {
        if (with_loops) edges.emplace_back(u, u);
        for (NodeId v = u + 1; v < n; ++v) edges.emplace_back(u, v);
    }
    return Graph::from_edges(n, std::move(edges));
}

// 2-regular ring on n >= 3 nodes.
inline Graph make_cycle(NodeId n) {
    if (n < 3) throw invalid_parameter("cycle needs n >= 3");
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(n);
    for (NodeId u = 0; u < n; ++u) edges.emplace_back(u, (u + 1) % n);
    return Graph::from_edges(n, std::move(edges));
}

// Star on n >= 2 nodes with node 0 as the hub.
inline Graph make_star(NodeId n) {
    if (n < 2) throw invalid_parameter("star needs n >= 2");
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(n - 1);
    for (NodeId v = 1; v < n; ++v) edges.emplace_back(NodeId{0}, v);
    return Graph::from_edges(n, std::move(edges));
}

// The common degree if the graph is regular, otherwise nullopt.
inline std::optional<NodeId> regular_degree(const Graph& g) {
    NodeId d = g.degree(0);
    for (NodeId u = 1; u < g.node_count(); ++u)
        if (g.degree(u) != d) return std::nullopt;
    return d;
}

// Number of edges with exactly one endpoint in S. Self-loops never cross.
inline std::uint64_t cut_size(const Graph& g, const std::vector<bool>& in_set) {
    if (in_set.size() != g.node_count())
        throw invalid_parameter("subset mask size must equal node count");
    std::uint64_t cut = 0;
    for (NodeId u = 0; u < g.node_count(); ++u) {
        if (!in_set[u]) continue;
        for (const NodeId* it = g.neighbors_begin(u); it != g.neighbors_end(u); ++it)
            if (*it != u && !in_set[*it]) ++cut;
    }
    return cut;
}

inline std::uint64_t cut_size(const Graph& g, const std::vector<NodeId>& subset) {
    std::vector<bool> mask(g.node_count(), false);
    for (NodeId u : subset) {
        if (u >= g.node_count()) throw invalid_parameter("subset node out of range");
        mask[u] = true;
    }
    return cut_size(g, mask);
}

// Edge-list document:
//   first non-comment line      n=<count>
//   each following line         <u> <v>      (0-based, whitespace separated)
//   '#' starts a comment line; "u u" declares a self-loop
inline Graph parse_edge_list(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool have_n = false;
    NodeId n = 0;
    std::vector<std::pair<NodeId, NodeId>> edges;

    while (std::getline(in, line)) {
        ++lineno;
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        if (!have_n) {
            std::string trimmed = line.substr(start);
            while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
                trimmed.pop_back();
            if (trimmed.rfind("n=", 0) != 0)
                throw parse_error(lineno, "expected header 'n=<count>'");
            long long value = -1;
            try {
                std::size_t pos = 0;
                value = std::stoll(trimmed.substr(2), &pos);
                if (pos != trimmed.size() - 2) value = -1;
            } catch (const std::exception&) {
                value = -1;
            }
            if (value < 1) throw parse_error(lineno, "node count must be a positive integer");
            n = static_cast<NodeId>(value);
            have_n = true;
            continue;
        }
        std::istringstream ls(line);
        long long u = -1, v = -1;
        std::string extra;
        if (!(ls >> u >> v) || (ls >> extra))
            throw parse_error(lineno, "expected '<u> <v>'");
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw parse_error(lineno, "node index out of range");
        edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
    if (!have_n) throw parse_error(lineno == 0 ? 1 : lineno, "missing 'n=<count>' header");
    try {
        return Graph::from_edges(n, std::move(edges));
    } catch (const invalid_parameter& e) {
        throw parse_error(lineno, e.what());
    }
}

// Canonical serialization; parse_edge_list(serialize_edge_list(g)) == g.
inline std::string serialize_edge_list(const Graph& g) {
    std::ostringstream out;
    out << "n=" << g.node_count() << "\n";
    for (NodeId u = 0; u < g.node_count(); ++u)
        for (const NodeId* it = g.neighbors_begin(u); it != g.neighbors_end(u); ++it)
            if (*it >= u) out << u << " " << *it << "\n";
    return out.str();
}

} // namespace voterlab
