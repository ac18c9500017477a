#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "voterlab/acceptance.hpp"
#include "voterlab/errors.hpp"
#include "voterlab/graph.hpp"
#include "voterlab/linalg.hpp"
#include "voterlab/rng.hpp"

namespace voterlab {

enum class WalkMode { Plain, SyncLazy, AsyncLazy };

inline std::string to_string(WalkMode m) {
    switch (m) {
        case WalkMode::Plain: return "plain";
        case WalkMode::SyncLazy: return "sync-lazy";
        case WalkMode::AsyncLazy: return "async-lazy";
    }
    return "?";
}

// Random-walk view of the unbiased dynamics on a graph:
//   plain       P = D^-1 A
//   sync-lazy   P = (1-alpha) I + alpha D^-1 A
//   async-lazy  P = (1-alpha/n) I + (alpha/n) D^-1 A
// together with the degree-proportional stationary distribution and the
// full expected-hitting-time matrix.
struct WalkAnalysis {
    WalkMode mode;
    double alpha;
    DenseMatrix transition;          // n x n, row stochastic
    std::vector<double> stationary;  // pi_i = d_i / sum_j d_j
    DenseMatrix hitting;             // hitting(u, v) = E_u[T_v], zero diagonal
    double t_hit;                    // max over ordered pairs
};

// One dense solve per target node v: (I - P restricted off v) h = 1.
// Capped at n <= 2000; the O(n^4) total is acceptable at analysis scale.
inline WalkAnalysis walk_analysis(const Graph& g, double alpha, WalkMode mode) {
    const NodeId n = g.node_count();
    if (n > 2000) throw resource_error("walk analysis capped at n <= 2000");
    if (!g.is_connected()) throw invalid_parameter("walk analysis requires a connected graph");
    if (mode != WalkMode::Plain && !(alpha > 0.0 && alpha <= 1.0))
        throw invalid_parameter("lazy walk needs alpha in (0,1]");

    WalkAnalysis wa{mode, alpha, DenseMatrix(n, n), std::vector<double>(n),
                    DenseMatrix(n, n), 0.0};

    double self_weight = 0.0, move_weight = 1.0;
    if (mode == WalkMode::SyncLazy) {
        self_weight = 1.0 - alpha;
        move_weight = alpha;
    } else if (mode == WalkMode::AsyncLazy) {
        self_weight = 1.0 - alpha / n;
        move_weight = alpha / n;
    }
    for (NodeId u = 0; u < n; ++u) {
        const double step = move_weight / g.degree(u);
        for (const NodeId* it = g.neighbors_begin(u); it != g.neighbors_end(u); ++it)
            wa.transition.at(u, *it) += step;
        wa.transition.at(u, u) += self_weight;
    }

    const double total_degree = static_cast<double>(g.degree_sum());
    for (NodeId u = 0; u < n; ++u) wa.stationary[u] = g.degree(u) / total_degree;

    for (NodeId target = 0; target < n; ++target) {
        const std::size_t m = n - 1;
        DenseMatrix system(m, m);
        auto reduced = [target](NodeId u) { return u < target ? u : u - 1; };
        for (NodeId u = 0; u < n; ++u) {
            if (u == target) continue;
            const std::size_t r = reduced(u);
            for (NodeId w = 0; w < n; ++w) {
                if (w == target) continue;
                system.at(r, reduced(w)) = -wa.transition.at(u, w);
            }
            system.at(r, r) += 1.0;
        }
        std::vector<std::vector<double>> rhs{std::vector<double>(m, 1.0)};
        lu_solve_in_place(system, rhs);
        for (NodeId u = 0; u < n; ++u) {
            if (u == target) continue;
            const double h = rhs[0][reduced(u)];
            wa.hitting.at(u, target) = h;
            if (h > wa.t_hit) wa.t_hit = h;
        }
    }
    return wa;
}

// Fixation probability of the unbiased dynamics when the set W holds
// opinion 1 initially: the degree-weighted fraction (sum_W d_u) / (sum d_u).
inline double degree_weighted_fixation(const Graph& g, const std::vector<NodeId>& w) {
    std::vector<bool> seen(g.node_count(), false);
    std::uint64_t volume = 0;
    for (NodeId u : w) {
        if (u >= g.node_count()) throw invalid_parameter("node index out of range");
        if (!seen[u]) {
            seen[u] = true;
            volume += g.degree(u);
        }
    }
    return static_cast<double>(volume) / static_cast<double>(g.degree_sum());
}

// On a regular graph the up/down rates through any opinion-1 set S are
// p_S = alpha01 |dS| / (n Delta) and q_S = alpha10 |dS| / (n Delta), so
// their ratio is the fitness r for every S. Samples random nonempty proper
// subsets and verifies the ratio to 1e-12.
inline bool fitness_cut_invariance_check(const Graph& g, const AcceptanceMatrix& acc,
                                         std::uint32_t samples, RngStream& rng) {
    const auto delta = regular_degree(g);
    if (!delta) throw invalid_parameter("cut-ratio check requires a regular graph");
    if (acc.alpha10() == 0.0)
        throw invalid_parameter("cut-ratio check requires alpha10 > 0 (r must be defined)");
    const NodeId n = g.node_count();
    const double r = acc.fitness();
    const double norm = static_cast<double>(n) * static_cast<double>(*delta);
    for (std::uint32_t s = 0; s < samples; ++s) {
        std::vector<bool> in_set(n, false);
        NodeId size = 0;
        do {
            size = 0;
            for (NodeId u = 0; u < n; ++u) {
                in_set[u] = rng.bernoulli(0.5);
                size += in_set[u];
            }
        } while (size == 0 || size == n);
        const double cut = static_cast<double>(cut_size(g, in_set));
        const double p_s = acc.alpha01() * cut / norm;
        const double q_s = acc.alpha10() * cut / norm;
        if (q_s == 0.0) return false;
        if (std::fabs(p_s / q_s - r) > 1e-12) return false;
    }
    return true;
}

} // namespace voterlab
