#pragma once

#include <cstdint>
#include <vector>

#include "voterlab/acceptance.hpp"
#include "voterlab/dynamics.hpp"
#include "voterlab/errors.hpp"
#include "voterlab/graph.hpp"
#include "voterlab/linalg.hpp"

namespace voterlab {

// Exact one-step kernels on the 2^n configuration space. Configurations are
// n-bit integers, node u on bit u. Dense kernels are capped at n <= 12
// (4096 x 4096); the sparse async rows go up to n <= 14.

namespace kernels {

inline int bit(std::uint64_t x, NodeId u) { return static_cast<int>((x >> u) & 1u); }

// P(node u holds 1 next | configuration x) under sample-then-coin: u picks
// a uniform neighbor v and accepts v's opinion with prob alpha_{x_u, x_v}.
inline double m1_prob_one(const Graph& g, const AcceptanceMatrix& acc, std::uint64_t x,
                          NodeId u) {
    const int c = bit(x, u);
    double p = 0.0;
    for (const NodeId* it = g.neighbors_begin(u); it != g.neighbors_end(u); ++it) {
        const int cv = bit(x, *it);
        if (c == 1)
            p += (cv == 1) ? 1.0 : 1.0 - acc.alpha10();
        else if (cv == 1)
            p += acc.alpha01();
    }
    return p / g.degree(u);
}

// P(node u holds 1 next | configuration x) under coin-then-sample with
// laziness 1 - alpha: keep with prob 1-alpha, else copy a uniform neighbor.
inline double m2_prob_one(const Graph& g, double alpha, std::uint64_t x, NodeId u) {
    int ones = 0;
    for (const NodeId* it = g.neighbors_begin(u); it != g.neighbors_end(u); ++it)
        ones += bit(x, *it);
    return (1.0 - alpha) * bit(x, u) + alpha * static_cast<double>(ones) / g.degree(u);
}

// Probability that an async iteration flips node u in configuration x.
inline double async_flip_probability(const Graph& g, const AcceptanceMatrix& acc,
                                     std::uint64_t x, NodeId u) {
    const int c = bit(x, u);
    int opposite = 0;
    for (const NodeId* it = g.neighbors_begin(u); it != g.neighbors_end(u); ++it)
        opposite += (bit(x, *it) != c);
    const double sample_prob = static_cast<double>(opposite) / g.degree(u);
    return sample_prob * acc.accept_probability(c) / g.node_count();
}

inline void require_dense_size(NodeId n) {
    if (n > 12) throw resource_error("dense configuration kernel capped at n <= 12");
}

// Fills one row of a product-form synchronous kernel from the per-node
// probabilities prob_one[u], via subset doubling (no divisions, O(2^n)).
inline void fill_product_row(const std::vector<double>& prob_one, double* row) {
    const std::size_t n = prob_one.size();
    row[0] = 1.0;
    std::uint64_t filled = 1;
    for (std::size_t u = 0; u < n; ++u) {
        const double p = prob_one[u];
        for (std::uint64_t y = 0; y < filled; ++y) {
            row[y + filled] = row[y] * p;
            row[y] *= (1.0 - p);
        }
        filled <<= 1;
    }
}

inline DenseMatrix sync_m1_kernel(const Graph& g, const AcceptanceMatrix& acc) {
    const NodeId n = g.node_count();
    require_dense_size(n);
    const std::uint64_t S = std::uint64_t{1} << n;
    DenseMatrix kernel(S, S);
    std::vector<double> prob(n);
    for (std::uint64_t x = 0; x < S; ++x) {
        for (NodeId u = 0; u < n; ++u) prob[u] = m1_prob_one(g, acc, x, u);
        fill_product_row(prob, kernel.row(x));
    }
    return kernel;
}

inline DenseMatrix sync_m2_kernel(const Graph& g, double alpha) {
    const NodeId n = g.node_count();
    require_dense_size(n);
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw invalid_parameter("alpha must lie in [0,1]");
    const std::uint64_t S = std::uint64_t{1} << n;
    DenseMatrix kernel(S, S);
    std::vector<double> prob(n);
    for (std::uint64_t x = 0; x < S; ++x) {
        for (NodeId u = 0; u < n; ++u) prob[u] = m2_prob_one(g, alpha, x, u);
        fill_product_row(prob, kernel.row(x));
    }
    return kernel;
}

inline DenseMatrix async_kernel(const Graph& g, const AcceptanceMatrix& acc) {
    const NodeId n = g.node_count();
    require_dense_size(n);
    const std::uint64_t S = std::uint64_t{1} << n;
    DenseMatrix kernel(S, S);
    for (std::uint64_t x = 0; x < S; ++x) {
        double stay = 1.0;
        for (NodeId u = 0; u < n; ++u) {
            const double f = async_flip_probability(g, acc, x, u);
            kernel.at(x, x ^ (std::uint64_t{1} << u)) += f;
            stay -= f;
        }
        kernel.at(x, x) += stay;
    }
    return kernel;
}

} // namespace kernels

} // namespace voterlab
