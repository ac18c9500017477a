#pragma once

#include <cstdint>
#include <vector>

#include "voterlab/acceptance.hpp"
#include "voterlab/dynamics.hpp"
#include "voterlab/errors.hpp"
#include "voterlab/graph.hpp"
#include "voterlab/kernels.hpp"
#include "voterlab/linalg.hpp"

namespace voterlab {

struct OracleResult {
    double fixation1;      // probability of absorbing in the all-1 state
    double expected_time;  // expected steps to either consensus
};

// Ground-truth fixation probability and expected consensus time by solving
// the absorption linear systems on the full 2^n configuration space. The
// brute-force route is deliberately kept for small n as the oracle against
// which lumped chains and simulations are validated.
//
// Caps: n <= 14 for async (sparse rows, iterative solve above 2^12 states),
// n <= 12 for the synchronous schedules (dense product-form rows).
inline OracleResult full_state_oracle(const Graph& g, const AcceptanceMatrix& acc,
                                      Schedule schedule, const OpinionState& initial) {
    const NodeId n = g.node_count();
    if (initial.size() != n) throw invalid_parameter("initial state size must match graph");
    if (!g.is_connected()) throw invalid_parameter("oracle requires a connected graph");
    if (initial.is_consensus())
        return {initial.ones_count() == n ? 1.0 : 0.0, 0.0};
    if (acc.is_frozen())
        throw frozen_system_error("alpha01 = alpha10 = 0 with a mixed state never absorbs");
    if (schedule == Schedule::Async) {
        if (n > 14) throw resource_error("async oracle capped at n <= 14");
    } else {
        if (n > 12) throw resource_error("sync oracle capped at n <= 12");
        if (schedule == Schedule::SyncM2 && !acc.is_unbiased())
            throw invalid_parameter("sync-m2 requires an unbiased acceptance matrix");
    }

    const std::uint64_t S = std::uint64_t{1} << n;
    const std::uint64_t all_ones = S - 1;
    // Transient states are everything except the two consensus states;
    // their dense index is x-1 (configuration 0 is absorbing).
    const std::uint64_t T = S - 2;
    const std::uint64_t x0 = initial.pack();

    std::vector<double> rhs_fix(T, 0.0), rhs_time(T, 1.0);

    if (schedule == Schedule::Async && S > 4096) {
        SparseRows q;
        q.rows.resize(T);
        for (std::uint64_t x = 1; x < all_ones; ++x) {
            double stay = 1.0;
            auto& row = q.rows[x - 1];
            row.reserve(n + 1);
            for (NodeId u = 0; u < n; ++u) {
                const double f = kernels::async_flip_probability(g, acc, x, u);
                stay -= f;
                if (f == 0.0) continue;
                const std::uint64_t y = x ^ (std::uint64_t{1} << u);
                if (y == all_ones)
                    rhs_fix[x - 1] += f;
                else if (y != 0)
                    row.emplace_back(y - 1, f);
            }
            if (stay > 0.0) row.emplace_back(x - 1, stay);
        }
        const std::vector<double> fix = gauss_seidel_i_minus_q(q, rhs_fix);
        const std::vector<double> time = gauss_seidel_i_minus_q(q, rhs_time);
        return {fix[x0 - 1], time[x0 - 1]};
    }

    // Dense path: build the restricted kernel, assemble I - Q, one LU for
    // both right-hand sides.
    DenseMatrix kernel = [&] {
        switch (schedule) {
            case Schedule::Async: return kernels::async_kernel(g, acc);
            case Schedule::SyncM1: return kernels::sync_m1_kernel(g, acc);
            default: return kernels::sync_m2_kernel(g, acc.alpha());
        }
    }();

    DenseMatrix system(T, T);
    for (std::uint64_t x = 1; x < all_ones; ++x) {
        const double* krow = kernel.row(x);
        double* srow = system.row(x - 1);
        for (std::uint64_t y = 1; y < all_ones; ++y) srow[y - 1] = -krow[y];
        srow[x - 1] += 1.0;
        rhs_fix[x - 1] = krow[all_ones];
    }
    std::vector<std::vector<double>> rhs{std::move(rhs_fix), std::move(rhs_time)};
    lu_solve_in_place(system, rhs);
    return {rhs[0][x0 - 1], rhs[1][x0 - 1]};
}

} // namespace voterlab
