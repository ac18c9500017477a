#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "voterlab/acceptance.hpp"
#include "voterlab/errors.hpp"
#include "voterlab/graph.hpp"
#include "voterlab/rng.hpp"

namespace voterlab {

// Binary opinion vector with an incrementally maintained count of
// opinion-1 holders. Single-writer; independent trials own their copies.
class OpinionState {
public:
    explicit OpinionState(NodeId n) : x_(n, 0), ones_(0) {}

    // Nodes 0..k-1 hold opinion 1 (a contiguous block), the rest 0.
    static OpinionState first_k(NodeId n, NodeId k) {
        if (k > n) throw invalid_parameter("k must not exceed n");
        OpinionState s(n);
        for (NodeId u = 0; u < k; ++u) s.set(u, 1);
        return s;
    }

    static OpinionState from_nodes(NodeId n, const std::vector<NodeId>& ones) {
        OpinionState s(n);
        for (NodeId u : ones) {
            if (u >= n) throw invalid_parameter("initial node index out of range");
            s.set(u, 1);
        }
        return s;
    }

    // A 0/1 string, one character per node, node 0 first.
    static OpinionState from_bits(const std::string& bits) {
        if (bits.empty()) throw invalid_parameter("bit string must be non-empty");
        OpinionState s(static_cast<NodeId>(bits.size()));
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i] != '0' && bits[i] != '1')
                throw invalid_parameter("bit string may contain only '0' and '1'");
            s.set(static_cast<NodeId>(i), bits[i] == '1');
        }
        return s;
    }

    NodeId size() const { return static_cast<NodeId>(x_.size()); }
    int opinion(NodeId u) const { return x_[u]; }
    NodeId ones_count() const { return ones_; }
    double fraction() const { return static_cast<double>(ones_) / static_cast<double>(x_.size()); }

    void set(NodeId u, int value) {
        ones_ = static_cast<NodeId>(static_cast<long long>(ones_) + value - x_[u]);
        x_[u] = static_cast<std::uint8_t>(value);
    }

    bool is_consensus() const { return ones_ == 0 || ones_ == x_.size(); }

    const std::vector<std::uint8_t>& bits() const { return x_; }

    // Configuration as an n-bit integer, node u on bit u. Requires n <= 64.
    std::uint64_t pack() const {
        std::uint64_t code = 0;
        for (std::size_t u = 0; u < x_.size(); ++u)
            if (x_[u]) code |= (std::uint64_t{1} << u);
        return code;
    }

private:
    std::vector<std::uint8_t> x_;
    NodeId ones_;
};

enum class Schedule { Async, SyncM1, SyncM2 };

inline std::string to_string(Schedule s) {
    switch (s) {
        case Schedule::Async: return "async";
        case Schedule::SyncM1: return "sync-m1";
        case Schedule::SyncM2: return "sync-m2";
    }
    return "?";
}

inline Schedule schedule_from_string(const std::string& s) {
    if (s == "async") return Schedule::Async;
    if (s == "sync-m1") return Schedule::SyncM1;
    if (s == "sync-m2") return Schedule::SyncM2;
    throw invalid_parameter("unknown schedule '" + s + "'");
}

// One application of the update rule at node u: sample a uniform neighbor v,
// compare opinions, accept v's opinion with probability alpha_{c,c'}.
// When the opinions already agree the coin is skipped (its outcome cannot
// change the state); this alters RNG consumption, not any distribution, and
// the convention is fixed here so replays are well-defined.
inline bool update_node(OpinionState& state, const Graph& g, const AcceptanceMatrix& acc,
                        NodeId u, RngStream& rng) {
    const NodeId d = g.degree(u);
    const NodeId v = g.neighbor_at(u, rng.next_below(d));
    const int c = state.opinion(u);
    const int cv = state.opinion(v);
    if (c == cv) return false;
    if (rng.next_double() < acc.accept_probability(c)) {
        state.set(u, cv);
        return true;
    }
    return false;
}

// Asynchronous iteration: one uniformly chosen node updates.
inline void step_async(OpinionState& state, const Graph& g, const AcceptanceMatrix& acc,
                       RngStream& rng) {
    const NodeId u = static_cast<NodeId>(rng.next_below(g.node_count()));
    update_node(state, g, acc, u, rng);
}

// Synchronous iteration, sample-then-coin form: every node updates in
// parallel against the time-t snapshot. Nodes are processed in ascending
// index order for reproducibility; with snapshot semantics the order has
// no distributional effect.
inline void step_sync_m1(OpinionState& state, const Graph& g, const AcceptanceMatrix& acc,
                         RngStream& rng) {
    const NodeId n = g.node_count();
    if (state.size() != n) throw invalid_parameter("state size must match graph");
    std::vector<std::uint8_t> next(n);
    for (NodeId u = 0; u < n; ++u) {
        const NodeId v = g.neighbor_at(u, rng.next_below(g.degree(u)));
        const int c = state.opinion(u);
        const int cv = state.opinion(v);
        if (c != cv && rng.next_double() < acc.accept_probability(c))
            next[u] = static_cast<std::uint8_t>(cv);
        else
            next[u] = static_cast<std::uint8_t>(c);
    }
    for (NodeId u = 0; u < n; ++u) state.set(u, next[u]);
}

// Synchronous iteration, coin-then-sample form: each node keeps its opinion
// with probability 1-alpha and otherwise copies a uniform neighbor. Defined
// only for unbiased acceptance; one-step equivalent to step_sync_m1 then.
inline void step_sync_m2(OpinionState& state, const Graph& g, const AcceptanceMatrix& acc,
                         RngStream& rng) {
    if (!acc.is_unbiased())
        throw invalid_parameter("sync-m2 requires an unbiased acceptance matrix");
    const double alpha = acc.alpha();
    const NodeId n = g.node_count();
    if (state.size() != n) throw invalid_parameter("state size must match graph");
    std::vector<std::uint8_t> next(n);
    for (NodeId u = 0; u < n; ++u) {
        if (rng.next_double() < alpha) {
            const NodeId v = g.neighbor_at(u, rng.next_below(g.degree(u)));
            next[u] = static_cast<std::uint8_t>(state.opinion(v));
        } else {
            next[u] = static_cast<std::uint8_t>(state.opinion(u));
        }
    }
    for (NodeId u = 0; u < n; ++u) state.set(u, next[u]);
}

// Lumped synchronous step on the clique with loops: with k nodes holding
// opinion 1, each of them keeps it with probability beta_k = 1 - alpha10(1-k/n)
// and each of the other n-k adopts it with probability gamma_k = alpha01 k/n,
// so the next count is Binomial(k, beta_k) + Binomial(n-k, gamma_k).
inline NodeId step_sync_clique_kernel(NodeId k, NodeId n, const AcceptanceMatrix& acc,
                                      RngStream& rng) {
    if (k > n) throw invalid_parameter("count k out of range");
    const double y = static_cast<double>(k) / static_cast<double>(n);
    const double beta = 1.0 - acc.alpha10() * (1.0 - y);
    const double gamma = acc.alpha01() * y;
    NodeId stay = 0, join = 0;
    if (k > 0) {
        std::binomial_distribution<NodeId> d(k, beta);
        stay = d(rng);
    }
    if (k < n) {
        std::binomial_distribution<NodeId> d(n - k, gamma);
        join = d(rng);
    }
    return stay + join;
}

enum class Outcome { Fixed0, Fixed1, Censored };

inline std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::Fixed0: return "fixed0";
        case Outcome::Fixed1: return "fixed1";
        case Outcome::Censored: return "censored";
    }
    return "?";
}

struct RunResult {
    Outcome outcome;
    std::uint64_t steps;
};

// Iterates the chosen step until consensus or max_steps. Consensus time is
// counted in iterations of the schedule: one node update for async, one
// full round for the synchronous schedules; rejected iterations count.
inline RunResult run_to_consensus(OpinionState& state, const Graph& g,
                                  const AcceptanceMatrix& acc, Schedule schedule,
                                  std::uint64_t max_steps, RngStream& rng) {
    if (!g.is_connected())
        throw invalid_parameter("consensus requires a connected graph");
    if (state.size() != g.node_count())
        throw invalid_parameter("state size must match graph");
    if (state.is_consensus())
        return {state.ones_count() == 0 ? Outcome::Fixed0 : Outcome::Fixed1, 0};
    if (acc.is_frozen())
        throw frozen_system_error("alpha01 = alpha10 = 0 with a mixed state can never reach consensus");
    if (schedule == Schedule::SyncM2 && !acc.is_unbiased())
        throw invalid_parameter("sync-m2 requires an unbiased acceptance matrix");

    for (std::uint64_t t = 0; t < max_steps; ++t) {
        switch (schedule) {
            case Schedule::Async: step_async(state, g, acc, rng); break;
            case Schedule::SyncM1: step_sync_m1(state, g, acc, rng); break;
            case Schedule::SyncM2: step_sync_m2(state, g, acc, rng); break;
        }
        if (state.is_consensus())
            return {state.ones_count() == 0 ? Outcome::Fixed0 : Outcome::Fixed1, t + 1};
    }
    return {Outcome::Censored, max_steps};
}

} // namespace voterlab
