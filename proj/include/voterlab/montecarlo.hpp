#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "voterlab/acceptance.hpp"
#include "voterlab/birth_death.hpp"
#include "voterlab/dynamics.hpp"
#include "voterlab/errors.hpp"
#include "voterlab/graph.hpp"
#include "voterlab/rng.hpp"
#include "voterlab/stats.hpp"
#include "voterlab/walks.hpp"

namespace voterlab {

struct TrialRecord {
    std::uint64_t trial_index;
    Outcome outcome;
    std::uint64_t steps;
    std::uint64_t stream_index;  // equals trial_index; recorded for replays
};

struct EstimateSummary {
    std::uint64_t trials = 0;
    std::uint64_t completed = 0;
    std::uint64_t censored = 0;
    std::uint64_t fixed1 = 0;
    double fixation1_freq = 0.0;  // over completed trials
    Interval ci95_fixation;
    bool steps_available = false;  // false when every trial was censored
    double mean_steps = 0.0;       // over completed trials
    double stderr_steps = 0.0;
    Interval ci95_steps;
    std::uint64_t max_steps_used = 0;
    std::uint64_t master_seed = 0;
    double wallclock_seconds = 0.0;
};

struct EstimateResult {
    EstimateSummary summary;
    std::vector<TrialRecord> records;
};

struct EstimateOptions {
    std::uint64_t trials = 1000;
    std::uint64_t max_steps = 0;  // 0: 50x the best exact value or bound available
    std::uint64_t master_seed = 42;
    unsigned threads = 0;  // 0: hardware concurrency
};

namespace detail {

inline bool is_clique(const Graph& g, bool& with_loops) {
    const NodeId n = g.node_count();
    const auto d = regular_degree(g);
    if (!d) return false;
    if (!g.allows_self_loops() && *d == n - 1) {
        with_loops = false;
        return true;
    }
    if (*d == n) {
        with_loops = true;
        return true;
    }
    return false;
}

} // namespace detail

// Default trial cap: 50x the best exact value or proven bound available for
// the configuration. Where no clique closed form or drift bound applies,
// the coalescing-walk bound (ln n + 3) T_hit of the matching lazy walk is
// used, and past walk-analysis scale a coarse n^3 fallback. Censored
// fractions stay negligible whenever the 50x base is a genuine bound
// (Markov: below 2%).
inline std::uint64_t default_max_steps(const Graph& g, const AcceptanceMatrix& acc,
                                       Schedule schedule, NodeId initial_ones) {
    const NodeId n = g.node_count();
    if (initial_ones == 0 || initial_ones == n) return 1;
    double base = 0.0;
    bool with_loops = false;
    const bool clique = detail::is_clique(g, with_loops);
    const bool unbiased = acc.is_unbiased();

    if (schedule == Schedule::Async) {
        if (clique && !acc.is_frozen()) {
            // Loop-free chain value; the factor 2 absorbs the self-loop case.
            base = 2.0 * absorption_time_birth_death(clique_async_chain(n, acc), initial_ones);
        } else if (unbiased && acc.alpha() > 0.0 && n <= 256) {
            base = (std::log(static_cast<double>(n)) + 3.0) *
                   walk_analysis(g, acc.alpha(), WalkMode::AsyncLazy).t_hit;
        }
    } else {
        if (unbiased && acc.alpha() > 0.0 && n <= 256) {
            base = (std::log(static_cast<double>(n)) + 3.0) *
                   walk_analysis(g, acc.alpha(), WalkMode::SyncLazy).t_hit;
        } else if (clique && with_loops && !unbiased) {
            if (acc.alpha01() < acc.alpha10())
                base = drift_bound_sync(n, initial_ones, acc.eps()).value;
            else
                base = drift_bound_sync(n, n - initial_ones, -acc.eps()).value;
        }
    }
    if (base <= 0.0) {
        const double rate = std::max({acc.alpha01(), acc.alpha10(), 1e-3});
        base = static_cast<double>(n) * n * n / rate;
    }
    const double capped = std::min(50.0 * base, 1e15);
    return std::max<std::uint64_t>(1000, static_cast<std::uint64_t>(capped));
}

// Runs independent trials of run_to_consensus, one RNG stream per trial
// (stream index = trial index), and aggregates fixation frequency and
// consensus-time statistics. Trials are distributed over a worker pool;
// the reduction runs over the records in trial order afterwards, so the
// summary does not depend on the thread count.
//
// Censored trials are excluded from the step statistics and flagged; the
// fixation frequency and its Wilson interval are over completed trials.
inline EstimateResult estimate(const Graph& g, const AcceptanceMatrix& acc, Schedule schedule,
                               const OpinionState& initial, const EstimateOptions& opts) {
    if (opts.trials == 0) throw invalid_parameter("need at least one trial");
    if (!g.is_connected()) throw invalid_parameter("estimation requires a connected graph");
    if (initial.size() != g.node_count())
        throw invalid_parameter("initial state size must match graph");
    if (acc.is_frozen() && !initial.is_consensus())
        throw frozen_system_error("alpha01 = alpha10 = 0 with a mixed state can never reach consensus");
    if (schedule == Schedule::SyncM2 && !acc.is_unbiased())
        throw invalid_parameter("sync-m2 requires an unbiased acceptance matrix");

    const auto t_start = std::chrono::steady_clock::now();
    const std::uint64_t max_steps =
        opts.max_steps > 0 ? opts.max_steps
                           : default_max_steps(g, acc, schedule, initial.ones_count());

    std::vector<TrialRecord> records(opts.trials);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::uint64_t t = next.fetch_add(1);
            if (t >= opts.trials) return;
            RngStream rng(opts.master_seed, t);
            OpinionState state = initial;
            const RunResult r = run_to_consensus(state, g, acc, schedule, max_steps, rng);
            records[t] = {t, r.outcome, r.steps, t};
        }
    };

    unsigned workers = opts.threads > 0 ? opts.threads : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(
                                workers, static_cast<unsigned>(std::min<std::uint64_t>(
                                             opts.trials, 256))));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    EstimateSummary s;
    s.trials = opts.trials;
    s.max_steps_used = max_steps;
    s.master_seed = opts.master_seed;
    RunningStats steps;
    for (const TrialRecord& r : records) {
        if (r.outcome == Outcome::Censored) {
            ++s.censored;
            continue;
        }
        ++s.completed;
        if (r.outcome == Outcome::Fixed1) ++s.fixed1;
        steps.add(static_cast<double>(r.steps));
    }
    if (s.completed > 0) {
        s.fixation1_freq = static_cast<double>(s.fixed1) / static_cast<double>(s.completed);
        s.ci95_fixation = wilson_interval(s.fixed1, s.completed, z_95);
        s.steps_available = true;
        s.mean_steps = steps.mean();
        s.stderr_steps = steps.stderr_mean();
        s.ci95_steps = steps.normal_interval(z_95);
    }
    s.wallclock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {s, std::move(records)};
}

// One trial of n synchronous lazy coalescing random walks, one walk started
// on every node: per step each surviving cluster moves to a uniform
// neighbor with probability alpha (else stays), then clusters landing on
// the same node merge. Returns the first step with a single cluster, or
// nullopt if max_steps elapse first (possible without laziness: two walks
// on K2 at alpha = 1 swap forever).
inline std::optional<std::uint64_t> coalescing_walk_trial(const Graph& g, double alpha,
                                                          std::uint64_t master_seed,
                                                          std::uint64_t trial_index,
                                                          std::uint64_t max_steps = 100000000) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw invalid_parameter("alpha must lie in (0,1]");
    if (!g.is_connected())
        throw invalid_parameter("coalescing walks require a connected graph");
    RngStream rng(master_seed, trial_index);
    std::vector<NodeId> clusters(g.node_count());
    for (NodeId u = 0; u < g.node_count(); ++u) clusters[u] = u;
    if (clusters.size() <= 1) return 0;

    for (std::uint64_t t = 1; t <= max_steps; ++t) {
        for (NodeId& pos : clusters) {
            if (alpha >= 1.0 || rng.next_double() < alpha)
                pos = g.neighbor_at(pos, rng.next_below(g.degree(pos)));
        }
        std::sort(clusters.begin(), clusters.end());
        clusters.erase(std::unique(clusters.begin(), clusters.end()), clusters.end());
        if (clusters.size() == 1) return t;
    }
    return std::nullopt;
}

struct MeetingCheckReport {
    double t_hit = 0.0;
    double max_meeting_mean = 0.0;
    double stderr_at_max = 0.0;
    NodeId argmax_u = 0;
    NodeId argmax_v = 0;
    std::uint64_t trials_per_pair = 0;
    bool pass = false;
};

// Estimates the expected meeting time of two independent lazy walks for
// every node pair and tests max E[M_uv] <= T_hit against the exact hitting
// times, at the 3-sigma level. Laziness keeps the chain ergodic on
// bipartite graphs, so every meeting simulation terminates.
inline MeetingCheckReport check_meeting_vs_hitting(const Graph& g, double alpha,
                                                   std::uint64_t trials_per_pair,
                                                   std::uint64_t master_seed) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw invalid_parameter("meeting check needs a strictly lazy walk, 0 < alpha < 1");
    if (trials_per_pair == 0) throw invalid_parameter("need at least one trial per pair");
    const WalkAnalysis wa = walk_analysis(g, alpha, WalkMode::SyncLazy);
    const NodeId n = g.node_count();

    MeetingCheckReport report;
    report.t_hit = wa.t_hit;
    report.trials_per_pair = trials_per_pair;
    std::uint64_t stream = 0;
    const std::uint64_t cap = 10000000;
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            RunningStats stats;
            for (std::uint64_t t = 0; t < trials_per_pair; ++t) {
                RngStream rng(master_seed, stream++);
                NodeId x = u, y = v;
                std::uint64_t steps = 0;
                while (x != y) {
                    if (++steps > cap)
                        throw divergence_error("meeting simulation exceeded its cap");
                    if (rng.next_double() < alpha)
                        x = g.neighbor_at(x, rng.next_below(g.degree(x)));
                    if (rng.next_double() < alpha)
                        y = g.neighbor_at(y, rng.next_below(g.degree(y)));
                }
                stats.add(static_cast<double>(steps));
            }
            if (stats.mean() > report.max_meeting_mean) {
                report.max_meeting_mean = stats.mean();
                report.stderr_at_max = stats.stderr_mean();
                report.argmax_u = u;
                report.argmax_v = v;
            }
        }
    }
    report.pass = report.max_meeting_mean <= report.t_hit + 3.0 * report.stderr_at_max;
    return report;
}

struct DriftCheckReport {
    double bound = 0.0;
    double mean_steps = 0.0;
    double stderr_steps = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t censored = 0;
    bool pass = false;
};

// Simulates the synchronous biased dynamics on the clique with loops via
// the binomial count kernel and tests the drift bound nk/(eps(n-1)):
// pass means the one-sided 3-sigma test does not refute mean <= bound.
inline DriftCheckReport check_drift_bound(std::uint32_t n, std::uint32_t k, double eps,
                                          double alpha10, std::uint64_t trials,
                                          std::uint64_t master_seed) {
    if (!(eps > 0.0)) throw invalid_parameter("drift check needs eps > 0");
    if (!(alpha10 >= eps && alpha10 <= 1.0))
        throw invalid_parameter("need alpha01 = alpha10 - eps in [0,1]");
    if (k == 0 || k >= n) throw invalid_parameter("need 1 <= k <= n-1");
    if (trials == 0) throw invalid_parameter("need at least one trial");
    const AcceptanceMatrix acc(alpha10 - eps, alpha10);

    DriftCheckReport report;
    report.bound = drift_bound_sync(n, k, eps).value;
    report.trials = trials;
    const std::uint64_t cap =
        std::max<std::uint64_t>(100000, static_cast<std::uint64_t>(10000.0 * report.bound));
    RunningStats stats;
    for (std::uint64_t t = 0; t < trials; ++t) {
        RngStream rng(master_seed, t);
        std::uint32_t count = k;
        std::uint64_t steps = 0;
        while (count != 0 && count != n && steps < cap) {
            count = step_sync_clique_kernel(count, n, acc, rng);
            ++steps;
        }
        if (count != 0 && count != n) {
            ++report.censored;
            continue;
        }
        stats.add(static_cast<double>(steps));
    }
    report.mean_steps = stats.mean();
    report.stderr_steps = stats.stderr_mean();
    report.pass = report.censored == 0 &&
                  report.mean_steps - 3.0 * report.stderr_steps <= report.bound;
    return report;
}

struct FixationMonotoneReport {
    double freq0 = 0.0;
    double stderr_freq = 0.0;
    double lower_target = 0.0;  // 1 - k/n
    std::uint64_t trials = 0;
    bool pass = false;
};

// With alpha01 <= alpha10 on the clique with loops, opinion 0 fixates with
// probability at least its initial fraction; estimates the fixation
// frequency of opinion 0 and runs the one-sided 3-sigma test.
inline FixationMonotoneReport check_sync_fixation_monotone(std::uint32_t n,
                                                           const AcceptanceMatrix& acc,
                                                           std::uint32_t k,
                                                           std::uint64_t trials,
                                                           std::uint64_t master_seed) {
    if (acc.alpha01() > acc.alpha10())
        throw invalid_parameter("monotone fixation check assumes alpha01 <= alpha10");
    if (acc.is_frozen() && k != 0 && k != n)
        throw frozen_system_error("frozen dynamics cannot reach consensus");
    if (trials == 0) throw invalid_parameter("need at least one trial");
    if (k > n) throw invalid_parameter("k out of range");

    FixationMonotoneReport report;
    report.trials = trials;
    report.lower_target = 1.0 - static_cast<double>(k) / static_cast<double>(n);
    double bound_scale;
    if (acc.eps() > 0.0 && k >= 1 && k < n)
        bound_scale = drift_bound_sync(n, k, acc.eps()).value;
    else
        bound_scale = (std::log(static_cast<double>(n)) + 3.0) *
                      static_cast<double>(n) / std::max(acc.alpha10(), 1e-3);
    const std::uint64_t cap =
        std::max<std::uint64_t>(100000, static_cast<std::uint64_t>(1000.0 * bound_scale));

    std::uint64_t fixed0 = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        RngStream rng(master_seed, t);
        std::uint32_t count = k;
        std::uint64_t steps = 0;
        while (count != 0 && count != n && steps < cap) {
            count = step_sync_clique_kernel(count, n, acc, rng);
            ++steps;
        }
        if (count == 0) ++fixed0;
    }
    report.freq0 = static_cast<double>(fixed0) / static_cast<double>(trials);
    report.stderr_freq =
        std::sqrt(report.freq0 * (1.0 - report.freq0) / static_cast<double>(trials));
    report.pass = report.freq0 + 3.0 * report.stderr_freq >= report.lower_target;
    return report;
}

struct LazyScalingReport {
    double mean_lazy = 0.0;
    double mean_full = 0.0;
    double ratio = 0.0;
    double ratio_stderr = 0.0;
    double expected_ratio = 0.0;  // 1/alpha
    bool pass = false;
};

// The unbiased async dynamics at acceptance alpha is the alpha = 1 dynamics
// slowed by idle iterations, so consensus times scale by 1/alpha. Estimates
// both means on the same graph and initial condition and checks the ratio
// at 3 sigma (delta-method standard error).
inline LazyScalingReport check_lazy_scaling(const Graph& g, double alpha,
                                            const OpinionState& initial, std::uint64_t trials,
                                            std::uint64_t master_seed) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw invalid_parameter("alpha must lie in (0,1]");
    EstimateOptions opts;
    opts.trials = trials;
    opts.master_seed = master_seed;
    const EstimateResult lazy =
        estimate(g, AcceptanceMatrix::unbiased(alpha), Schedule::Async, initial, opts);
    opts.master_seed = master_seed + 1;
    const EstimateResult full =
        estimate(g, AcceptanceMatrix::unbiased(1.0), Schedule::Async, initial, opts);

    LazyScalingReport report;
    report.expected_ratio = 1.0 / alpha;
    report.mean_lazy = lazy.summary.mean_steps;
    report.mean_full = full.summary.mean_steps;
    if (!lazy.summary.steps_available || !full.summary.steps_available ||
        full.summary.mean_steps == 0.0)
        return report;
    report.ratio = report.mean_lazy / report.mean_full;
    const double rel_lazy = lazy.summary.stderr_steps / lazy.summary.mean_steps;
    const double rel_full = full.summary.stderr_steps / full.summary.mean_steps;
    report.ratio_stderr = report.ratio * std::sqrt(rel_lazy * rel_lazy + rel_full * rel_full);
    report.pass =
        std::fabs(report.ratio - report.expected_ratio) <= 3.0 * report.ratio_stderr;
    return report;
}

} // namespace voterlab
