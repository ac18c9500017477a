#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "voterlab/config.hpp"
#include "voterlab/kernels.hpp"
#include "voterlab/montecarlo.hpp"
#include "voterlab/oracle.hpp"
#include "voterlab/voterlab.hpp"

namespace voterlab {

// Library-level bodies of the CLI subcommands; the binary only parses
// flags, applies overrides, routes output and maps exceptions to exit
// codes (0 success, 1 runtime failure, 2 configuration error).

struct SimulateOutput {
    nlohmann::json summary;
    std::string summary_csv;
    std::string per_trial_csv;
};

inline nlohmann::json summary_to_json(const RunConfig& cfg, const EstimateSummary& s) {
    nlohmann::json out{
        {"config", config_echo(cfg)},
        {"seed", s.master_seed},
        {"trials", s.trials},
        {"completed", s.completed},
        {"censored", s.censored},
        {"fixation1_freq", s.fixation1_freq},
        {"ci95_fixation", {s.ci95_fixation.lo, s.ci95_fixation.hi}},
        {"max_steps", s.max_steps_used},
        {"method", "simulation"},
        {"wallclock_seconds", s.wallclock_seconds},
    };
    if (s.steps_available) {
        out["mean_steps"] = s.mean_steps;
        out["stderr_steps"] = s.stderr_steps;
        out["ci95_steps"] = {s.ci95_steps.lo, s.ci95_steps.hi};
    } else {
        out["mean_steps"] = nullptr;
        out["stderr_steps"] = nullptr;
        out["ci95_steps"] = nullptr;
        out["all_censored"] = true;
    }
    return out;
}

inline std::string summary_to_csv(const EstimateSummary& s) {
    std::ostringstream out;
    out << "trials,completed,censored,fixation1_freq,ci95_fixation_lo,ci95_fixation_hi,"
           "mean_steps,stderr_steps,ci95_steps_lo,ci95_steps_hi,max_steps,seed,method,"
           "wallclock_seconds\n";
    out << s.trials << ',' << s.completed << ',' << s.censored << ','
        << format_double(s.fixation1_freq) << ',' << format_double(s.ci95_fixation.lo) << ','
        << format_double(s.ci95_fixation.hi) << ',';
    if (s.steps_available)
        out << format_double(s.mean_steps) << ',' << format_double(s.stderr_steps) << ','
            << format_double(s.ci95_steps.lo) << ',' << format_double(s.ci95_steps.hi) << ',';
    else
        out << ",,,,";
    out << s.max_steps_used << ',' << s.master_seed << ",simulation,"
        << format_double(s.wallclock_seconds) << "\n";
    return out.str();
}

inline std::string records_to_csv(const std::vector<TrialRecord>& records) {
    std::ostringstream out;
    out << "trial,outcome,steps\n";
    for (const TrialRecord& r : records)
        out << r.trial_index << ',' << to_string(r.outcome) << ',' << r.steps << "\n";
    return out.str();
}

inline SimulateOutput run_simulate(const RunConfig& cfg, unsigned threads) {
    const Graph g = build_graph(cfg);
    const OpinionState initial = build_initial(cfg, g);
    EstimateOptions opts;
    opts.trials = cfg.trials;
    opts.max_steps = cfg.max_steps;
    opts.master_seed = cfg.seed;
    opts.threads = threads;
    const EstimateResult result = estimate(g, cfg.acceptance(), cfg.schedule, initial, opts);
    SimulateOutput out;
    out.summary = summary_to_json(cfg, result.summary);
    out.summary_csv = summary_to_csv(result.summary);
    if (cfg.per_trial) out.per_trial_csv = records_to_csv(result.records);
    return out;
}

// ---------------------------------------------------------------------------
// exact: closed forms where they exist, configuration-space oracle elsewhere.

inline nlohmann::json run_exact(const RunConfig& cfg, const std::string& quantity,
                                const std::string& forced_method) {
    const Graph g = build_graph(cfg);
    const OpinionState initial = build_initial(cfg, g);
    const AcceptanceMatrix acc = cfg.acceptance();
    const NodeId n = g.node_count();
    const NodeId k = initial.ones_count();
    bool with_loops = false;
    const bool clique = detail::is_clique(g, with_loops);
    const bool regular = regular_degree(g).has_value();

    nlohmann::json out{{"config", config_echo(cfg)}, {"quantity", quantity}};

    auto oracle_value = [&](bool want_time) {
        const OracleResult r = full_state_oracle(g, acc, cfg.schedule, initial);
        return want_time ? r.expected_time : r.fixation1;
    };

    if (quantity == "fixation") {
        std::string method = forced_method;
        const NodeId oracle_cap = cfg.schedule == Schedule::Async ? 14 : 12;
        if (method.empty()) {
            // Closed forms: the Moran-style formula for regular graphs under
            // the async schedule (cliques included), and k/n for unbiased
            // cliques under any schedule. Elsewhere the oracle is the
            // default; the degree-weighted unbiased form stays reachable via
            // --method closed-form.
            if (cfg.schedule == Schedule::Async && regular && acc.alpha10() > 0.0)
                method = "closed-form";
            else if (clique && acc.is_unbiased() && acc.alpha01() > 0.0)
                method = "closed-form";
            else if (n <= oracle_cap)
                method = "oracle";
            else if (acc.is_unbiased() && acc.alpha01() > 0.0)
                method = "closed-form";
            else
                throw invalid_parameter(
                    "no exact fixation available: graph too large for the oracle");
        }
        if (method == "closed-form") {
            if (acc.is_unbiased() && acc.alpha01() > 0.0) {
                std::vector<NodeId> w;
                for (NodeId u = 0; u < n; ++u)
                    if (initial.opinion(u)) w.push_back(u);
                out["value"] = degree_weighted_fixation(g, w);
            } else if (cfg.schedule == Schedule::Async && regular && acc.alpha10() > 0.0) {
                out["value"] = fixation_closed_form(acc.fitness(), n, k);
            } else {
                throw invalid_parameter(
                    "no closed-form fixation for this configuration; use the oracle");
            }
        } else if (method == "oracle") {
            out["value"] = oracle_value(false);
        } else {
            throw invalid_parameter("fixation supports methods closed-form|oracle");
        }
        out["method"] = method;
        return out;
    }

    if (quantity == "time") {
        std::string method = forced_method;
        const bool async_clique = clique && !with_loops && cfg.schedule == Schedule::Async;
        if (method.empty()) {
            if (async_clique && acc.is_unbiased() && acc.alpha01() > 0.0)
                method = "closed-form";
            else if (async_clique && acc.alpha01() > 0.0 && acc.alpha10() > 0.0)
                method = "glaz";
            else
                method = "oracle";
        }
        if (method == "closed-form") {
            if (!(async_clique && acc.is_unbiased() && acc.alpha01() > 0.0))
                throw invalid_parameter(
                    "closed-form time needs the unbiased async loop-free clique");
            out["value"] = unbiased_clique_time_closed(n, k, acc.alpha());
        } else if (method == "glaz") {
            if (!async_clique)
                throw invalid_parameter("glaz time needs the async loop-free clique");
            out["value"] = glaz_time(n, k, acc);
        } else if (method == "tridiagonal") {
            if (!async_clique)
                throw invalid_parameter("tridiagonal time needs the async loop-free clique");
            out["value"] = absorption_time_birth_death(clique_async_chain(n, acc), k);
        } else if (method == "oracle") {
            out["value"] = oracle_value(true);
        } else {
            throw invalid_parameter(
                "time supports methods closed-form|glaz|tridiagonal|oracle");
        }
        out["method"] = method;
        return out;
    }

    if (quantity == "diffusion") {
        if (!(clique && !with_loops && cfg.schedule == Schedule::Async && acc.is_unbiased() &&
              acc.alpha01() > 0.0))
            throw invalid_parameter(
                "diffusion estimate applies to the unbiased async loop-free clique");
        out["value"] = diffusion_estimate(n, k, acc.alpha());
        out["method"] = "closed-form";
        return out;
    }

    if (quantity == "drift-bound") {
        const double eps = acc.eps();
        if (!(eps > 0.0))
            throw invalid_parameter("drift-bound needs alpha01 < alpha10 (eps > 0)");
        if (k == 0 || k >= n)
            throw invalid_parameter("drift-bound needs an interior initial count");
        const DriftBound bound = drift_bound_sync(n, k, eps);
        out["value"] = bound.value;
        out["simplified"] = bound.simplified;
        out["method"] = "closed-form";
        return out;
    }

    if (quantity == "walk") {
        WalkMode mode =
            cfg.schedule == Schedule::Async ? WalkMode::AsyncLazy : WalkMode::SyncLazy;
        double alpha = 1.0;
        if (!forced_method.empty()) {
            if (forced_method == "plain")
                mode = WalkMode::Plain;
            else if (forced_method == "sync-lazy")
                mode = WalkMode::SyncLazy;
            else if (forced_method == "async-lazy")
                mode = WalkMode::AsyncLazy;
            else
                throw invalid_parameter("walk modes: plain|sync-lazy|async-lazy");
        }
        if (mode != WalkMode::Plain) {
            if (!acc.is_unbiased())
                throw invalid_parameter("lazy walks correspond to the unbiased dynamics");
            alpha = acc.alpha();
        }
        const WalkAnalysis wa = walk_analysis(g, alpha, mode);
        out["method"] = "walk";
        out["mode"] = to_string(mode);
        out["alpha"] = alpha;
        out["t_hit"] = wa.t_hit;
        out["stationary"] = wa.stationary;
        if (n <= 64) {
            nlohmann::json rows = nlohmann::json::array();
            for (NodeId u = 0; u < n; ++u) {
                nlohmann::json row = nlohmann::json::array();
                for (NodeId v = 0; v < n; ++v) row.push_back(wa.hitting.at(u, v));
                rows.push_back(row);
            }
            out["hitting"] = rows;
        }
        return out;
    }

    throw invalid_parameter("quantity must be fixation|time|diffusion|drift-bound|walk");
}

// ---------------------------------------------------------------------------
// check: named verification suites at desk-scale defaults.

struct CheckOptions {
    std::uint64_t seed = 42;
    std::uint64_t trials = 0;  // 0 = per-suite default
    // Drift-suite overrides; the suite's default cases run when unset.
    std::uint32_t drift_n = 0;
    std::uint32_t drift_k = 0;
    double drift_eps = -1.0;
    double drift_alpha10 = 1.0;
};

namespace detail {

inline nlohmann::json check_entry(const std::string& name, bool pass, nlohmann::json details) {
    details["name"] = name;
    details["pass"] = pass;
    return details;
}

inline double max_kernel_diff(const DenseMatrix& a, const DenseMatrix& b) {
    double m = 0.0;
    for (std::size_t x = 0; x < a.rows(); ++x)
        for (std::size_t y = 0; y < a.cols(); ++y)
            m = std::max(m, std::fabs(a.at(x, y) - b.at(x, y)));
    return m;
}

} // namespace detail

inline nlohmann::json run_check(const std::string& suite, const CheckOptions& opt) {
    nlohmann::json checks = nlohmann::json::array();

    if (suite == "equivalence") {
        struct Named {
            const char* name;
            Graph g;
        };
        const Named graphs[] = {{"clique4", make_clique(4, false)},
                                {"cycle5", make_cycle(5)},
                                {"star4", make_star(4)}};
        for (const auto& [name, g] : graphs) {
            for (double alpha : {0.25, 0.5, 1.0}) {
                const double diff = detail::max_kernel_diff(
                    kernels::sync_m1_kernel(g, AcceptanceMatrix::unbiased(alpha)),
                    kernels::sync_m2_kernel(g, alpha));
                checks.push_back(detail::check_entry(
                    std::string("m1-m2-kernel-") + name + "-alpha" + format_double(alpha),
                    diff <= 1e-12, {{"max_entry_diff", diff}, {"tolerance", 1e-12}}));
            }
            // Async lazy decomposition: K_alpha = (1-alpha) I + alpha K_1.
            const DenseMatrix voter = kernels::async_kernel(g, AcceptanceMatrix::unbiased(1.0));
            for (double alpha : {0.25, 0.5}) {
                const DenseMatrix lazy =
                    kernels::async_kernel(g, AcceptanceMatrix::unbiased(alpha));
                double diff = 0.0;
                for (std::size_t x = 0; x < lazy.rows(); ++x)
                    for (std::size_t y = 0; y < lazy.cols(); ++y) {
                        const double expected =
                            alpha * voter.at(x, y) + (x == y ? 1.0 - alpha : 0.0);
                        diff = std::max(diff, std::fabs(lazy.at(x, y) - expected));
                    }
                checks.push_back(detail::check_entry(
                    std::string("async-lazy-decomposition-") + name + "-alpha" +
                        format_double(alpha),
                    diff <= 1e-12, {{"max_entry_diff", diff}, {"tolerance", 1e-12}}));
            }
        }
    } else if (suite == "drift") {
        const std::uint64_t trials = opt.trials ? opt.trials : 5000;
        struct Case {
            std::uint32_t n, k;
            double eps, alpha10;
        };
        std::vector<Case> cases{{100, 10, 0.2, 1.0}, {50, 25, 0.5, 1.0}};
        if (opt.drift_n != 0 || opt.drift_eps >= 0.0) {
            const std::uint32_t n = opt.drift_n ? opt.drift_n : 100;
            const std::uint32_t k = opt.drift_k ? opt.drift_k : n / 10;
            cases = {{n, k, opt.drift_eps, opt.drift_alpha10}};
        }
        for (const auto& c : cases) {
            const DriftCheckReport r =
                check_drift_bound(c.n, c.k, c.eps, c.alpha10, trials, opt.seed);
            checks.push_back(detail::check_entry(
                "drift-bound-n" + std::to_string(c.n) + "-k" + std::to_string(c.k),
                r.pass,
                {{"bound", r.bound},
                 {"mean_steps", r.mean_steps},
                 {"stderr_steps", r.stderr_steps},
                 {"trials", r.trials},
                 {"censored", r.censored}}));
        }
    } else if (suite == "lazy-scaling") {
        const std::uint64_t trials = opt.trials ? opt.trials : 4000;
        const LazyScalingReport clique = check_lazy_scaling(
            make_clique(10, false), 0.5, OpinionState::first_k(10, 5), trials, opt.seed);
        checks.push_back(detail::check_entry(
            "lazy-scaling-clique10-alpha0.5", clique.pass,
            {{"ratio", clique.ratio},
             {"expected_ratio", clique.expected_ratio},
             {"ratio_stderr", clique.ratio_stderr}}));
        const LazyScalingReport cycle = check_lazy_scaling(
            make_cycle(10), 0.25, OpinionState::first_k(10, 5), trials, opt.seed + 1);
        checks.push_back(detail::check_entry(
            "lazy-scaling-cycle10-alpha0.25", cycle.pass,
            {{"ratio", cycle.ratio},
             {"expected_ratio", cycle.expected_ratio},
             {"ratio_stderr", cycle.ratio_stderr}}));
    } else if (suite == "meeting") {
        const std::uint64_t trials = opt.trials ? opt.trials : 800;
        const struct {
            const char* name;
            Graph g;
        } graphs[] = {{"clique5", make_clique(5, false)}, {"cycle8", make_cycle(8)}};
        for (const auto& [name, g] : graphs) {
            const MeetingCheckReport r = check_meeting_vs_hitting(g, 0.5, trials, opt.seed);
            checks.push_back(detail::check_entry(
                std::string("meeting-vs-hitting-") + name, r.pass,
                {{"t_hit", r.t_hit},
                 {"max_meeting_mean", r.max_meeting_mean},
                 {"stderr_at_max", r.stderr_at_max},
                 {"trials_per_pair", r.trials_per_pair}}));
        }
    } else if (suite == "cut-ratio") {
        const std::uint64_t samples = opt.trials ? opt.trials : 500;
        RngStream rng(opt.seed, 0);
        const bool cycle_ok = fitness_cut_invariance_check(
            make_cycle(8), AcceptanceMatrix(0.75, 0.25), static_cast<std::uint32_t>(samples),
            rng);
        checks.push_back(detail::check_entry("cut-ratio-cycle8", cycle_ok,
                                             {{"samples", samples}, {"r", 3.0}}));
        const bool clique_ok = fitness_cut_invariance_check(
            make_clique(5, false), AcceptanceMatrix(0.75, 0.25),
            static_cast<std::uint32_t>(samples), rng);
        checks.push_back(detail::check_entry("cut-ratio-clique5", clique_ok,
                                             {{"samples", samples}, {"r", 3.0}}));
    } else if (suite == "oracle-agreement") {
        double worst_fix = 0.0, worst_time = 0.0;
        for (NodeId n = 2; n <= 8; ++n) {
            const Graph g = make_clique(n, false);
            for (double a01 : {0.25, 0.5, 0.75, 1.0}) {
                for (double a10 : {0.25, 0.5, 0.75, 1.0}) {
                    const AcceptanceMatrix acc(a01, a10);
                    const BirthDeathChain chain = clique_async_chain(n, acc);
                    for (NodeId k = 1; k < n; ++k) {
                        const OracleResult r = full_state_oracle(
                            g, acc, Schedule::Async, OpinionState::first_k(n, k));
                        worst_fix = std::max(
                            worst_fix, std::fabs(r.fixation1 - fixation_birth_death(chain, k)));
                        worst_time = std::max(
                            worst_time, std::fabs(r.expected_time -
                                                  absorption_time_birth_death(chain, k)));
                    }
                }
            }
        }
        checks.push_back(detail::check_entry(
            "oracle-vs-birth-death-fixation", worst_fix <= 1e-9,
            {{"max_abs_diff", worst_fix}, {"tolerance", 1e-9}}));
        checks.push_back(detail::check_entry(
            "oracle-vs-birth-death-time", worst_time <= 1e-9,
            {{"max_abs_diff", worst_time}, {"tolerance", 1e-9}}));
    } else {
        throw invalid_parameter(
            "suite must be equivalence|drift|lazy-scaling|meeting|cut-ratio|oracle-agreement");
    }

    bool all = true;
    for (const auto& c : checks) all = all && c.at("pass").get<bool>();
    return nlohmann::json{{"suite", suite}, {"pass", all}, {"checks", checks}};
}

// ---------------------------------------------------------------------------
// sweep: cartesian product over named parameter lists, one row per combo.

struct SweepSpec {
    std::vector<std::pair<std::string, std::vector<double>>> parameters;
};

inline SweepSpec parse_sweep_spec(const std::vector<std::string>& raw) {
    SweepSpec spec;
    if (raw.empty()) throw invalid_parameter("sweep needs at least one parameter list");
    for (const std::string& item : raw) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
            throw invalid_parameter("sweep parameter must look like name=v1,v2,...: " + item);
        const std::string name = item.substr(0, eq);
        if (name != "n" && name != "k" && name != "alpha01" && name != "alpha10" &&
            name != "trials")
            throw invalid_parameter("sweep parameter must be one of n|k|alpha01|alpha10|trials");
        std::vector<double> values;
        std::stringstream ss(item.substr(eq + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) throw invalid_parameter("empty value in sweep list: " + item);
            try {
                std::size_t pos = 0;
                values.push_back(std::stod(tok, &pos));
                if (pos != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw invalid_parameter("sweep value is not a number: " + tok);
            }
        }
        if (values.empty()) throw invalid_parameter("empty sweep value list: " + item);
        spec.parameters.emplace_back(name, std::move(values));
    }
    return spec;
}

inline nlohmann::json sweep_row(const RunConfig& cfg, unsigned threads) {
    const Graph g = build_graph(cfg);
    const OpinionState initial = build_initial(cfg, g);
    const AcceptanceMatrix acc = cfg.acceptance();
    EstimateOptions opts;
    opts.trials = cfg.trials;
    opts.max_steps = cfg.max_steps;
    opts.master_seed = cfg.seed;
    opts.threads = threads;
    const EstimateResult result = estimate(g, acc, cfg.schedule, initial, opts);

    nlohmann::json row{
        {"schedule", to_string(cfg.schedule)},
        {"alpha01", cfg.alpha01},
        {"alpha10", cfg.alpha10},
        {"graph", cfg.graph_kind},
        {"n", g.node_count()},
        {"k", initial.ones_count()},
        {"trials", cfg.trials},
        {"seed", cfg.seed},
        {"fixation1_freq", result.summary.fixation1_freq},
        {"ci95_fixation_lo", result.summary.ci95_fixation.lo},
        {"ci95_fixation_hi", result.summary.ci95_fixation.hi},
        {"mean_steps", result.summary.steps_available ? nlohmann::json(result.summary.mean_steps)
                                                      : nlohmann::json()},
        {"stderr_steps", result.summary.steps_available
                             ? nlohmann::json(result.summary.stderr_steps)
                             : nlohmann::json()},
        {"censored", result.summary.censored},
        {"exact_fixation", nlohmann::json()},
        {"exact_time", nlohmann::json()},
        {"exact_method", ""},
    };

    bool with_loops = false;
    const bool clique = detail::is_clique(g, with_loops);
    const NodeId n = g.node_count();
    const NodeId k = initial.ones_count();
    if (cfg.schedule == Schedule::Async && clique && !with_loops && acc.alpha10() > 0.0 &&
        acc.alpha01() > 0.0) {
        row["exact_fixation"] = fixation_closed_form(acc.fitness(), n, k);
        if (k > 0 && k < n) row["exact_time"] = glaz_time(n, k, acc);
        else row["exact_time"] = 0.0;
        row["exact_method"] = acc.is_unbiased() ? "closed-form" : "glaz";
    } else if (acc.is_unbiased() && acc.alpha01() > 0.0) {
        std::vector<NodeId> w;
        for (NodeId u = 0; u < n; ++u)
            if (initial.opinion(u)) w.push_back(u);
        row["exact_fixation"] = degree_weighted_fixation(g, w);
        row["exact_method"] = "closed-form";
    }
    return row;
}

inline nlohmann::json run_sweep(const RunConfig& base, const SweepSpec& spec, unsigned threads) {
    nlohmann::json rows = nlohmann::json::array();
    std::vector<std::size_t> index(spec.parameters.size(), 0);
    for (;;) {
        RunConfig cfg = base;
        for (std::size_t i = 0; i < spec.parameters.size(); ++i) {
            const auto& [name, values] = spec.parameters[i];
            const double v = values[index[i]];
            if (name == "n")
                cfg.n = static_cast<NodeId>(v);
            else if (name == "k")
                cfg.init_k = static_cast<NodeId>(v);
            else if (name == "alpha01")
                cfg.alpha01 = v;
            else if (name == "alpha10")
                cfg.alpha10 = v;
            else if (name == "trials")
                cfg.trials = static_cast<std::uint64_t>(v);
        }
        if (cfg.init_k) {
            cfg.init_nodes.reset();
            cfg.init_bits.reset();
        }
        rows.push_back(sweep_row(cfg, threads));

        std::size_t pos = 0;
        while (pos < index.size()) {
            if (++index[pos] < spec.parameters[pos].second.size()) break;
            index[pos] = 0;
            ++pos;
        }
        if (pos == index.size()) break;
    }
    return rows;
}

inline std::string sweep_to_csv(const nlohmann::json& rows) {
    static const char* columns[] = {
        "schedule",  "alpha01",         "alpha10",
        "graph",     "n",               "k",
        "trials",    "seed",            "fixation1_freq",
        "ci95_fixation_lo", "ci95_fixation_hi", "mean_steps",
        "stderr_steps",     "censored",         "exact_fixation",
        "exact_time",       "exact_method"};
    std::ostringstream out;
    bool first = true;
    for (const char* c : columns) {
        if (!first) out << ',';
        out << c;
        first = false;
    }
    out << "\n";
    for (const auto& row : rows) {
        first = true;
        for (const char* c : columns) {
            if (!first) out << ',';
            first = false;
            const auto& v = row.at(c);
            if (v.is_null())
                ;  // empty field
            else if (v.is_string())
                out << v.get<std::string>();
            else if (v.is_number_float())
                out << format_double(v.get<double>());
            else
                out << v.dump();
        }
        out << "\n";
    }
    return out.str();
}

} // namespace voterlab
