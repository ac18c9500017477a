// voterlab — simulate, analyze and cross-check context-dependent voter
// dynamics on graphs. Subcommands: simulate | exact | check | sweep.
//
// Exit codes: 0 success, 1 runtime failure (including failing checks),
// 2 configuration error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "voterlab/commands.hpp"
#include "voterlab/config.hpp"

namespace {

using voterlab::invalid_parameter;

void write_text(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        if (!content.empty() && content.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write output file '" + path + "'");
    out << content;
}

nlohmann::json resolve_config_document(const std::string& config_path,
                                       const std::vector<std::string>& overrides) {
    nlohmann::json doc =
        config_path.empty() ? nlohmann::json::object() : voterlab::load_config_document(config_path);
    for (const std::string& assignment : overrides) voterlab::apply_override(doc, assignment);
    if (const char* env_seed = std::getenv("VOTERLAB_SEED")) {
        try {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(env_seed, &pos, 10);
            if (pos != std::string(env_seed).size()) throw std::invalid_argument(env_seed);
            doc["run"]["seed"] = v;
        } catch (const std::exception&) {
            throw invalid_parameter("VOTERLAB_SEED must be a decimal 64-bit integer");
        }
    }
    return doc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"context-dependent voter model lab"};
    app.require_subcommand(1);

    std::string config_path;
    unsigned threads = 0;
    bool quiet = false;
    app.add_option("--config", config_path, "run configuration (JSON file, '-' for stdin)");
    app.add_option("--threads", threads, "worker pool size (0 = hardware)");
    app.add_flag("--quiet", quiet, "suppress the one-line human summary");

    std::vector<std::string> set_simulate, set_exact, set_sweep;
    std::string quantity, method, suite, report_path, sweep_out;
    std::vector<std::string> sweep_params;
    std::uint64_t check_seed = 42, check_trials = 0;

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimation");
    simulate->fallthrough();
    simulate->add_option("--set", set_simulate, "override config key (section.key=value)");

    CLI::App* exact = app.add_subcommand("exact", "exact values and bounds");
    exact->fallthrough();
    exact->add_option("--quantity", quantity, "fixation|time|diffusion|drift-bound|walk")
        ->required();
    exact->add_option("--method", method,
                      "force a method (closed-form|glaz|tridiagonal|oracle; walk modes: "
                      "plain|sync-lazy|async-lazy)");
    exact->add_option("--set", set_exact, "override config key (section.key=value)");

    CLI::App* check = app.add_subcommand("check", "verification suites");
    check->fallthrough();
    check->add_option("--suite", suite,
                      "equivalence|drift|lazy-scaling|meeting|cut-ratio|oracle-agreement")
        ->required();
    check->add_option("--report", report_path, "report file (default stdout)");
    check->add_option("--trials", check_trials, "override the suite's default trial count");
    check->add_option("--seed", check_seed, "master seed for the suite");
    std::uint32_t drift_n = 0, drift_k = 0;
    double drift_eps = -1.0, drift_alpha10 = 1.0;
    check->add_option("--n", drift_n, "drift suite: clique size");
    check->add_option("--k", drift_k, "drift suite: initial opinion-1 count");
    check->add_option("--eps", drift_eps, "drift suite: bias gap alpha10 - alpha01");
    check->add_option("--alpha10", drift_alpha10, "drift suite: alpha10");

    CLI::App* sweep = app.add_subcommand("sweep", "cartesian parameter sweeps");
    sweep->fallthrough();
    sweep->add_option("--param", sweep_params, "swept list (name=v1,v2,...), repeatable")
        ->required();
    sweep->add_option("--out", sweep_out, "table file (default stdout)");
    sweep->add_option("--set", set_sweep, "override config key (section.key=value)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) {
            const voterlab::RunConfig cfg =
                voterlab::parse_run_config(resolve_config_document(config_path, set_simulate));
            const voterlab::SimulateOutput out = voterlab::run_simulate(cfg, threads);
            write_text(cfg.out_path, cfg.out_format == "csv" ? out.summary_csv
                                                             : out.summary.dump(2));
            if (cfg.per_trial) {
                std::string trial_path = cfg.per_trial_path;
                if (trial_path.empty()) {
                    if (cfg.out_path.empty())
                        throw invalid_parameter(
                            "output.per_trial needs output.path or output.per_trial_path");
                    trial_path = cfg.out_path + ".trials.csv";
                }
                write_text(trial_path, out.per_trial_csv);
            }
            if (!quiet) {
                const auto& s = out.summary;
                std::cerr << "fixation1_freq=" << s["fixation1_freq"]
                          << " mean_steps=" << s["mean_steps"]
                          << " censored=" << s["censored"] << " seed=" << s["seed"] << " ("
                          << s["wallclock_seconds"] << "s)\n";
            }
            return 0;
        }
        if (exact->parsed()) {
            const voterlab::RunConfig cfg =
                voterlab::parse_run_config(resolve_config_document(config_path, set_exact));
            const nlohmann::json out = voterlab::run_exact(cfg, quantity, method);
            if (cfg.out_format == "csv" && quantity != "walk") {
                std::string csv = "quantity,value,simplified,method\n";
                csv += quantity + "," + voterlab::format_double(out.at("value").get<double>()) +
                       ",";
                if (out.contains("simplified"))
                    csv += voterlab::format_double(out.at("simplified").get<double>());
                csv += "," + out.at("method").get<std::string>() + "\n";
                write_text(cfg.out_path, csv);
            } else {
                write_text(cfg.out_path, out.dump(2));
            }
            if (!quiet && out.contains("value"))
                std::cerr << quantity << "=" << out["value"] << " method=" << out["method"]
                          << "\n";
            return 0;
        }
        if (check->parsed()) {
            voterlab::CheckOptions opt;
            opt.seed = check_seed;
            opt.trials = check_trials;
            opt.drift_n = drift_n;
            opt.drift_k = drift_k;
            opt.drift_eps = drift_eps;
            opt.drift_alpha10 = drift_alpha10;
            const nlohmann::json report = voterlab::run_check(suite, opt);
            write_text(report_path, report.dump(2));
            if (!quiet)
                std::cerr << "suite " << suite << ": "
                          << (report["pass"].get<bool>() ? "PASS" : "FAIL") << "\n";
            return report["pass"].get<bool>() ? 0 : 1;
        }
        if (sweep->parsed()) {
            const voterlab::RunConfig base =
                voterlab::parse_run_config(resolve_config_document(config_path, set_sweep));
            const voterlab::SweepSpec spec = voterlab::parse_sweep_spec(sweep_params);
            const nlohmann::json rows = voterlab::run_sweep(base, spec, threads);
            const std::string target = sweep_out.empty() ? base.out_path : sweep_out;
            write_text(target,
                       base.out_format == "json" ? rows.dump(2) : voterlab::sweep_to_csv(rows));
            if (!quiet) std::cerr << rows.size() << " sweep rows\n";
            return 0;
        }
    } catch (const voterlab::parse_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const invalid_parameter& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const voterlab::frozen_system_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const voterlab::resource_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
