#pragma once

// Command-line driver: parses a config, runs one experiment and writes
// results.csv, plotdata.csv and summary.json (diagnostics.csv for the
// diagnostics subcommand). Exit codes: 0 ok, 1 configuration error,
// 2 numerical refusal, 3 selftest failure.

#include "poolrisk/config.hpp"
#include "poolrisk/errors.hpp"
#include "poolrisk/experiments.hpp"
#include "poolrisk/selftest.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace poolrisk {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRefusal = 2, kExitInvariant = 3 };

inline std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline constexpr const char* kResultsHeader = "n,total_weight,estimate,mc_stderr,target,abs_error";
inline constexpr const char* kPlotHeader = "n,estimate,lower,upper,target";
inline constexpr const char* kDiagnosticsHeader =
    "n,total_weight,toeplitz_ratio,wlln_tail_probability,ui_statistic,moment_statistic";

inline void write_results_csv(std::ostream& os, const ExperimentResult& r) {
    os << kResultsHeader << '\n';
    for (const auto& rec : r.records)
        os << rec.n << ',' << format_number(rec.total_weight) << ',' << format_number(rec.estimate) << ','
           << format_number(rec.mc_stderr) << ',' << format_number(rec.target) << ',' << format_number(rec.abs_error)
           << '\n';
}

// n against the estimate with a 3 SE band and the target.
inline void write_plotdata_csv(std::ostream& os, const ExperimentResult& r) {
    os << kPlotHeader << '\n';
    for (const auto& rec : r.records)
        os << rec.n << ',' << format_number(rec.estimate) << ',' << format_number(rec.estimate - 3.0 * rec.mc_stderr)
           << ',' << format_number(rec.estimate + 3.0 * rec.mc_stderr) << ',' << format_number(rec.target) << '\n';
}

inline void write_diagnostics_csv(std::ostream& os, const DiagnosticsReport& d) {
    os << kDiagnosticsHeader << '\n';
    for (const auto& row : d.rows)
        os << row.n << ',' << format_number(row.total_weight) << ',' << format_number(row.toeplitz_ratio) << ','
           << format_number(row.wlln_tail_probability) << ',' << format_number(row.ui_statistic) << ','
           << format_number(row.moment_statistic) << '\n';
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
    if (!out) throw ConfigError("failed writing " + path.string());
}

inline Json manifest_json(const ExperimentConfig& cfg, const Json& outputs, double wall_seconds) {
    return {{"digest", config_digest(cfg)},
            {"seed", cfg.seed.master_seed},
            {"version", kVersion},
            {"outputs", outputs},
            {"wall_seconds", wall_seconds}};
}

} // namespace detail

inline Json summary_json(const ExperimentConfig& cfg, const ExperimentResult& r, const Json& outputs) {
    Json records = Json::array();
    for (const auto& rec : r.records)
        records.push_back({{"n", rec.n},
                           {"total_weight", rec.total_weight},
                           {"estimate", rec.estimate},
                           {"mc_stderr", rec.mc_stderr},
                           {"target", rec.target},
                           {"abs_error", rec.abs_error}});
    Json j{{"experiment", std::string(to_string(r.kind))},
           {"verdict", std::string(to_string(r.verdict))},
           {"tolerance", cfg.tolerance},
           {"tolerance_relative", tolerance_is_relative(cfg.kind)},
           {"records", records},
           {"config", to_json(cfg)},
           {"manifest", detail::manifest_json(cfg, outputs, r.wall_seconds)}};
    if (!r.sandwich.empty()) {
        Json s = Json::array();
        for (const auto& row : r.sandwich)
            s.push_back({{"n", row.n},
                         {"simulated", row.simulated},
                         {"simulated_stderr", row.simulated_stderr},
                         {"worst_case", row.worst_case}});
        j["sandwich"] = s;
    }
    return j;
}

inline Json summary_json(const ExperimentConfig& cfg, const DiagnosticsReport& d, const Json& outputs) {
    Json rows = Json::array();
    for (const auto& row : d.rows)
        rows.push_back({{"n", row.n},
                        {"toeplitz_ratio", row.toeplitz_ratio},
                        {"wlln_tail_probability", row.wlln_tail_probability},
                        {"ui_statistic", row.ui_statistic},
                        {"moment_statistic", row.moment_statistic}});
    Json flags{{"toeplitz_non_vanishing", d.toeplitz_non_vanishing},
               {"moment_growing", d.moment_growing},
               {"moment_infinite", d.moment_infinite},
               {"distortion_non_integrable", d.distortion_non_integrable}};
    Json j{{"experiment", "diagnostics"},
           {"rows", rows},
           {"ui_sup", d.ui_sup},
           {"flags", flags},
           {"config", to_json(cfg)},
           {"manifest", detail::manifest_json(cfg, outputs, d.wall_seconds)}};
    if (d.delta2) {
        flags["delta2_violated"] = d.delta2->violated;
        j["flags"] = flags;
        j["delta2_constant"] = d.delta2->constant;
    }
    return j;
}

struct RunOptions {
    std::filesystem::path config;
    std::filesystem::path out = "out";
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    bool dump_sample = false;
};

// Runs `kind` from the config at opts.config and writes the outputs into
// opts.out. Throws ConfigError / RefusalError.
inline void run_experiment_command(ExperimentKind kind, const RunOptions& opts, std::ostream& log) {
    auto cfg = parse_config(opts.config, kind);
    if (opts.seed) cfg.seed = {*opts.seed};
    std::error_code ec;
    std::filesystem::create_directories(opts.out, ec);
    if (ec) throw ConfigError("cannot create output directory " + opts.out.string() + ": " + ec.message());

    Json outputs;
    Json summary;
    if (kind == ExperimentKind::Diagnostics) {
        const auto report = run_diagnostics(cfg, opts.threads);
        std::ostringstream csv;
        write_diagnostics_csv(csv, report);
        detail::write_file(opts.out / "diagnostics.csv", csv.str());
        outputs["diagnostics"] = (opts.out / "diagnostics.csv").string();
        outputs["summary"] = (opts.out / "summary.json").string();
        summary = summary_json(cfg, report, outputs);
        log << "diagnostics: toeplitz_non_vanishing=" << report.toeplitz_non_vanishing
            << " moment_growing=" << report.moment_growing << " ui_sup=" << format_number(report.ui_sup) << '\n';
    } else {
        const auto result = run_experiment(cfg, opts.threads);
        std::ostringstream results, plot;
        write_results_csv(results, result);
        write_plotdata_csv(plot, result);
        detail::write_file(opts.out / "results.csv", results.str());
        detail::write_file(opts.out / "plotdata.csv", plot.str());
        outputs["results"] = (opts.out / "results.csv").string();
        outputs["plotdata"] = (opts.out / "plotdata.csv").string();
        outputs["summary"] = (opts.out / "summary.json").string();
        summary = summary_json(cfg, result, outputs);
        const auto& last = result.records.back();
        log << to_string(kind) << ": verdict=" << to_string(result.verdict) << " n=" << last.n
            << " estimate=" << format_number(last.estimate) << " target=" << format_number(last.target) << '\n';
    }
    if (opts.dump_sample) {
        const auto table = cfg.weights.table(cfg.n_grid.back());
        const auto sim = simulate_aggregate(cfg.marginal, table, cfg.n_grid.back(), CouplingKind::IID,
                                            cfg.replications, cfg.seed.derive(detail::kStreamPooled), opts.threads);
        std::ostringstream csv;
        sim.aggregate.write_csv(csv);
        detail::write_file(opts.out / "sample.csv", csv.str());
        outputs["sample"] = (opts.out / "sample.csv").string();
        summary["manifest"]["outputs"] = outputs;
    }
    detail::write_file(opts.out / "summary.json", summary.dump(2) + "\n");
}

inline int run_selftest_command(std::size_t budget, std::ostream& log, std::ostream& err) {
    const auto report = run_selftest(budget);
    for (const auto& [name, count] : report.properties.checks) log << "  " << name << ": " << count << '\n';
    log << "selftest: " << report.total_checks() - report.properties.failures.size() << "/" << report.total_checks()
        << " checks passed\n";
    if (report.passed()) return kExitOk;
    for (const auto& f : report.properties.failures)
        err << "FAILED " << f.property << " [" << f.measure << "] parameter=" << format_number(f.parameter)
            << " lhs=" << format_number(f.lhs) << " rhs=" << format_number(f.rhs)
            << " residual=" << format_number(f.residual) << '\n';
    return kExitInvariant;
}

// Entry point shared by the executable and the tests.
inline int run_command(int argc, const char* const* argv, std::ostream& log = std::cout,
                       std::ostream& err = std::cerr) {
    CLI::App app{"Large-portfolio risk experiments", "poolrisk"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    RunOptions opts;
    std::uint64_t seed = 0;
    std::size_t budget = 1000;
    struct Entry {
        ExperimentKind kind;
        CLI::App* sub;
        CLI::Option* seed_opt;
    };
    std::vector<Entry> entries;
    for (auto [kind, help] : {std::pair{ExperimentKind::UelDecay, "unexpected-loss decay"},
                              std::pair{ExperimentKind::PremiumConvergence, "distortion premium convergence"},
                              std::pair{ExperimentKind::RiskRatio, "comonotonic vs pooled risk ratio"},
                              std::pair{ExperimentKind::WorstCaseRatio, "worst-case aggregate risk ratio"},
                              std::pair{ExperimentKind::Diagnostics, "Toeplitz / WLLN / UI diagnostics"}}) {
        auto* sub = app.add_subcommand(std::string(to_string(kind)), help);
        sub->add_option("--config,-c", opts.config, "JSON config file")->required();
        sub->add_option("--out,-o", opts.out, "output directory");
        auto* seed_opt = sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--threads,-j", opts.threads, "worker threads (does not change outputs)")
            ->check(CLI::Range(1u, 1024u));
        sub->add_flag("--dump-sample", opts.dump_sample, "write the final-n aggregate sample to sample.csv");
        entries.push_back({kind, sub, seed_opt});
    }
    auto* selftest = app.add_subcommand("selftest", "run the invariant suite");
    selftest->add_option("--budget", budget, "fuzzed samples per property")->check(CLI::Range(1ul, 1000000ul));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, log, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (selftest->parsed()) return run_selftest_command(budget, log, err);
        for (const auto& e : entries) {
            if (!e.sub->parsed()) continue;
            if (e.seed_opt->count() > 0) opts.seed = seed;
            run_experiment_command(e.kind, opts, log);
            return kExitOk;
        }
    } catch (const RefusalError& e) {
        err << "refused: " << e.what() << '\n';
        return kExitRefusal;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}

} // namespace poolrisk
