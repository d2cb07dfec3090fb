#pragma once

// Monte Carlo experiments for the large-portfolio limits: unexpected-loss
// decay, premium convergence, comonotonic risk ratios, worst-case ratios, and
// the weak-law / uniform-integrability diagnostics.

#include "poolrisk/distortion.hpp"
#include "poolrisk/distributions.hpp"
#include "poolrisk/empirical.hpp"
#include "poolrisk/errors.hpp"
#include "poolrisk/orlicz.hpp"
#include "poolrisk/portfolio.hpp"
#include "poolrisk/random.hpp"
#include "poolrisk/risk.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace poolrisk {

enum class ExperimentKind { UelDecay, PremiumConvergence, RiskRatio, WorstCaseRatio, Diagnostics };

inline std::string_view to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::UelDecay: return "uel";
    case ExperimentKind::PremiumConvergence: return "premium";
    case ExperimentKind::RiskRatio: return "ratio";
    case ExperimentKind::WorstCaseRatio: return "worst-case";
    case ExperimentKind::Diagnostics: return "diagnostics";
    }
    return "unknown";
}

enum class Verdict { Converging, Inconclusive, Diverging };

inline std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::Converging: return "converging";
    case Verdict::Inconclusive: return "inconclusive";
    case Verdict::Diverging: return "diverging";
    }
    return "unknown";
}

inline constexpr std::size_t kDefaultReplications = 2000;
inline constexpr std::size_t kDefaultUelReplications = 4000;
inline constexpr std::size_t kStandardErrorBatches = kStratificationBlocks;

struct ExperimentConfig {
    ExperimentKind kind;
    MarginalDistribution marginal;                   // X, the pooled portfolio
    std::optional<MarginalDistribution> alternative; // Z, the comonotonic alternative (defaults to X)
    WeightScheme weights;
    RiskMeasureSpec measure;
    std::vector<std::size_t> n_grid{100, 1000, 10000};
    std::size_t replications = kDefaultReplications;
    SeedSpec seed{};
    double epsilon = 0.1;      // WLLN tail threshold
    double moment_p = 1.0;     // moment order of the premium integrability condition
    double ui_exponent = 2.0;  // q in phi(t) = t^q
    std::optional<YoungFunction> young; // diagnostics only
    double tolerance = 0.1;

    const MarginalDistribution& z_marginal() const { return alternative ? *alternative : marginal; }
};

// Whether the convergence tolerance is relative to |target| (otherwise absolute).
inline bool tolerance_is_relative(ExperimentKind k) { return k != ExperimentKind::UelDecay; }

inline double default_tolerance(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::UelDecay: return 0.01;
    case ExperimentKind::PremiumConvergence: return 0.02;
    default: return 0.10;
    }
}

inline std::size_t default_replications(ExperimentKind k) {
    return k == ExperimentKind::UelDecay ? kDefaultUelReplications : kDefaultReplications;
}

struct ExperimentRecord {
    std::size_t n;
    double total_weight;
    double estimate;
    double mc_stderr;
    double target;
    double abs_error;
};

// Simulated comonotonic copies versus the closed-form worst case, per n.
struct SandwichRecord {
    std::size_t n;
    double simulated;
    double simulated_stderr;
    double worst_case;
};

struct ExperimentResult {
    ExperimentKind kind;
    std::vector<ExperimentRecord> records;
    Verdict verdict = Verdict::Inconclusive;
    std::vector<SandwichRecord> sandwich;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
};

struct DiagnosticsRow {
    std::size_t n;
    double total_weight;
    double toeplitz_ratio;
    double wlln_tail_probability;
    double ui_statistic;     // mean |A_n - m|^q over replications
    double moment_statistic; // median over replications of (1/n) sum_i |X_i - m|^q
};

struct DiagnosticsReport {
    std::vector<DiagnosticsRow> rows;
    double ui_sup = 0.0;
    bool toeplitz_non_vanishing = false;
    bool moment_growing = false;
    bool moment_infinite = false;
    bool distortion_non_integrable = false;
    std::optional<Delta2Estimate> delta2;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
};

// ---------------------------------------------------------------------------

// Checks the module-level preconditions of `cfg`. Divergence conditions raise
// RefusalError, everything else ConfigError.
inline void validate(const ExperimentConfig& cfg) {
    if (cfg.n_grid.empty()) throw ConfigError("n_grid must be nonempty");
    for (std::size_t k = 0; k < cfg.n_grid.size(); ++k) {
        if (cfg.n_grid[k] == 0) throw ConfigError("n_grid entries must be positive");
        if (k > 0 && cfg.n_grid[k] <= cfg.n_grid[k - 1]) throw ConfigError("n_grid must be strictly increasing");
    }
    if (cfg.n_grid.back() > cfg.weights.max_size())
        throw ConfigError(cfg.weights.describe() + " weights cannot be materialized up to n = " +
                          std::to_string(cfg.n_grid.back()) + " (limit " + std::to_string(cfg.weights.max_size()) + ")");
    const bool needs_many = cfg.kind == ExperimentKind::UelDecay || cfg.kind == ExperimentKind::RiskRatio ||
                            cfg.kind == ExperimentKind::WorstCaseRatio || cfg.kind == ExperimentKind::PremiumConvergence;
    if (needs_many && cfg.replications < 100) throw ConfigError("replications must be >= 100 for this experiment");
    if (cfg.replications < 2 * kStandardErrorBatches)
        throw ConfigError("replications must be >= " + std::to_string(2 * kStandardErrorBatches));
    if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (!(cfg.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (!(cfg.ui_exponent > 1.0)) throw ConfigError("q must exceed 1");
    if (!(cfg.moment_p >= 1.0)) throw ConfigError("p must be >= 1");

    const auto& X = cfg.marginal;
    const auto& Z = cfg.z_marginal();
    const auto& R = cfg.measure;
    switch (cfg.kind) {
    case ExperimentKind::UelDecay:
        if (!std::isfinite(X.mean())) throw RefusalError("marginal has a divergent first moment; unexpected losses are undefined");
        break;
    case ExperimentKind::PremiumConvergence: {
        if (R.kind() != MeasureKind::Distortion) throw ConfigError("premium experiments need a distortion measure");
        if (!X.is_nonnegative()) throw ConfigError("premium experiments need a nonnegative marginal");
        const double constant = integrability_constant(R.distortion_function(), cfg.moment_p);
        if (!std::isfinite(constant))
            throw RefusalError("integrability condition violated: integral_1^inf h(x^-p) dx diverges for h = " +
                               R.distortion_function().describe() + ", p = " + std::to_string(cfg.moment_p));
        if (!std::isfinite(X.raw_moment(cfg.moment_p)))
            throw RefusalError("moment bound violated: E[X^p] is infinite for " + X.describe() +
                               ", p = " + std::to_string(cfg.moment_p));
        break;
    }
    case ExperimentKind::RiskRatio:
    case ExperimentKind::WorstCaseRatio:
        if (!(X.mean() > 0.0) || !std::isfinite(X.mean()))
            throw ConfigError("ratio experiments need a finite positive mean E[X_1]");
        if (cfg.kind == ExperimentKind::WorstCaseRatio && R.kind() == MeasureKind::VaR)
            throw ConfigError("worst-case ratio is unsupported for VaR (not coherent)");
        if (R.kind() == MeasureKind::Distortion && (!X.is_nonnegative() || !Z.is_nonnegative()))
            throw ConfigError("distortion ratios need nonnegative marginals");
        if (R.kind() == MeasureKind::VaR && Z.family() == Family::Bernoulli && !(R.alpha() > 1.0 - Z.param1()))
            throw ConfigError("VaR ratio on Bernoulli(p) needs alpha in (1-p, 1)");
        if (R.kind() == MeasureKind::ES && Z.family() == Family::Pareto && !(Z.param1() > 1.0))
            throw RefusalError("ES of a Pareto marginal with tail index <= 1 diverges");
        if (R.kind() == MeasureKind::Distortion && !std::isfinite(closed_form_risk(R, Z)))
            throw RefusalError("distorted premium of the alternative marginal diverges");
        break;
    case ExperimentKind::Diagnostics: break;
    }
}

// ---------------------------------------------------------------------------

// Sample standard deviation of per-batch estimates divided by sqrt(batches).
// Batches are contiguous blocks of replication indices, the same blocks the
// comonotonic sampler stratifies over.
template <class Estimator>
double batch_means_stderr(std::span<const double> by_replication, Estimator estimator,
                          std::size_t batches = kStandardErrorBatches) {
    const std::size_t M = by_replication.size();
    if (batches < 2 || M < 2 * batches) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> estimates;
    estimates.reserve(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t begin = b * M / batches;
        const std::size_t end = (b + 1) * M / batches;
        estimates.push_back(estimator(b, EmpiricalSample::from_raw(by_replication.subspan(begin, end - begin))));
    }
    double mean = 0.0;
    for (double e : estimates) mean += e;
    mean /= static_cast<double>(batches);
    double ss = 0.0;
    for (double e : estimates) ss += (e - mean) * (e - mean);
    return std::sqrt(ss / static_cast<double>(batches - 1)) / std::sqrt(static_cast<double>(batches));
}

// Converging: |error| nonincreasing over the last three grid points and the
// final |error| within tolerance. Diverging: |error| strictly increasing over
// the last three points and the final one outside tolerance.
inline Verdict classify(std::span<const ExperimentRecord> records, double tolerance, bool relative) {
    if (records.empty()) return Verdict::Inconclusive;
    for (const auto& r : records)
        if (!std::isfinite(r.abs_error)) return Verdict::Inconclusive;
    const std::size_t k0 = records.size() >= 3 ? records.size() - 3 : 0;
    bool nonincreasing = true;
    bool increasing = records.size() - k0 >= 2;
    for (std::size_t k = k0 + 1; k < records.size(); ++k) {
        if (records[k].abs_error > records[k - 1].abs_error) nonincreasing = false;
        if (!(records[k].abs_error > records[k - 1].abs_error)) increasing = false;
    }
    const auto& last = records.back();
    const double bound = relative ? tolerance * std::abs(last.target) : tolerance;
    const bool within = last.abs_error <= bound;
    if (nonincreasing && within) return Verdict::Converging;
    if (increasing && !within) return Verdict::Diverging;
    return Verdict::Inconclusive;
}

// R(Z) / E[X]: the limit of the comonotonic-versus-pooled risk ratio.
inline double closed_form_ratio(const RiskMeasureSpec& spec, const MarginalDistribution& z,
                                const MarginalDistribution& x) {
    if (!(x.mean() > 0.0) || !std::isfinite(x.mean()))
        throw std::domain_error("closed_form_ratio: E[X] must be finite and positive");
    if (spec.kind() == MeasureKind::VaR && z.family() == Family::Bernoulli && !(spec.alpha() > 1.0 - z.param1()))
        throw std::domain_error("closed_form_ratio: VaR on Bernoulli(p) needs alpha in (1-p, 1)");
    return closed_form_risk(spec, z) / x.mean();
}

inline double closed_form_ratio(const RiskMeasureSpec& spec, const MarginalDistribution& dist) {
    return closed_form_ratio(spec, dist, dist);
}

namespace detail {

inline constexpr std::uint64_t kStreamPooled = 1;
inline constexpr std::uint64_t kStreamComonotonic = 2;

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

inline ExperimentRecord make_record(std::size_t n, double total, double estimate, double se, double target) {
    return {n, total, estimate, se, target, std::isfinite(estimate) ? std::abs(estimate - target) : nan()};
}

inline void finish(ExperimentResult& result, const ExperimentConfig& cfg, const Stopwatch& clock) {
    result.verdict = classify(result.records, cfg.tolerance, tolerance_is_relative(cfg.kind));
    result.seed = cfg.seed.master_seed;
    result.wall_seconds = clock.seconds();
}

} // namespace detail

// Normalized unexpected loss (R(S_n) - sum lambda_i m) / (n * mean weight) of
// the pooled portfolio; target (C - 1) m, i.e. 0 for every cash-additive measure.
inline ExperimentResult run_uel_decay(const ExperimentConfig& cfg, unsigned threads = 1) {
    validate(cfg);
    const detail::Stopwatch clock;
    const auto table = cfg.weights.table(cfg.n_grid.back());
    const auto seed = cfg.seed.derive(detail::kStreamPooled);
    ExperimentResult result{cfg.kind, {}, Verdict::Inconclusive, {}, 0, 0.0};
    for (std::size_t n : cfg.n_grid) {
        const auto sim = simulate_aggregate(cfg.marginal, table, n, CouplingKind::IID, cfg.replications, seed, threads);
        const auto uel = unexpected_loss(cfg.measure, sim.aggregate, sim.weighted_mean_sum, n, sim.total_weight);
        const double se = batch_means_stderr(sim.by_replication, [&](std::size_t, const EmpiricalSample& b) {
            return (evaluate_signed(cfg.measure, b) - sim.weighted_mean_sum) / sim.total_weight;
        });
        const double target = (cfg.measure.translation_factor() - 1.0) * sim.weighted_mean_sum / sim.total_weight;
        result.records.push_back(detail::make_record(n, sim.total_weight, uel.normalized, se, target));
    }
    detail::finish(result, cfg, clock);
    return result;
}

// H(S_n) / (n * mean weight) for the pooled portfolio; target C m.
inline ExperimentResult run_premium_convergence(const ExperimentConfig& cfg, unsigned threads = 1) {
    validate(cfg);
    const detail::Stopwatch clock;
    const auto table = cfg.weights.table(cfg.n_grid.back());
    const auto seed = cfg.seed.derive(detail::kStreamPooled);
    const double target = cfg.measure.loading() * cfg.marginal.mean();
    ExperimentResult result{cfg.kind, {}, Verdict::Inconclusive, {}, 0, 0.0};
    for (std::size_t n : cfg.n_grid) {
        const auto sim = simulate_aggregate(cfg.marginal, table, n, CouplingKind::IID, cfg.replications, seed, threads);
        const double estimate = evaluate(cfg.measure, sim.aggregate) / sim.total_weight;
        const double se = batch_means_stderr(sim.by_replication, [&](std::size_t, const EmpiricalSample& b) {
            return evaluate(cfg.measure, b) / sim.total_weight;
        });
        result.records.push_back(detail::make_record(n, sim.total_weight, estimate, se, target));
    }
    detail::finish(result, cfg, clock);
    return result;
}

// R(sum lambda_i Z_i) / R(sum lambda_i X_i) with comonotonic Z and pooled X;
// target R(Z) / E[X].
inline ExperimentResult run_risk_ratio(const ExperimentConfig& cfg, unsigned threads = 1) {
    validate(cfg);
    const detail::Stopwatch clock;
    const auto table = cfg.weights.table(cfg.n_grid.back());
    const auto pooled_seed = cfg.seed.derive(detail::kStreamPooled);
    const auto comonotonic_seed = cfg.seed.derive(detail::kStreamComonotonic);
    const double target = closed_form_ratio(cfg.measure, cfg.z_marginal(), cfg.marginal);
    ExperimentResult result{cfg.kind, {}, Verdict::Inconclusive, {}, 0, 0.0};
    bool guarded = false;
    for (std::size_t n : cfg.n_grid) {
        const auto num = simulate_aggregate(cfg.z_marginal(), table, n, CouplingKind::Comonotonic, cfg.replications,
                                            comonotonic_seed, threads);
        const auto den = simulate_aggregate(cfg.marginal, table, n, CouplingKind::IID, cfg.replications, pooled_seed,
                                            threads);
        const double r_num = evaluate_signed(cfg.measure, num.aggregate);
        const double r_den = evaluate_signed(cfg.measure, den.aggregate);

        std::vector<double> den_batches;
        const double den_se = batch_means_stderr(den.by_replication, [&](std::size_t, const EmpiricalSample& b) {
            const double v = evaluate_signed(cfg.measure, b);
            den_batches.push_back(v);
            return v;
        });
        const double ratio_se = batch_means_stderr(num.by_replication, [&](std::size_t b, const EmpiricalSample& s) {
            return evaluate_signed(cfg.measure, s) / den_batches[b];
        });

        if (std::abs(r_den) <= 3.0 * den_se) {
            guarded = true;
            result.records.push_back(detail::make_record(n, num.total_weight, detail::nan(), ratio_se, target));
            continue;
        }
        result.records.push_back(detail::make_record(n, num.total_weight, r_num / r_den, ratio_se, target));
    }
    detail::finish(result, cfg, clock);
    if (guarded) result.verdict = Verdict::Inconclusive;
    return result;
}

// R_n^WC(Z) / R(sum lambda_i X_i) with the worst case in closed form; also
// records simulated comonotonic copies of Z against the worst-case value.
inline ExperimentResult run_worst_case_ratio(const ExperimentConfig& cfg, unsigned threads = 1) {
    validate(cfg);
    const detail::Stopwatch clock;
    const auto table = cfg.weights.table(cfg.n_grid.back());
    const auto pooled_seed = cfg.seed.derive(detail::kStreamPooled);
    const auto comonotonic_seed = cfg.seed.derive(detail::kStreamComonotonic);
    const double target = closed_form_ratio(cfg.measure, cfg.z_marginal(), cfg.marginal);
    ExperimentResult result{cfg.kind, {}, Verdict::Inconclusive, {}, 0, 0.0};
    bool guarded = false;
    for (std::size_t n : cfg.n_grid) {
        const double worst = worst_case_aggregate_risk(cfg.measure, cfg.z_marginal(), table, n);
        const auto den = simulate_aggregate(cfg.marginal, table, n, CouplingKind::IID, cfg.replications, pooled_seed,
                                            threads);
        const double r_den = evaluate_signed(cfg.measure, den.aggregate);
        const double den_se = batch_means_stderr(den.by_replication, [&](std::size_t, const EmpiricalSample& b) {
            return evaluate_signed(cfg.measure, b);
        });
        const double ratio_se = batch_means_stderr(den.by_replication, [&](std::size_t, const EmpiricalSample& b) {
            return worst / evaluate_signed(cfg.measure, b);
        });

        const auto copies = simulate_aggregate(cfg.z_marginal(), table, n, CouplingKind::Comonotonic,
                                               cfg.replications, comonotonic_seed, threads);
        const double simulated = evaluate_signed(cfg.measure, copies.aggregate);
        const double simulated_se = batch_means_stderr(copies.by_replication, [&](std::size_t, const EmpiricalSample& b) {
            return evaluate_signed(cfg.measure, b);
        });
        result.sandwich.push_back({n, simulated, simulated_se, worst});

        if (std::abs(r_den) <= 3.0 * den_se) {
            guarded = true;
            result.records.push_back(detail::make_record(n, den.total_weight, detail::nan(), ratio_se, target));
            continue;
        }
        result.records.push_back(detail::make_record(n, den.total_weight, worst / r_den, ratio_se, target));
    }
    detail::finish(result, cfg, clock);
    if (guarded) result.verdict = Verdict::Inconclusive;
    return result;
}

inline constexpr double kMomentGrowthFactor = 1.5;
inline constexpr double kToeplitzPersistence = 0.5;

// Toeplitz ratios, WLLN tail frequencies, de la Vallee-Poussin statistics and
// a per-component moment statistic over the n grid, with negative-control flags.
inline DiagnosticsReport run_diagnostics(const ExperimentConfig& cfg, unsigned threads = 1) {
    validate(cfg);
    const detail::Stopwatch clock;
    const auto table = cfg.weights.table(cfg.n_grid.back());
    const auto seed = cfg.seed.derive(detail::kStreamPooled);
    const auto& X = cfg.marginal;
    const double m = X.mean();
    const double q = cfg.ui_exponent;

    DiagnosticsReport report;
    std::vector<EmpiricalSample> centered;
    std::vector<double> zeros;
    for (std::size_t n : cfg.n_grid) {
        const auto sim = simulate_aggregate(X, table, n, CouplingKind::IID, cfg.replications, seed, threads);
        const double centre = sim.weighted_mean_sum / sim.total_weight;
        std::vector<double> c(sim.normalized.values().begin(), sim.normalized.values().end());
        for (double& v : c) v -= centre;
        centered.emplace_back(std::move(c));
        zeros.push_back(0.0);

        // Per replication: (1/n) sum_{i<n} |X_ji - m|^q over the same uniforms
        // as the aggregate above; the median is robust to the heavy tail.
        std::vector<double> per_rep(cfg.replications);
        for (std::size_t j = 0; j < cfg.replications; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += std::pow(std::abs(X.quantile(seed.uniform(j, i)) - m), q);
            per_rep[j] = acc / static_cast<double>(n);
        }
        const EmpiricalSample moments(std::move(per_rep));

        report.rows.push_back({n, sim.total_weight, table.toeplitz_ratio(n), 0.0, 0.0, moments.sample_quantile(0.5)});
    }
    const auto wlln = wlln_diagnostic(centered, zeros, cfg.epsilon);
    const auto ui = ui_statistics(centered, q);
    for (std::size_t k = 0; k < report.rows.size(); ++k) {
        report.rows[k].wlln_tail_probability = wlln[k];
        report.rows[k].ui_statistic = ui[k];
    }
    report.ui_sup = ui_diagnostic(centered, q);

    const auto& first = report.rows.front();
    const auto& last = report.rows.back();
    report.toeplitz_non_vanishing =
        report.rows.size() >= 2 && last.toeplitz_ratio >= kToeplitzPersistence * first.toeplitz_ratio;
    report.moment_growing = report.rows.size() >= 2 && last.moment_statistic > kMomentGrowthFactor * first.moment_statistic;
    report.moment_infinite = !std::isfinite(X.absolute_moment(q));
    if (cfg.measure.kind() == MeasureKind::Distortion)
        report.distortion_non_integrable =
            !std::isfinite(integrability_constant(cfg.measure.distortion_function(), cfg.moment_p));
    if (cfg.young) report.delta2 = delta2_estimate(*cfg.young, log_spaced_grid(1e-3, 100.0, 51));
    report.seed = cfg.seed.master_seed;
    report.wall_seconds = clock.seconds();
    return report;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads = 1) {
    switch (cfg.kind) {
    case ExperimentKind::UelDecay: return run_uel_decay(cfg, threads);
    case ExperimentKind::PremiumConvergence: return run_premium_convergence(cfg, threads);
    case ExperimentKind::RiskRatio: return run_risk_ratio(cfg, threads);
    case ExperimentKind::WorstCaseRatio: return run_worst_case_ratio(cfg, threads);
    case ExperimentKind::Diagnostics: break;
    }
    throw std::invalid_argument("run_experiment: diagnostics produce a DiagnosticsReport; use run_diagnostics");
}

} // namespace poolrisk
