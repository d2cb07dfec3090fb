#pragma once

// Law-invariant risk functionals on empirical samples and the property
// checkers used by the selftest and the acceptance suite.
//
// Losses are scalar. All functionals act on the sorted sample x_(1) <= ... <= x_(M):
//
//   Mean          (1/M) sum x_(k)
//   VaR(a)        x_(k*),  k* = ceil(a M)
//   ES(a)         [(k* - a M) x_(k*) + sum_{k > k*} x_(k)] / (M (1 - a))
//   Distortion    C sum_k h((M-k+1)/M) (x_(k) - x_(k-1)),  x_(0) = 0

#include "poolrisk/distortion.hpp"
#include "poolrisk/distributions.hpp"
#include "poolrisk/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace poolrisk {

enum class MeasureKind { Mean, VaR, ES, Distortion };

inline std::string_view to_string(MeasureKind k) {
    switch (k) {
    case MeasureKind::Mean: return "mean";
    case MeasureKind::VaR: return "var";
    case MeasureKind::ES: return "es";
    case MeasureKind::Distortion: return "distortion";
    }
    return "unknown";
}

class RiskMeasureSpec {
public:
    static RiskMeasureSpec mean() { return RiskMeasureSpec(MeasureKind::Mean, 0.0, std::nullopt, 1.0); }
    static RiskMeasureSpec var(double alpha) {
        return RiskMeasureSpec(MeasureKind::VaR, check_alpha(alpha), std::nullopt, 1.0);
    }
    static RiskMeasureSpec es(double alpha) {
        return RiskMeasureSpec(MeasureKind::ES, check_alpha(alpha), std::nullopt, 1.0);
    }
    static RiskMeasureSpec distortion(DistortionFunction h, double C = 1.0) {
        if (!(C > 0.0) || !std::isfinite(C)) throw std::domain_error("premium loading C must be positive");
        return RiskMeasureSpec(MeasureKind::Distortion, 0.0, h, C);
    }

    MeasureKind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    double loading() const { return loading_; }
    const DistortionFunction& distortion_function() const {
        if (!h_) throw std::logic_error("risk measure has no distortion function");
        return *h_;
    }

    // R(X + m) = R(X) + translation_factor() * m.
    double translation_factor() const { return kind_ == MeasureKind::Distortion ? loading_ : 1.0; }

    bool is_coherent() const { return kind_ != MeasureKind::VaR; }

    std::string describe() const {
        switch (kind_) {
        case MeasureKind::Mean: return "mean";
        case MeasureKind::VaR: return "VaR(" + std::to_string(alpha_) + ")";
        case MeasureKind::ES: return "ES(" + std::to_string(alpha_) + ")";
        case MeasureKind::Distortion: return "distortion(" + h_->describe() + ", C=" + std::to_string(loading_) + ")";
        }
        return "unknown";
    }

    friend bool operator==(const RiskMeasureSpec&, const RiskMeasureSpec&) = default;

private:
    RiskMeasureSpec(MeasureKind k, double alpha, std::optional<DistortionFunction> h, double C)
        : kind_(k), alpha_(alpha), h_(h), loading_(C) {}

    static double check_alpha(double alpha) {
        if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("confidence level must lie in (0,1)");
        return alpha;
    }

    MeasureKind kind_;
    double alpha_;
    std::optional<DistortionFunction> h_;
    double loading_;
};

inline double expected_shortfall(const EmpiricalSample& s, double alpha) {
    if (s.is_constant()) return s.min();
    const auto values = s.values();
    const double M = static_cast<double>(s.size());
    const std::size_t k_star = s.quantile_index(alpha);
    const double boundary_weight = std::max(0.0, static_cast<double>(k_star) - alpha * M);
    double acc = boundary_weight * values[k_star - 1];
    for (std::size_t k = k_star; k < values.size(); ++k) acc += values[k];
    return acc / (M * (1.0 - alpha));
}

// Nonnegative samples only; signed samples go through choquet_integral.
inline double distortion_premium(const EmpiricalSample& s, const DistortionFunction& h, double C) {
    if (s.min() < 0.0)
        throw std::domain_error("distortion premium needs a nonnegative sample; use choquet_integral for signed losses");
    const auto values = s.values();
    const double M = static_cast<double>(s.size());
    double acc = 0.0;
    double previous = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double level = (M - static_cast<double>(k)) / M;
        acc += h.evaluate(level) * (values[k] - previous);
        previous = values[k];
    }
    return C * acc;
}

// C * [ integral_{-inf}^0 (h(P(X>x)) - 1) dx + integral_0^inf h(P(X>x)) dx ],
// evaluated exactly over the step survival function of the sample.
inline double choquet_integral(const DistortionFunction& h, double C, const EmpiricalSample& s) {
    if (!(C > 0.0)) throw std::domain_error("premium loading C must be positive");
    const auto values = s.values();
    const double M = static_cast<double>(s.size());
    double acc = values[0];
    for (std::size_t k = 1; k < values.size(); ++k) {
        const double level = (M - static_cast<double>(k)) / M;
        acc += h.evaluate(level) * (values[k] - values[k - 1]);
    }
    return C * acc;
}

inline double evaluate(const RiskMeasureSpec& spec, const EmpiricalSample& s) {
    switch (spec.kind()) {
    case MeasureKind::Mean: return s.sample_mean();
    case MeasureKind::VaR: return s.sample_quantile(spec.alpha());
    case MeasureKind::ES: return expected_shortfall(s, spec.alpha());
    case MeasureKind::Distortion: return distortion_premium(s, spec.distortion_function(), spec.loading());
    }
    return 0.0;
}

// Signed-sample evaluation: distortion kinds go through the two-sided Choquet integral.
inline double evaluate_signed(const RiskMeasureSpec& spec, const EmpiricalSample& s) {
    if (spec.kind() == MeasureKind::Distortion)
        return choquet_integral(spec.distortion_function(), spec.loading(), s);
    return evaluate(spec, s);
}

// R(X) for a parametric marginal, from closed forms.
inline double closed_form_risk(const RiskMeasureSpec& spec, const MarginalDistribution& dist) {
    switch (spec.kind()) {
    case MeasureKind::Mean: return dist.mean();
    case MeasureKind::VaR: return dist.closed_form_var(spec.alpha());
    case MeasureKind::ES: return dist.closed_form_es(spec.alpha());
    case MeasureKind::Distortion: return closed_form_premium(spec.distortion_function(), spec.loading(), dist);
    }
    return 0.0;
}

struct UnexpectedLoss {
    double raw;          // R(aggregate) - sum lambda_i m_i
    double normalized;   // raw / total_weight
    std::size_t n;
    double total_weight; // n * mean weight
};

inline UnexpectedLoss unexpected_loss(const RiskMeasureSpec& spec, const EmpiricalSample& aggregate,
                                      double weighted_mean_sum, std::size_t n, double total_weight) {
    if (!(total_weight > 0.0)) throw std::domain_error("unexpected_loss: total weight must be positive");
    const double raw = evaluate_signed(spec, aggregate) - weighted_mean_sum;
    return {raw, raw / total_weight, n, total_weight};
}

// ---------------------------------------------------------------------------
// Property checkers

struct PropertyFailure {
    std::string property;
    std::string measure;
    std::vector<double> sample;
    double parameter = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
};

struct PropertyReport {
    std::map<std::string, std::size_t> checks;
    std::vector<PropertyFailure> failures;

    std::size_t total_checks() const {
        std::size_t n = 0;
        for (const auto& [_, c] : checks) n += c;
        return n;
    }
    bool passed() const { return failures.empty(); }

    void merge(const PropertyReport& other) {
        for (const auto& [k, c] : other.checks) checks[k] += c;
        failures.insert(failures.end(), other.failures.begin(), other.failures.end());
    }
};

inline constexpr double kAxiomTolerance = 1e-10;

namespace detail {

// Random sample of size 1..max_size mixing continuous draws, heavy ties and
// widely varying scales.
inline std::vector<double> fuzz_values(std::mt19937_64& rng, bool nonnegative, std::size_t max_size = 48) {
    std::uniform_int_distribution<std::size_t> size_dist(1, max_size);
    std::uniform_int_distribution<int> shape_dist(0, 3);
    std::uniform_int_distribution<int> scale_dist(-3, 3);
    const std::size_t n = size_dist(rng);
    const int shape = shape_dist(rng);
    const double scale = std::pow(10.0, scale_dist(rng));
    std::vector<double> out(n);
    std::uniform_real_distribution<double> unif(nonnegative ? 0.0 : -1.0, 1.0);
    std::exponential_distribution<double> expo(1.0);
    std::uniform_int_distribution<int> ticks(nonnegative ? 0 : -2, 3);
    for (auto& v : out) {
        switch (shape) {
        case 0: v = unif(rng); break;
        case 1: v = nonnegative ? expo(rng) : expo(rng) - 1.0; break;
        case 2: v = static_cast<double>(ticks(rng)); break;
        default: v = std::pow(unif(rng) * 0.5 + (nonnegative ? 0.5 : 0.0), 3.0) * 10.0; break;
        }
        v *= scale;
    }
    return out;
}

inline double max_abs(std::span<const double> xs) {
    double m = 0.0;
    for (double x : xs) m = std::max(m, std::abs(x));
    return m;
}

inline bool within(double lhs, double rhs, double magnitude, double tol) {
    const double scale = std::max({std::abs(lhs), std::abs(rhs), magnitude});
    return std::abs(lhs - rhs) <= tol * scale;
}

inline MarginalDistribution random_marginal(std::mt19937_64& rng, bool nonnegative) {
    std::uniform_int_distribution<int> fam(0, 4);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    switch (fam(rng)) {
    case 0: return MarginalDistribution::bernoulli(u(rng));
    case 1: return MarginalDistribution::exponential(0.2 + 4.0 * u(rng));
    case 2: return MarginalDistribution::pareto(1.2 + 3.0 * u(rng), 0.5 + u(rng));
    case 3: {
        const double lo = nonnegative ? u(rng) : -2.0 * u(rng);
        return MarginalDistribution::uniform(lo, lo + 0.1 + 3.0 * u(rng));
    }
    default: return MarginalDistribution::point_mass(nonnegative ? 2.0 * u(rng) : 4.0 * u(rng) - 2.0);
    }
}

} // namespace detail

// Fuzzes cash additivity, monotonicity on pointwise-dominated pairs, positive
// homogeneity and (ES / distortion only) comonotonic additivity. Each property
// is checked on `fuzz_budget` random samples at relative tolerance 1e-10.
inline PropertyReport check_axioms(const RiskMeasureSpec& spec, std::size_t fuzz_budget, std::uint64_t seed = 1) {
    PropertyReport report;
    std::mt19937_64 rng(seed);
    const bool distortion = spec.kind() == MeasureKind::Distortion;
    const std::string name = spec.describe();

    auto record = [&](std::string_view property, const std::vector<double>& sample, double parameter, double lhs,
                      double rhs, double magnitude) {
        ++report.checks[std::string(property)];
        if (!detail::within(lhs, rhs, magnitude, kAxiomTolerance))
            report.failures.push_back({std::string(property), name, sample, parameter, lhs, rhs, std::abs(lhs - rhs)});
    };

    std::uniform_real_distribution<double> shift_dist(-5.0, 5.0);
    std::uniform_real_distribution<double> log_scale(-3.0, 3.0);
    std::exponential_distribution<double> bump(1.0);
    std::bernoulli_distribution keep(0.5);

    for (std::size_t trial = 0; trial < fuzz_budget; ++trial) {
        // Distortion kinds alternate between the one-sided premium on
        // nonnegative samples and the two-sided Choquet integral.
        const bool signed_sample = !distortion || trial % 2 == 1;
        auto eval = [&](const EmpiricalSample& s) { return signed_sample ? evaluate_signed(spec, s) : evaluate(spec, s); };

        const auto raw = detail::fuzz_values(rng, !signed_sample);
        const EmpiricalSample x(raw);
        const double rx = eval(x);
        const double mag = detail::max_abs(raw) * spec.translation_factor();

        // (R2) cash additivity
        double m = shift_dist(rng) * std::max(1e-3, detail::max_abs(raw));
        if (!signed_sample) m = std::abs(m);
        const double lhs_cash = eval(x.shifted(m));
        record("cash_additivity", raw, m, lhs_cash, rx + spec.translation_factor() * m,
               mag + std::abs(m) * spec.translation_factor());

        // (R1) monotonicity: y >= x pointwise, so the sorted samples are ordered too.
        std::vector<double> dominating(raw);
        const double bump_scale = detail::max_abs(raw) + 1e-3;
        for (double& v : dominating)
            if (keep(rng)) v += bump(rng) * bump_scale;
        const double ry = eval(EmpiricalSample(dominating));
        ++report.checks["monotonicity"];
        if (rx > ry + kAxiomTolerance * std::max({std::abs(rx), std::abs(ry), mag}))
            report.failures.push_back({"monotonicity", name, raw, 0.0, rx, ry, rx - ry});

        // positive homogeneity
        const double c = std::pow(10.0, log_scale(rng));
        record("positive_homogeneity", raw, c, eval(x.scaled(c)), c * rx, c * mag);

        // comonotonic additivity via a shared uniform sample
        if (spec.kind() == MeasureKind::ES || distortion) {
            std::uniform_int_distribution<std::size_t> size_dist(1, 48);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            const std::size_t M = size_dist(rng);
            const auto F = detail::random_marginal(rng, !signed_sample);
            const auto G = detail::random_marginal(rng, !signed_sample);
            std::vector<double> xs(M), ys(M), sum(M);
            for (std::size_t j = 0; j < M; ++j) {
                double u = unif(rng);
                while (u <= 0.0) u = unif(rng);
                xs[j] = F.quantile(u);
                ys[j] = G.quantile(u);
                sum[j] = xs[j] + ys[j];
            }
            const double lhs = eval(EmpiricalSample(sum));
            const double rhs = eval(EmpiricalSample(xs)) + eval(EmpiricalSample(ys));
            record("comonotonic_additivity", sum, 0.0, lhs, rhs,
                   (detail::max_abs(xs) + detail::max_abs(ys)) * spec.translation_factor());
        }
    }
    return report;
}

// |R(s)| <= C ||s||_1 with C = 1/(1-alpha) for ES(alpha) and C = 1 for the mean,
// over `fuzz_budget` signed samples.
inline PropertyReport norm_bound_check(const RiskMeasureSpec& spec, std::size_t fuzz_budget, double p = 1.0,
                                       std::uint64_t seed = 1) {
    if (p != 1.0) throw std::invalid_argument("norm_bound_check: only p = 1 is supported");
    double constant = 1.0;
    if (spec.kind() == MeasureKind::ES)
        constant = 1.0 / (1.0 - spec.alpha());
    else if (spec.kind() != MeasureKind::Mean)
        throw std::invalid_argument("norm_bound_check: supported for mean and ES only");

    PropertyReport report;
    std::mt19937_64 rng(seed);
    for (std::size_t trial = 0; trial < fuzz_budget; ++trial) {
        const auto raw = detail::fuzz_values(rng, false);
        const EmpiricalSample s(raw);
        const double value = std::abs(evaluate(spec, s));
        const double bound = constant * s.p_norm(1.0);
        ++report.checks["norm_bound"];
        if (value > bound * (1.0 + 1e-12))
            report.failures.push_back({"norm_bound", spec.describe(), raw, constant, value, bound, value - bound});
    }
    return report;
}

} // namespace poolrisk
