#pragma once

// Invariant suite behind the `selftest` subcommand.

#include "poolrisk/distortion.hpp"
#include "poolrisk/distributions.hpp"
#include "poolrisk/empirical.hpp"
#include "poolrisk/orlicz.hpp"
#include "poolrisk/risk.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace poolrisk {

inline constexpr double kIdentityTolerance = 1e-12;
inline constexpr double kLuxemburgTolerance = 1e-9;
inline constexpr double kQuadratureTolerance = 1e-8;

inline std::vector<RiskMeasureSpec> selftest_measures() {
    return {RiskMeasureSpec::mean(),
            RiskMeasureSpec::var(0.5),
            RiskMeasureSpec::var(0.95),
            RiskMeasureSpec::es(0.5),
            RiskMeasureSpec::es(0.95),
            RiskMeasureSpec::distortion(DistortionFunction::power(0.5), 1.0),
            RiskMeasureSpec::distortion(DistortionFunction::es_clamp(0.9), 1.0),
            RiskMeasureSpec::distortion(DistortionFunction::var_indicator(0.9), 1.0),
            RiskMeasureSpec::distortion(DistortionFunction::proportional_hazard(0.7), 1.3),
            RiskMeasureSpec::distortion(DistortionFunction::identity(), 2.0)};
}

namespace detail {

inline void record_check(PropertyReport& report, std::string_view property, std::string_view measure,
                         std::vector<double> sample, double parameter, double lhs, double rhs, bool ok) {
    ++report.checks[std::string(property)];
    if (!ok)
        report.failures.push_back(
            {std::string(property), std::string(measure), std::move(sample), parameter, lhs, rhs, std::abs(lhs - rhs)});
}

inline bool relative_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

} // namespace detail

// Distortion/ES duality, Choquet/premium agreement and the premium moment bound.
inline PropertyReport oracle_identity_check(std::size_t budget, std::uint64_t seed = 7) {
    PropertyReport report;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> level(0.01, 0.99);
    const std::vector<DistortionFunction> hs{DistortionFunction::identity(), DistortionFunction::power(0.5),
                                             DistortionFunction::power(0.9), DistortionFunction::es_clamp(0.8),
                                             DistortionFunction::var_indicator(0.6),
                                             DistortionFunction::proportional_hazard(0.3)};
    for (std::size_t t = 0; t < budget; ++t) {
        const auto raw = detail::fuzz_values(rng, true);
        const EmpiricalSample s(raw);
        const double alpha = level(rng);

        const double es = expected_shortfall(s, alpha);
        const double dual = distortion_premium(s, DistortionFunction::es_clamp(alpha), 1.0);
        detail::record_check(report, "es_clamp_duality", "ES", raw, alpha, dual, es,
                             detail::relative_close(dual, es, kIdentityTolerance) || std::abs(dual - es) <= 1e-300);

        const auto& h = hs[t % hs.size()];
        const double premium = distortion_premium(s, h, 1.0);
        const double choquet = choquet_integral(h, 1.0, s);
        detail::record_check(report, "choquet_equals_premium", h.describe(), raw, 0.0, choquet, premium,
                             choquet == premium);

        for (double p : {1.5, 2.0, 3.0}) {
            const double constant = integrability_constant(h, p);
            if (!std::isfinite(constant)) continue;
            const double bound = s.p_norm(p) * (1.0 + constant);
            detail::record_check(report, "premium_moment_bound", h.describe(), raw, p, premium, bound,
                                 premium <= bound * (1.0 + kIdentityTolerance));
        }
    }
    return report;
}

// Luxemburg norm versus p-norm, Delta_2 constants, and the Exp-1 violation flag.
inline PropertyReport orlicz_check(std::size_t budget, std::uint64_t seed = 11) {
    PropertyReport report;
    std::mt19937_64 rng(seed);
    for (std::size_t t = 0; t < budget; ++t) {
        const auto raw = detail::fuzz_values(rng, t % 2 == 0);
        const EmpiricalSample s(raw);
        for (double p : {1.0, 1.5, 2.0, 3.0}) {
            const double lux = luxemburg_norm(s, YoungFunction::power(p));
            const double pn = s.p_norm(p);
            detail::record_check(report, "luxemburg_equals_p_norm", "power(" + std::to_string(p) + ")", raw, p, lux,
                                 pn, detail::relative_close(lux, pn, kLuxemburgTolerance) || (lux == 0.0 && pn == 0.0));
        }
    }
    const auto grid = log_spaced_grid(1e-3, 100.0, 51);
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
        const auto est = delta2_estimate(YoungFunction::power(p), grid);
        for (double r : est.ratios)
            detail::record_check(report, "delta2_power_exact", "power", {}, p, r, std::pow(2.0, p), r == std::pow(2.0, p));
    }
    const auto exp_est = delta2_estimate(YoungFunction::exp_minus_one(), grid);
    detail::record_check(report, "delta2_exp_violated", "exp_minus_one", {}, 0.0, exp_est.constant, kDelta2Cutoff,
                         exp_est.violated);
    return report;
}

// Closed-form VaR / ES against quantiles and quadrature, and the quadrature
// path of the integrability constant against its closed forms.
inline PropertyReport distribution_check() {
    PropertyReport report;
    const std::vector<MarginalDistribution> dists{
        MarginalDistribution::bernoulli(0.1),   MarginalDistribution::bernoulli(0.6),
        MarginalDistribution::exponential(1.0), MarginalDistribution::exponential(2.5),
        MarginalDistribution::pareto(2.5, 1.0), MarginalDistribution::uniform(-1.0, 3.0),
        MarginalDistribution::point_mass(3.0)};
    for (const auto& d : dists) {
        for (int k = 1; k <= 99; ++k) {
            const double alpha = k / 100.0;
            const double var = d.closed_form_var(alpha);
            const double q = d.quantile(alpha);
            detail::record_check(report, "var_equals_quantile", d.describe(), {}, alpha, var, q, var == q);
            const double es = d.closed_form_es(alpha);
            if (std::isfinite(d.mean()))
                detail::record_check(report, "es_dominates_mean", d.describe(), {}, alpha, es, d.mean(),
                                     es >= d.mean() * (1.0 - kIdentityTolerance) - kIdentityTolerance);
        }
    }
    for (double gamma : {0.3, 0.5, 0.8, 1.0}) {
        for (double p : {1.5, 2.0, 3.0, 5.0}) {
            const auto h = DistortionFunction::power(gamma);
            const double closed = integrability_constant(h, p);
            if (!std::isfinite(closed)) continue;
            const double quad = integrability_constant_quadrature(h, p);
            detail::record_check(report, "integrability_quadrature", h.describe(), {}, p, quad, closed,
                                 std::abs(quad - closed) <= kQuadratureTolerance);
        }
    }
    return report;
}

struct SelftestReport {
    PropertyReport properties;
    std::size_t total_checks() const { return properties.total_checks(); }
    bool passed() const { return properties.passed(); }
};

inline SelftestReport run_selftest(std::size_t budget = 1000) {
    SelftestReport out;
    std::uint64_t seed = 1;
    for (const auto& spec : selftest_measures()) out.properties.merge(check_axioms(spec, budget, seed++));
    for (double alpha : {0.5, 0.9, 0.95, 0.99})
        out.properties.merge(norm_bound_check(RiskMeasureSpec::es(alpha), budget, 1.0, seed++));
    out.properties.merge(norm_bound_check(RiskMeasureSpec::mean(), budget, 1.0, seed++));
    out.properties.merge(oracle_identity_check(budget));
    out.properties.merge(orlicz_check(budget / 4 + 1));
    out.properties.merge(distribution_check());
    return out;
}

} // namespace poolrisk
