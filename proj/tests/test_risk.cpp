#include "poolrisk/risk.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace poolrisk;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// ES as (1/(1-a)) * int_a^1 q(u) du with the empirical quantile q(u) = x_(ceil(uM)),
// integrated exactly piece by piece.
double es_oracle(std::vector<double> x, double alpha) {
    std::sort(x.begin(), x.end());
    const double M = static_cast<double>(x.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double lo = std::max(alpha, k / M);
        const double hi = (k + 1) / M;
        if (hi > lo) acc += (hi - lo) * x[k];
    }
    return acc / (1.0 - alpha);
}

// Two-sided Choquet integral by integrating h(P(X > x)) over the breakpoints.
double choquet_oracle(std::vector<double> x, const DistortionFunction& h, double C) {
    std::sort(x.begin(), x.end());
    auto S = [&](double t) {
        return static_cast<double>(x.end() - std::upper_bound(x.begin(), x.end(), t)) / static_cast<double>(x.size());
    };
    std::vector<double> pts(x);
    pts.push_back(0.0);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double a = pts[k], b = pts[k + 1];
        const double mid = 0.5 * (a + b);
        acc += (b <= 0.0 ? h(S(mid)) - 1.0 : h(S(mid))) * (b - a);
    }
    return C * acc;
}

std::vector<double> draw(std::mt19937_64& rng, bool nonneg) {
    std::uniform_int_distribution<int> size(1, 30);
    std::uniform_int_distribution<int> tick(nonneg ? 0 : -3, 4);
    std::exponential_distribution<double> e(0.7);
    const int n = size(rng);
    const bool ties = std::bernoulli_distribution(0.4)(rng);
    std::vector<double> v(n);
    for (auto& x : v) x = ties ? tick(rng) : (nonneg ? e(rng) : e(rng) - 1.5);
    return v;
}

} // namespace

TEST_CASE("risk evaluation examples") {
    const EmpiricalSample s(std::vector<double>{1, 2, 3, 4});
    CHECK(evaluate(RiskMeasureSpec::es(0.5), s) == 3.5);
    CHECK(evaluate(RiskMeasureSpec::var(0.5), s) == 2.0);
    CHECK(evaluate(RiskMeasureSpec::mean(), s) == 2.5);
    const EmpiricalSample b(std::vector<double>{0, 1});
    CHECK_THAT(evaluate(RiskMeasureSpec::distortion(DistortionFunction::power(0.5)), b),
               WithinRel(std::sqrt(0.5), 1e-15));
    std::mt19937_64 rng(1);
    for (int t = 0; t < 50; ++t) {
        const EmpiricalSample x(draw(rng, true));
        CHECK_THAT(evaluate(RiskMeasureSpec::distortion(DistortionFunction::identity()), x),
                   WithinRel(x.sample_mean(), 1e-12) || WithinAbs(x.sample_mean(), 1e-14));
    }
}

TEST_CASE("distortion premium refuses signed samples") {
    const EmpiricalSample s(std::vector<double>{-1, 1});
    CHECK_THROWS_AS(evaluate(RiskMeasureSpec::distortion(DistortionFunction::identity()), s), std::domain_error);
}

TEST_CASE("choquet integral examples") {
    CHECK(choquet_integral(DistortionFunction::identity(), 1.0, EmpiricalSample(std::vector<double>{-1, 1})) == 0.0);
    for (const auto& h : {DistortionFunction::power(0.3), DistortionFunction::es_clamp(0.8)})
        CHECK(choquet_integral(h, 1.0, EmpiricalSample(std::vector<double>(5, -2.75))) == -2.75);
    const EmpiricalSample s(std::vector<double>{-1, 0, 0, 1});
    CHECK_THAT(choquet_integral(DistortionFunction::es_clamp(0.5), 1.0, s), WithinAbs(0.5, 1e-15));
    CHECK_THAT(expected_shortfall(s, 0.5), WithinAbs(0.5, 1e-15));
}

TEST_CASE("ES and Choquet integral against brute-force oracles") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> lvl(0.01, 0.99);
    for (int t = 0; t < 500; ++t) {
        const auto raw = draw(rng, t % 2 == 0);
        const EmpiricalSample s(raw);
        const double alpha = t % 5 == 0 ? std::round(lvl(rng) * raw.size()) / raw.size() * 0.999 : lvl(rng);
        if (!(alpha > 0.0 && alpha < 1.0)) continue;
        CHECK_THAT(expected_shortfall(s, alpha), WithinRel(es_oracle(raw, alpha), 1e-12) || WithinAbs(es_oracle(raw, alpha), 1e-12));
        for (const auto& h : {DistortionFunction::power(0.5), DistortionFunction::es_clamp(alpha),
                              DistortionFunction::proportional_hazard(0.8), DistortionFunction::identity()}) {
            const double oracle = choquet_oracle(raw, h, 1.7);
            CHECK_THAT(choquet_integral(h, 1.7, s), WithinRel(oracle, 1e-12) || WithinAbs(oracle, 1e-12));
        }
    }
}

TEST_CASE("distortion and ES duality on nonnegative samples") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> lvl(0.01, 0.99);
    for (int t = 0; t < 1000; ++t) {
        const EmpiricalSample s(draw(rng, true));
        const double alpha = lvl(rng);
        const double es = evaluate(RiskMeasureSpec::es(alpha), s);
        const double d = evaluate(RiskMeasureSpec::distortion(DistortionFunction::es_clamp(alpha)), s);
        CHECK_THAT(d, WithinRel(es, 1e-12) || WithinAbs(es, 1e-300));
        const auto h = DistortionFunction::power(0.1 + 0.9 * lvl(rng));
        CHECK(choquet_integral(h, 1.2, s) == distortion_premium(s, h, 1.2));
    }
}

TEST_CASE("VaR indicator distortion identifies the VaR order statistic") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> lvl(0.01, 0.99);
    for (int t = 0; t < 1000; ++t) {
        const EmpiricalSample s(draw(rng, true));
        const double alpha = lvl(rng);
        const double M = static_cast<double>(s.size());
        // keep alpha * M away from integers where the two indicator conventions meet
        if (std::abs(alpha * M - std::round(alpha * M)) < 1e-6) continue;
        CHECK(evaluate(RiskMeasureSpec::distortion(DistortionFunction::var_indicator(alpha)), s) ==
              Catch::Approx(evaluate(RiskMeasureSpec::var(alpha), s)).epsilon(1e-12).margin(1e-14));
    }
}

TEST_CASE("ES dominates the mean and grows with the level") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 300; ++t) {
        const EmpiricalSample s(draw(rng, t % 2 == 0));
        double prev = -INFINITY;
        for (int k = 1; k < 100; ++k) {
            const double es = expected_shortfall(s, k / 100.0);
            CHECK(es >= s.sample_mean() - 1e-12);
            CHECK(es >= prev - 1e-12);
            prev = es;
        }
    }
}

TEST_CASE("premium moment bound") {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 500; ++t) {
        const EmpiricalSample s(draw(rng, true));
        for (const auto& h : {DistortionFunction::power(0.5), DistortionFunction::identity(),
                              DistortionFunction::es_clamp(0.9), DistortionFunction::var_indicator(0.7)}) {
            for (double p : {1.5, 2.0, 3.0}) {
                const double K = integrability_constant(h, p);
                if (!std::isfinite(K)) continue;
                CHECK(distortion_premium(s, h, 2.0) <= 2.0 * s.p_norm(p) * (1.0 + K) * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("unexpected loss") {
    const EmpiricalSample agg(std::vector<double>{9.0, 10.0, 11.0});
    const auto u = unexpected_loss(RiskMeasureSpec::mean(), agg, 10.0, 10, 10.0);
    CHECK(u.raw == 0.0);
    const auto pm = unexpected_loss(RiskMeasureSpec::es(0.95), EmpiricalSample(std::vector<double>(8, 4.0)), 4.0, 4, 4.0);
    CHECK(pm.raw == 0.0);
    CHECK(pm.normalized == 0.0);
    const auto e = unexpected_loss(RiskMeasureSpec::es(0.5), agg, 9.0, 3, 4.0);
    // top half of {9,10,11}: all of 11 and half a sample of 10, i.e. 32/3
    CHECK_THAT(e.raw, WithinRel(32.0 / 3.0 - 9.0, 1e-14));
    CHECK_THAT(e.normalized * e.total_weight, WithinRel(e.raw, 1e-12));
}

TEST_CASE("axiom examples") {
    const EmpiricalSample x(std::vector<double>{1, 2, 3});
    CHECK(evaluate(RiskMeasureSpec::es(0.9), x.shifted(5.0)) == Catch::Approx(evaluate(RiskMeasureSpec::es(0.9), x) + 5.0).epsilon(1e-14));
    CHECK(evaluate(RiskMeasureSpec::var(0.9), x.scaled(2.0)) == 2.0 * evaluate(RiskMeasureSpec::var(0.9), x));

    // comonotonic pair from 16 shared uniforms
    std::vector<double> u(16), a(16), b(16), sum(16);
    const auto F = MarginalDistribution::exponential(1.5);
    const auto G = MarginalDistribution::bernoulli(0.3);
    for (int k = 0; k < 16; ++k) {
        u[k] = (k + 0.37) / 16.0;
        a[k] = F.quantile(u[k]);
        b[k] = G.quantile(u[k]);
        sum[k] = a[k] + b[k];
    }
    const auto es = RiskMeasureSpec::es(0.75);
    CHECK_THAT(evaluate(es, EmpiricalSample(sum)),
               WithinRel(evaluate(es, EmpiricalSample(a)) + evaluate(es, EmpiricalSample(b)), 1e-14));
}

TEST_CASE("fuzzed axioms hold for every measure kind") {
    std::uint64_t seed = 100;
    for (const auto& spec : {RiskMeasureSpec::mean(), RiskMeasureSpec::var(0.1), RiskMeasureSpec::var(0.95),
                             RiskMeasureSpec::es(0.3), RiskMeasureSpec::es(0.99),
                             RiskMeasureSpec::distortion(DistortionFunction::power(0.4), 1.5),
                             RiskMeasureSpec::distortion(DistortionFunction::es_clamp(0.6)),
                             RiskMeasureSpec::distortion(DistortionFunction::var_indicator(0.8))}) {
        const auto report = check_axioms(spec, 400, seed++);
        INFO(spec.describe());
        CHECK(report.passed());
        CHECK(report.checks.at("cash_additivity") == 400);
        CHECK(report.checks.at("positive_homogeneity") == 400);
        CHECK(report.checks.at("monotonicity") == 400);
        if (spec.kind() == MeasureKind::ES || spec.kind() == MeasureKind::Distortion)
            CHECK(report.checks.at("comonotonic_additivity") == 400);
        else
            CHECK(report.checks.count("comonotonic_additivity") == 0);
    }
}

TEST_CASE("norm bound") {
    CHECK(expected_shortfall(EmpiricalSample(std::vector<double>{0, 0, 0, 1}), 0.95) <= 0.25 / 0.05);
    CHECK(expected_shortfall(EmpiricalSample(std::vector<double>{-1, 1}), 0.5) == 1.0);
    for (double alpha : {0.5, 0.9, 0.99}) CHECK(norm_bound_check(RiskMeasureSpec::es(alpha), 300).passed());
    CHECK(norm_bound_check(RiskMeasureSpec::mean(), 300).passed());
    CHECK_THROWS(norm_bound_check(RiskMeasureSpec::var(0.9), 10));
}

TEST_CASE("closed-form risk") {
    const auto x = MarginalDistribution::exponential(1.0);
    CHECK_THAT(closed_form_risk(RiskMeasureSpec::es(0.95), x), WithinRel(1.0 - std::log(0.05), 1e-15));
    CHECK_THAT(closed_form_risk(RiskMeasureSpec::var(0.95), x), WithinRel(-std::log(0.05), 1e-15));
    CHECK(closed_form_risk(RiskMeasureSpec::mean(), x) == 1.0);
    CHECK_THAT(closed_form_risk(RiskMeasureSpec::distortion(DistortionFunction::es_clamp(0.95)), x),
               WithinRel(1.0 - std::log(0.05), 1e-12));
}
