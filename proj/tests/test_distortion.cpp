#include "poolrisk/distortion.hpp"

#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <random>
#include <vector>

using namespace poolrisk;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<DistortionFunction> all_families() {
    return {DistortionFunction::identity(),          DistortionFunction::power(0.5),
            DistortionFunction::power(0.25),         DistortionFunction::power(1.0),
            DistortionFunction::proportional_hazard(0.7), DistortionFunction::var_indicator(0.9),
            DistortionFunction::var_indicator(0.3),  DistortionFunction::es_clamp(0.5),
            DistortionFunction::es_clamp(0.95)};
}

// int_0^inf h(S(x)) dx for a nonnegative law with survival S, split at `cut`.
template <class Survival>
double distorted_integral(const DistortionFunction& h, Survival S, std::vector<double> cuts) {
    boost::math::quadrature::tanh_sinh<double> finite;
    boost::math::quadrature::exp_sinh<double> tail;
    auto f = [&](double x) { return h(S(x)); };
    double total = 0.0;
    double lo = 0.0;
    for (double c : cuts) {
        if (c > lo) total += finite.integrate(f, lo, c);
        lo = std::max(lo, c);
    }
    return total + tail.integrate(f, lo, INFINITY);
}

} // namespace

TEST_CASE("distortion function examples") {
    CHECK(DistortionFunction::power(0.5).evaluate(0.25) == 0.5);
    CHECK(DistortionFunction::es_clamp(0.5).evaluate(0.75) == 1.0);
    CHECK(DistortionFunction::es_clamp(0.5).evaluate(0.25) == 0.5);
    CHECK(DistortionFunction::var_indicator(0.9).evaluate(0.09) == 0.0);
    CHECK(DistortionFunction::var_indicator(0.75).evaluate(0.25) == 0.0);
    CHECK(DistortionFunction::var_indicator(0.9).evaluate(0.11) == 1.0);
    for (const auto& h : all_families()) {
        CHECK(h(1.7) == 1.0);
        CHECK(h(1.0) == 1.0);
        CHECK(h(0.0) == 0.0);
        CHECK_THROWS_AS(h(-0.1), std::domain_error);
    }
}

TEST_CASE("distortion parameter validation") {
    CHECK_THROWS_AS(DistortionFunction::power(0.0), std::domain_error);
    CHECK_THROWS_AS(DistortionFunction::power(1.5), std::domain_error);
    CHECK_THROWS_AS(DistortionFunction::es_clamp(1.0), std::domain_error);
    CHECK_THROWS_AS(DistortionFunction::var_indicator(0.0), std::domain_error);
}

TEST_CASE("evaluate is nondecreasing on [0,1]") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> g(0.05, 1.0), a(0.01, 0.99);
    for (int t = 0; t < 60; ++t) {
        const DistortionFunction h = t % 4 == 0   ? DistortionFunction::power(g(rng))
                                     : t % 4 == 1 ? DistortionFunction::proportional_hazard(g(rng))
                                     : t % 4 == 2 ? DistortionFunction::var_indicator(a(rng))
                                                  : DistortionFunction::es_clamp(a(rng));
        double prev = 0.0;
        for (int k = 0; k <= 4000; ++k) {
            const double v = h(k / 4000.0);
            CHECK(v >= prev);
            CHECK(v <= 1.0);
            prev = v;
        }
    }
}

TEST_CASE("integrability constant examples") {
    CHECK_THAT(integrability_constant(DistortionFunction::power(0.5), 3.0), WithinRel(2.0, 1e-15));
    CHECK(std::isinf(integrability_constant(DistortionFunction::power(0.5), 2.0)));
    CHECK_THAT(integrability_constant(DistortionFunction::identity(), 2.0), WithinRel(1.0, 1e-15));
    CHECK(std::isinf(integrability_constant(DistortionFunction::identity(), 1.0)));
    CHECK(std::isinf(integrability_constant(DistortionFunction::es_clamp(0.5), 1.0)));
    CHECK_THAT(integrability_constant(DistortionFunction::var_indicator(0.75), 2.0), WithinRel(1.0, 1e-15));
    CHECK_THROWS(integrability_constant(DistortionFunction::identity(), 0.5));
}

TEST_CASE("integrability constant against direct quadrature in x") {
    boost::math::quadrature::exp_sinh<double> tail;
    boost::math::quadrature::tanh_sinh<double> finite;
    for (const auto& h : all_families()) {
        for (double p : {1.5, 2.0, 3.0, 6.0}) {
            const double closed = integrability_constant(h, p);
            if (!std::isfinite(closed)) continue;
            auto f = [&](double x) { return h(std::pow(x, -p)); };
            // h(x^-p) has a kink or jump at x = (1-alpha)^(-1/p) for the level families
            double direct = 0.0;
            if (h.family() == DistortionFamily::VaRIndicator || h.family() == DistortionFamily::ESClamp) {
                const double x0 = std::pow(1.0 - h.parameter(), -1.0 / p);
                direct = finite.integrate(f, 1.0, x0) + tail.integrate(f, x0, INFINITY);
            } else {
                direct = tail.integrate(f, 1.0, INFINITY);
            }
            INFO(h.describe() << " p=" << p);
            CHECK_THAT(closed, WithinRel(direct, 1e-8));
        }
    }
}

TEST_CASE("quadrature path agrees with closed forms") {
    for (double gamma : {0.2, 0.35, 0.5, 0.75, 1.0}) {
        for (double p : {1.0, 1.5, 2.0, 3.0, 4.5, 10.0}) {
            const auto h = DistortionFunction::power(gamma);
            const double closed = integrability_constant(h, p);
            const double quad = integrability_constant_quadrature(h, p);
            INFO("gamma=" << gamma << " p=" << p);
            if (std::isfinite(closed))
                CHECK_THAT(quad, WithinAbs(closed, 1e-8));
            else
                CHECK(std::isinf(quad));
        }
    }
    for (double alpha : {0.1, 0.5, 0.9}) {
        for (double p : {1.5, 2.0, 5.0}) {
            CHECK_THAT(integrability_constant_quadrature(DistortionFunction::es_clamp(alpha), p),
                       WithinAbs(integrability_constant(DistortionFunction::es_clamp(alpha), p), 1e-8));
            CHECK_THAT(integrability_constant_quadrature(DistortionFunction::var_indicator(alpha), p),
                       WithinAbs(integrability_constant(DistortionFunction::var_indicator(alpha), p), 1e-8));
        }
    }
}

TEST_CASE("integrability constant is nonincreasing in p") {
    for (const auto& h : all_families()) {
        double prev = INFINITY;
        for (double p = 1.0; p <= 12.0; p += 0.25) {
            const double v = integrability_constant(h, p);
            CHECK(v <= prev * (1.0 + 1e-12));
            prev = v;
        }
    }
}

TEST_CASE("closed-form premium against quadrature of the distorted survival") {
    const double C = 1.3;
    for (const auto& h : all_families()) {
        INFO(h.describe());
        // jump / kink of h(S(x)) for the level families
        const double level = h.family() == DistortionFamily::VaRIndicator || h.family() == DistortionFamily::ESClamp
                                 ? 1.0 - h.parameter()
                                 : 0.5;

        const double rate = 2.0;
        const double exp_oracle = distorted_integral(h, [&](double x) { return std::exp(-rate * x); },
                                                     {-std::log(level) / rate});
        CHECK_THAT(closed_form_premium(h, C, MarginalDistribution::exponential(rate)), WithinRel(C * exp_oracle, 1e-8));

        const double a = 3.0, s = 2.0;
        if (a * h.small_argument_exponent() <= 1.0) {
            // h(S(x)) ~ x^(-a gamma) is not integrable
            CHECK(std::isinf(closed_form_premium(h, C, MarginalDistribution::pareto(a, s))));
        } else {
                const double pareto_oracle = distorted_integral(
                h, [&](double x) { return x < s ? 1.0 : std::pow(s / x, a); }, {s, s * std::pow(level, -1.0 / a)});
            CHECK_THAT(closed_form_premium(h, C, MarginalDistribution::pareto(a, s)), WithinRel(C * pareto_oracle, 1e-8));
        }

        const double lo = 0.5, hi = 2.5;
        const double unif_oracle = distorted_integral(
            h, [&](double x) { return x < lo ? 1.0 : x >= hi ? 0.0 : (hi - x) / (hi - lo); },
            {lo, hi - level * (hi - lo), hi});
        CHECK_THAT(closed_form_premium(h, C, MarginalDistribution::uniform(lo, hi)), WithinRel(C * unif_oracle, 1e-8));

        CHECK_THAT(closed_form_premium(h, C, MarginalDistribution::bernoulli(0.3)), WithinRel(C * h(0.3), 1e-15));
        CHECK_THAT(closed_form_premium(h, C, MarginalDistribution::point_mass(2.0)), WithinRel(2.0 * C, 1e-15));
    }
}

TEST_CASE("premium of a heavy tail diverges exactly when the distorted tail is not integrable") {
    // Pareto(a) premium under Power(g) is finite iff a*g > 1
    CHECK(std::isinf(closed_form_premium(DistortionFunction::power(0.5), 1.0, MarginalDistribution::pareto(1.5, 1.0))));
    CHECK_THAT(closed_form_premium(DistortionFunction::power(0.5), 1.0, MarginalDistribution::pareto(3.0, 1.0)),
               WithinRel(1.0 + 1.0 / 0.5, 1e-14));
    CHECK_THAT(closed_form_premium(DistortionFunction::var_indicator(0.9), 1.0, MarginalDistribution::pareto(0.5, 1.0)),
               WithinRel(100.0, 1e-12));
}
