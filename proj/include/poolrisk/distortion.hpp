#pragma once

// Distortion functions h : [0,1] -> [0,1] applied to survival probabilities,
// extended by h(t) = 1 for t > 1.

#include "poolrisk/distributions.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace poolrisk {

enum class DistortionFamily { Identity, Power, VaRIndicator, ESClamp, ProportionalHazard };

inline std::string_view to_string(DistortionFamily f) {
    switch (f) {
    case DistortionFamily::Identity: return "identity";
    case DistortionFamily::Power: return "power";
    case DistortionFamily::VaRIndicator: return "var_indicator";
    case DistortionFamily::ESClamp: return "es_clamp";
    case DistortionFamily::ProportionalHazard: return "proportional_hazard";
    }
    return "unknown";
}

class DistortionFunction {
public:
    static DistortionFunction identity() { return {DistortionFamily::Identity, 1.0}; }

    // h(u) = u^gamma
    static DistortionFunction power(double gamma) { return {DistortionFamily::Power, check_gamma(gamma)}; }
    static DistortionFunction proportional_hazard(double gamma) {
        return {DistortionFamily::ProportionalHazard, check_gamma(gamma)};
    }

    // h(u) = 1{u > 1 - alpha}; its Choquet integral is the lower alpha-quantile.
    static DistortionFunction var_indicator(double alpha) {
        return {DistortionFamily::VaRIndicator, check_alpha(alpha)};
    }

    // h(u) = min(u / (1 - alpha), 1); its Choquet integral is ES^alpha.
    static DistortionFunction es_clamp(double alpha) { return {DistortionFamily::ESClamp, check_alpha(alpha)}; }

    DistortionFamily family() const { return family_; }
    double parameter() const { return param_; }

    double operator()(double u) const { return evaluate(u); }

    double evaluate(double u) const {
        if (!(u >= 0.0)) throw std::domain_error("distortion argument must be >= 0");
        if (u >= 1.0) return 1.0;
        switch (family_) {
        case DistortionFamily::Identity: return u;
        case DistortionFamily::Power:
        case DistortionFamily::ProportionalHazard: return std::pow(u, param_);
        case DistortionFamily::VaRIndicator: return u > 1.0 - param_ ? 1.0 : 0.0;
        case DistortionFamily::ESClamp: return std::min(u / (1.0 - param_), 1.0);
        }
        return 0.0;
    }

    // log h(e^-y) for y >= 0, exact where e^-y would underflow.
    double log_at_exp(double y) const {
        if (!(y >= 0.0)) throw std::domain_error("log_at_exp needs y >= 0");
        switch (family_) {
        case DistortionFamily::Identity: return -y;
        case DistortionFamily::Power:
        case DistortionFamily::ProportionalHazard: return -param_ * y;
        case DistortionFamily::VaRIndicator: return y < -std::log1p(-param_) ? 0.0 : -kInfinity;
        case DistortionFamily::ESClamp: return std::min(-y - std::log1p(-param_), 0.0);
        }
        return -kInfinity;
    }

    // Exponent e with h(u) ~ u^e as u -> 0 (infinite when h vanishes near 0).
    double small_argument_exponent() const {
        switch (family_) {
        case DistortionFamily::Identity:
        case DistortionFamily::ESClamp: return 1.0;
        case DistortionFamily::Power:
        case DistortionFamily::ProportionalHazard: return param_;
        case DistortionFamily::VaRIndicator: return kInfinity;
        }
        return 1.0;
    }

    // Points in (0,1) where h is not smooth.
    std::vector<double> breakpoints() const {
        if (family_ == DistortionFamily::VaRIndicator || family_ == DistortionFamily::ESClamp) return {1.0 - param_};
        return {};
    }

    // integral_0^1 h(v) dv
    double unit_integral() const {
        switch (family_) {
        case DistortionFamily::Identity: return 0.5;
        case DistortionFamily::Power:
        case DistortionFamily::ProportionalHazard: return 1.0 / (1.0 + param_);
        case DistortionFamily::VaRIndicator: return param_;
        case DistortionFamily::ESClamp: return 0.5 * (1.0 + param_);
        }
        return 0.0;
    }

    // integral_0^1 h(v) / v dv, the distorted mean of a unit-rate exponential.
    double unit_log_integral() const {
        switch (family_) {
        case DistortionFamily::Identity: return 1.0;
        case DistortionFamily::Power:
        case DistortionFamily::ProportionalHazard: return 1.0 / param_;
        case DistortionFamily::VaRIndicator: return -std::log1p(-param_);
        case DistortionFamily::ESClamp: return 1.0 - std::log1p(-param_);
        }
        return 0.0;
    }

    std::string describe() const {
        std::string s(to_string(family_));
        if (family_ != DistortionFamily::Identity) s += "(" + std::to_string(param_) + ")";
        return s;
    }

    friend bool operator==(const DistortionFunction&, const DistortionFunction&) = default;

private:
    DistortionFunction(DistortionFamily f, double param) : family_(f), param_(param) {}

    static double check_gamma(double gamma) {
        if (!(gamma > 0.0 && gamma <= 1.0)) throw std::domain_error("distortion exponent must lie in (0,1]");
        return gamma;
    }
    static double check_alpha(double alpha) {
        if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("distortion level must lie in (0,1)");
        return alpha;
    }

    DistortionFamily family_;
    double param_;
};

// integral_1^inf h(x^-p) dx via the substitution x = e^(y/p), i.e.
// (1/p) * integral_0^inf h(e^-y) e^(y/p) dy, split at the breakpoints of h.
// The integrand is formed in log space so it stays finite far into the tail.
// Returns +infinity when the integral diverges.
inline double integrability_constant_quadrature(const DistortionFunction& h, double p) {
    if (!(p > 0.0)) throw std::domain_error("tail integral needs p > 0");
    if (p * h.small_argument_exponent() <= 1.0) return kInfinity;

    const double inv_p = 1.0 / p;
    auto integrand = [&](double y) { return inv_p * std::exp(h.log_at_exp(y) + y * inv_p); };

    std::vector<double> knots{0.0};
    for (double b : h.breakpoints()) knots.push_back(-std::log(b));
    std::sort(knots.begin(), knots.end());

    boost::math::quadrature::tanh_sinh<double> finite;
    boost::math::quadrature::exp_sinh<double> tail;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) total += finite.integrate(integrand, knots[k], knots[k + 1], 1e-13);
    return total + tail.integrate(integrand, knots.back(), kInfinity, 1e-13);
}

namespace detail {

// integral_1^inf h(x^-p) dx for any p > 0.
inline double tail_integral(const DistortionFunction& h, double p) {
    if (!(p > 0.0)) throw std::domain_error("tail integral needs p > 0");
    const double a = h.parameter();
    switch (h.family()) {
    case DistortionFamily::Identity: return p > 1.0 ? 1.0 / (p - 1.0) : kInfinity;
    case DistortionFamily::Power: return p * a > 1.0 ? 1.0 / (p * a - 1.0) : kInfinity;
    case DistortionFamily::VaRIndicator:
        // h(x^-p) = 1 exactly for x < (1-alpha)^(-1/p), zero beyond.
        return std::pow(1.0 - a, -1.0 / p) - 1.0;
    case DistortionFamily::ESClamp:
        if (p <= 1.0) return kInfinity;
        return std::pow(1.0 - a, -1.0 / p) * p / (p - 1.0) - 1.0;
    case DistortionFamily::ProportionalHazard: return integrability_constant_quadrature(h, p);
    }
    return kInfinity;
}

} // namespace detail

// integral_1^inf h(x^-p) dx. Closed forms where the family admits one,
// quadrature otherwise; +infinity flags divergence.
inline double integrability_constant(const DistortionFunction& h, double p) {
    if (!(p >= 1.0)) throw std::domain_error("integrability constant needs p >= 1");
    return detail::tail_integral(h, p);
}

// C * integral_0^inf h(P(X > x)) dx for a nonnegative marginal.
inline double closed_form_premium(const DistortionFunction& h, double C, const MarginalDistribution& dist) {
    if (!(C > 0.0)) throw std::domain_error("premium loading C must be positive");
    if (!dist.is_nonnegative()) throw std::domain_error("distortion premium needs a nonnegative marginal");
    const double a = dist.param1();
    const double b = dist.param2();
    switch (dist.family()) {
    case Family::Bernoulli: return C * h.evaluate(a);
    case Family::Exponential: return C * h.unit_log_integral() / a;
    case Family::Pareto: return C * b * (1.0 + detail::tail_integral(h, a));
    case Family::Uniform: return C * (a + (b - a) * h.unit_integral());
    case Family::PointMass: return C * a;
    }
    return 0.0;
}

} // namespace poolrisk
