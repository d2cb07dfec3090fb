#pragma once

// Parametric marginal loss distributions sampled by inverse transform.
//
// Every family exposes its lower generalized inverse F^{-1}(u) = inf{x : F(x) >= u},
// exact moments, and closed-form VaR / ES values that serve as oracles for the
// empirical estimators.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace poolrisk {

enum class Family { Bernoulli, Exponential, Pareto, Uniform, PointMass };

inline std::string_view to_string(Family f) {
    switch (f) {
    case Family::Bernoulli: return "bernoulli";
    case Family::Exponential: return "exponential";
    case Family::Pareto: return "pareto";
    case Family::Uniform: return "uniform";
    case Family::PointMass: return "point_mass";
    }
    return "unknown";
}

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

class MarginalDistribution {
public:
    static MarginalDistribution bernoulli(double p) {
        if (!(p > 0.0 && p < 1.0))
            throw std::domain_error("bernoulli: p must lie in (0,1), got " + std::to_string(p));
        return {Family::Bernoulli, p, 0.0};
    }

    static MarginalDistribution exponential(double rate) {
        if (!(rate > 0.0) || !std::isfinite(rate))
            throw std::domain_error("exponential: rate must be positive, got " + std::to_string(rate));
        return {Family::Exponential, rate, 0.0};
    }

    // Survival (scale/x)^tail for x >= scale.
    static MarginalDistribution pareto(double tail, double scale) {
        if (!(tail > 0.0) || !std::isfinite(tail))
            throw std::domain_error("pareto: tail index must be positive, got " + std::to_string(tail));
        if (!(scale > 0.0) || !std::isfinite(scale))
            throw std::domain_error("pareto: scale must be positive, got " + std::to_string(scale));
        return {Family::Pareto, tail, scale};
    }

    static MarginalDistribution uniform(double lo, double hi) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
            throw std::domain_error("uniform: need finite lo < hi");
        return {Family::Uniform, lo, hi};
    }

    static MarginalDistribution point_mass(double c) {
        if (!std::isfinite(c)) throw std::domain_error("point_mass: location must be finite");
        return {Family::PointMass, c, 0.0};
    }

    Family family() const { return family_; }
    double param1() const { return a_; }
    double param2() const { return b_; }

    // Smallest value the distribution can take.
    double support_min() const {
        switch (family_) {
        case Family::Bernoulli:
        case Family::Exponential: return 0.0;
        case Family::Pareto: return b_;
        case Family::Uniform: return a_;
        case Family::PointMass: return a_;
        }
        return 0.0;
    }

    bool is_nonnegative() const { return support_min() >= 0.0; }

    // Lower generalized inverse of the distribution function.
    double quantile(double u) const {
        if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u must lie in (0,1)");
        switch (family_) {
        case Family::Bernoulli: return u <= 1.0 - a_ ? 0.0 : 1.0;
        case Family::Exponential: return -std::log1p(-u) / a_;
        case Family::Pareto: return b_ * std::pow(1.0 - u, -1.0 / a_);
        case Family::Uniform: return a_ + u * (b_ - a_);
        case Family::PointMass: return a_;
        }
        return 0.0;
    }

    double mean() const { return raw_moment(1.0); }

    // E[X^k]; +infinity when the moment diverges. Non-integer k is only
    // defined for nonnegative supports (otherwise use absolute_moment).
    double raw_moment(double k) const {
        if (!(k > 0.0)) throw std::domain_error("raw_moment: order must be positive");
        const bool integral = std::floor(k) == k;
        if (!integral && !is_nonnegative())
            throw std::domain_error("raw_moment: fractional order on a signed support");
        switch (family_) {
        case Family::Bernoulli: return a_;
        case Family::Exponential: return std::tgamma(k + 1.0) / std::pow(a_, k);
        case Family::Pareto: return a_ > k ? a_ * std::pow(b_, k) / (a_ - k) : kInfinity;
        case Family::Uniform:
            if (k == 1.0) return 0.5 * (a_ + b_);
            return (std::pow(b_, k + 1.0) - std::pow(a_, k + 1.0)) / ((k + 1.0) * (b_ - a_));
        case Family::PointMass: return std::pow(a_, k);
        }
        return 0.0;
    }

    // E[|X|^p] for real p > 0.
    double absolute_moment(double p) const {
        if (!(p > 0.0)) throw std::domain_error("absolute_moment: order must be positive");
        if (family_ == Family::Uniform && a_ < 0.0) {
            const double lo = std::abs(a_);
            if (b_ <= 0.0)
                return (std::pow(lo, p + 1.0) - std::pow(std::abs(b_), p + 1.0)) / ((p + 1.0) * (b_ - a_));
            return (std::pow(lo, p + 1.0) + std::pow(b_, p + 1.0)) / ((p + 1.0) * (b_ - a_));
        }
        if (family_ == Family::PointMass) return std::pow(std::abs(a_), p);
        return raw_moment(p);
    }

    double closed_form_var(double alpha) const {
        check_level(alpha);
        return quantile(alpha);
    }

    // ES^alpha = (1/(1-alpha)) * integral_alpha^1 VaR^u du.
    double closed_form_es(double alpha) const {
        check_level(alpha);
        const double tail = 1.0 - alpha;
        switch (family_) {
        case Family::Bernoulli: return std::min(tail, a_) / tail;
        case Family::Exponential: return (1.0 - std::log(tail)) / a_;
        case Family::Pareto:
            if (!(a_ > 1.0))
                throw std::domain_error("closed_form_es: pareto tail index <= 1 has infinite mean");
            return b_ * std::pow(tail, -1.0 / a_) * a_ / (a_ - 1.0);
        case Family::Uniform: return a_ + (b_ - a_) * (1.0 + alpha) / 2.0;
        case Family::PointMass: return a_;
        }
        return 0.0;
    }

    std::string describe() const {
        std::string s(to_string(family_));
        switch (family_) {
        case Family::Bernoulli: return s + "(p=" + std::to_string(a_) + ")";
        case Family::Exponential: return s + "(rate=" + std::to_string(a_) + ")";
        case Family::Pareto: return s + "(tail=" + std::to_string(a_) + ", scale=" + std::to_string(b_) + ")";
        case Family::Uniform: return s + "(" + std::to_string(a_) + ", " + std::to_string(b_) + ")";
        case Family::PointMass: return s + "(" + std::to_string(a_) + ")";
        }
        return s;
    }

    friend bool operator==(const MarginalDistribution&, const MarginalDistribution&) = default;

private:
    MarginalDistribution(Family f, double a, double b) : family_(f), a_(a), b_(b) {}

    static void check_level(double alpha) {
        if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("confidence level must lie in (0,1)");
    }

    Family family_;
    double a_;
    double b_;
};

} // namespace poolrisk
