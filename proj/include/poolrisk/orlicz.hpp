#pragma once

#include "poolrisk/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace poolrisk {

enum class YoungFamily { Zero, Power, ExpMinusOne };

inline std::string_view to_string(YoungFamily f) {
    switch (f) {
    case YoungFamily::Zero: return "zero";
    case YoungFamily::Power: return "power";
    case YoungFamily::ExpMinusOne: return "exp_minus_one";
    }
    return "unknown";
}

// Convex, continuous Phi : [0, inf) -> [0, inf) with Phi(0) = 0.
class YoungFunction {
public:
    static YoungFunction zero() { return {YoungFamily::Zero, 0.0}; }
    static YoungFunction power(double p) {
        if (!(p >= 1.0) || !std::isfinite(p)) throw std::domain_error("power Young function needs p >= 1");
        return {YoungFamily::Power, p};
    }
    static YoungFunction exp_minus_one() { return {YoungFamily::ExpMinusOne, 0.0}; }

    YoungFamily family() const { return family_; }
    double exponent() const { return p_; }

    double operator()(double t) const {
        switch (family_) {
        case YoungFamily::Zero: return 0.0;
        case YoungFamily::Power: return std::pow(t, p_);
        case YoungFamily::ExpMinusOne: return std::expm1(t);
        }
        return 0.0;
    }

    // Phi(2t) / Phi(t). For the power family this is computed as (2t/t)^p,
    // which is exactly 2^p in floating point.
    double doubling_ratio(double t) const {
        switch (family_) {
        case YoungFamily::Zero: return 1.0;
        case YoungFamily::Power: return std::pow((2.0 * t) / t, p_);
        case YoungFamily::ExpMinusOne: return std::expm1(2.0 * t) / std::expm1(t);
        }
        return 1.0;
    }

    std::string describe() const {
        std::string s(to_string(family_));
        if (family_ == YoungFamily::Power) s += "(" + std::to_string(p_) + ")";
        return s;
    }

private:
    YoungFunction(YoungFamily f, double p) : family_(f), p_(p) {}

    YoungFamily family_;
    double p_;
};

namespace detail {

inline double orlicz_modular(std::span<const double> values, const YoungFunction& phi, double k) {
    double acc = 0.0;
    for (double v : values) acc += phi(std::abs(v) / k);
    return acc / static_cast<double>(values.size());
}

} // namespace detail

// inf{k > 0 : mean Phi(|x|/k) <= 1}. Brackets from k0 = max|x| by doubling /
// halving, then bisects to relative width rel_tol.
inline double luxemburg_norm(const EmpiricalSample& s, const YoungFunction& phi, double rel_tol = 1e-10) {
    if (phi.family() == YoungFamily::Zero)
        throw std::domain_error("luxemburg_norm: undefined for the zero Young function");
    if (!(rel_tol > 0.0)) throw std::domain_error("luxemburg_norm: rel_tol must be positive");
    const auto values = s.values();
    const double k0 = std::max(std::abs(s.min()), std::abs(s.max()));
    if (k0 == 0.0) return 0.0;

    auto modular = [&](double k) { return detail::orlicz_modular(values, phi, k); };

    // Invariant: modular(lo) > 1 >= modular(hi).
    double lo = k0;
    double hi = k0;
    if (modular(k0) <= 1.0) {
        while (modular(lo) <= 1.0) lo *= 0.5;
        hi = 2.0 * lo;
    } else {
        while (modular(hi) > 1.0) hi *= 2.0;
        lo = 0.5 * hi;
    }
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (modular(mid) > 1.0)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

struct Delta2Estimate {
    double constant;               // sup of Phi(2t)/Phi(t) over the grid
    bool violated;                 // ratio exceeded the cutoff somewhere
    std::vector<double> ratios;    // per grid point; NaN where Phi(t) = 0
};

inline constexpr double kDelta2Cutoff = 1e6;

inline Delta2Estimate delta2_estimate(const YoungFunction& phi, std::span<const double> grid) {
    if (grid.empty()) throw std::invalid_argument("delta2_estimate: grid must be nonempty");
    Delta2Estimate out{1.0, false, {}};
    if (phi.family() == YoungFamily::Zero) {
        out.ratios.assign(grid.size(), 1.0);
        return out;
    }
    double sup = 0.0;
    for (double t : grid) {
        if (!(t > 0.0)) throw std::domain_error("delta2_estimate: grid points must be positive");
        if (phi(t) <= 0.0) {
            out.ratios.push_back(std::nan(""));
            continue;
        }
        const double r = phi.doubling_ratio(t);
        out.ratios.push_back(r);
        sup = std::max(sup, r);
        if (!(r <= kDelta2Cutoff)) out.violated = true;
    }
    out.constant = sup;
    return out;
}

inline std::vector<double> log_spaced_grid(double lo, double hi, std::size_t points) {
    if (!(lo > 0.0 && hi > lo) || points < 2) throw std::invalid_argument("log_spaced_grid: bad range");
    std::vector<double> g(points);
    const double step = std::log(hi / lo) / static_cast<double>(points - 1);
    for (std::size_t k = 0; k < points; ++k) g[k] = lo * std::exp(step * static_cast<double>(k));
    return g;
}

// Per-n sample mean of |x|^q over the centered normalized aggregates.
inline std::vector<double> ui_statistics(std::span<const EmpiricalSample> aggregates, double q) {
    if (!(q > 1.0)) throw std::domain_error("ui diagnostic exponent must exceed 1");
    std::vector<double> out;
    out.reserve(aggregates.size());
    for (const auto& s : aggregates) {
        double acc = 0.0;
        for (double v : s.values()) acc += std::pow(std::abs(v), q);
        out.push_back(acc / static_cast<double>(s.size()));
    }
    return out;
}

// sup over n of the phi-moment with phi(t) = t^q.
inline double ui_diagnostic(std::span<const EmpiricalSample> aggregates, double q) {
    const auto stats = ui_statistics(aggregates, q);
    double sup = 0.0;
    for (double v : stats) sup = std::max(sup, v);
    return sup;
}

// Per n: fraction of replications with |A_n - m_n| > epsilon.
inline std::vector<double> wlln_diagnostic(std::span<const EmpiricalSample> aggregates, std::span<const double> means,
                                           double epsilon) {
    if (!(epsilon > 0.0)) throw std::domain_error("wlln_diagnostic: epsilon must be positive");
    if (aggregates.size() != means.size()) throw std::invalid_argument("wlln_diagnostic: size mismatch");
    std::vector<double> out;
    out.reserve(aggregates.size());
    for (std::size_t i = 0; i < aggregates.size(); ++i) {
        std::size_t hits = 0;
        for (double v : aggregates[i].values())
            if (std::abs(v - means[i]) > epsilon) ++hits;
        out.push_back(static_cast<double>(hits) / static_cast<double>(aggregates[i].size()));
    }
    return out;
}

} // namespace poolrisk
