#pragma once

#include "poolrisk/distributions.hpp"
#include "poolrisk/empirical.hpp"
#include "poolrisk/random.hpp"
#include "poolrisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace poolrisk {

enum class WeightFamily { Constant, PowerGrowth, Geometric, Explicit };

inline std::string_view to_string(WeightFamily f) {
    switch (f) {
    case WeightFamily::Constant: return "constant";
    case WeightFamily::PowerGrowth: return "power";
    case WeightFamily::Geometric: return "geometric";
    case WeightFamily::Explicit: return "explicit";
    }
    return "unknown";
}

class WeightTable;

// Portfolio weights lambda_i > 0, i = 1, 2, ...
class WeightScheme {
public:
    static WeightScheme constant() { return WeightScheme(WeightFamily::Constant, 0.0, {}); }

    // lambda_i = i^beta
    static WeightScheme power_growth(double beta) {
        if (!(beta > -1.0) || !std::isfinite(beta)) throw std::domain_error("power weights need beta > -1");
        return WeightScheme(WeightFamily::PowerGrowth, beta, {});
    }

    // lambda_i = r^i
    static WeightScheme geometric(double r) {
        if (!(r > 1.0) || !std::isfinite(r)) throw std::domain_error("geometric weights need r > 1");
        return WeightScheme(WeightFamily::Geometric, r, {});
    }

    static WeightScheme explicit_weights(std::vector<double> values) {
        if (values.empty()) throw std::domain_error("explicit weights must be nonempty");
        for (double v : values)
            if (!(v > 0.0) || !std::isfinite(v)) throw std::domain_error("explicit weights must be positive and finite");
        return WeightScheme(WeightFamily::Explicit, 0.0, std::move(values));
    }

    WeightFamily family() const { return family_; }
    double parameter() const { return param_; }
    std::span<const double> explicit_values() const { return values_; }

    // Largest n for which the weights can be materialized.
    std::size_t max_size() const {
        switch (family_) {
        case WeightFamily::Explicit: return values_.size();
        case WeightFamily::Geometric:
            // keep r^n and the running sum inside double range
            return static_cast<std::size_t>(700.0 / std::log(param_));
        default: return static_cast<std::size_t>(-1);
        }
    }

    // lambda_i, 1-based.
    double weight(std::size_t i) const {
        if (i == 0) throw std::out_of_range("weights are 1-based");
        switch (family_) {
        case WeightFamily::Constant: return 1.0;
        case WeightFamily::PowerGrowth: return std::pow(static_cast<double>(i), param_);
        case WeightFamily::Geometric: return std::pow(param_, static_cast<double>(i));
        case WeightFamily::Explicit:
            if (i > values_.size()) throw std::out_of_range("explicit weights exhausted");
            return values_[i - 1];
        }
        return 1.0;
    }

    WeightTable table(std::size_t n_max) const;

    std::string describe() const {
        std::string s(to_string(family_));
        if (family_ == WeightFamily::PowerGrowth || family_ == WeightFamily::Geometric)
            s += "(" + std::to_string(param_) + ")";
        return s;
    }

    friend bool operator==(const WeightScheme&, const WeightScheme&) = default;

private:
    WeightScheme(WeightFamily f, double param, std::vector<double> values)
        : family_(f), param_(param), values_(std::move(values)) {}

    WeightFamily family_;
    double param_;
    std::vector<double> values_;
};

// First n_max weights with running sums and maxima, so that n * mean weight
// and the Toeplitz ratio are O(1) per n.
class WeightTable {
public:
    WeightTable(const WeightScheme& scheme, std::size_t n_max) {
        if (n_max == 0) throw std::domain_error("weight table needs n_max >= 1");
        if (n_max > scheme.max_size())
            throw std::domain_error(scheme.describe() + " weights cannot be materialized for n = " +
                                    std::to_string(n_max) + " (limit " + std::to_string(scheme.max_size()) + ")");
        weights_.resize(n_max);
        prefix_sum_.resize(n_max);
        prefix_max_.resize(n_max);
        double sum = 0.0;
        double mx = 0.0;
        for (std::size_t i = 0; i < n_max; ++i) {
            weights_[i] = scheme.weight(i + 1);
            sum += weights_[i];
            mx = std::max(mx, weights_[i]);
            prefix_sum_[i] = sum;
            prefix_max_[i] = mx;
        }
    }

    std::size_t capacity() const { return weights_.size(); }
    std::span<const double> weights(std::size_t n) const { return std::span(weights_).first(check(n)); }

    // n * mean weight = sum_{i<=n} lambda_i
    double total_weight(std::size_t n) const { return prefix_sum_[check(n) - 1]; }
    double mean_weight(std::size_t n) const { return total_weight(n) / static_cast<double>(n); }

    // max_{i<=n} lambda_i / sum_{i<=n} lambda_i
    double toeplitz_ratio(std::size_t n) const { return prefix_max_[check(n) - 1] / prefix_sum_[n - 1]; }

private:
    std::size_t check(std::size_t n) const {
        if (n == 0 || n > weights_.size()) throw std::out_of_range("portfolio size outside the weight table");
        return n;
    }

    std::vector<double> weights_;
    std::vector<double> prefix_sum_;
    std::vector<double> prefix_max_;
};

inline WeightTable WeightScheme::table(std::size_t n_max) const { return WeightTable(*this, n_max); }

inline double toeplitz_ratio(const WeightScheme& w, std::size_t n) { return w.table(n).toeplitz_ratio(n); }

enum class CouplingKind { IID, Comonotonic };

inline std::string_view to_string(CouplingKind c) { return c == CouplingKind::IID ? "iid" : "comonotonic"; }

struct AggregateSample {
    EmpiricalSample aggregate;   // S_j = sum_i lambda_i X_ij
    EmpiricalSample normalized;  // A_j = S_j / (n * mean weight)
    std::vector<double> by_replication; // S_j in replication order
    double total_weight;
    double weighted_mean_sum;    // sum_i lambda_i E[X_i]
};

inline constexpr std::size_t kStratificationBlocks = 20;

// Shared uniforms of a comonotonic run. Replications are split into
// contiguous blocks, and each block is stratified on its own: slot j of a
// block of size B gets (pi(j) + V_j) / B with V_j = uniform (seed, j, 0) and
// pi ranking the keys bits (seed, j, 1) within the block. Each block is then
// an independent stratified sample, so batch means over the same blocks
// still give a valid standard error while tail quantiles lose most of their
// O(1/sqrt(M)) sampling noise.
inline std::vector<double> comonotonic_uniforms(const SeedSpec& seed, std::size_t replications,
                                                std::size_t blocks = kStratificationBlocks) {
    blocks = std::clamp<std::size_t>(blocks, 1, std::max<std::size_t>(replications, 1));
    std::vector<double> u(replications);
    std::vector<std::size_t> order;
    std::vector<std::uint64_t> keys;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t begin = b * replications / blocks;
        const std::size_t end = (b + 1) * replications / blocks;
        order.resize(end - begin);
        keys.resize(end - begin);
        for (std::size_t k = 0; k < order.size(); ++k) {
            order[k] = k;
            keys[k] = seed.bits(begin + k, 1);
        }
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t c) { return keys[a] != keys[c] ? keys[a] < keys[c] : a < c; });
        const double size = static_cast<double>(order.size());
        for (std::size_t rank = 0; rank < order.size(); ++rank) {
            const std::size_t j = begin + order[rank];
            u[j] = (static_cast<double>(rank) + seed.uniform(j, 0)) / size;
        }
    }
    return u;
}

// Draws M replications of the weighted aggregate of n losses by inverse
// transform. `marginals` holds either one shared marginal or one per
// component. IID uses uniform (seed, j, i); comonotonic uses
// comonotonic_uniforms(seed, M)[j] for every component. Output is
// independent of `threads`.
inline AggregateSample simulate_aggregate(std::span<const MarginalDistribution> marginals, const WeightTable& weights,
                                          std::size_t n, CouplingKind coupling, std::size_t replications,
                                          const SeedSpec& seed, unsigned threads = 1) {
    if (replications < 2) throw std::invalid_argument("simulate_aggregate: need at least 2 replications");
    if (n == 0) throw std::invalid_argument("simulate_aggregate: n must be >= 1");
    if (marginals.empty() || (marginals.size() != 1 && marginals.size() < n))
        throw std::invalid_argument("simulate_aggregate: need one shared marginal or one per component");
    const bool shared = marginals.size() == 1;
    const auto lambda = weights.weights(n);
    const double total = weights.total_weight(n);

    double weighted_mean_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) weighted_mean_sum += lambda[i] * marginals[shared ? 0 : i].mean();

    std::vector<double> agg(replications), norm(replications);
    const std::vector<double> shared_u =
        coupling == CouplingKind::Comonotonic ? comonotonic_uniforms(seed, replications) : std::vector<double>{};

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            if (coupling == CouplingKind::Comonotonic) {
                const double u = shared_u[j];
                if (shared) {
                    // sum_i lambda_i F^{-1}(u) = total * F^{-1}(u)
                    const double q = marginals[0].quantile(u);
                    agg[j] = total * q;
                    norm[j] = q;
                    continue;
                }
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) s += lambda[i] * marginals[i].quantile(u);
                agg[j] = s;
                norm[j] = s / total;
            } else {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    s += lambda[i] * marginals[shared ? 0 : i].quantile(seed.uniform(j, i));
                agg[j] = s;
                norm[j] = s / total;
            }
        }
    };

    const std::size_t workers = std::clamp<std::size_t>(threads, 1, replications);
    if (workers == 1) {
        work(0, replications);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (replications + workers - 1) / workers;
        for (std::size_t t = 0; t < workers; ++t) {
            const std::size_t b = t * chunk;
            const std::size_t e = std::min(replications, b + chunk);
            if (b < e) pool.emplace_back(work, b, e);
        }
    }

    std::vector<double> ordered(agg);
    return {EmpiricalSample(std::move(agg)), EmpiricalSample(std::move(norm)), std::move(ordered), total,
            weighted_mean_sum};
}

inline AggregateSample simulate_aggregate(const MarginalDistribution& marginal, const WeightTable& weights,
                                          std::size_t n, CouplingKind coupling, std::size_t replications,
                                          const SeedSpec& seed, unsigned threads = 1) {
    return simulate_aggregate(std::span(&marginal, 1), weights, n, coupling, replications, seed, threads);
}

// sup over Y_i ~ Z of R(sum lambda_i Y_i). For law-invariant, positively
// homogeneous, comonotonically additive R the supremum is attained by
// identical copies and equals (n * mean weight) * R(Z).
inline double worst_case_aggregate_risk(const RiskMeasureSpec& spec, const MarginalDistribution& dist,
                                        const WeightTable& weights, std::size_t n) {
    if (spec.kind() == MeasureKind::VaR)
        throw std::invalid_argument("worst-case aggregate risk is not supported for VaR (not coherent)");
    return weights.total_weight(n) * closed_form_risk(spec, dist);
}

} // namespace poolrisk
