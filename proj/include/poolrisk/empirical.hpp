#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

namespace poolrisk {

// Empirical law of a finite sample: values kept sorted ascending, original
// order discarded.
class EmpiricalSample {
public:
    static EmpiricalSample from_raw(std::span<const double> raw) {
        return EmpiricalSample(std::vector<double>(raw.begin(), raw.end()));
    }

    explicit EmpiricalSample(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) throw std::invalid_argument("empirical sample must be nonempty");
        for (double v : values_)
            if (!std::isfinite(v)) throw std::invalid_argument("empirical sample contains a non-finite value");
        std::sort(values_.begin(), values_.end());
    }

    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t k) const { return values_[k]; }
    double min() const { return values_.front(); }
    double max() const { return values_.back(); }
    bool is_constant() const { return values_.front() == values_.back(); }

    // P(X > x) under the empirical law.
    double survival(double x) const {
        const auto it = std::upper_bound(values_.begin(), values_.end(), x);
        return static_cast<double>(values_.end() - it) / static_cast<double>(size());
    }

    // 1-based index ceil(alpha*M) of the order statistic used for the
    // level-alpha lower quantile. alpha*M within rounding of an integer is
    // snapped to it so that e.g. alpha = 0.7, M = 10 selects the 7th value.
    std::size_t quantile_index(double alpha) const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("quantile level must lie in (0,1)");
        const double t = alpha * static_cast<double>(size());
        const double nearest = std::round(t);
        double k = std::abs(t - nearest) <= 1e-9 * std::max(1.0, t) ? nearest : std::ceil(t);
        k = std::clamp(k, 1.0, static_cast<double>(size()));
        return static_cast<std::size_t>(k);
    }

    double sample_quantile(double alpha) const { return values_[quantile_index(alpha) - 1]; }

    double sample_mean() const {
        if (is_constant()) return values_.front();
        return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(size());
    }

    double sample_variance() const {
        if (size() < 2) return 0.0;
        const double m = sample_mean();
        double ss = 0.0;
        for (double v : values_) ss += (v - m) * (v - m);
        return ss / static_cast<double>(size() - 1);
    }

    // (mean |x|^p)^(1/p)
    double p_norm(double p) const {
        if (!(p >= 1.0)) throw std::domain_error("p_norm: p must be >= 1");
        double acc = 0.0;
        if (p == 1.0) {
            for (double v : values_) acc += std::abs(v);
            return acc / static_cast<double>(size());
        }
        // Scale by the largest magnitude so large p cannot overflow.
        const double scale = std::max(std::abs(values_.front()), std::abs(values_.back()));
        if (scale == 0.0) return 0.0;
        for (double v : values_) acc += std::pow(std::abs(v) / scale, p);
        return scale * std::pow(acc / static_cast<double>(size()), 1.0 / p);
    }

    EmpiricalSample shifted(double m) const {
        std::vector<double> out(values_);
        for (double& v : out) v += m;
        return EmpiricalSample(std::move(out));
    }

    EmpiricalSample scaled(double c) const {
        std::vector<double> out(values_);
        for (double& v : out) v *= c;
        return EmpiricalSample(std::move(out));
    }

    // One value per line, full round-trip precision.
    void write_csv(std::ostream& os) const {
        char buf[32];
        os << "value\n";
        for (double v : values_) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            os << buf << '\n';
        }
    }

    friend bool operator==(const EmpiricalSample&, const EmpiricalSample&) = default;

private:
    std::vector<double> values_;
};

} // namespace poolrisk
