#pragma once

// JSON experiment configs. Schema:
//
//   {
//     "experiment":  "uel" | "premium" | "ratio" | "worst-case" | "diagnostics",
//     "marginal":    {"family": "bernoulli", "params": {"p": 0.1}},
//     "alternative": {...},                  // Z for ratio / worst-case, defaults to marginal
//     "weights":     {"scheme": "constant" | "power" (beta) | "geometric" (r) | "explicit" (values)},
//     "measure":     {"kind": "mean" | "var" | "es" | "distortion", "alpha": 0.95,
//                     "distortion": {"family": "power", "gamma": 0.5}, "C": 1.0},
//     "n_grid": [100, 1000, 10000], "replications": 2000, "seed": 20261016,
//     "epsilon": 0.1, "p": 1, "q": 2, "tolerance": 0.1,
//     "young": {"family": "power", "p": 2}
//   }
//
// Marginal params: bernoulli {p}, exponential {rate}, pareto {tail, scale},
// uniform {lo, hi}, point_mass {c}. Distortion families: identity,
// power {gamma}, proportional_hazard {gamma}, var_indicator {alpha},
// es_clamp {alpha}. Young families: zero, power {p}, exp_minus_one.

#include "poolrisk/errors.hpp"
#include "poolrisk/experiments.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

namespace poolrisk {

using Json = nlohmann::json;

inline constexpr std::uint64_t kDefaultSeed = 20261016;

namespace detail {

inline void allow_keys(const Json& obj, std::string_view where, std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (auto k : keys) known = known || key == k;
        if (!known) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
}

inline double number(const Json& obj, std::string_view where, const char* key) {
    if (!obj.contains(key)) throw ConfigError(std::string(where) + ": missing '" + key + "'");
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(std::string(where) + "." + key + ": expected a number");
    return v.get<double>();
}

inline double number_or(const Json& obj, std::string_view where, const char* key, double fallback) {
    return obj.contains(key) ? number(obj, where, key) : fallback;
}

inline std::string text(const Json& obj, std::string_view where, const char* key) {
    if (!obj.contains(key) || !obj.at(key).is_string())
        throw ConfigError(std::string(where) + ": missing string '" + key + "'");
    return obj.at(key).get<std::string>();
}

inline std::uint64_t unsigned_integer(const Json& v, std::string_view where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError(std::string(where) + ": expected a nonnegative integer");
}

// Factory calls throw domain_error on out-of-range parameters.
template <class F>
auto build(std::string_view where, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string(where) + ": " + e.what());
    }
}

inline MarginalDistribution parse_marginal(const Json& j, std::string_view where) {
    allow_keys(j, where, {"family", "params"});
    const auto family = text(j, where, "family");
    const Json params = j.contains("params") ? j.at("params") : Json::object();
    const std::string pw = std::string(where) + ".params";
    return build(where, [&] {
        if (family == "bernoulli") {
            allow_keys(params, pw, {"p"});
            return MarginalDistribution::bernoulli(number(params, pw, "p"));
        }
        if (family == "exponential") {
            allow_keys(params, pw, {"rate"});
            return MarginalDistribution::exponential(number(params, pw, "rate"));
        }
        if (family == "pareto") {
            allow_keys(params, pw, {"tail", "scale"});
            return MarginalDistribution::pareto(number(params, pw, "tail"), number_or(params, pw, "scale", 1.0));
        }
        if (family == "uniform") {
            allow_keys(params, pw, {"lo", "hi"});
            return MarginalDistribution::uniform(number(params, pw, "lo"), number(params, pw, "hi"));
        }
        if (family == "point_mass") {
            allow_keys(params, pw, {"c"});
            return MarginalDistribution::point_mass(number(params, pw, "c"));
        }
        throw ConfigError(std::string(where) + ": unknown family '" + family + "'");
    });
}

inline WeightScheme parse_weights(const Json& j) {
    constexpr std::string_view where = "weights";
    allow_keys(j, where, {"scheme", "beta", "r", "values"});
    const auto scheme = text(j, where, "scheme");
    return build(where, [&] {
        if (scheme == "constant") return WeightScheme::constant();
        if (scheme == "power") return WeightScheme::power_growth(number(j, where, "beta"));
        if (scheme == "geometric") return WeightScheme::geometric(number(j, where, "r"));
        if (scheme == "explicit") {
            if (!j.contains("values") || !j.at("values").is_array()) throw ConfigError("weights: missing array 'values'");
            std::vector<double> values;
            for (const auto& v : j.at("values")) {
                if (!v.is_number()) throw ConfigError("weights.values: expected numbers");
                values.push_back(v.get<double>());
            }
            return WeightScheme::explicit_weights(std::move(values));
        }
        throw ConfigError("weights: unknown scheme '" + scheme + "'");
    });
}

inline DistortionFunction parse_distortion(const Json& j) {
    constexpr std::string_view where = "measure.distortion";
    allow_keys(j, where, {"family", "gamma", "alpha"});
    const auto family = text(j, where, "family");
    return build(where, [&] {
        if (family == "identity") return DistortionFunction::identity();
        if (family == "power") return DistortionFunction::power(number(j, where, "gamma"));
        if (family == "proportional_hazard") return DistortionFunction::proportional_hazard(number(j, where, "gamma"));
        if (family == "var_indicator") return DistortionFunction::var_indicator(number(j, where, "alpha"));
        if (family == "es_clamp") return DistortionFunction::es_clamp(number(j, where, "alpha"));
        throw ConfigError(std::string(where) + ": unknown family '" + family + "'");
    });
}

inline RiskMeasureSpec parse_measure(const Json& j) {
    constexpr std::string_view where = "measure";
    allow_keys(j, where, {"kind", "alpha", "distortion", "C"});
    const auto kind = text(j, where, "kind");
    return build(where, [&] {
        if (kind == "mean") return RiskMeasureSpec::mean();
        if (kind == "var") return RiskMeasureSpec::var(number(j, where, "alpha"));
        if (kind == "es") return RiskMeasureSpec::es(number(j, where, "alpha"));
        if (kind == "distortion") {
            if (!j.contains("distortion")) throw ConfigError("measure: distortion kind needs 'distortion'");
            return RiskMeasureSpec::distortion(parse_distortion(j.at("distortion")), number_or(j, where, "C", 1.0));
        }
        throw ConfigError("measure: unknown kind '" + kind + "'");
    });
}

inline YoungFunction parse_young(const Json& j) {
    constexpr std::string_view where = "young";
    allow_keys(j, where, {"family", "p"});
    const auto family = text(j, where, "family");
    return build(where, [&] {
        if (family == "zero") return YoungFunction::zero();
        if (family == "power") return YoungFunction::power(number(j, where, "p"));
        if (family == "exp_minus_one") return YoungFunction::exp_minus_one();
        throw ConfigError("young: unknown family '" + family + "'");
    });
}

inline Json marginal_json(const MarginalDistribution& d) {
    switch (d.family()) {
    case Family::Bernoulli: return {{"family", "bernoulli"}, {"params", {{"p", d.param1()}}}};
    case Family::Exponential: return {{"family", "exponential"}, {"params", {{"rate", d.param1()}}}};
    case Family::Pareto: return {{"family", "pareto"}, {"params", {{"tail", d.param1()}, {"scale", d.param2()}}}};
    case Family::Uniform: return {{"family", "uniform"}, {"params", {{"lo", d.param1()}, {"hi", d.param2()}}}};
    case Family::PointMass: return {{"family", "point_mass"}, {"params", {{"c", d.param1()}}}};
    }
    return {};
}

inline Json weights_json(const WeightScheme& w) {
    switch (w.family()) {
    case WeightFamily::Constant: return {{"scheme", "constant"}};
    case WeightFamily::PowerGrowth: return {{"scheme", "power"}, {"beta", w.parameter()}};
    case WeightFamily::Geometric: return {{"scheme", "geometric"}, {"r", w.parameter()}};
    case WeightFamily::Explicit: {
        const auto v = w.explicit_values();
        return {{"scheme", "explicit"}, {"values", std::vector<double>(v.begin(), v.end())}};
    }
    }
    return {};
}

inline Json measure_json(const RiskMeasureSpec& m) {
    switch (m.kind()) {
    case MeasureKind::Mean: return {{"kind", "mean"}};
    case MeasureKind::VaR: return {{"kind", "var"}, {"alpha", m.alpha()}};
    case MeasureKind::ES: return {{"kind", "es"}, {"alpha", m.alpha()}};
    case MeasureKind::Distortion: {
        const auto& h = m.distortion_function();
        Json d{{"family", std::string(to_string(h.family()))}};
        switch (h.family()) {
        case DistortionFamily::Power:
        case DistortionFamily::ProportionalHazard: d["gamma"] = h.parameter(); break;
        case DistortionFamily::VaRIndicator:
        case DistortionFamily::ESClamp: d["alpha"] = h.parameter(); break;
        case DistortionFamily::Identity: break;
        }
        return {{"kind", "distortion"}, {"distortion", d}, {"C", m.loading()}};
    }
    }
    return {};
}

} // namespace detail

inline std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) {
    for (auto k : {ExperimentKind::UelDecay, ExperimentKind::PremiumConvergence, ExperimentKind::RiskRatio,
                   ExperimentKind::WorstCaseRatio, ExperimentKind::Diagnostics})
        if (to_string(k) == name) return k;
    return std::nullopt;
}

// Parses and validates a config. `expected` is the CLI subcommand; when the
// file names an experiment it must agree. Raises ConfigError, or RefusalError
// for divergence conditions.
inline ExperimentConfig parse_config_json(const Json& j, std::optional<ExperimentKind> expected = std::nullopt) {
    detail::allow_keys(j, "config", {"experiment", "marginal", "alternative", "weights", "measure", "n_grid",
                                     "replications", "seed", "epsilon", "p", "q", "tolerance", "young"});
    std::optional<ExperimentKind> kind = expected;
    if (j.contains("experiment")) {
        if (!j.at("experiment").is_string()) throw ConfigError("config.experiment: expected a string");
        const auto named = parse_experiment_kind(j.at("experiment").get<std::string>());
        if (!named) throw ConfigError("config.experiment: unknown experiment '" + j.at("experiment").get<std::string>() + "'");
        if (expected && *expected != *named)
            throw ConfigError("config names experiment '" + std::string(to_string(*named)) + "' but the subcommand is '" +
                              std::string(to_string(*expected)) + "'");
        kind = named;
    }
    if (!kind) throw ConfigError("config: no experiment kind given");
    if (!j.contains("marginal")) throw ConfigError("config: missing 'marginal'");
    if (!j.contains("measure")) throw ConfigError("config: missing 'measure'");

    ExperimentConfig cfg{*kind, detail::parse_marginal(j.at("marginal"), "marginal"), std::nullopt,
                         j.contains("weights") ? detail::parse_weights(j.at("weights")) : WeightScheme::constant(),
                         detail::parse_measure(j.at("measure")),
                         {100, 1000, 10000},
                         default_replications(*kind),
                         SeedSpec{kDefaultSeed},
                         0.1,
                         1.0,
                         2.0,
                         std::nullopt,
                         default_tolerance(*kind)};
    if (j.contains("alternative")) cfg.alternative = detail::parse_marginal(j.at("alternative"), "alternative");
    if (j.contains("n_grid")) {
        if (!j.at("n_grid").is_array()) throw ConfigError("config.n_grid: expected an array");
        cfg.n_grid.clear();
        for (const auto& v : j.at("n_grid")) cfg.n_grid.push_back(detail::unsigned_integer(v, "config.n_grid"));
    }
    if (j.contains("replications")) cfg.replications = detail::unsigned_integer(j.at("replications"), "config.replications");
    if (j.contains("seed")) cfg.seed = {detail::unsigned_integer(j.at("seed"), "config.seed")};
    cfg.epsilon = detail::number_or(j, "config", "epsilon", cfg.epsilon);
    cfg.moment_p = detail::number_or(j, "config", "p", cfg.moment_p);
    cfg.ui_exponent = detail::number_or(j, "config", "q", cfg.ui_exponent);
    cfg.tolerance = detail::number_or(j, "config", "tolerance", cfg.tolerance);
    if (j.contains("young")) cfg.young = detail::parse_young(j.at("young"));

    try {
        validate(cfg);
    } catch (const std::domain_error& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

inline ExperimentConfig parse_config(const std::filesystem::path& path,
                                     std::optional<ExperimentKind> expected = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("malformed config " + path.string() + ": " + e.what());
    }
    return parse_config_json(j, expected);
}

// Normalized form with every default filled in; keys come out sorted, so the
// dump is stable under key reordering in the source file.
inline Json to_json(const ExperimentConfig& cfg) {
    Json j{{"experiment", std::string(to_string(cfg.kind))},
           {"marginal", detail::marginal_json(cfg.marginal)},
           {"weights", detail::weights_json(cfg.weights)},
           {"measure", detail::measure_json(cfg.measure)},
           {"n_grid", cfg.n_grid},
           {"replications", cfg.replications},
           {"seed", cfg.seed.master_seed},
           {"epsilon", cfg.epsilon},
           {"p", cfg.moment_p},
           {"q", cfg.ui_exponent},
           {"tolerance", cfg.tolerance}};
    if (cfg.alternative) j["alternative"] = detail::marginal_json(*cfg.alternative);
    if (cfg.young) {
        Json y{{"family", std::string(to_string(cfg.young->family()))}};
        if (cfg.young->family() == YoungFamily::Power) y["p"] = cfg.young->exponent();
        j["young"] = y;
    }
    return j;
}

// FNV-1a 64 of the canonical dump, as 16 hex digits.
inline std::string config_digest(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : to_json(cfg).dump()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

} // namespace poolrisk
