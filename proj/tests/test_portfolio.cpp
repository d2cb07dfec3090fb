#include "poolrisk/portfolio.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

using namespace poolrisk;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using P = Philox4x32;
    CHECK(P::apply({0, 0, 0, 0}, {0, 0}) == P::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(P::apply({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          P::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(P::apply({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          P::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("uniforms are in (0,1), reproducible and roughly uniform") {
    const SeedSpec s{42};
    double sum = 0.0;
    std::size_t low = 0;
    for (std::uint64_t j = 0; j < 200000; ++j) {
        const double u = s.uniform(j, 3);
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        if (u < 0.1) ++low;
    }
    CHECK_THAT(sum / 200000.0, WithinAbs(0.5, 0.003));
    CHECK_THAT(low / 200000.0, WithinAbs(0.1, 0.003));
    CHECK(s.uniform(17, 5) == SeedSpec{42}.uniform(17, 5));
    CHECK(s.uniform(17, 5) != s.uniform(5, 17));
    CHECK(s.derive(1) != s.derive(2));
    CHECK(s.derive(1) == SeedSpec{42}.derive(1));
}

TEST_CASE("Toeplitz ratio examples") {
    CHECK(toeplitz_ratio(WeightScheme::constant(), 100) == 0.01);
    CHECK_THAT(toeplitz_ratio(WeightScheme::power_growth(1.0), 100), WithinRel(2.0 / 101.0, 1e-15));
    CHECK(toeplitz_ratio(WeightScheme::geometric(2.0), 30) >= 0.5);
}

TEST_CASE("Toeplitz ratios vanish for power weights and not for geometric ones") {
    for (double beta : {-0.5, 0.0, 1.0, 2.0}) {
        const auto table = WeightScheme::power_growth(beta).table(100000);
        double prev = INFINITY;
        for (std::size_t n : {10u, 100u, 1000u, 10000u, 100000u}) {
            const double r = table.toeplitz_ratio(n);
            CHECK(r < prev);
            prev = r;
        }
        // beta = -0.5 decays slowest: max weight 1 against a total of about 2 sqrt(n)
        CHECK(prev < 0.005);
    }
    for (std::size_t n = 1; n <= 100; ++n) CHECK(toeplitz_ratio(WeightScheme::constant(), n) == 1.0 / n);
    for (double r : {1.1, 2.0, 5.0}) {
        const auto table = WeightScheme::geometric(r).table(200);
        for (std::size_t n = 1; n <= 200; ++n) CHECK(table.toeplitz_ratio(n) >= (r - 1.0) / r * (1.0 - 1e-14));
    }
}

TEST_CASE("weight validation") {
    CHECK_THROWS_AS(WeightScheme::power_growth(-1.0), std::domain_error);
    CHECK_THROWS_AS(WeightScheme::geometric(1.0), std::domain_error);
    CHECK_THROWS_AS(WeightScheme::explicit_weights({1.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(WeightScheme::geometric(2.0).table(5000), std::domain_error);
    const auto table = WeightScheme::explicit_weights({1.0, 3.0, 2.0}).table(3);
    CHECK(table.total_weight(3) == 6.0);
    CHECK(table.toeplitz_ratio(3) == 0.5);
    CHECK(table.mean_weight(2) == 2.0);
    CHECK_THROWS_AS(table.total_weight(4), std::out_of_range);
}

TEST_CASE("point masses aggregate to their value") {
    const auto d = MarginalDistribution::point_mass(2.5);
    const auto table = WeightScheme::constant().table(64);
    for (auto coupling : {CouplingKind::IID, CouplingKind::Comonotonic}) {
        const auto sim = simulate_aggregate(d, table, 64, coupling, 50, SeedSpec{1});
        for (double a : sim.normalized.values()) CHECK(a == 2.5);
        CHECK(sim.weighted_mean_sum == 64 * 2.5);
    }
}

TEST_CASE("comonotonic aggregate equals the quantile of the shared uniform") {
    const SeedSpec seed{99};
    const std::size_t M = 333;
    const auto u = comonotonic_uniforms(seed, M);
    for (const auto& d : {MarginalDistribution::exponential(1.0), MarginalDistribution::bernoulli(0.1),
                          MarginalDistribution::pareto(2.0, 1.0)}) {
        for (const auto& w : {WeightScheme::constant(), WeightScheme::power_growth(1.0), WeightScheme::geometric(2.0)}) {
            const auto table = w.table(50);
            const auto sim = simulate_aggregate(d, table, 50, CouplingKind::Comonotonic, M, seed);
            std::vector<double> expected(M);
            for (std::size_t j = 0; j < M; ++j) expected[j] = d.quantile(u[j]);
            CHECK(sim.normalized == EmpiricalSample(expected));
        }
    }
}

TEST_CASE("comonotonic uniforms put one draw in each stratum of every block") {
    const std::size_t M = 2000;
    const auto u = comonotonic_uniforms(SeedSpec{5}, M);
    for (std::size_t b = 0; b < kStratificationBlocks; ++b) {
        const std::size_t begin = b * M / kStratificationBlocks, end = (b + 1) * M / kStratificationBlocks;
        const std::size_t size = end - begin;
        std::set<std::size_t> strata;
        for (std::size_t j = begin; j < end; ++j) {
            REQUIRE(u[j] > 0.0);
            REQUIRE(u[j] < 1.0);
            strata.insert(static_cast<std::size_t>(u[j] * static_cast<double>(size)));
        }
        CHECK(strata.size() == size);
    }
}

TEST_CASE("heterogeneous comonotonic marginals") {
    std::vector<MarginalDistribution> ms{MarginalDistribution::exponential(1.0), MarginalDistribution::bernoulli(0.5),
                                         MarginalDistribution::point_mass(1.0)};
    const auto table = WeightScheme::explicit_weights({1.0, 2.0, 3.0}).table(3);
    const SeedSpec seed{8};
    const auto sim = simulate_aggregate(ms, table, 3, CouplingKind::Comonotonic, 40, seed);
    const auto u = comonotonic_uniforms(seed, 40);
    for (std::size_t j = 0; j < 40; ++j)
        CHECK(sim.by_replication[j] == ms[0].quantile(u[j]) + 2.0 * ms[1].quantile(u[j]) + 3.0);
    CHECK(sim.weighted_mean_sum == 1.0 + 1.0 + 3.0);
}

TEST_CASE("IID Bernoulli means concentrate") {
    const auto table = WeightScheme::constant().table(10000);
    const auto sim = simulate_aggregate(MarginalDistribution::bernoulli(0.1), table, 10000, CouplingKind::IID, 1000,
                                        SeedSpec{2024});
    // sd of a single mean is 0.003, so the sample mean of 1000 of them has sd ~ 1e-4
    CHECK_THAT(sim.normalized.sample_mean(), WithinAbs(0.1, 0.01));
    CHECK_THAT(std::sqrt(sim.normalized.sample_variance()), WithinRel(0.003, 0.1));
}

TEST_CASE("simulation is independent of the thread count") {
    const auto table = WeightScheme::power_growth(0.5).table(300);
    for (auto coupling : {CouplingKind::IID, CouplingKind::Comonotonic}) {
        const auto one = simulate_aggregate(MarginalDistribution::exponential(1.0), table, 300, coupling, 501,
                                            SeedSpec{7}, 1);
        for (unsigned threads : {2u, 3u, 4u, 16u}) {
            const auto many = simulate_aggregate(MarginalDistribution::exponential(1.0), table, 300, coupling, 501,
                                                 SeedSpec{7}, threads);
            CHECK(many.aggregate == one.aggregate);
            CHECK(many.by_replication == one.by_replication);
        }
    }
}

TEST_CASE("worst-case aggregate risk") {
    const auto table = WeightScheme::constant().table(100);
    CHECK_THAT(worst_case_aggregate_risk(RiskMeasureSpec::es(0.95), MarginalDistribution::exponential(1.0), table, 100),
               WithinRel(100.0 * (1.0 - std::log(0.05)), 1e-14));
    CHECK(worst_case_aggregate_risk(RiskMeasureSpec::mean(), MarginalDistribution::exponential(4.0), table, 40) == 10.0);
    CHECK_THAT(worst_case_aggregate_risk(RiskMeasureSpec::es(0.95), MarginalDistribution::bernoulli(0.1), table, 10),
               WithinRel(10.0, 1e-14));
    CHECK_THROWS_AS(worst_case_aggregate_risk(RiskMeasureSpec::var(0.95), MarginalDistribution::exponential(1.0), table, 10),
                    std::invalid_argument);
}

TEST_CASE("worst case matches simulated comonotonic copies") {
    const auto table = WeightScheme::power_growth(1.0).table(200);
    const auto Z = MarginalDistribution::exponential(1.0);
    const auto spec = RiskMeasureSpec::es(0.9);
    const auto sim = simulate_aggregate(Z, table, 200, CouplingKind::Comonotonic, 4000, SeedSpec{31});
    CHECK_THAT(evaluate(spec, sim.aggregate), WithinRel(worst_case_aggregate_risk(spec, Z, table, 200), 0.02));
}
