#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "burnside/estimator.hpp"
#include "burnside/oracle.hpp"
#include "burnside/run_record.hpp"

using namespace burnside;

namespace {

// Two-state toy chain with a constant weight c = exp(a - b - f).
struct ConstantLevel {
    using State = int;
    double index = 3.0;
    double weight = 0.25;
    State initial_state() const { return 0; }
    void step(State& x, RngStream& rng) const { x = static_cast<int>(rng.below(2)); }
    double log_group_index() const { return std::log(index); }
    double log_stabilizer(const State&) const { return 0.0; }
    double log_projected_stabilizer(const State&) const { return std::log(weight); }
    double log_fiber_size(const State&) const { return 0.0; }
};

}  // namespace

TEST_CASE("batch means on constant and alternating data", "[estimator]") {
    BatchMeans constant(100);
    for (int i = 0; i < 100; ++i) constant.add(2.5);
    CHECK(constant.mean() == 2.5);
    CHECK(constant.reliable());
    CHECK(constant.std_error() == 0.0);

    // Batch b of size 5 holds the value b; batch means 0..19.
    BatchMeans ramp(100);
    for (int b = 0; b < 20; ++b)
        for (int i = 0; i < 5; ++i) ramp.add(b);
    const double sd = std::sqrt(35.0);  // sample sd of 0..19
    CHECK(ramp.std_error() == Catch::Approx(sd / std::sqrt(20.0)));

    BatchMeans tiny(5);
    for (int i = 0; i < 5; ++i) tiny.add(i);
    CHECK_FALSE(tiny.reliable());
    CHECK(tiny.mean() == 2.0);
}

TEST_CASE("constant statistic gives index times constant", "[estimator]") {
    RngStream rng(1);
    const ConstantLevel level;
    const RatioEstimate r = estimate_ratio_generic(level, 10, 1000, rng);
    CHECK(r.value == Catch::Approx(0.75).epsilon(1e-12));
    CHECK(r.std_error == Catch::Approx(0.0).margin(1e-15));
    CHECK(r.zero_fraction == 0.0);
}

TEST_CASE("first level of U_2(F_q) estimates 1/q", "[estimator]") {
    for (std::uint32_t q : {2u, 3u}) {
        const NestedSequence seq(2);
        RngStream rng(10 + q);
        const RatioEstimate r = estimate_ratio_unitriangular(seq, 1, PrimeField(q), 1000, 100000, rng);
        CHECK(std::abs(r.value - 1.0 / q) <= 4.0 * r.std_error);
        CHECK(r.std_error < 0.01);
        CHECK(r.zero_fraction == Catch::Approx(1.0 - 1.0 / q).margin(0.01));
    }
}

TEST_CASE("n = 3, q = 2 level ratios match the oracle", "[estimator]") {
    const NestedSequence seq(3);
    const std::uint32_t q = 2;
    std::vector<std::uint64_t> k;
    for (int m = 0; m <= 3; ++m) k.push_back(exact_count_conjugacy(seq.set(m), q).k);
    REQUIRE(k == std::vector<std::uint64_t>{1, 2, 4, 5});
    for (int m = 1; m <= 3; ++m) {
        RngStream rng = RngStream::for_stream(5, static_cast<std::uint64_t>(m));
        const RatioEstimate r = estimate_ratio_unitriangular(seq, m, PrimeField(q), 10000, 50000, rng);
        const double target = static_cast<double>(k[static_cast<std::size_t>(m - 1)]) / k[static_cast<std::size_t>(m)];
        CHECK(std::abs(r.value - target) <= 3.0 * r.std_error);
    }
}

TEST_CASE("single-sample run is finite but flagged", "[estimator]") {
    const NestedSequence seq(3);
    RngStream rng(6);
    const RatioEstimate r = estimate_ratio_unitriangular(seq, 2, PrimeField(2), 0, 1, rng);
    CHECK(std::isfinite(r.value));
    CHECK_FALSE(r.std_error_reliable);
    CHECK_THROWS_AS(estimate_ratio_unitriangular(seq, 2, PrimeField(2), 0, 0, rng), std::invalid_argument);
    CHECK_THROWS_AS(estimate_ratio_unitriangular(seq, 4, PrimeField(2), 0, 1, rng), std::invalid_argument);
}

TEST_CASE("level value equals its exact rational form", "[estimator]") {
    using boost::multiprecision::cpp_rational;
    const NestedSequence seq(5);
    for (std::uint32_t q : {2u, 3u}) {
        for (int m : {1, 4, 10}) {
            RngStream rng(q * 100 + m);
            const std::uint64_t samples = 997;
            const RatioEstimate r = estimate_ratio_unitriangular(seq, m, PrimeField(q), 50, samples, rng);
            cpp_rational exact = 0;
            std::uint64_t nonzero = 0;
            for (const auto& [t, c] : r.exponent_counts) {
                cpp_rational w = q;
                for (int s = 0; s < t; ++s) w /= q;
                exact += w * c;
                nonzero += c;
            }
            exact /= samples;
            CHECK(std::abs(r.value - static_cast<double>(exact)) <= 1e-12);
            CHECK(r.zero_fraction == Catch::Approx(static_cast<double>(samples - nonzero) / samples));
        }
    }
}

TEST_CASE("U_2(F_3) count estimate is 3", "[estimator]") {
    ChainConfig cfg;
    cfg.burn_in = 1000;
    cfg.samples = 100000;
    cfg.master_seed = 3;
    const LogCountEstimate e = estimate_count(UnitriangularProblem{2, 3}, cfg);
    REQUIRE(e.valid());
    CHECK(std::abs(*e.log_count - 1.0) <= 3.0 * e.aggregate_std_error);
    CHECK(std::pow(3.0, *e.log_count) == Catch::Approx(3.0).epsilon(0.05));
}

TEST_CASE("U_4(F_2) estimate within three aggregate errors of the oracle", "[estimator]") {
    const std::uint64_t exact = exact_count_conjugacy(ClosedPositionSet::full(4), 2).k;
    ChainConfig cfg;
    cfg.burn_in = 10000;
    cfg.samples = 10000;
    cfg.master_seed = 17;
    const LogCountEstimate e = estimate_count(UnitriangularProblem{4, 2}, cfg);
    REQUIRE(e.valid());
    CHECK(e.per_level.size() == 6);
    CHECK(std::abs(*e.log_count - std::log2(static_cast<double>(exact))) <= 3.0 * e.aggregate_std_error);
}

TEST_CASE("estimates do not depend on worker count", "[estimator]") {
    ChainConfig cfg;
    cfg.burn_in = 200;
    cfg.samples = 2000;
    cfg.master_seed = 99;
    cfg.worker_count = 1;
    const LogCountEstimate one = estimate_count(UnitriangularProblem{5, 2}, cfg);
    cfg.worker_count = 4;
    const LogCountEstimate four = estimate_count(UnitriangularProblem{5, 2}, cfg);
    CHECK(without_elapsed(to_json(one)) == without_elapsed(to_json(four)));
    CHECK(*one.log_count == *four.log_count);

    cfg.worker_count = 3;
    const LogCountEstimate ms3 = estimate_count(MultisetProblem{8, 3}, cfg);
    cfg.worker_count = 1;
    const LogCountEstimate ms1 = estimate_count(MultisetProblem{8, 3}, cfg);
    CHECK(without_elapsed(to_json(ms3)) == without_elapsed(to_json(ms1)));
}

TEST_CASE("schedule subsets and validation", "[estimator]") {
    ChainConfig cfg;
    cfg.burn_in = 10;
    cfg.samples = 100;
    cfg.level_schedule = {2, 3};
    const LogCountEstimate e = estimate_count(UnitriangularProblem{3, 2}, cfg);
    CHECK(e.per_level.size() == 2);
    CHECK(e.per_level[0].level == 2);
    cfg.level_schedule = {7};
    CHECK_THROWS_AS(estimate_count(UnitriangularProblem{3, 2}, cfg), std::invalid_argument);
}

TEST_CASE("failed levels invalidate the product", "[estimator]") {
    LogCountEstimate e;
    e.log_base = 2.0;
    RatioEstimate good;
    good.level = 1;
    good.value = 0.5;
    good.std_error = 0.01;
    good.std_error_reliable = true;
    RatioEstimate bad;
    bad.level = 2;
    bad.value = 0.0;
    bad.zero_fraction = 1.0;
    e.per_level = {good, bad};
    detail::combine(e);
    CHECK_FALSE(e.valid());
    REQUIRE(e.failures.size() == 1);
    CHECK(e.failures[0].level == 2);
    CHECK(e.failures[0].zero_fraction == 1.0);
}

TEST_CASE("log-domain product stays finite at paper scale", "[estimator]") {
    LogCountEstimate e;
    e.log_base = 3.0;
    for (int m = 1; m <= 496; ++m) {
        RatioEstimate r;
        r.level = m;
        r.value = 1.0 / 27.0;
        r.std_error = 1e-4;
        r.std_error_reliable = true;
        e.per_level.push_back(r);
    }
    detail::combine(e);
    REQUIRE(e.valid());
    CHECK(*e.log_count == Catch::Approx(3.0 * 496));
    CHECK(std::isfinite(e.aggregate_std_error));
    CHECK(e.aggregate_std_error == Catch::Approx(std::sqrt(496.0) * 27e-4 / std::log(3.0)));
}

TEST_CASE("multiset estimates", "[estimator]") {
    ChainConfig cfg;
    cfg.burn_in = 20;
    cfg.samples = 10000;
    cfg.master_seed = 4;
    const LogCountEstimate trivial = estimate_count(MultisetProblem{1, 5}, cfg);
    REQUIRE(trivial.valid());
    CHECK(trivial.per_level.empty());
    CHECK(*trivial.log_count == Catch::Approx(std::log(5.0)));

    const LogCountEstimate e = estimate_count(MultisetProblem{10, 3}, cfg);
    REQUIRE(e.valid());
    CHECK(e.per_level.size() == 9);
    const double truth = std::log(static_cast<double>(exact_multiset_count(10, 3)));
    CHECK(std::abs(*e.log_count - truth) <= 4.0 * e.aggregate_std_error);
}
