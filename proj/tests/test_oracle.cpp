#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <vector>

#include "burnside/oracle.hpp"

using namespace burnside;

namespace {

// Brute-force centralizer order of g in U_J by enumerating U_J.
std::uint64_t brute_centralizer(const PatternElement& g, const ClosedPositionSet& J, std::uint32_t q) {
    std::uint64_t order = 1;
    for (std::size_t t = 0; t < J.size(); ++t) order *= q;
    std::uint64_t c = 0;
    for (std::uint64_t code = 0; code < order; ++code) {
        const PatternElement h = decode(code, J, q);
        c += multiply(g, h) == multiply(h, g);
    }
    return c;
}

// Level mean and second moment of q K_m from brute-force centralizers and
// the stationary law |C(g)| / (k |H_m|), in exact rationals.
std::pair<Rational, Rational> brute_moments(const NestedSequence& seq, int m, std::uint32_t q) {
    const auto& Jm = seq.set(m);
    const auto& Jp = seq.set(m - 1);
    std::uint64_t order = 1;
    for (std::size_t t = 0; t < Jm.size(); ++t) order *= q;
    std::vector<std::uint64_t> cent(order);
    BigInt total = 0;
    for (std::uint64_t c = 0; c < order; ++c) {
        cent[c] = brute_centralizer(decode(c, Jm, q), Jm, q);
        total += cent[c];
    }
    // total = k |H_m|
    Rational mean = 0, second = 0;
    const Position added = seq.added(m);
    for (std::uint64_t c = 0; c < order; ++c) {
        const PatternElement g = decode(c, Jm, q);
        if (g.at(added).value != 0) continue;
        PatternElement lower = PatternElement::identity(seq.n(), q);
        for (const Position& p : Jp.positions()) lower.set(p, g.at(p));
        const Rational w = Rational(BigInt(q) * brute_centralizer(lower, Jp, q), BigInt(cent[c]));
        const Rational pi = Rational(BigInt(cent[c]), total);
        mean += pi * w;
        second += pi * w * w;
    }
    return {mean, second};
}

}  // namespace

TEST_CASE("small class counts", "[oracle]") {
    CHECK(exact_count_conjugacy(ClosedPositionSet::full(1), 2).k == 1);
    for (std::uint32_t q : {2u, 3u, 5u}) CHECK(exact_count_conjugacy(ClosedPositionSet::full(2), q).k == q);

    const ExactCount u3 = exact_count_conjugacy(ClosedPositionSet::full(3), 2);
    CHECK(u3.k == 5);
    CHECK(u3.burnside_count == u3.partition_count);
    CHECK(u3.orbit_stabilizer_consistent);
    CHECK(u3.class_size_profile == std::map<int, std::uint64_t>{{0, 2}, {1, 3}});
}

TEST_CASE("class counts match the known values", "[oracle]") {
    // k(U_n(F_q)) for n <= 5 are the polynomials q, q^2+q-1, 2q^3+q^2-2q,
    // 5q^4-5q^2+1.
    for (std::uint32_t q : {2u, 3u}) {
        const std::uint64_t Q = q;
        CHECK(exact_count_conjugacy(ClosedPositionSet::full(3), q).k == Q * Q + Q - 1);
        CHECK(exact_count_conjugacy(ClosedPositionSet::full(4), q).k == 2 * Q * Q * Q + Q * Q - 2 * Q);
    }
    CHECK(exact_count_conjugacy(ClosedPositionSet::full(5), 2).k == 61);
    CHECK(exact_count_conjugacy(ClosedPositionSet::full(6), 2).k == 275);
}

TEST_CASE("level ratio bounds", "[oracle]") {
    const Theorem2Report r3 = verify_theorem2(3, 2);
    CHECK(r3.counts == std::vector<std::uint64_t>{1, 2, 4, 5});
    REQUIRE(r3.rows.size() == 3);
    CHECK(r3.rows[0].ratio == Rational(2));
    CHECK(r3.rows[1].ratio == Rational(2));
    CHECK(r3.rows[2].ratio == Rational(5, 4));
    CHECK(r3.all_pass);
    for (auto [n, q] : {std::pair{2, 2u}, {4, 2u}, {5, 2u}, {2, 3u}, {3, 3u}, {4, 3u}}) {
        INFO("n=" << n << " q=" << q);
        const Theorem2Report r = verify_theorem2(n, q);
        CHECK(r.all_pass);
        CHECK(r.rows.size() == static_cast<std::size_t>(n * (n - 1) / 2));
        CHECK(r.counts.back() == exact_count_conjugacy(ClosedPositionSet::full(n), q).k);
    }
}

TEST_CASE("level moments against brute-force centralizers", "[oracle]") {
    for (auto [n, q] : {std::pair{3, 2u}, {4, 2u}, {3, 3u}}) {
        const NestedSequence seq(n);
        for (int m = 1; m <= seq.levels(); ++m) {
            INFO("n=" << n << " q=" << q << " m=" << m);
            const LevelMoments lm = level_moments(seq, m, q);
            const auto [mean, second] = brute_moments(seq, m, q);
            CHECK(lm.mean == mean);
            CHECK(lm.second_moment == second);
            CHECK(lm.unbiased());
            CHECK(lm.corollary_holds(q));
        }
    }
}

TEST_CASE("first level moments in closed form", "[oracle]") {
    for (std::uint32_t q : {2u, 3u, 5u}) {
        const LevelMoments lm = level_moments(NestedSequence(3), 1, q);
        CHECK(lm.mean == Rational(1, q));
        CHECK(lm.variance == Rational(1, q) - Rational(1, q * q));
    }
}

TEST_CASE("variance bound on every small tower", "[oracle]") {
    for (auto [n, q] : {std::pair{2, 2u}, {3, 2u}, {4, 2u}, {5, 2u}, {2, 3u}, {3, 3u}, {4, 3u}}) {
        INFO("n=" << n << " q=" << q);
        const Corollary41Report r = verify_corollary41(n, q);
        CHECK(r.all_pass);
        CHECK(r.all_unbiased);
        CHECK(r.levels.size() == static_cast<std::size_t>(n * (n - 1) / 2));
    }
    const Corollary41Report one = verify_corollary41(4, 2, 3);
    REQUIRE(one.levels.size() == 1);
    CHECK(one.levels[0].m == 3);
}

TEST_CASE("multiset level identities", "[oracle]") {
    for (int i = 1; i <= 5; ++i)
        for (int k = 1; k <= 4; ++k) {
            INFO("i=" << i << " k=" << k);
            const MultisetLevelIdentity id = multiset_level_identity(i, k);
            CHECK(id.holds());
            // Pascal: C(i+k-1, k-1) / C(i+k, k-1) = (i+1) / (i+k)
            CHECK(id.exact_ratio == Rational(i + 1, i + k));
        }
}

TEST_CASE("advisory band", "[oracle]") {
    LogCountEstimate e;
    e.problem = "unitriangular";
    e.n = 16;
    e.q = 2;
    e.log_count = 0.1 * 256;
    const HigmanReport h = verify_higman_band(e);
    CHECK(h.applicable);
    CHECK(h.ratio == Catch::Approx(0.1));
    CHECK(h.within_band);
    CHECK(h.refined_reference == Catch::Approx(22.0 / 192.0));

    e.log_count = 0.3 * 256;
    CHECK_FALSE(verify_higman_band(e).within_band);
    e.n = 2;
    CHECK_FALSE(verify_higman_band(e).applicable);
    e.n = 16;
    e.log_count.reset();
    CHECK_FALSE(verify_higman_band(e).applicable);
}

TEST_CASE("enumeration guard", "[oracle]") {
    try {
        exact_count_conjugacy(ClosedPositionSet::full(16), 2);
        FAIL("expected a guard refusal");
    } catch (const GuardExceeded& e) {
        CHECK(e.needed() == UINT64_MAX);
        CHECK(e.guard() == kEnumerationGuard);
    }
    CHECK_THROWS_AS(exact_count_conjugacy(ClosedPositionSet::full(4), 2, 10), GuardExceeded);
    CHECK_THROWS_AS(verify_theorem2(6, 3), GuardExceeded);
    CHECK_NOTHROW(exact_count_conjugacy(ClosedPositionSet::full(4), 2, 64));
}
