#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "burnside/exact_kernel.hpp"

using namespace burnside;

namespace {

void check_kernel(const FiniteAction& act, std::size_t expected_orbits) {
    const Kernel k = exact_kernel(act);
    const auto labels = orbit_labels(act);
    const auto pi = orbit_stationary(labels);
    CHECK(max_row_sum_error(k) <= 1e-12);
    CHECK(max_detailed_balance_error(k, pi) <= 1e-12);
    CHECK(max_stationarity_error(k, pi) <= 1e-12);

    const auto solved = stationary_distribution(k);
    for (std::size_t x = 0; x < pi.size(); ++x) CHECK(std::abs(solved[x] - pi[x]) <= 1e-12);

    const Kernel lumped = lumped_kernel(k, labels);
    REQUIRE(lumped.size() == expected_orbits);
    const auto flat = stationary_distribution(lumped);
    for (double v : flat) CHECK(std::abs(v - 1.0 / static_cast<double>(expected_orbits)) <= 1e-12);
}

}  // namespace

TEST_CASE("U_3(F_2) conjugation kernel", "[kernel]") {
    const auto J = ClosedPositionSet::full(3);
    const FiniteAction act = conjugation_action(J, 2);
    REQUIRE(act.states == 8);
    check_kernel(act, 5);

    // Class sizes 1,1,2,2,2: masses 1/5 on the central elements, 1/10 else.
    const auto pi = orbit_stationary(orbit_labels(act));
    std::vector<double> sorted = pi;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted[0] == Catch::Approx(0.1));
    CHECK(sorted[5] == Catch::Approx(0.1));
    CHECK(sorted[6] == Catch::Approx(0.2));
    CHECK(sorted[7] == Catch::Approx(0.2));
}

TEST_CASE("multiset action with n = 2, k = 2", "[kernel]") {
    const FiniteAction act = coordinate_permutation_action(2, 2);
    REQUIRE(act.states == 4);
    REQUIRE(act.group_order == 2);
    check_kernel(act, 3);
    // Orbits {11}, {22}, {12, 21}: masses 1/3, 1/3, 1/6, 1/6.
    const auto pi = orbit_stationary(orbit_labels(act));
    CHECK(pi[tuple_index({2, {1, 1}})] == Catch::Approx(1.0 / 3));
    CHECK(pi[tuple_index({2, {2, 2}})] == Catch::Approx(1.0 / 3));
    CHECK(pi[tuple_index({2, {1, 2}})] == Catch::Approx(1.0 / 6));
    CHECK(pi[tuple_index({2, {2, 1}})] == Catch::Approx(1.0 / 6));

    // By hand: from 11 the identity and the swap both fix it; the identity
    // moves to a uniform tuple, the swap to 11 or 22.
    const Kernel k = exact_kernel(act);
    const auto i11 = tuple_index({2, {1, 1}});
    const auto i22 = tuple_index({2, {2, 2}});
    const auto i12 = tuple_index({2, {1, 2}});
    CHECK(k(i11, i11) == Catch::Approx(0.5 * 0.25 + 0.5 * 0.5));
    CHECK(k(i11, i22) == Catch::Approx(0.5 * 0.25 + 0.5 * 0.5));
    CHECK(k(i11, i12) == Catch::Approx(0.125));
    CHECK(k(i12, i12) == Catch::Approx(0.25));
}

TEST_CASE("multiset actions lump to the uniform chain on orbits", "[kernel]") {
    for (int n = 1; n <= 4; ++n)
        for (int k = 1; k <= 3; ++k) {
            INFO("n=" << n << " k=" << k);
            check_kernel(coordinate_permutation_action(n, k), exact_multiset_count(n, k));
        }
}

TEST_CASE("pattern group conjugation actions", "[kernel]") {
    const NestedSequence seq(4);
    for (int m = 0; m <= seq.levels(); ++m) {
        INFO("m=" << m);
        const FiniteAction act = conjugation_action(seq.set(m), 2);
        const auto labels = orbit_labels(act);
        check_kernel(act, *std::max_element(labels.begin(), labels.end()) + 1);
    }
    const FiniteAction u3q3 = conjugation_action(ClosedPositionSet::full(3), 3);
    check_kernel(u3q3, 11);
}

TEST_CASE("centralizer step squared is the two-phase kernel", "[kernel]") {
    for (auto [n, q] : {std::pair{3, 2u}, std::pair{3, 3u}, std::pair{4, 2u}}) {
        INFO("n=" << n << " q=" << q);
        const auto J = ClosedPositionSet::full(n);
        const Kernel one = centralizer_chain_kernel(J, q);
        const Kernel two = one * one;
        const Kernel direct = exact_kernel(conjugation_action(J, q));
        CHECK(max_row_sum_error(one) <= 1e-12);
        double worst = 0.0;
        for (std::size_t x = 0; x < two.size(); ++x)
            for (std::size_t y = 0; y < two.size(); ++y) worst = std::max(worst, std::abs(two(x, y) - direct(x, y)));
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("kernel guard", "[kernel]") {
    const FiniteAction act = coordinate_permutation_action(3, 3);
    CHECK_THROWS_AS(exact_kernel(act, 10), std::length_error);
    CHECK_NOTHROW(exact_kernel(act, 27));
}

TEST_CASE("non-lumpable partition is rejected", "[kernel]") {
    const FiniteAction act = coordinate_permutation_action(2, 2);
    const Kernel k = exact_kernel(act);
    // {11} vs {12, 21, 22}: 12 and 22 send different mass to 11.
    std::vector<std::size_t> bad(4);
    bad[tuple_index({2, {1, 1}})] = 0;
    bad[tuple_index({2, {1, 2}})] = 1;
    bad[tuple_index({2, {2, 1}})] = 1;
    bad[tuple_index({2, {2, 2}})] = 1;
    CHECK_THROWS_AS(lumped_kernel(k, bad), std::runtime_error);
}
