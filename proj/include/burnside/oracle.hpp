#pragma once

// Brute-force ground truth for small pattern groups and multiset towers:
// exact class counts two ways (Burnside's lemma and conjugation closure),
// the level-ratio bounds, exact stationary moments of the level statistic,
// and the advisory Higman band for estimates too large to enumerate.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "burnside/estimator.hpp"
#include "burnside/field.hpp"
#include "burnside/multiset.hpp"
#include "burnside/pattern.hpp"
#include "burnside/union_find.hpp"

namespace burnside {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline constexpr std::uint64_t kEnumerationGuard = 1'000'000;

/// Thrown when an enumeration would exceed its element guard.
class GuardExceeded : public std::length_error {
  public:
    GuardExceeded(const std::string& what, std::uint64_t needed, std::uint64_t guard)
        : std::length_error(what + " needs " + std::to_string(needed) + " elements, guard is " + std::to_string(guard)),
          needed_(needed),
          guard_(guard) {}
    std::uint64_t needed() const noexcept { return needed_; }
    std::uint64_t guard() const noexcept { return guard_; }

  private:
    std::uint64_t needed_;
    std::uint64_t guard_;
};

/// q^e, or nullopt past `cap`.
inline std::optional<std::uint64_t> checked_power(std::uint64_t q, std::size_t e, std::uint64_t cap) {
    std::uint64_t v = 1;
    for (std::size_t t = 0; t < e; ++t) {
        if (v > cap / q) return std::nullopt;
        v *= q;
    }
    return v;
}

inline std::uint64_t group_order_within_guard(const ClosedPositionSet& J, std::uint32_t q, std::uint64_t guard) {
    const auto order = checked_power(q, J.size(), guard);
    if (!order) {
        // Report the true size when it fits, else saturate.
        const auto big = checked_power(q, J.size(), UINT64_MAX);
        throw GuardExceeded("enumerating U_J with |J| = " + std::to_string(J.size()) + " over F_" + std::to_string(q),
                            big.value_or(UINT64_MAX), guard);
    }
    return *order;
}

/// d(g) for every g in U_J, indexed by encode().
inline std::vector<std::uint32_t> centralizer_dimensions(const ClosedPositionSet& J, std::uint32_t q,
                                                         std::uint64_t guard = kEnumerationGuard) {
    const std::uint64_t order = group_order_within_guard(J, q, guard);
    CentralizerSolver solver(J, PrimeField(q));
    std::vector<std::uint32_t> dims(order);
    for (std::uint64_t c = 0; c < order; ++c) dims[c] = static_cast<std::uint32_t>(solver.dimension(decode(c, J, q)));
    return dims;
}

struct ExactCount {
    int n = 0;
    std::uint32_t q = 0;
    std::size_t positions = 0;  // |J|, so |U_J| = q^|J|
    std::uint64_t k = 0;
    /// Number of classes of each size, keyed by log_q |O|.
    std::map<int, std::uint64_t> class_size_profile;
    std::uint64_t burnside_count = 0;
    std::uint64_t partition_count = 0;
    /// Every class has exactly q^(|J| - d(x)) elements.
    bool orbit_stabilizer_consistent = true;
};

/// k(U_J) = (1/|U_J|) sum_g |C(g)|, cross-checked against the number of
/// conjugation-closure classes (union-find over conjugation by the
/// elementary generators I + E_ab, (a,b) in J).
inline ExactCount exact_count_conjugacy(const ClosedPositionSet& J, std::uint32_t q,
                                        std::uint64_t guard = kEnumerationGuard) {
    const std::uint64_t order = group_order_within_guard(J, q, guard);
    const std::vector<std::uint32_t> dims = centralizer_dimensions(J, q, guard);

    std::uint64_t centralizer_total = 0;
    for (auto d : dims) centralizer_total += *checked_power(q, d, UINT64_MAX);
    if (centralizer_total % order != 0) throw std::logic_error("Burnside sum not divisible by the group order");

    std::vector<PatternElement> gens;
    std::vector<PatternElement> gen_inverses;
    for (const Position pos : J.positions()) {
        gens.push_back(elementary(J.n(), q, pos, {1}));
        gen_inverses.push_back(inverse(gens.back()));
    }
    DisjointSets classes(order);
    for (std::uint64_t c = 0; c < order; ++c) {
        const PatternElement x = decode(c, J, q);
        for (std::size_t t = 0; t < gens.size(); ++t)
            classes.unite(c, encode(multiply(multiply(gens[t], x), gen_inverses[t]), J));
    }

    ExactCount out;
    out.n = J.n();
    out.q = q;
    out.positions = J.size();
    out.burnside_count = centralizer_total / order;
    out.partition_count = classes.set_count();
    if (out.burnside_count != out.partition_count)
        throw std::logic_error("Burnside count " + std::to_string(out.burnside_count) + " != partition count " +
                               std::to_string(out.partition_count));
    out.k = out.burnside_count;

    std::vector<char> root_done(order, 0);
    for (std::uint64_t c = 0; c < order; ++c) {
        const std::size_t size = classes.set_size(c);
        const int exponent = static_cast<int>(J.size()) - static_cast<int>(dims[c]);
        if (checked_power(q, static_cast<std::size_t>(exponent), UINT64_MAX) != size)
            out.orbit_stabilizer_consistent = false;
        const std::size_t root = classes.find(c);
        if (!root_done[root]) {
            root_done[root] = 1;
            ++out.class_size_profile[exponent];
        }
    }
    return out;
}

/// Exact moments of q K_m(T_m) with T_m stationary for the H_m chain.
struct LevelMoments {
    int m = 0;
    std::uint64_t k_previous = 0;  // k(H_{m-1})
    std::uint64_t k_current = 0;   // k(H_m)
    Rational mean;                 // E[q K_m(T_m)]
    Rational second_moment;        // E[(q K_m(T_m))^2]
    Rational variance;
    Rational exact_ratio;          // k(H_{m-1}) / k(H_m)

    bool unbiased() const { return mean == exact_ratio; }
    /// sqrt(Var) <= q^2 E, checked as Var <= q^4 E^2 (both sides >= 0).
    bool corollary_holds(std::uint32_t q) const {
        const Rational q4 = Rational(BigInt(q) * q * q * q);
        return variance <= q4 * mean * mean;
    }
};

inline LevelMoments level_moments(const NestedSequence& seq, int m, std::uint32_t q,
                                  std::uint64_t guard = kEnumerationGuard) {
    const ClosedPositionSet& Jm = seq.set(m);
    const ClosedPositionSet& Jp = seq.set(m - 1);
    const std::uint64_t order = group_order_within_guard(Jm, q, guard);
    const PrimeField f(q);
    CentralizerSolver cur(Jm, f);
    CentralizerSolver prev(Jp, f);

    LevelMoments out;
    out.m = m;
    out.k_current = exact_count_conjugacy(Jm, q, guard).k;
    out.k_previous = exact_count_conjugacy(Jp, q, guard).k;
    out.exact_ratio = Rational(BigInt(out.k_previous), BigInt(out.k_current));

    // pi(g) = |C_{H_m}(g)| / (k(H_m) |H_m|)
    const Rational norm = Rational(BigInt(1), BigInt(out.k_current) * order);
    const Position added = seq.added(m);
    for (std::uint64_t c = 0; c < order; ++c) {
        const PatternElement g = decode(c, Jm, q);
        if (g.at(added).value != 0) continue;
        const std::size_t dm = cur.dimension(g);
        const std::size_t dp = prev.dimension(g);
        const LevelStatistic stat = level_statistic(true, dp, dm);
        const Rational pi = norm * Rational(BigInt(*checked_power(q, dm, UINT64_MAX)));
        const Rational weight = Rational(BigInt(q), BigInt(*checked_power(q, static_cast<std::size_t>(stat.exponent), UINT64_MAX)));
        out.mean += pi * weight;
        out.second_moment += pi * weight * weight;
    }
    out.variance = out.second_moment - out.mean * out.mean;
    return out;
}

struct Theorem2Row {
    int m = 0;
    std::uint64_t k_previous = 0;
    std::uint64_t k_current = 0;
    Rational ratio;  // k(H_m) / k(H_{m-1})
    bool within_bounds = false;
};

struct Theorem2Report {
    int n = 0;
    std::uint32_t q = 0;
    std::vector<std::uint64_t> counts;  // k(H_0) .. k(H_N)
    std::vector<Theorem2Row> rows;
    bool all_pass = true;
};

/// q^{-1} <= k(H_m) / k(H_{m-1}) <= q^3 for every level of the tower.
inline Theorem2Report verify_theorem2(int n, std::uint32_t q, std::uint64_t guard = kEnumerationGuard) {
    const NestedSequence seq(n);
    Theorem2Report rep;
    rep.n = n;
    rep.q = q;
    group_order_within_guard(seq.set(seq.levels()), q, guard);
    for (int m = 0; m <= seq.levels(); ++m) rep.counts.push_back(exact_count_conjugacy(seq.set(m), q, guard).k);
    const Rational lower(BigInt(1), BigInt(q));
    const Rational upper(BigInt(q) * q * q);
    for (int m = 1; m <= seq.levels(); ++m) {
        Theorem2Row row;
        row.m = m;
        row.k_previous = rep.counts[static_cast<std::size_t>(m - 1)];
        row.k_current = rep.counts[static_cast<std::size_t>(m)];
        row.ratio = Rational(BigInt(row.k_current), BigInt(row.k_previous));
        row.within_bounds = lower <= row.ratio && row.ratio <= upper;
        rep.all_pass = rep.all_pass && row.within_bounds;
        rep.rows.push_back(row);
    }
    return rep;
}

struct Corollary41Report {
    int n = 0;
    std::uint32_t q = 0;
    std::vector<LevelMoments> levels;
    bool all_pass = true;       // std <= q^2 mean at every level
    bool all_unbiased = true;   // mean == k(H_{m-1}) / k(H_m) at every level
};

/// Exact stationary variance bound for level m, or every level when m == 0.
inline Corollary41Report verify_corollary41(int n, std::uint32_t q, int m = 0, std::uint64_t guard = kEnumerationGuard) {
    const NestedSequence seq(n);
    Corollary41Report rep;
    rep.n = n;
    rep.q = q;
    const int first = m == 0 ? 1 : m;
    const int last = m == 0 ? seq.levels() : m;
    for (int level = first; level <= last; ++level) {
        LevelMoments lm = level_moments(seq, level, q, guard);
        rep.all_pass = rep.all_pass && lm.corollary_holds(q);
        rep.all_unbiased = rep.all_unbiased && lm.unbiased();
        rep.levels.push_back(std::move(lm));
    }
    return rep;
}

/// Exact stationary expectation of the multiset level-i weight in two forms:
/// the closed form (i+1) / (k c) and the stabilizer form of the general
/// tower, against C(i+k-1, k-1) / C(i+k, k-1).
struct MultisetLevelIdentity {
    int level = 0;
    int k = 0;
    Rational closed_form_mean;
    Rational stabilizer_form_mean;
    Rational exact_ratio;

    bool holds() const { return closed_form_mean == exact_ratio && stabilizer_form_mean == exact_ratio; }
};

inline MultisetLevelIdentity multiset_level_identity(int i, int k, std::uint64_t guard = kEnumerationGuard) {
    const int n = i + 1;
    const auto states = checked_power(static_cast<std::uint64_t>(k), static_cast<std::size_t>(n), guard);
    if (!states) throw GuardExceeded("enumerating C_k^n", UINT64_MAX, guard);
    auto factorial = [](int v) {
        BigInt r = 1;
        for (int t = 2; t <= v; ++t) r *= t;
        return r;
    };
    const BigInt orbits_upper(exact_multiset_count(n, k));
    const BigInt orbits_lower(exact_multiset_count(i, k));
    const BigInt n_fact = factorial(n);

    MultisetLevelIdentity out;
    out.level = i;
    out.k = k;
    out.exact_ratio = Rational(orbits_lower, orbits_upper);
    std::vector<int> e(static_cast<std::size_t>(n), 1);
    for (std::uint64_t code = 0; code < *states; ++code) {
        std::uint64_t c = code;
        for (auto& v : e) {
            v = static_cast<int>(c % static_cast<std::uint64_t>(k)) + 1;
            c /= static_cast<std::uint64_t>(k);
        }
        const TupleState x(k, e);
        const auto counts = x.level_counts();
        BigInt stab_upper = 1;
        for (int cnt : counts) stab_upper *= factorial(cnt);
        auto lower_counts = counts;
        --lower_counts[static_cast<std::size_t>(e.back())];
        BigInt stab_lower = 1;
        for (int cnt : lower_counts) stab_lower *= factorial(cnt);
        // pi(x) = |Stab(x)| / (z |S_n|)
        const Rational pi(stab_upper, orbits_upper * n_fact);
        const int same = counts[static_cast<std::size_t>(e.back())];
        out.closed_form_mean += pi * Rational(BigInt(n), BigInt(k) * same);
        out.stabilizer_form_mean += pi * Rational(BigInt(n) * stab_lower, stab_upper * k);
    }
    return out;
}

struct HigmanReport {
    bool applicable = false;
    int n = 0;
    double log_count = 0.0;
    double ratio = 0.0;             // log_q k / n^2
    double lower_reference = 1.0 / 12.0;
    double upper_reference = 0.25;
    double refined_reference = 0.0; // (n + 6) / (12 n)
    bool within_band = false;       // lower * 0.8 <= ratio <= upper, advisory
};

/// Where log_q k / n^2 sits relative to the Higman reference slopes.
/// Advisory only; skipped for n < 3 and for invalid estimates.
inline HigmanReport verify_higman_band(const LogCountEstimate& est) {
    HigmanReport rep;
    rep.n = est.n;
    if (est.n >= 1) rep.refined_reference = (est.n + 6.0) / (12.0 * est.n);
    if (est.problem != "unitriangular" || est.n < 3 || !est.valid()) return rep;
    rep.applicable = true;
    rep.log_count = *est.log_count;
    rep.ratio = rep.log_count / (static_cast<double>(est.n) * est.n);
    rep.within_band = rep.ratio >= 0.8 * rep.lower_reference && rep.ratio <= rep.upper_reference;
    return rep;
}

}  // namespace burnside
