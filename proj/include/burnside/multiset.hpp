#pragma once

// S_n acting on C_k^n (n-tuples over colors 1..k) by permuting coordinates.
// Orbits are multisets of colors, so there are C(n+k-1, k-1) of them.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "burnside/rng.hpp"

namespace burnside {

struct TupleState {
    int k = 1;
    std::vector<int> entries;  // colors in 1..k

    TupleState() = default;
    TupleState(int colors, std::vector<int> values) : k(colors), entries(std::move(values)) {
        if (k < 1) throw std::invalid_argument("alphabet size must be >= 1");
        for (int v : entries)
            if (v < 1 || v > k) throw std::invalid_argument("tuple entry " + std::to_string(v) + " outside [1," +
                                                            std::to_string(k) + "]");
    }

    /// (1, 1, ..., 1)
    static TupleState constant(int n, int k) { return {k, std::vector<int>(static_cast<std::size_t>(n), 1)}; }

    int n() const noexcept { return static_cast<int>(entries.size()); }

    /// N_l(x) for l = 1..k (index 0 unused).
    std::vector<int> level_counts() const {
        std::vector<int> counts(static_cast<std::size_t>(k) + 1, 0);
        for (int v : entries) ++counts[static_cast<std::size_t>(v)];
        return counts;
    }

    bool operator==(const TupleState&) const = default;
};

/// One two-phase Burnside step. Phase 1 draws g uniformly from Stab(x) as an
/// independent uniform permutation of each level set {j : x_j = l}; phase 2
/// colors each cycle of g with an independent uniform color.
inline TupleState multiset_burnside_step(const TupleState& x, RngStream& rng) {
    const std::size_t n = x.entries.size();
    std::vector<std::vector<std::size_t>> level_sets(static_cast<std::size_t>(x.k) + 1);
    for (std::size_t j = 0; j < n; ++j) level_sets[static_cast<std::size_t>(x.entries[j])].push_back(j);

    std::vector<std::size_t> g(n);
    for (auto& set : level_sets) {
        std::vector<std::size_t> image = set;
        for (std::size_t i = image.size(); i > 1; --i) std::swap(image[i - 1], image[rng.below(i)]);
        for (std::size_t i = 0; i < set.size(); ++i) g[set[i]] = image[i];
    }

    std::vector<int> colors(n, 0);
    for (std::size_t start = 0; start < n; ++start) {
        if (colors[start] != 0) continue;
        const int color = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(x.k)));
        for (std::size_t j = start; colors[j] == 0; j = g[j]) colors[j] = color;
    }
    TupleState y;
    y.k = x.k;
    y.entries = std::move(colors);
    return y;
}

/// n / (k * #{j <= n : x_j = x_n}), the level-n importance weight including
/// the group index factor |S_n| / |S_{n-1}| = n.
inline double multiset_statistic(const TupleState& x) {
    if (x.entries.empty()) throw std::invalid_argument("statistic needs a nonempty tuple");
    const int last = x.entries.back();
    int same = 0;
    for (int v : x.entries) same += (v == last);
    return static_cast<double>(x.n()) / (static_cast<double>(x.k) * same);
}

/// C(n+k-1, k-1) in exact integer arithmetic; throws std::overflow_error
/// when the count does not fit in 64 bits.
inline std::uint64_t exact_multiset_count(int n, int k) {
    if (n < 0 || k < 1) throw std::invalid_argument("need n >= 0 and k >= 1");
    const std::uint64_t top = static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(k) - 1;
    std::uint64_t r = std::min<std::uint64_t>(static_cast<std::uint64_t>(k) - 1, static_cast<std::uint64_t>(n));
    std::uint64_t result = 1;
    // result = C(top - r + i, i) after step i; divide out common factors
    // before multiplying so the intermediate never exceeds the final value
    // by more than a factor of i.
    for (std::uint64_t i = 1; i <= r; ++i) {
        std::uint64_t num = top - r + i;
        std::uint64_t den = i;
        const std::uint64_t g1 = std::gcd(result, den);
        result /= g1;
        den /= g1;
        num /= den;  // exact: den divides result * num and is coprime to result
        std::uint64_t next = 0;
        if (__builtin_mul_overflow(result, num, &next))
            throw std::overflow_error("C(" + std::to_string(top) + "," + std::to_string(r) +
                                      ") overflows 64 bits");
        result = next;
    }
    return result;
}

/// ln C(n+k-1, k-1), exact when the count fits in 64 bits.
inline double log_multiset_count(int n, int k) {
    try {
        return std::log(static_cast<double>(exact_multiset_count(n, k)));
    } catch (const std::overflow_error&) {
        return std::lgamma(n + k) - std::lgamma(n + 1) - std::lgamma(k);
    }
}

/// Level i of the multiset tower (1 <= i <= n-1): the chain on C_k^(i+1)
/// under S_(i+1), with the projection that drops the last coordinate.
/// Stabilizer sizes are supplied as logarithms to the generic estimator.
class MultisetLevel {
  public:
    using State = TupleState;

    MultisetLevel(int i, int k) : i_(i), k_(k) {
        if (i < 1) throw std::invalid_argument("multiset level must be >= 1");
        if (k < 1) throw std::invalid_argument("alphabet size must be >= 1");
    }

    int level() const noexcept { return i_; }
    int colors() const noexcept { return k_; }

    State initial_state() const { return TupleState::constant(i_ + 1, k_); }
    void step(State& x, RngStream& rng) const { x = multiset_burnside_step(x, rng); }

    /// log |S_(i+1)| / |S_i|
    double log_group_index() const noexcept { return std::log(static_cast<double>(i_ + 1)); }

    /// log |Stab_(i+1)(x)| = sum_l log N_l(x)!
    double log_stabilizer(const State& x) const {
        double s = 0.0;
        for (int c : x.level_counts()) s += std::lgamma(c + 1.0);
        return s;
    }

    /// log |Stab_i(phi_i(x))|: the same product with the last entry removed.
    double log_projected_stabilizer(const State& x) const {
        auto counts = x.level_counts();
        --counts[static_cast<std::size_t>(x.entries.back())];
        double s = 0.0;
        for (int c : counts) s += std::lgamma(c + 1.0);
        return s;
    }

    /// log |phi_i^{-1}(phi_i(x))| = log k
    double log_fiber_size(const State&) const noexcept { return std::log(static_cast<double>(k_)); }

  private:
    int i_;
    int k_;
};

}  // namespace burnside
