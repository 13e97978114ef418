#pragma once

// Exact transition matrices for small enumerable actions, plus the checks
// run against them: row sums, reversibility, stationarity and lumping onto
// orbits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "burnside/multiset.hpp"
#include "burnside/pattern.hpp"
#include "burnside/union_find.hpp"

namespace burnside {

inline constexpr std::size_t kKernelStateGuard = 5000;

/// G = {0..group_order-1} acting on X = {0..states-1}; act(g, x) = x^g.
struct FiniteAction {
    std::size_t states = 0;
    std::size_t group_order = 0;
    std::function<std::size_t(std::size_t, std::size_t)> act;
};

/// Dense row-stochastic matrix.
class Kernel {
  public:
    explicit Kernel(std::size_t n) : n_(n), p_(n * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t x, std::size_t y) const { return p_[x * n_ + y]; }
    double& operator()(std::size_t x, std::size_t y) { return p_[x * n_ + y]; }

    Kernel operator*(const Kernel& o) const {
        Kernel out(n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t k = 0; k < n_; ++k) {
                const double a = (*this)(i, k);
                if (a == 0.0) continue;
                for (std::size_t j = 0; j < n_; ++j) out(i, j) += a * o(k, j);
            }
        return out;
    }

  private:
    std::size_t n_;
    std::vector<double> p_;
};

/// K(x, y) = sum over g in G_x cap G_y of 1 / (|X_g| |G_x|).
inline Kernel exact_kernel(const FiniteAction& action, std::size_t guard = kKernelStateGuard) {
    if (action.states > guard)
        throw std::length_error("exact kernel refused: " + std::to_string(action.states) + " states exceeds guard " +
                                std::to_string(guard));
    const std::size_t nx = action.states;
    const std::size_t ng = action.group_order;
    std::vector<char> fixes(ng * nx, 0);
    std::vector<std::size_t> fixed_count(ng, 0);
    std::vector<std::size_t> stab_size(nx, 0);
    for (std::size_t g = 0; g < ng; ++g)
        for (std::size_t x = 0; x < nx; ++x)
            if (action.act(g, x) == x) {
                fixes[g * nx + x] = 1;
                ++fixed_count[g];
                ++stab_size[x];
            }
    Kernel k(nx);
    for (std::size_t g = 0; g < ng; ++g) {
        const double w = 1.0 / static_cast<double>(fixed_count[g]);
        for (std::size_t x = 0; x < nx; ++x) {
            if (!fixes[g * nx + x]) continue;
            const double wx = w / static_cast<double>(stab_size[x]);
            for (std::size_t y = 0; y < nx; ++y)
                if (fixes[g * nx + y]) k(x, y) += wx;
        }
    }
    return k;
}

/// Orbit label per state, numbered by first appearance.
inline std::vector<std::size_t> orbit_labels(const FiniteAction& action) {
    DisjointSets sets(action.states);
    for (std::size_t g = 0; g < action.group_order; ++g)
        for (std::size_t x = 0; x < action.states; ++x) sets.unite(x, action.act(g, x));
    return sets.labels();
}

/// pi(x) = 1 / (z |O(x)|) with z the number of orbits.
inline std::vector<double> orbit_stationary(const std::vector<std::size_t>& labels) {
    const std::size_t z = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::size_t> orbit_size(z, 0);
    for (auto l : labels) ++orbit_size[l];
    std::vector<double> pi(labels.size());
    for (std::size_t x = 0; x < labels.size(); ++x)
        pi[x] = 1.0 / (static_cast<double>(z) * static_cast<double>(orbit_size[labels[x]]));
    return pi;
}

/// Solves pi K = pi, sum pi = 1 by Gaussian elimination with partial
/// pivoting. Independent of any orbit bookkeeping.
inline std::vector<double> stationary_distribution(const Kernel& k) {
    const std::size_t n = k.size();
    // Rows 0..n-2 of (K^T - I), last row replaced by the normalization.
    std::vector<double> a(n * (n + 1), 0.0);
    auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * (n + 1) + c]; };
    for (std::size_t r = 0; r + 1 < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) at(r, c) = k(c, r) - (r == c ? 1.0 : 0.0);
    }
    for (std::size_t c = 0; c <= n; ++c) at(n - 1, c) = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(at(r, c)) > std::abs(at(piv, c))) piv = r;
        if (std::abs(at(piv, c)) < 1e-300) throw std::runtime_error("kernel has no unique stationary distribution");
        for (std::size_t j = 0; j <= n; ++j) std::swap(at(c, j), at(piv, j));
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = at(r, c) / at(c, c);
            if (f == 0.0) continue;
            for (std::size_t j = c; j <= n; ++j) at(r, j) -= f * at(c, j);
        }
    }
    std::vector<double> pi(n);
    for (std::size_t r = 0; r < n; ++r) pi[r] = at(r, n) / at(r, r);
    return pi;
}

inline double max_row_sum_error(const Kernel& k) {
    double worst = 0.0;
    for (std::size_t x = 0; x < k.size(); ++x) {
        double s = 0.0;
        for (std::size_t y = 0; y < k.size(); ++y) s += k(x, y);
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

/// max |pi(x) K(x,y) - pi(y) K(y,x)|
inline double max_detailed_balance_error(const Kernel& k, const std::vector<double>& pi) {
    double worst = 0.0;
    for (std::size_t x = 0; x < k.size(); ++x)
        for (std::size_t y = 0; y < k.size(); ++y) worst = std::max(worst, std::abs(pi[x] * k(x, y) - pi[y] * k(y, x)));
    return worst;
}

/// max |(pi K)(y) - pi(y)|
inline double max_stationarity_error(const Kernel& k, const std::vector<double>& pi) {
    double worst = 0.0;
    for (std::size_t y = 0; y < k.size(); ++y) {
        double s = 0.0;
        for (std::size_t x = 0; x < k.size(); ++x) s += pi[x] * k(x, y);
        worst = std::max(worst, std::abs(s - pi[y]));
    }
    return worst;
}

/// Chain lumped by labels. Throws if the chain is not lumpable to `tol`
/// (rows of one class must put equal mass on every class).
inline Kernel lumped_kernel(const Kernel& k, const std::vector<std::size_t>& labels, double tol = 1e-12) {
    const std::size_t z = *std::max_element(labels.begin(), labels.end()) + 1;
    Kernel lumped(z);
    std::vector<char> seen(z, 0);
    for (std::size_t x = 0; x < k.size(); ++x) {
        std::vector<double> mass(z, 0.0);
        for (std::size_t y = 0; y < k.size(); ++y) mass[labels[y]] += k(x, y);
        const std::size_t c = labels[x];
        for (std::size_t d = 0; d < z; ++d) {
            if (!seen[c]) {
                lumped(c, d) = mass[d];
            } else if (std::abs(lumped(c, d) - mass[d]) > tol) {
                throw std::runtime_error("chain is not lumpable onto the given classes");
            }
        }
        seen[c] = 1;
    }
    return lumped;
}

/// U_J acting on itself by conjugation, x^g = g x g^{-1}; elements indexed by
/// encode() over J.
inline FiniteAction conjugation_action(const ClosedPositionSet& J, std::uint32_t p) {
    std::uint64_t order = 1;
    for (std::size_t t = 0; t < J.size(); ++t) order *= p;
    std::vector<PatternElement> elems;
    elems.reserve(order);
    for (std::uint64_t c = 0; c < order; ++c) elems.push_back(decode(c, J, p));
    std::vector<PatternElement> inverses;
    inverses.reserve(order);
    for (const auto& e : elems) inverses.push_back(inverse(e));
    return {order, order, [J, elems = std::move(elems), inverses = std::move(inverses)](std::size_t g, std::size_t x) {
                return static_cast<std::size_t>(encode(multiply(multiply(elems[g], elems[x]), inverses[g]), J));
            }};
}

/// The conjugation chain as implemented: from x to a uniform element of
/// C_{U_J}(x). Its square is the two-phase kernel of conjugation_action.
inline Kernel centralizer_chain_kernel(const ClosedPositionSet& J, std::uint32_t p) {
    const FiniteAction act = conjugation_action(J, p);
    if (act.states > kKernelStateGuard) throw std::length_error("centralizer chain kernel refused: guard exceeded");
    std::vector<PatternElement> elems;
    for (std::size_t c = 0; c < act.states; ++c) elems.push_back(decode(c, J, p));
    Kernel k(act.states);
    for (std::size_t x = 0; x < act.states; ++x) {
        std::vector<std::size_t> cent;
        for (std::size_t y = 0; y < act.states; ++y)
            if (multiply(elems[x], elems[y]) == multiply(elems[y], elems[x])) cent.push_back(y);
        for (auto y : cent) k(x, y) = 1.0 / static_cast<double>(cent.size());
    }
    return k;
}

/// Index of a tuple over [k]^n, entry 0 least significant.
inline std::size_t tuple_index(const TupleState& x) {
    std::size_t code = 0;
    for (std::size_t j = x.entries.size(); j-- > 0;) code = code * static_cast<std::size_t>(x.k) + (x.entries[j] - 1);
    return code;
}

inline TupleState tuple_from_index(std::size_t code, int n, int k) {
    std::vector<int> e(static_cast<std::size_t>(n));
    for (auto& v : e) {
        v = static_cast<int>(code % static_cast<std::size_t>(k)) + 1;
        code /= static_cast<std::size_t>(k);
    }
    return {k, std::move(e)};
}

/// S_n permuting the coordinates of C_k^n; permutations in lexicographic
/// order, tuples by tuple_index().
inline FiniteAction coordinate_permutation_action(int n, int k) {
    std::vector<std::vector<int>> perms;
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
    std::size_t states = 1;
    for (int i = 0; i < n; ++i) states *= static_cast<std::size_t>(k);
    const std::size_t group_order = perms.size();
    return {states, group_order, [perms = std::move(perms), n, k](std::size_t g, std::size_t x) {
                const TupleState t = tuple_from_index(x, n, k);
                TupleState out = t;
                for (int j = 0; j < n; ++j)
                    out.entries[static_cast<std::size_t>(perms[g][static_cast<std::size_t>(j)])] =
                        t.entries[static_cast<std::size_t>(j)];
                return tuple_index(out);
            }};
}

}  // namespace burnside
