#pragma once

// Pattern groups U_J inside the unitriangular group U_n(F_p), the nested
// family H_0 < H_1 < ... < H_N = U_n(F_p), and the conjugation Burnside
// chain: from x, move to a uniform element of the centralizer C_{U_J}(x).
//
// Group orders are handled as exponents only: |U_J| = p^|J|,
// |C_{U_J}(x)| = p^d and |O_{U_J}(x)| = p^(|J| - d).

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "burnside/field.hpp"
#include "burnside/fqlinalg.hpp"
#include "burnside/rng.hpp"

namespace burnside {

/// Strictly-upper matrix position, 1-based: 1 <= row < col <= n.
struct Position {
    int row = 0;
    int col = 0;

    constexpr auto operator<=>(const Position&) const = default;
};

inline std::string to_string(Position p) {
    return "(" + std::to_string(p.row) + "," + std::to_string(p.col) + ")";
}

/// A closed set J of strictly-upper positions: (i,j), (j,k) in J implies
/// (i,k) in J. Positions are kept sorted row-major; that order is also the
/// coordinate order of U_J used by the linear algebra and by encode().
class ClosedPositionSet {
  public:
    ClosedPositionSet() = default;

    ClosedPositionSet(int n, std::vector<Position> positions) : n_(n), positions_(std::move(positions)) {
        if (n < 1) throw std::invalid_argument("matrix dimension must be >= 1");
        std::sort(positions_.begin(), positions_.end());
        positions_.erase(std::unique(positions_.begin(), positions_.end()), positions_.end());
        index_.assign(static_cast<std::size_t>(n) * n, -1);
        for (std::size_t t = 0; t < positions_.size(); ++t) {
            const Position p = positions_[t];
            if (p.row < 1 || p.col > n || p.row >= p.col)
                throw std::invalid_argument("position " + to_string(p) + " is not strictly upper in dimension " +
                                            std::to_string(n));
            index_[flat(p)] = static_cast<int>(t);
        }
        for (const Position a : positions_)
            for (const Position b : positions_)
                if (a.col == b.row && !contains({a.row, b.col}))
                    throw std::invalid_argument("position set is not closed: " + to_string(a) + " and " +
                                                to_string(b) + " present but " + to_string({a.row, b.col}) +
                                                " missing");
    }

    static ClosedPositionSet full(int n) {
        std::vector<Position> all;
        for (int i = 1; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j) all.push_back({i, j});
        return {n, std::move(all)};
    }

    int n() const noexcept { return n_; }
    std::size_t size() const noexcept { return positions_.size(); }
    std::span<const Position> positions() const noexcept { return positions_; }

    bool contains(Position p) const noexcept {
        if (p.row < 1 || p.col > n_ || p.row >= p.col) return false;
        return index_[flat(p)] >= 0;
    }
    /// Coordinate index of p, or -1 when p is not in J.
    int index_of(Position p) const noexcept { return contains(p) ? index_[flat(p)] : -1; }

    bool operator==(const ClosedPositionSet& o) const { return n_ == o.n_ && positions_ == o.positions_; }

  private:
    std::size_t flat(Position p) const noexcept {
        return static_cast<std::size_t>(p.row - 1) * n_ + static_cast<std::size_t>(p.col - 1);
    }

    int n_ = 0;
    std::vector<Position> positions_;
    std::vector<int> index_;
};

/// Element of U_n(F_p): unit diagonal, entries stored for the strict upper
/// triangle (dense n x n storage, lower part and diagonal unused).
class PatternElement {
  public:
    PatternElement() = default;
    PatternElement(int n, std::uint32_t p)
        : n_(n), p_(p), entries_(static_cast<std::size_t>(n) * n) {}

    static PatternElement identity(int n, std::uint32_t p) { return {n, p}; }

    /// Builds I + sum_t coords[t] E_{J[t]}.
    static PatternElement from_coordinates(const ClosedPositionSet& J, std::uint32_t p,
                                           std::span<const FieldScalar> coords) {
        if (coords.size() != J.size()) throw std::invalid_argument("coordinate count does not match |J|");
        PatternElement x(J.n(), p);
        for (std::size_t t = 0; t < coords.size(); ++t) {
            if (coords[t].value >= p) throw std::invalid_argument("coordinate out of range");
            x.set(J.positions()[t], coords[t]);
        }
        return x;
    }

    int n() const noexcept { return n_; }
    std::uint32_t modulus() const noexcept { return p_; }

    FieldScalar at(Position pos) const { return entries_[flat(pos)]; }
    void set(Position pos, FieldScalar v) { entries_[flat(pos)] = v; }

    /// Entry (row, col), 1-based, of the full matrix including the diagonal.
    FieldScalar matrix_entry(int row, int col) const {
        if (row == col) return {1};
        if (row > col) return {0};
        return at({row, col});
    }

    bool is_identity() const noexcept {
        return std::all_of(entries_.begin(), entries_.end(), [](FieldScalar s) { return s.value == 0; });
    }

    bool supported_in(const ClosedPositionSet& J) const {
        if (J.n() != n_) return false;
        for (int i = 1; i <= n_; ++i)
            for (int j = i + 1; j <= n_; ++j)
                if (at({i, j}).value != 0 && !J.contains({i, j})) return false;
        return true;
    }

    std::vector<FieldScalar> coordinates(const ClosedPositionSet& J) const {
        std::vector<FieldScalar> c;
        c.reserve(J.size());
        for (const Position pos : J.positions()) c.push_back(at(pos));
        return c;
    }

    bool operator==(const PatternElement&) const = default;

  private:
    std::size_t flat(Position pos) const noexcept {
        return static_cast<std::size_t>(pos.row - 1) * n_ + static_cast<std::size_t>(pos.col - 1);
    }

    int n_ = 0;
    std::uint32_t p_ = 2;
    std::vector<FieldScalar> entries_;
};

/// Matrix product a * b in U_n(F_p).
inline PatternElement multiply(const PatternElement& a, const PatternElement& b) {
    if (a.n() != b.n() || a.modulus() != b.modulus()) throw std::invalid_argument("incompatible elements");
    const PrimeField f(a.modulus());
    const int n = a.n();
    PatternElement out(n, a.modulus());
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) {
            FieldScalar acc = f.add(a.at({i, j}), b.at({i, j}));
            for (int k = i + 1; k < j; ++k) acc = f.add(acc, f.mul(a.at({i, k}), b.at({k, j})));
            out.set({i, j}, acc);
        }
    return out;
}

/// Inverse in U_n(F_p), by back substitution on the unit upper triangle.
inline PatternElement inverse(const PatternElement& a) {
    const PrimeField f(a.modulus());
    const int n = a.n();
    PatternElement b(n, a.modulus());
    // (a b)_{ij} = a_ij + b_ij + sum_{i<k<j} a_ik b_kj = 0
    for (int j = 1; j <= n; ++j)
        for (int i = j - 1; i >= 1; --i) {
            FieldScalar acc = a.at({i, j});
            for (int k = i + 1; k < j; ++k) acc = f.add(acc, f.mul(a.at({i, k}), b.at({k, j})));
            b.set({i, j}, f.neg(acc));
        }
    return b;
}

/// Elementary matrix I + value * E_pos.
inline PatternElement elementary(int n, std::uint32_t p, Position pos, FieldScalar value) {
    PatternElement e(n, p);
    e.set(pos, value);
    return e;
}

/// Mixed-radix index of x over the coordinates of J (coordinate 0 is the
/// least significant digit). Used by the enumeration oracles.
inline std::uint64_t encode(const PatternElement& x, const ClosedPositionSet& J) {
    std::uint64_t code = 0;
    for (std::size_t t = J.size(); t-- > 0;) code = code * x.modulus() + x.at(J.positions()[t]).value;
    return code;
}

inline PatternElement decode(std::uint64_t code, const ClosedPositionSet& J, std::uint32_t p) {
    PatternElement x(J.n(), p);
    for (const Position pos : J.positions()) {
        x.set(pos, {static_cast<std::uint32_t>(code % p)});
        code /= p;
    }
    return x;
}

/// J_1 < J_2 < ... < J_N with |J_m| = m. Level m adds position (k_m, l_m):
/// rows from the bottom up, and within a row columns from right to left.
class NestedSequence {
  public:
    explicit NestedSequence(int n) : n_(n) {
        if (n < 1) throw std::invalid_argument("matrix dimension must be >= 1");
        sets_.emplace_back(n, std::vector<Position>{});
        added_.push_back({0, 0});
        std::vector<Position> acc;
        for (int k = n - 1; k >= 1; --k)
            for (int l = n; l > k; --l) {
                acc.push_back({k, l});
                added_.push_back({k, l});
                sets_.emplace_back(n, acc);
            }
    }

    int n() const noexcept { return n_; }
    /// N = n(n-1)/2.
    int levels() const noexcept { return static_cast<int>(sets_.size()) - 1; }
    /// J_m for 0 <= m <= N; J_0 is empty (H_0 is trivial).
    const ClosedPositionSet& set(int m) const { return sets_.at(static_cast<std::size_t>(m)); }
    /// (k_m, l_m) for 1 <= m <= N.
    Position added(int m) const {
        if (m < 1 || m > levels()) throw std::out_of_range("level " + std::to_string(m) + " out of range");
        return added_[static_cast<std::size_t>(m)];
    }

    /// The level m whose added position is (k, l).
    static int level_index(int n, Position pos) noexcept {
        return (n - pos.row) * (n - pos.row - 1) / 2 + n - pos.col + 1;
    }

  private:
    int n_;
    std::vector<ClosedPositionSet> sets_;
    std::vector<Position> added_;
};

inline NestedSequence nested_sequence(int n) { return NestedSequence(n); }

/// Solves y(x - I) = (x - I)y over the coordinates of a fixed closed set J.
/// The system has one equation per position (i, j) with j - i >= 2; its
/// (i, j) equation is sum_k [ x_kj y_ik - x_ik y_kj ] over (i,k), (k,j) in J.
/// Holds reusable workspaces, so one solver belongs to one chain.
class CentralizerSolver {
  public:
    CentralizerSolver(const ClosedPositionSet& J, const PrimeField& field) : J_(J), field_(field) {
        const int n = J.n();
        for (int i = 1; i <= n; ++i)
            for (int j = i + 2; j <= n; ++j) {
                for (int k = i + 1; k < j; ++k) {
                    const int ik = J.index_of({i, k});
                    const int kj = J.index_of({k, j});
                    if (ik < 0 || kj < 0) continue;
                    terms_.push_back({ik, kj, Position{i, k}, Position{k, j}});
                }
                row_end_.push_back(terms_.size());
            }
    }

    const ClosedPositionSet& positions() const noexcept { return J_; }
    const PrimeField& field() const noexcept { return field_; }
    std::size_t equations() const noexcept { return row_end_.size(); }

    /// d = dim V_x, so |C_{U_J}(x)| = p^d. Leaves the basis of the last
    /// basis() call untouched.
    std::size_t dimension(const PatternElement& x) {
        check_member(x);
        return J_.size() - eliminate(x);
    }

    /// Computes and caches a nullspace basis of the commutation system for x;
    /// returns d.
    std::size_t analyze(const PatternElement& x) {
        check_member(x);
        eliminate(x);
        if (packed()) {
            nullspace_from_rref(bits_, pivots_, bit_basis_);
            return bit_basis_.rows();
        }
        basis_ = nullspace_from_rref(*dense_, pivots_);
        return basis_.size();
    }

    /// Number of vectors in the cached basis.
    std::size_t basis_size() const noexcept { return packed() ? bit_basis_.rows() : basis_.size(); }

    /// Cached basis as coordinate vectors over J.
    std::vector<FqVector> basis_vectors() const {
        if (!packed()) return basis_;
        std::vector<FqVector> out;
        for (std::size_t b = 0; b < bit_basis_.rows(); ++b) {
            FqVector v(J_.size());
            for (std::size_t c = 0; c < J_.size(); ++c) v[c] = {bit_basis_.test(b, c) ? 1u : 0u};
            out.push_back(std::move(v));
        }
        return out;
    }

    /// y = I + sum_i alpha_i eps_i over the cached basis, alpha_i uniform and
    /// drawn in basis order.
    PatternElement sample(RngStream& rng) const {
        PatternElement y(J_.n(), field_.order());
        if (packed()) {
            coord_words_.assign(bit_basis_.words_per_row(), 0);
            for (std::size_t b = 0; b < bit_basis_.rows(); ++b) {
                if (field_.uniform(rng).value == 0) continue;
                const auto row = bit_basis_.row(b);
                for (std::size_t w = 0; w < coord_words_.size(); ++w) coord_words_[w] ^= row[w];
            }
            for (std::size_t c = 0; c < J_.size(); ++c)
                if ((coord_words_[c / 64] >> (c % 64)) & 1u) y.set(J_.positions()[c], {1});
            return y;
        }
        coords_.assign(J_.size(), field_.zero());
        for (const FqVector& v : basis_) {
            const FieldScalar alpha = field_.uniform(rng);
            if (alpha.value == 0) continue;
            for (std::size_t c = 0; c < coords_.size(); ++c)
                coords_[c] = field_.add(coords_[c], field_.mul(alpha, v[c]));
        }
        for (std::size_t c = 0; c < J_.size(); ++c) y.set(J_.positions()[c], coords_[c]);
        return y;
    }

  private:
    struct Term {
        int var_ik;
        int var_kj;
        Position ik;
        Position kj;
    };

    bool packed() const noexcept { return field_.order() == 2; }

    void check_member(const PatternElement& x) const {
        if (x.modulus() != field_.order() || !x.supported_in(J_))
            throw std::invalid_argument("element is not in the pattern group U_J");
    }

    // Builds the system for x and reduces it; returns the rank.
    std::size_t eliminate(const PatternElement& x) {
        const std::size_t vars = J_.size();
        const std::size_t rows = row_end_.size();
        if (packed()) {
            bits_.reset(rows, vars);
            std::size_t t = 0;
            for (std::size_t r = 0; r < rows; ++r)
                for (; t < row_end_[r]; ++t) {
                    const Term& term = terms_[t];
                    if (x.at(term.kj).value) bits_.flip(r, static_cast<std::size_t>(term.var_ik));
                    if (x.at(term.ik).value) bits_.flip(r, static_cast<std::size_t>(term.var_kj));
                }
            return rref_in_place(bits_, pivots_);
        }
        dense_.emplace(field_, rows, vars);
        std::size_t t = 0;
        for (std::size_t r = 0; r < rows; ++r)
            for (; t < row_end_[r]; ++t) {
                const Term& term = terms_[t];
                const auto ik = static_cast<std::size_t>(term.var_ik);
                const auto kj = static_cast<std::size_t>(term.var_kj);
                dense_->set(r, ik, field_.add(dense_->at(r, ik), x.at(term.kj)));
                dense_->set(r, kj, field_.sub(dense_->at(r, kj), x.at(term.ik)));
            }
        return rref_in_place(*dense_, pivots_);
    }

    ClosedPositionSet J_;
    PrimeField field_;
    std::vector<Term> terms_;
    std::vector<std::size_t> row_end_;

    std::vector<std::size_t> pivots_;
    BitMatrix bits_;
    BitMatrix bit_basis_;
    std::optional<FqMatrix> dense_;
    std::vector<FqVector> basis_;
    mutable std::vector<std::uint64_t> coord_words_;
    mutable std::vector<FieldScalar> coords_;
};

struct CentralizerBasis {
    std::size_t dimension = 0;       // d: |C_{U_J}(x)| = p^d
    std::vector<FqVector> basis;     // coordinate vectors over J

    /// log_p |O_{U_J}(x)| = |J| - d.
    std::size_t orbit_exponent(const ClosedPositionSet& J) const noexcept { return J.size() - dimension; }
};

inline CentralizerBasis centralizer_basis(const PatternElement& x, const ClosedPositionSet& J) {
    CentralizerSolver solver(J, PrimeField(x.modulus()));
    const std::size_t d = solver.analyze(x);
    return {d, solver.basis_vectors()};
}

/// Uniform element of C_{U_J}(x).
inline PatternElement centralizer_sample(const PatternElement& x, const ClosedPositionSet& J, RngStream& rng) {
    CentralizerSolver solver(J, PrimeField(x.modulus()));
    solver.analyze(x);
    return solver.sample(rng);
}

/// One conjugation Burnside transition. For this action both half-steps are
/// "pick uniformly from a centralizer", and the chain uses one of them.
inline PatternElement burnside_step(const PatternElement& x, const ClosedPositionSet& J, RngStream& rng) {
    return centralizer_sample(x, J, rng);
}

/// Conjugation Burnside chain on U_J, started at the identity.
class PatternChain {
  public:
    PatternChain(const ClosedPositionSet& J, const PrimeField& field)
        : solver_(J, field), state_(PatternElement::identity(J.n(), field.order())) {
        dim_ = solver_.analyze(state_);
    }

    const PatternElement& state() const noexcept { return state_; }
    /// Centralizer dimension of the current state.
    std::size_t dimension() const noexcept { return dim_; }
    std::size_t orbit_exponent() const noexcept { return solver_.positions().size() - dim_; }

    void step(RngStream& rng) {
        state_ = solver_.sample(rng);
        dim_ = solver_.analyze(state_);
    }

  private:
    CentralizerSolver solver_;
    PatternElement state_;
    std::size_t dim_ = 0;
};

/// K_m(g): zero, or p^(-exponent).
struct LevelStatistic {
    bool zero = true;
    int exponent = 0;

    double value(std::uint32_t p) const noexcept {
        if (zero) return 0.0;
        double v = 1.0;
        for (int t = 0; t < exponent; ++t) v /= static_cast<double>(p);
        return v;
    }
    bool operator==(const LevelStatistic&) const = default;
};

/// K_m from centralizer dimensions: g in H_{m-1} iff its (k_m, l_m) entry is 0.
inline LevelStatistic level_statistic(bool in_previous, std::size_t dim_previous, std::size_t dim_current) {
    if (!in_previous) return {true, 0};
    if (dim_previous > dim_current) throw std::logic_error("centralizer shrank when the group grew");
    return {false, static_cast<int>(dim_current - dim_previous)};
}

inline LevelStatistic statistic_K(const PatternElement& g, const NestedSequence& seq, int m) {
    const ClosedPositionSet& Jm = seq.set(m);
    if (!g.supported_in(Jm)) throw std::invalid_argument("element is not in H_" + std::to_string(m));
    if (g.at(seq.added(m)).value != 0) return {true, 0};
    const PrimeField f(g.modulus());
    CentralizerSolver current(Jm, f);
    CentralizerSolver previous(seq.set(m - 1), f);
    return level_statistic(true, previous.dimension(g), current.dimension(g));
}

/// Visit counts keyed by log_p |O(x)| over `steps` states of the chain on
/// U_n(F_p) after `burn_in` discarded steps.
inline std::map<int, std::uint64_t> class_size_histogram(int n, std::uint32_t p, std::uint64_t steps, RngStream& rng,
                                                         std::uint64_t burn_in = 0) {
    if (steps < 1) throw std::invalid_argument("histogram needs at least one step");
    const PrimeField f(p);
    PatternChain chain(ClosedPositionSet::full(n), f);
    for (std::uint64_t s = 0; s < burn_in; ++s) chain.step(rng);
    std::map<int, std::uint64_t> hist;
    for (std::uint64_t s = 0; s < steps; ++s) {
        chain.step(rng);
        ++hist[static_cast<int>(chain.orbit_exponent())];
    }
    return hist;
}

}  // namespace burnside
