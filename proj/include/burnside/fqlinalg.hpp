#pragma once

// Dense linear algebra over F_p: reduced row echelon form, rank and
// nullspace bases. F_2 has a packed-word path (BitMatrix) used by the
// unitriangular chains; every other prime uses the residue path.
//
// Pivot rule for both paths: columns are scanned left to right and the pivot
// is the first row at or below the current rank with a nonzero entry. The
// reduced form is the unique RREF, so both paths agree exactly.

#include <algorithm>
#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "burnside/field.hpp"

namespace burnside {

struct FqVector {
    std::vector<FieldScalar> entries;

    FqVector() = default;
    explicit FqVector(std::size_t dim) : entries(dim) {}
    explicit FqVector(std::vector<FieldScalar> e) : entries(std::move(e)) {}

    std::size_t dim() const noexcept { return entries.size(); }
    FieldScalar operator[](std::size_t i) const { return entries[i]; }
    FieldScalar& operator[](std::size_t i) { return entries[i]; }
    bool is_zero() const noexcept {
        return std::all_of(entries.begin(), entries.end(), [](FieldScalar s) { return s.value == 0; });
    }

    bool operator==(const FqVector&) const = default;
};

class FqMatrix {
  public:
    FqMatrix(const PrimeField& field, std::size_t rows, std::size_t cols)
        : field_(field), rows_(rows), cols_(cols), entries_(rows * cols) {}

    /// Row-major integer entries, reduced mod p.
    static FqMatrix from_rows(const PrimeField& field, const std::vector<std::vector<std::int64_t>>& rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r == 0 ? 0 : rows.front().size();
        FqMatrix m(field, r, c);
        for (std::size_t i = 0; i < r; ++i) {
            if (rows[i].size() != c) throw std::invalid_argument("ragged matrix rows");
            for (std::size_t j = 0; j < c; ++j) m.set(i, j, field.from_int(rows[i][j]));
        }
        return m;
    }

    static FqMatrix identity(const PrimeField& field, std::size_t n) {
        FqMatrix m(field, n, n);
        for (std::size_t i = 0; i < n; ++i) m.set(i, i, field.one());
        return m;
    }

    const PrimeField& field() const noexcept { return field_; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    FieldScalar at(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }
    void set(std::size_t r, std::size_t c, FieldScalar v) { entries_[r * cols_ + c] = v; }

    std::span<FieldScalar> row(std::size_t r) { return {entries_.data() + r * cols_, cols_}; }
    std::span<const FieldScalar> row(std::size_t r) const { return {entries_.data() + r * cols_, cols_}; }

    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b) return;
        std::swap_ranges(row(a).begin(), row(a).end(), row(b).begin());
    }

    bool operator==(const FqMatrix& o) const {
        return field_.order() == o.field_.order() && rows_ == o.rows_ && cols_ == o.cols_ &&
               entries_ == o.entries_;
    }

  private:
    PrimeField field_;
    std::size_t rows_;
    std::size_t cols_;
    std::vector<FieldScalar> entries_;
};

/// m * v
inline FqVector multiply(const FqMatrix& m, const FqVector& v) {
    if (v.dim() != m.cols()) throw std::invalid_argument("dimension mismatch in matrix-vector product");
    const auto& f = m.field();
    FqVector out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        FieldScalar acc = f.zero();
        for (std::size_t c = 0; c < m.cols(); ++c) acc = f.add(acc, f.mul(m.at(r, c), v[c]));
        out[r] = acc;
    }
    return out;
}

/// Row-packed matrix over F_2. Bit c of row r lives in word c / 64.
class BitMatrix {
  public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols) { reset(rows, cols); }

    /// Resize and zero, reusing storage.
    void reset(std::size_t rows, std::size_t cols) {
        rows_ = rows;
        cols_ = cols;
        words_ = (cols + 63) / 64;
        bits_.assign(rows_ * words_, 0);
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t words_per_row() const noexcept { return words_; }

    bool test(std::size_t r, std::size_t c) const noexcept {
        return (bits_[r * words_ + c / 64] >> (c % 64)) & 1u;
    }
    void set(std::size_t r, std::size_t c) noexcept { bits_[r * words_ + c / 64] |= std::uint64_t{1} << (c % 64); }
    void flip(std::size_t r, std::size_t c) noexcept { bits_[r * words_ + c / 64] ^= std::uint64_t{1} << (c % 64); }

    std::span<std::uint64_t> row(std::size_t r) noexcept { return {bits_.data() + r * words_, words_}; }
    std::span<const std::uint64_t> row(std::size_t r) const noexcept { return {bits_.data() + r * words_, words_}; }

    void swap_rows(std::size_t a, std::size_t b) noexcept {
        if (a == b) return;
        std::swap_ranges(row(a).begin(), row(a).end(), row(b).begin());
    }
    void xor_row_into(std::size_t src, std::size_t dst) noexcept {
        const std::uint64_t* s = bits_.data() + src * words_;
        std::uint64_t* d = bits_.data() + dst * words_;
        for (std::size_t w = 0; w < words_; ++w) d[w] ^= s[w];
    }

    static BitMatrix from_fq(const FqMatrix& m) {
        if (m.field().order() != 2) throw std::invalid_argument("BitMatrix requires F_2");
        BitMatrix b(m.rows(), m.cols());
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t c = 0; c < m.cols(); ++c)
                if (m.at(r, c).value) b.set(r, c);
        return b;
    }

    FqMatrix to_fq() const {
        const PrimeField f2(2);
        FqMatrix m(f2, rows_, cols_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c)
                if (test(r, c)) m.set(r, c, f2.one());
        return m;
    }

    bool operator==(const BitMatrix&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t words_ = 0;
    std::vector<std::uint64_t> bits_;
};

/// In-place RREF over F_2. Returns the rank; `pivots` receives the pivot
/// column of each nonzero row.
inline std::size_t rref_in_place(BitMatrix& m, std::vector<std::size_t>& pivots) {
    pivots.clear();
    std::size_t rank = 0;
    const std::size_t rows = m.rows();
    for (std::size_t c = 0; c < m.cols() && rank < rows; ++c) {
        const std::size_t w = c / 64;
        const std::uint64_t mask = std::uint64_t{1} << (c % 64);
        std::size_t pivot = rank;
        while (pivot < rows && !(m.row(pivot)[w] & mask)) ++pivot;
        if (pivot == rows) continue;
        m.swap_rows(pivot, rank);
        for (std::size_t r = 0; r < rows; ++r)
            if (r != rank && (m.row(r)[w] & mask)) m.xor_row_into(rank, r);
        pivots.push_back(c);
        ++rank;
    }
    return rank;
}

/// In-place RREF over F_p on residues; pivot rows are scaled to 1.
inline std::size_t rref_in_place(FqMatrix& m, std::vector<std::size_t>& pivots) {
    pivots.clear();
    const PrimeField& f = m.field();
    std::size_t rank = 0;
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t pivot = rank;
        while (pivot < rows && m.at(pivot, c).value == 0) ++pivot;
        if (pivot == rows) continue;
        m.swap_rows(pivot, rank);
        auto prow = m.row(rank);
        if (prow[c].value != 1) {
            const FieldScalar s = f.inv(prow[c]);
            for (std::size_t j = c; j < cols; ++j) prow[j] = f.mul(prow[j], s);
        }
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank) continue;
            auto rrow = m.row(r);
            const FieldScalar factor = rrow[c];
            if (factor.value == 0) continue;
            for (std::size_t j = c; j < cols; ++j) rrow[j] = f.sub(rrow[j], f.mul(factor, prow[j]));
        }
        pivots.push_back(c);
        ++rank;
    }
    return rank;
}

struct RrefResult {
    FqMatrix reduced;
    std::size_t rank = 0;
    std::vector<std::size_t> pivot_cols;
};

/// RREF through the residue path regardless of p.
inline RrefResult rref_generic(const FqMatrix& m) {
    RrefResult out{m, 0, {}};
    out.rank = rref_in_place(out.reduced, out.pivot_cols);
    return out;
}

/// RREF through the packed path; requires p = 2.
inline RrefResult rref_packed(const FqMatrix& m) {
    BitMatrix b = BitMatrix::from_fq(m);
    std::vector<std::size_t> pivots;
    const std::size_t rank = rref_in_place(b, pivots);
    return {b.to_fq(), rank, std::move(pivots)};
}

inline RrefResult rref(const FqMatrix& m) {
    return m.field().order() == 2 ? rref_packed(m) : rref_generic(m);
}

/// Free-variable nullspace basis of a matrix already in RREF: one vector per
/// non-pivot column, in increasing column order, with a 1 at that column.
inline std::vector<FqVector> nullspace_from_rref(const FqMatrix& reduced, std::span<const std::size_t> pivots) {
    const PrimeField& f = reduced.field();
    const std::size_t cols = reduced.cols();
    std::vector<bool> is_pivot(cols, false);
    for (auto c : pivots) is_pivot[c] = true;
    std::vector<FqVector> basis;
    basis.reserve(cols - pivots.size());
    for (std::size_t free = 0; free < cols; ++free) {
        if (is_pivot[free]) continue;
        FqVector v(cols);
        v[free] = f.one();
        for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = f.neg(reduced.at(r, free));
        basis.push_back(std::move(v));
    }
    return basis;
}

/// Packed analogue of nullspace_from_rref: row i of `basis` is the i-th
/// basis vector.
inline void nullspace_from_rref(const BitMatrix& reduced, std::span<const std::size_t> pivots, BitMatrix& basis) {
    const std::size_t cols = reduced.cols();
    basis.reset(cols - pivots.size(), cols);
    std::size_t next_pivot = 0;
    std::size_t out = 0;
    for (std::size_t free = 0; free < cols; ++free) {
        if (next_pivot < pivots.size() && pivots[next_pivot] == free) {
            ++next_pivot;
            continue;
        }
        basis.set(out, free);
        // Only rows whose pivot lies left of `free` can have a bit there.
        for (std::size_t r = 0; r < next_pivot; ++r)
            if (reduced.test(r, free)) basis.set(out, pivots[r]);
        ++out;
    }
}

inline std::vector<FqVector> nullspace_basis(const FqMatrix& m) {
    const RrefResult r = rref(m);
    return nullspace_from_rref(r.reduced, r.pivot_cols);
}

}  // namespace burnside
