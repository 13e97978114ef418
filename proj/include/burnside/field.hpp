#pragma once

#include <compare>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "burnside/rng.hpp"

namespace burnside {

/// Residue of a prime field. The modulus lives in the owning PrimeField.
struct FieldScalar {
    std::uint32_t value = 0;

    constexpr auto operator<=>(const FieldScalar&) const = default;
};

/// What the linear algebra and pattern code need from a finite field.
/// PrimeField is the only model today; an extension-field type would slot in
/// behind the same operations.
template <typename F>
concept FiniteField = requires(const F& f, FieldScalar a, FieldScalar b, RngStream& rng) {
    { f.order() } -> std::convertible_to<std::uint32_t>;
    { f.add(a, b) } -> std::same_as<FieldScalar>;
    { f.sub(a, b) } -> std::same_as<FieldScalar>;
    { f.mul(a, b) } -> std::same_as<FieldScalar>;
    { f.neg(a) } -> std::same_as<FieldScalar>;
    { f.inv(a) } -> std::same_as<FieldScalar>;
    { f.uniform(rng) } -> std::same_as<FieldScalar>;
};

/// Smallest nontrivial factor of n, or 0 when n is prime (n >= 2).
constexpr std::uint32_t smallest_factor(std::uint32_t n) noexcept {
    for (std::uint32_t d = 2; static_cast<std::uint64_t>(d) * d <= n; ++d)
        if (n % d == 0) return d;
    return 0;
}

/// F_p for a prime p < 2^16 (products of residues fit in 32 bits).
/// Immutable after construction; safe to share between threads.
class PrimeField {
  public:
    explicit PrimeField(std::uint32_t p) : p_(p) {
        if (p < 2) throw std::invalid_argument("field modulus " + std::to_string(p) + " is not prime");
        if (p >= (1u << 16)) throw std::invalid_argument("field modulus " + std::to_string(p) + " too large");
        if (const auto f = smallest_factor(p); f != 0)
            throw std::invalid_argument("field modulus " + std::to_string(p) + " not prime (factor " +
                                        std::to_string(f) + ")");
    }

    constexpr std::uint32_t order() const noexcept { return p_; }
    constexpr std::uint32_t characteristic() const noexcept { return p_; }

    /// Reduces an arbitrary integer into [0, p).
    constexpr FieldScalar from_int(std::int64_t v) const noexcept {
        const auto p = static_cast<std::int64_t>(p_);
        v %= p;
        if (v < 0) v += p;
        return {static_cast<std::uint32_t>(v)};
    }

    constexpr bool is_valid(FieldScalar a) const noexcept { return a.value < p_; }

    constexpr FieldScalar zero() const noexcept { return {0}; }
    constexpr FieldScalar one() const noexcept { return {1}; }

    constexpr FieldScalar add(FieldScalar a, FieldScalar b) const noexcept {
        const std::uint32_t s = a.value + b.value;
        return {s >= p_ ? s - p_ : s};
    }
    constexpr FieldScalar sub(FieldScalar a, FieldScalar b) const noexcept {
        return {a.value >= b.value ? a.value - b.value : a.value + p_ - b.value};
    }
    constexpr FieldScalar neg(FieldScalar a) const noexcept { return {a.value == 0 ? 0 : p_ - a.value}; }
    constexpr FieldScalar mul(FieldScalar a, FieldScalar b) const noexcept {
        return {(a.value * b.value) % p_};
    }

    /// Multiplicative inverse by Fermat. inv(0) throws.
    FieldScalar inv(FieldScalar a) const {
        if (a.value == 0) throw std::domain_error("inverse of zero in F_" + std::to_string(p_));
        FieldScalar result = one();
        FieldScalar base = a;
        for (std::uint32_t e = p_ - 2; e > 0; e >>= 1) {
            if (e & 1u) result = mul(result, base);
            base = mul(base, base);
        }
        return result;
    }

    /// Uniform residue; exact probability 1/p via rejection.
    FieldScalar uniform(RngStream& rng) const noexcept {
        return {static_cast<std::uint32_t>(rng.below(p_))};
    }

  private:
    std::uint32_t p_;
};

static_assert(FiniteField<PrimeField>);

}  // namespace burnside
