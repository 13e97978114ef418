#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace burnside {

/// SplitMix64 step: used to expand seeds and to derive per-stream seeds.
constexpr std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Seed of stream `stream_id` under `master_seed`. A pure function of both
/// arguments, so a stream's output never depends on which worker runs it.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream_id) noexcept {
    std::uint64_t s = master_seed;
    std::uint64_t a = splitmix64_next(s);
    std::uint64_t t = stream_id ^ 0xd1b54a32d192ed03ull;
    std::uint64_t b = splitmix64_next(t);
    std::uint64_t mixed = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
    return splitmix64_next(mixed);
}

/// xoshiro256** generator. Single owner: one stream per chain.
class RngStream {
  public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t seed) noexcept {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64_next(s);
    }

    static RngStream for_stream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept {
        return RngStream(derive_seed(master_seed, stream_id));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform integer in [0, bound). Rejects the top partial block of the
    /// 64-bit range, so every value has probability exactly 1/bound.
    std::uint64_t below(std::uint64_t bound) noexcept {
        if ((bound & (bound - 1)) == 0) return (*this)() & (bound - 1);
        // 2^64 mod bound; the accepted range [threshold, 2^64) has a length
        // divisible by bound.
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = (*this)();
            if (r >= threshold) return r % bound;
        }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace burnside
