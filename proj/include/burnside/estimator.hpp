#pragma once

// Orbit counting as a telescoping product of level ratios. Each level runs
// its own Burnside chain (fresh start, its own RNG stream) and averages an
// importance weight whose stationary mean is k(level below) / k(level).
// The count estimate is the product of reciprocals, kept in log form.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "burnside/field.hpp"
#include "burnside/multiset.hpp"
#include "burnside/pattern.hpp"
#include "burnside/rng.hpp"

namespace burnside {

inline constexpr std::size_t kBatchCount = 20;

/// Running mean plus batch-means standard error over a known sample count.
/// Samples are split into kBatchCount consecutive batches of size
/// floor(N / kBatchCount); trailing samples that do not fill a batch count
/// toward the mean only.
class BatchMeans {
  public:
    explicit BatchMeans(std::uint64_t expected) : expected_(expected), batch_size_(expected / kBatchCount) {
        batch_sums_.assign(kBatchCount, 0.0);
    }

    void add(double v) {
        total_ += v;
        if (batch_size_ > 0 && seen_ < batch_size_ * kBatchCount) batch_sums_[seen_ / batch_size_] += v;
        ++seen_;
    }

    std::uint64_t count() const noexcept { return seen_; }
    double mean() const noexcept { return seen_ == 0 ? 0.0 : total_ / static_cast<double>(seen_); }

    /// True when every batch holds at least one sample.
    bool reliable() const noexcept { return batch_size_ > 0 && seen_ >= batch_size_ * kBatchCount; }

    /// sd(batch means) / sqrt(batches); 0 when unreliable.
    double std_error() const noexcept {
        if (!reliable()) return 0.0;
        std::vector<double> means(kBatchCount);
        for (std::size_t b = 0; b < kBatchCount; ++b) means[b] = batch_sums_[b] / static_cast<double>(batch_size_);
        const double mu = std::accumulate(means.begin(), means.end(), 0.0) / kBatchCount;
        double ss = 0.0;
        for (double m : means) ss += (m - mu) * (m - mu);
        return std::sqrt(ss / (kBatchCount - 1) / kBatchCount);
    }

  private:
    std::uint64_t expected_;
    std::uint64_t batch_size_;
    std::uint64_t seen_ = 0;
    double total_ = 0.0;
    std::vector<double> batch_sums_;
};

struct ChainConfig {
    std::uint64_t burn_in = 100000;
    std::uint64_t samples = 100000;
    std::uint64_t master_seed = 0;
    /// Levels to run; empty means every level of the problem.
    std::vector<int> level_schedule;
    unsigned worker_count = 1;
};

struct RatioEstimate {
    int level = 0;
    double value = 0.0;
    double std_error = 0.0;
    bool std_error_reliable = false;
    double zero_fraction = 0.0;
    std::uint64_t samples_used = 0;
    /// Pattern levels only: how many samples had K_m = q^(-t), keyed by t.
    std::map<int, std::uint64_t> exponent_counts;

    /// Every sample had weight zero; the level carries no information.
    bool failed() const noexcept { return !(value > 0.0); }
};

struct LevelFailure {
    int level = 0;
    double zero_fraction = 0.0;
};

struct LogCountEstimate {
    std::string problem;   // "unitriangular" or "multiset"
    int n = 0;
    std::uint32_t q = 0;   // field order (unitriangular)
    int k = 0;             // alphabet size (multiset)
    double log_base = 0.0; // q for unitriangular, e for multiset
    /// Known log count of the bottom of the tower (ln k for multisets).
    double base_log_count = 0.0;
    ChainConfig config;
    std::vector<RatioEstimate> per_level;
    std::vector<LevelFailure> failures;
    /// Absent when any level failed.
    std::optional<double> log_count;
    /// First-order propagation sqrt(sum (se_m / E_m)^2) / ln(base), treating
    /// levels as independent. Approximate.
    double aggregate_std_error = 0.0;
    bool aggregate_std_error_reliable = false;
    double elapsed_seconds = 0.0;

    bool valid() const noexcept { return log_count.has_value(); }
};

/// A level of the generic tower: chain on X_(i+1) under G_(i+1) with a
/// projection phi_i onto X_i. Sizes enter as natural logarithms.
template <typename L>
concept GenericLevel = requires(const L& level, typename L::State& x, RngStream& rng) {
    { level.initial_state() } -> std::convertible_to<typename L::State>;
    level.step(x, rng);
    { level.log_group_index() } -> std::convertible_to<double>;
    { level.log_stabilizer(x) } -> std::convertible_to<double>;
    { level.log_projected_stabilizer(x) } -> std::convertible_to<double>;
    { level.log_fiber_size(x) } -> std::convertible_to<double>;
};

/// |Stab_i(phi_i(x))| / (|Stab_(i+1)(x)| |phi_i^{-1}(phi_i(x))|)
template <GenericLevel L>
double generic_weight(const L& level, const typename L::State& x) {
    return std::exp(level.log_projected_stabilizer(x) - level.log_stabilizer(x) - level.log_fiber_size(x));
}

/// E_i = (|G_(i+1)| / |G_i|) * mean of generic_weight over samples
/// B+1 .. B+N of the level chain.
template <GenericLevel L>
RatioEstimate estimate_ratio_generic(const L& level, std::uint64_t burn_in, std::uint64_t samples, RngStream& rng,
                                     int level_index = 0) {
    if (samples < 1) throw std::invalid_argument("need at least one sample per level");
    const double index = std::exp(level.log_group_index());
    typename L::State x = level.initial_state();
    for (std::uint64_t j = 0; j < burn_in; ++j) level.step(x, rng);
    BatchMeans acc(samples);
    std::uint64_t zeros = 0;
    for (std::uint64_t j = 0; j < samples; ++j) {
        level.step(x, rng);
        const double w = index * generic_weight(level, x);
        zeros += (w == 0.0);
        acc.add(w);
    }
    RatioEstimate r;
    r.level = level_index;
    r.value = acc.mean();
    r.std_error = acc.std_error();
    r.std_error_reliable = acc.reliable();
    r.zero_fraction = static_cast<double>(zeros) / static_cast<double>(samples);
    r.samples_used = samples;
    return r;
}

/// Stationary-mean version of estimate_ratio_generic: exact weights instead
/// of chain samples.
template <GenericLevel L>
double expected_ratio_generic(const L& level, std::span<const typename L::State> states,
                              std::span<const double> weights) {
    if (states.size() != weights.size()) throw std::invalid_argument("states and weights differ in length");
    double s = 0.0;
    for (std::size_t t = 0; t < states.size(); ++t) s += weights[t] * generic_weight(level, states[t]);
    return std::exp(level.log_group_index()) * s;
}

/// E_m = (q / N) sum_j K_m(M_j) for the H_m chain started at the identity.
inline RatioEstimate estimate_ratio_unitriangular(const NestedSequence& seq, int m, const PrimeField& field,
                                                  std::uint64_t burn_in, std::uint64_t samples, RngStream& rng) {
    if (m < 1 || m > seq.levels()) throw std::invalid_argument("level " + std::to_string(m) + " out of range");
    if (samples < 1) throw std::invalid_argument("need at least one sample per level");
    const std::uint32_t q = field.order();
    const Position added = seq.added(m);
    PatternChain chain(seq.set(m), field);
    CentralizerSolver previous(seq.set(m - 1), field);

    for (std::uint64_t j = 0; j < burn_in; ++j) chain.step(rng);

    // q * q^(-t) for t = 0.. ; K_m never exceeds 1, so t <= m.
    std::vector<double> weight_of(static_cast<std::size_t>(m) + 2);
    weight_of[0] = static_cast<double>(q);
    for (std::size_t t = 1; t < weight_of.size(); ++t) weight_of[t] = weight_of[t - 1] / q;

    BatchMeans acc(samples);
    RatioEstimate r;
    r.level = m;
    std::uint64_t zeros = 0;
    for (std::uint64_t j = 0; j < samples; ++j) {
        chain.step(rng);
        const PatternElement& g = chain.state();
        if (g.at(added).value != 0) {
            ++zeros;
            acc.add(0.0);
            continue;
        }
        const LevelStatistic k = level_statistic(true, previous.dimension(g), chain.dimension());
        ++r.exponent_counts[k.exponent];
        acc.add(weight_of[static_cast<std::size_t>(k.exponent)]);
    }
    // Value from the exponent histogram: a short exact-order sum instead of
    // N running additions.
    double sum = 0.0;
    for (const auto& [t, c] : r.exponent_counts) sum += static_cast<double>(c) * weight_of[static_cast<std::size_t>(t)];
    r.value = sum / static_cast<double>(samples);
    r.std_error = acc.std_error();
    r.std_error_reliable = acc.reliable();
    r.zero_fraction = static_cast<double>(zeros) / static_cast<double>(samples);
    r.samples_used = samples;
    return r;
}

struct UnitriangularProblem {
    int n = 1;
    std::uint32_t q = 2;
};

struct MultisetProblem {
    int n = 1;
    int k = 2;
};

namespace detail {

/// Runs task(level) for every scheduled level on up to `workers` threads and
/// returns results in schedule order.
template <typename Task>
std::vector<RatioEstimate> run_levels(std::span<const int> schedule, unsigned workers, Task task) {
    std::vector<RatioEstimate> out(schedule.size());
    const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(schedule.size())));
    if (threads <= 1) {
        for (std::size_t t = 0; t < schedule.size(); ++t) out[t] = task(schedule[t]);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (std::size_t t; (t = next.fetch_add(1)) < schedule.size();) {
                try {
                    out[t] = task(schedule[t]);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return out;
}

inline void combine(LogCountEstimate& est) {
    double neg_log = 0.0;
    double rel_var = 0.0;
    bool reliable = true;
    const double ln_base = std::log(est.log_base);
    for (const RatioEstimate& r : est.per_level) {
        if (r.failed()) {
            est.failures.push_back({r.level, r.zero_fraction});
            continue;
        }
        neg_log += std::log(r.value);
        rel_var += (r.std_error / r.value) * (r.std_error / r.value);
        reliable = reliable && r.std_error_reliable;
    }
    if (est.failures.empty()) est.log_count = est.base_log_count - neg_log / ln_base;
    est.aggregate_std_error = std::sqrt(rel_var) / ln_base;
    est.aggregate_std_error_reliable = reliable;
}

inline std::vector<int> default_schedule(int first, int last) {
    std::vector<int> s;
    for (int m = first; m <= last; ++m) s.push_back(m);
    return s;
}

}  // namespace detail

/// log_q k(U_n(F_q)) = -sum_m log_q E_m. Level m draws from stream m of
/// config.master_seed, so the result does not depend on worker_count.
inline LogCountEstimate estimate_count(const UnitriangularProblem& problem, const ChainConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    const PrimeField field(problem.q);
    const NestedSequence seq(problem.n);
    LogCountEstimate est;
    est.problem = "unitriangular";
    est.n = problem.n;
    est.q = problem.q;
    est.log_base = problem.q;
    est.config = config;
    if (est.config.level_schedule.empty()) est.config.level_schedule = detail::default_schedule(1, seq.levels());
    for (int m : est.config.level_schedule)
        if (m < 1 || m > seq.levels()) throw std::invalid_argument("level " + std::to_string(m) + " not in schedule range");

    est.per_level = detail::run_levels(est.config.level_schedule, config.worker_count, [&](int m) {
        RngStream rng = RngStream::for_stream(config.master_seed, static_cast<std::uint64_t>(m));
        return estimate_ratio_unitriangular(seq, m, field, config.burn_in, config.samples, rng);
    });
    detail::combine(est);
    est.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return est;
}

/// ln k(C_k^n, S_n) = ln k - sum_i ln E_i over levels i = 1..n-1; the
/// bottom set C_k^1 has exactly k orbits.
inline LogCountEstimate estimate_count(const MultisetProblem& problem, const ChainConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    if (problem.n < 1 || problem.k < 1) throw std::invalid_argument("need n >= 1 and k >= 1");
    LogCountEstimate est;
    est.problem = "multiset";
    est.n = problem.n;
    est.k = problem.k;
    est.log_base = std::exp(1.0);
    est.base_log_count = std::log(static_cast<double>(problem.k));
    est.config = config;
    if (est.config.level_schedule.empty()) est.config.level_schedule = detail::default_schedule(1, problem.n - 1);
    for (int i : est.config.level_schedule)
        if (i < 1 || i > problem.n - 1) throw std::invalid_argument("level " + std::to_string(i) + " not in schedule range");

    est.per_level = detail::run_levels(est.config.level_schedule, config.worker_count, [&](int i) {
        RngStream rng = RngStream::for_stream(config.master_seed, static_cast<std::uint64_t>(i));
        return estimate_ratio_generic(MultisetLevel(i, problem.k), config.burn_in, config.samples, rng, i);
    });
    detail::combine(est);
    est.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return est;
}

}  // namespace burnside
