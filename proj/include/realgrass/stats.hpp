#pragma once
/**
 * @file stats.hpp
 * @brief Streaming mean/variance, the Estimate record shared by every
 *        stochastic result, and the deterministic chunked parallel driver.
 *
 * Work is split into fixed-size chunks; chunk c draws from substream c of the
 * caller's RngStream and produces its own accumulator. Accumulators are merged
 * in chunk order, so the result depends on (seed, samples) and not on how many
 * worker threads processed the chunks.
 */

#include <realgrass/errors.hpp>
#include <realgrass/rng.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace realgrass {

/// Welford accumulator with Chan's pairwise merge.
struct StreamingStats {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x)
    {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    void merge(const StreamingStats& o)
    {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(count);
        const double nb = static_cast<double>(o.count);
        const double n = na + nb;
        const double delta = o.mean - mean;
        mean += delta * nb / n;
        m2 += o.m2 + delta * delta * na * nb / n;
        count += o.count;
    }

    [[nodiscard]] double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    [[nodiscard]] double stderr_of_mean() const
    {
        return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
    }
};

/// Result of a stochastic (or, with std_error 0, deterministic) computation.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
    std::string method;
    std::uint64_t degenerate_count = 0;

    [[nodiscard]] double ci95_low() const { return value - 1.959963984540054 * std_error; }
    [[nodiscard]] double ci95_high() const { return value + 1.959963984540054 * std_error; }

    /// Same estimate multiplied by a positive constant.
    [[nodiscard]] Estimate scaled(double c) const
    {
        Estimate e = *this;
        e.value *= c;
        e.std_error *= std::abs(c);
        return e;
    }
};

/// |a - b| measured in units of the combined standard error.
inline double z_distance(double a, double sa, double b, double sb)
{
    const double s = std::sqrt(sa * sa + sb * sb);
    return s > 0.0 ? std::abs(a - b) / s : (a == b ? 0.0 : INFINITY);
}

struct ParallelConfig {
    unsigned workers = 1;
    std::uint64_t chunk_size = 4096;
};

/// Runs `body(acc, rng, count)` over fixed chunks and returns the per-chunk
/// accumulators merged in order with `merge(into, from)`.
template <typename Acc, typename Body, typename Merge>
Acc run_chunked(RngStream stream, std::uint64_t samples, ParallelConfig cfg, const Acc& init, Body body, Merge merge)
{
    if (samples == 0) throw DomainError("Monte Carlo: sample budget must be positive");
    const std::uint64_t chunk = std::max<std::uint64_t>(1, cfg.chunk_size);
    const std::uint64_t n_chunks = (samples + chunk - 1) / chunk;
    std::vector<Acc> parts(static_cast<std::size_t>(n_chunks), init);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const std::uint64_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            try {
                Rng rng(stream.substream(c));
                const std::uint64_t count = std::min(chunk, samples - c * chunk);
                body(parts[static_cast<std::size_t>(c)], rng, count);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n_chunks);
                return;
            }
        }
    };

    const unsigned workers = std::max(1u, cfg.workers);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    Acc total = init;
    for (const auto& p : parts) merge(total, p);
    return total;
}

struct ScalarAccumulator {
    StreamingStats stats;
    std::uint64_t degenerate = 0;
};

/// Mean of `draw(rng)` over `samples` draws; draws returning nullopt are counted
/// as degenerate and excluded from the mean.
template <typename Draw>
Estimate estimate_mean(RngStream stream, std::uint64_t samples, ParallelConfig cfg, std::string method, Draw draw)
{
    auto acc = run_chunked(
        stream, samples, cfg, ScalarAccumulator{},
        [&draw](ScalarAccumulator& a, Rng& rng, std::uint64_t count) {
            for (std::uint64_t i = 0; i < count; ++i) {
                const std::optional<double> x = draw(rng);
                if (x) a.stats.push(*x);
                else ++a.degenerate;
            }
        },
        [](ScalarAccumulator& into, const ScalarAccumulator& from) {
            into.stats.merge(from.stats);
            into.degenerate += from.degenerate;
        });
    Estimate e;
    e.value = acc.stats.mean;
    e.std_error = acc.stats.stderr_of_mean();
    e.n_samples = samples;
    e.seed = stream.seed;
    e.method = std::move(method);
    e.degenerate_count = acc.degenerate;
    return e;
}

} // namespace realgrass
