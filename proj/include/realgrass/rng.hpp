#pragma once

#include <cstdint>
#include <random>

namespace realgrass {

/// Identifies one reproducible random stream. Parallel estimators give every
/// chunk of work its own stream_id, so results do not depend on scheduling.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    [[nodiscard]] RngStream substream(std::uint64_t id) const
    {
        // Re-hash so that nested substreams of different parents do not collide.
        std::uint64_t z = stream_id + 0x9E3779B97F4A7C15ULL * (id + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return {seed, z ^ (z >> 31)};
    }
};

/// Generator bound to an RngStream. Not thread-safe; one per worker.
class Rng {
public:
    explicit Rng(RngStream s) : engine_(make_engine(s)) {}

    double normal() { return normal_(engine_); }
    /// Uniform on [0, 1).
    double uniform() { return uniform_(engine_); }

    std::mt19937_64& engine() { return engine_; }

private:
    static std::mt19937_64 make_engine(RngStream s)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
                          static_cast<std::uint32_t>(s.stream_id), static_cast<std::uint32_t>(s.stream_id >> 32),
                          0x5eedU};
        return std::mt19937_64(seq);
    }

    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

} // namespace realgrass
