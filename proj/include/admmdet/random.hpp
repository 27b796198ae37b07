#pragma once

#include "admmdet/linalg.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace admmdet {

/// Names an independent random stream: identical (seed, stream_id) pairs replay
/// identical draws, and distinct stream ids are statistically independent.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    friend bool operator==(const RngStream&, const RngStream&) = default;
};

/// Mixes a master seed with a tag into a new seed (SplitMix64 finalizer).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) noexcept;

/// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based generator over a RngStream. The key is the seed; the 128-bit
/// counter is (block index, stream id), so draw k of a stream is a pure function
/// of (seed, stream_id, k).
class RandomEngine {
public:
    using result_type = std::uint64_t;

    explicit RandomEngine(RngStream stream) noexcept : stream_(stream) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept { return next_u64(); }
    std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, bound); exact for any bound via rejection.
    std::uint64_t below(std::uint64_t bound) noexcept;
    /// Standard normal via Box-Muller; the pair's second value is cached.
    double normal() noexcept;

    RngStream stream() const noexcept { return stream_; }

private:
    RngStream stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int buffered_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// n i.i.d. N(mean, std²) draws taken from the engine's current position.
Vector sample_gaussian(RandomEngine& engine, std::size_t n, double mean, double std);

/// In-place Fisher-Yates shuffle driven by the engine.
template <typename T>
void shuffle(std::span<T> items, RandomEngine& engine) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(engine.below(i));
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace admmdet
