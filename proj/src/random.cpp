#include "admmdet/random.hpp"

#include "admmdet/errors.hpp"

#include <cmath>
#include <numbers>

namespace admmdet {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) noexcept {
    return splitmix64(splitmix64(master) ^ (tag + 0x632BE59BD9B4E019ull));
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) noexcept {
    // FNV-1a over the tag bytes
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return derive_seed(master, h);
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kPhiloxM0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kPhiloxM1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

std::uint64_t RandomEngine::next_u64() noexcept {
    if (buffered_ == 0) {
        const std::array<std::uint32_t, 4> ctr{
            static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
            static_cast<std::uint32_t>(stream_.stream_id), static_cast<std::uint32_t>(stream_.stream_id >> 32)};
        const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(stream_.seed),
                                               static_cast<std::uint32_t>(stream_.seed >> 32)};
        buffer_ = philox4x32(ctr, key);
        ++block_;
        buffered_ = 2;
    }
    const int k = 2 - buffered_;
    --buffered_;
    return std::uint64_t{buffer_[2 * k]} | (std::uint64_t{buffer_[2 * k + 1]} << 32);
}

double RandomEngine::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t RandomEngine::below(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % bound;
}

double RandomEngine::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    // u1 in (0, 1] keeps the log finite
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
}

Vector sample_gaussian(RandomEngine& engine, std::size_t n, double mean, double std) {
    if (!(std >= 0.0)) throw ParameterError("sample_gaussian: std must be non-negative");
    Vector v(n);
    for (auto& x : v) x = mean + std * engine.normal();
    return v;
}

} // namespace admmdet
