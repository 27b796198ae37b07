#include "doctest.h"

#include "admmdet/parallel.hpp"
#include "admmdet/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace admmdet;

TEST_CASE("philox4x32-10 known answers") {
    // Reference vectors from the Random123 distribution (kat_vectors).
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) ==
          std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("sample_gaussian with zero std repeats the mean") {
    RandomEngine eng({1, 2});
    const auto v = sample_gaussian(eng, 17, 3.25, 0.0);
    CHECK(std::all_of(v.begin(), v.end(), [](double x) { return x == 3.25; }));
}

TEST_CASE("sample_gaussian moments") {
    RandomEngine eng({42, 0});
    const auto v = sample_gaussian(eng, 100000, 0.0, 1.0);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size() - 1);
    CHECK(std::abs(mean) <= 0.02);
    CHECK(var >= 0.98);
    CHECK(var <= 1.02);
}

TEST_CASE("stream replay is deterministic and streams differ") {
    RandomEngine a({5, 9}), b({5, 9}), c({5, 10});
    const auto va = sample_gaussian(a, 1000, 0, 1);
    const auto vb = sample_gaussian(b, 1000, 0, 1);
    const auto vc = sample_gaussian(c, 1000, 0, 1);
    CHECK(va == vb);
    CHECK(va != vc);
}

TEST_CASE("distinct streams are uncorrelated") {
    RandomEngine a({5, 0}), b({5, 1});
    const auto va = sample_gaussian(a, 100000, 0, 1);
    const auto vb = sample_gaussian(b, 100000, 0, 1);
    double c = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) c += va[i] * vb[i];
    c /= static_cast<double>(va.size());
    CHECK(std::abs(c) < 4.0 / std::sqrt(100000.0));
}

TEST_CASE("draws are independent of parallel schedule") {
    std::vector<double> serial(64), parallel(64);
    for (std::size_t i = 0; i < 64; ++i) serial[i] = RandomEngine({3, i}).normal();
    set_max_threads(4);
    parallel_for(64, [&](std::size_t i) { parallel[i] = RandomEngine({3, i}).normal(); });
    set_max_threads(0);
    CHECK(serial == parallel);
}

TEST_CASE("uniform and below stay in range") {
    RandomEngine eng({11, 0});
    std::vector<int> hist(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const double u = eng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const auto k = eng.below(7);
        REQUIRE(k < 7);
        ++hist[k];
    }
    // multinomial 3σ: sd = sqrt(70000·(1/7)(6/7)) ≈ 92.6
    for (int h : hist) CHECK(std::abs(h - 10000) < 4 * 93);
}

TEST_CASE("derive_seed separates tags") {
    std::set<std::uint64_t> seen;
    for (const char* tag : {"a", "b", "psnet-data", "hnet-data", "eval"}) seen.insert(derive_seed(1, tag));
    for (std::uint64_t t = 0; t < 5; ++t) seen.insert(derive_seed(1, t));
    CHECK(seen.size() == 10);
    CHECK(derive_seed(1, "eval") == derive_seed(1, "eval"));
    CHECK(derive_seed(1, "eval") != derive_seed(2, "eval"));
}

TEST_CASE("shuffle is a permutation") {
    std::vector<int> v(100);
    std::iota(v.begin(), v.end(), 0);
    RandomEngine eng({12, 0});
    shuffle(std::span<int>(v), eng);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> ref(100);
    std::iota(ref.begin(), ref.end(), 0);
    CHECK(sorted == ref);
    CHECK(v != ref);
}
