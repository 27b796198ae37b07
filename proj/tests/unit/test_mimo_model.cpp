#include "doctest.h"

#include "admmdet/errors.hpp"
#include "admmdet/mimo_model.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <map>

using namespace admmdet;

TEST_CASE("system config validation") {
    CHECK_NOTHROW(SystemConfig{16, 4, 2, 30}.validate());
    CHECK_THROWS_AS((SystemConfig{4, 4, 2, 30}.validate()), ConfigError);
    CHECK_THROWS_AS((SystemConfig{4, 0, 2, 30}.validate()), ConfigError);
    CHECK_THROWS_AS((SystemConfig{4, 2, 0, 30}.validate()), ConfigError);
    CHECK_THROWS_AS((SystemConfig{4, 2, 2, 0}.validate()), ConfigError);
    CHECK(SystemConfig{16, 4, 2, 30}.M() == 32);
    CHECK(SystemConfig{16, 4, 2, 30}.K() == 8);
}

TEST_CASE("complex_to_real block layout") {
    ComplexMatrix one{Matrix{{1}}, Matrix{{0}}};
    CHECK(complex_to_real(one) == Matrix{{1, 0}, {0, 1}});
    ComplexMatrix imag{Matrix{{0}}, Matrix{{1}}};
    CHECK(complex_to_real(imag) == Matrix{{0, 1}, {-1, 0}});
}

TEST_CASE("complex_to_real y stacking and shape checks") {
    ComplexMatrix hc{Matrix{{1}, {2}}, Matrix{{3}, {4}}};
    ComplexVector yc{{5, 6}, {7, 8}};
    const auto sys = complex_to_real(hc, yc);
    CHECK(sys.y == Vector{5, 6, 7, 8});
    CHECK(sys.h.rows() == 4);
    CHECK(sys.h.cols() == 2);
    CHECK_THROWS_AS(complex_to_real(hc, ComplexVector{{1}, {2}}), DimensionError);
    CHECK_THROWS_AS(complex_to_real(ComplexMatrix{Matrix(2, 1), Matrix(1, 1)}), DimensionError);
}

// The block layout [[Re, Im], [−Im, Re]] realifies the product conj(H̃)·s̃.
TEST_CASE("realified product equals complex product") {
    {
        ComplexMatrix h{Matrix{{1}}, Matrix{{2}}};
        const auto got = multiply(complex_to_real(h), Vector{1, 1});
        const auto ref = std::conj(std::complex<double>(1, 2)) * std::complex<double>(1, 1);
        CHECK(got == Vector{ref.real(), ref.imag()});
    }
    RandomEngine eng({21, 0});
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m = 5, k = 3;
        ComplexMatrix h{Matrix(m, k), Matrix(m, k)};
        std::vector<std::complex<double>> s(k);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < k; ++c) {
                h.re(r, c) = eng.normal();
                h.im(r, c) = eng.normal();
            }
        Vector sr(2 * k);
        for (std::size_t c = 0; c < k; ++c) {
            s[c] = {eng.normal(), eng.normal()};
            sr[c] = s[c].real();
            sr[c + k] = s[c].imag();
        }
        const auto got = multiply(complex_to_real(h), sr);
        for (std::size_t r = 0; r < m; ++r) {
            std::complex<double> acc = 0;
            for (std::size_t c = 0; c < k; ++c) acc += std::conj(std::complex<double>(h.re(r, c), h.im(r, c))) * s[c];
            CHECK(std::abs(got[r] - acc.real()) <= 1e-12);
            CHECK(std::abs(got[r + m] - acc.imag()) <= 1e-12);
        }
    }
}

TEST_CASE("generate_channel statistics") {
    SystemConfig cfg{100, 10, 2, 1};
    double sum_abs2 = 0.0, sum_abs4 = 0.0, sum_re = 0.0, sum_im = 0.0;
    std::size_t n = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto h = generate_channel(cfg, RngStream{77, s});
        for (std::size_t i = 0; i < h.re.data().size(); ++i) {
            const double a2 = h.re.data()[i] * h.re.data()[i] + h.im.data()[i] * h.im.data()[i];
            sum_abs2 += a2;
            sum_abs4 += a2 * a2;
            sum_re += h.re.data()[i];
            sum_im += h.im.data()[i];
            ++n;
        }
    }
    REQUIRE(n == 100000);
    const double mean_abs2 = sum_abs2 / n;
    CHECK(mean_abs2 >= 0.98);
    CHECK(mean_abs2 <= 1.02);
    // each part has variance 1/2, so the mean has sd sqrt(0.5/n)
    const double bound = 3.0 * std::sqrt(0.5 / n);
    CHECK(std::abs(sum_re / n) <= bound);
    CHECK(std::abs(sum_im / n) <= bound);
    // |h|² ~ Exp(1): E|h|⁴ = 2
    CHECK(std::abs(sum_abs4 / n - 2.0) < 0.1);
}

TEST_CASE("generate_channel replays") {
    SystemConfig cfg{8, 2, 2, 1};
    const auto a = generate_channel(cfg, RngStream{3, 4});
    const auto b = generate_channel(cfg, RngStream{3, 4});
    CHECK(a.re == b.re);
    CHECK(a.im == b.im);
}

TEST_CASE("compose_symbols examples") {
    std::vector<Vector> z1{{1, -1}};
    CHECK(compose_symbols(z1) == Vector{1, -1});
    std::vector<Vector> z2{{1}, {-1}};
    CHECK(compose_symbols(z2) == Vector{-1});
    std::vector<Vector> z3{{1}, {1}, {1}};
    CHECK(compose_symbols(z3) == Vector{7});
    std::vector<Vector> bad{{0.5}};
    CHECK_THROWS_AS(compose_symbols(bad), DomainError);
    std::vector<Vector> ragged{{1, 1}, {1}};
    CHECK_THROWS_AS(compose_symbols(ragged), DimensionError);
}

TEST_CASE("decompose_symbols examples") {
    auto p = decompose_symbols(Vector{3}, 2);
    CHECK(p == std::vector<Vector>{{1}, {1}});
    p = decompose_symbols(Vector{-1}, 2);
    CHECK(p == std::vector<Vector>{{1}, {-1}});
    p = decompose_symbols(Vector{-7}, 3);
    CHECK(p == std::vector<Vector>{{-1}, {-1}, {-1}});
    CHECK_THROWS_AS(decompose_symbols(Vector{1, 2}, 2), DomainError);
    CHECK_THROWS_AS(decompose_symbols(Vector{5}, 2), DomainError);
    try {
        decompose_symbols(Vector{1, 1, 4}, 2);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find('2') != std::string::npos);
    }
}

TEST_CASE("decomposition matches brute force and round-trips exhaustively") {
    for (int q = 1; q <= 3; ++q) {
        const std::size_t combos = std::size_t{1} << q;
        std::map<double, int> hits;
        for (std::size_t code = 0; code < combos; ++code) {
            std::vector<Vector> planes(q, Vector(1));
            for (int i = 0; i < q; ++i) planes[i][0] = (code >> i) & 1u ? 1.0 : -1.0;
            const auto s = compose_symbols(planes);
            ++hits[s[0]];
            CHECK(decompose_symbols(s, q) == planes);
        }
        // bijection: every alphabet symbol hit exactly once
        CHECK(hits.size() == combos);
        for (double a : real_alphabet(q)) CHECK(hits[a] == 1);
    }
}

TEST_CASE("symbol energy and noise variance") {
    CHECK(complex_symbol_energy(2) == 10.0);
    CHECK(complex_symbol_energy(3) == 42.0);
    CHECK(real_symbol_energy(1) == 1.0);
    CHECK(max_level(3) == 7);
    CHECK(real_alphabet(2) == Vector{-3, -1, 1, 3});
    // σc² = kc·Es/10^(snr/10); σr² = σc²/2
    CHECK(real_noise_variance(4, 2, 10.0) == doctest::Approx(4.0 * 10.0 / 10.0 / 2.0).epsilon(1e-15));
    CHECK(real_noise_variance(4, 2, kNoiselessSnr) == 0.0);
}

TEST_CASE("awgn_transmit noiseless is exact") {
    SystemConfig cfg{6, 2, 2, 1};
    RandomEngine eng({5, 5});
    const auto h = complex_to_real(generate_channel(cfg, eng));
    const auto s = random_symbols(cfg.K(), cfg.q, eng);
    CHECK(awgn_transmit(h, s, cfg.q, kNoiselessSnr, eng) == multiply(h, s));
}

TEST_CASE("awgn_transmit noise variance") {
    SystemConfig cfg{4, 2, 2, 1};
    const double snr = 5.0;
    const double expect = real_noise_variance(cfg.kc, cfg.q, snr);
    RandomEngine eng({6, 0});
    const auto h = complex_to_real(generate_channel(cfg, eng));
    const auto s = random_symbols(cfg.K(), cfg.q, eng);
    const auto hs = multiply(h, s);
    double acc = 0.0;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        const auto y = awgn_transmit(h, s, cfg.q, snr, eng);
        for (std::size_t r = 0; r < y.size(); ++r) acc += (y[r] - hs[r]) * (y[r] - hs[r]);
    }
    const double est = acc / (trials * static_cast<double>(cfg.M()));
    CHECK(std::abs(est / expect - 1.0) < 0.02);
}

TEST_CASE("quantize examples") {
    CHECK(quantize(Vector{0.2}, 2) == Vector{1});
    CHECK(quantize(Vector{-5.7}, 2) == Vector{-3});
    CHECK(quantize(Vector{2.0}, 2) == Vector{1});
    CHECK(quantize(Vector{0.0}, 2) == Vector{-1});
    CHECK(quantize(Vector{-2.0}, 2) == Vector{-3});
    CHECK(quantize(Vector{100.0}, 3) == Vector{7});
    CHECK_THROWS_AS(quantize(Vector{std::nan("")}, 2), DomainError);
    CHECK_THROWS_AS(quantize(Vector{std::numeric_limits<double>::infinity()}, 2), DomainError);
}

namespace {
double nearest_oracle(double x, int q) {
    double best = 0.0, best_d = std::numeric_limits<double>::infinity();
    for (double a : real_alphabet(q)) {
        const double d = std::abs(x - a);
        if (d < best_d) { // ascending scan: a tie keeps the smaller symbol
            best_d = d;
            best = a;
        }
    }
    return best;
}
} // namespace

TEST_CASE("quantize is correct and idempotent on a dense grid") {
    for (int q = 1; q <= 3; ++q) {
        const double span = 2.0 * max_level(q) + 4.0;
        Vector x(100001);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = -span / 2 + span * static_cast<double>(i) / 100000.0;
        for (int e = -10; e <= 10; e += 2) x.push_back(e);
        const auto qx = quantize(x, q);
        CHECK(quantize(qx, q) == qx);
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (qx[i] != nearest_oracle(x[i], q)) ++wrong;
        CHECK(wrong == 0);
    }
}

TEST_CASE("symbol error rate counting") {
    const Vector s{1, -1, 3, -3};
    CHECK(symbol_error_rate(s, s, 2) == 0.0);
    CHECK(symbol_error_rate(Vector{3, -1, 3, -3}, s, 2) == 0.5);
    CHECK(symbol_error_rate(Vector{-1, 1, 1, -1}, s, 2) == 1.0);
    // imaginary part of symbol 2 wrong only
    CHECK(count_symbol_errors(Vector{1, -1, 3, 3}, s, 2) == 1);
    // both parts of the same symbol wrong count once
    CHECK(count_symbol_errors(Vector{3, -1, 1, -3}, s, 2) == 1);
    // symmetric in its arguments
    CHECK(symbol_error_rate(s, Vector{3, -1, 3, 3}, 2) == symbol_error_rate(Vector{3, -1, 3, 3}, s, 2));
    CHECK_THROWS_AS(symbol_error_rate(Vector{1, 1}, s, 2), DimensionError);
    CHECK_THROWS_AS(symbol_error_rate(s, s, 3), DimensionError);
}

TEST_CASE("dataset regeneration and alphabet uniformity") {
    DatasetDescriptor d{4, 2, 2, SnrPolicy::fixed(10), 1, 99};
    const auto a = generate_dataset(d);
    const auto b = generate_dataset(d);
    REQUIRE(a.size() == 1);
    CHECK(a[0].y == b[0].y);
    CHECK(a[0].h == b[0].h);
    CHECK(a[0].s == b[0].s);

    DatasetDescriptor big{4, 2, 2, SnrPolicy::uniform(0, 10), 25000, 5};
    Dataset ds(big);
    std::map<double, std::size_t> hist;
    double snr_lo = 1e9, snr_hi = -1e9;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto smp = ds[i];
        for (double v : smp.s) ++hist[v];
        snr_lo = std::min(snr_lo, smp.snr_db);
        snr_hi = std::max(snr_hi, smp.snr_db);
    }
    const double n = 100000.0, p = 0.25;
    const double sd = std::sqrt(n * p * (1 - p));
    CHECK(hist.size() == 4);
    for (auto [sym, count] : hist) CHECK(std::abs(static_cast<double>(count) - n * p) <= 3 * sd);
    CHECK(snr_lo >= 0.0);
    CHECK(snr_hi <= 10.0);
    CHECK(snr_hi - snr_lo > 9.0);
    // index addressing: element i equals the i-th generated sample
    const auto listed = generate_dataset(DatasetDescriptor{4, 2, 2, SnrPolicy::uniform(0, 10), 5, 5});
    CHECK(listed[3].y == ds[3].y);
}

TEST_CASE("make_sample at different SNR shares H, s and noise direction") {
    SystemConfig cfg{8, 2, 2, 1};
    const auto a = make_sample(cfg, RngStream{1, 1}, 0.0);
    const auto b = make_sample(cfg, RngStream{1, 1}, 10.0);
    const auto c = make_sample(cfg, RngStream{1, 1}, kNoiselessSnr);
    CHECK(a.h == b.h);
    CHECK(a.s == b.s);
    CHECK(c.y == multiply(c.h, c.s));
    const double ratio = std::sqrt(real_noise_variance(2, 2, 0.0) / real_noise_variance(2, 2, 10.0));
    for (std::size_t r = 0; r < a.y.size(); ++r)
        CHECK((a.y[r] - c.y[r]) == doctest::Approx(ratio * (b.y[r] - c.y[r])).epsilon(1e-9));
}
