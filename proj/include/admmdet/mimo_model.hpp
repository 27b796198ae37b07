#pragma once

#include "admmdet/linalg.hpp"
#include "admmdet/random.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace admmdet {

/// Antenna counts, modulation and depth of a detection problem. The constellation
/// is rectangular 4^q-QAM on the odd-integer grid; the real model has
/// M = 2·mc rows and K = 2·kc columns.
struct SystemConfig {
    std::size_t mc = 16;
    std::size_t kc = 4;
    int q = 2;
    std::size_t layers = 30;

    std::size_t M() const noexcept { return 2 * mc; }
    std::size_t K() const noexcept { return 2 * kc; }

    /// Throws ConfigError unless mc > kc >= 1, q >= 1, layers >= 1.
    void validate() const;
};

/// Largest real symbol level, 2^q − 1.
int max_level(int q);
/// Mean energy of one complex symbol, 2(4^q − 1)/3.
double complex_symbol_energy(int q);
/// Mean energy of one real component, (4^q − 1)/3.
double real_symbol_energy(int q);
/// Per-component noise variance of the real model at the given SNR
/// (SNR = kc·Es/σc², σr² = σc²/2). Infinite SNR gives 0.
double real_noise_variance(std::size_t kc, int q, double snr_db);

/// The real alphabet {−(2^q−1), …, −1, 1, …, 2^q−1} in ascending order.
std::vector<double> real_alphabet(int q);

struct ComplexMatrix {
    Matrix re;
    Matrix im;
};

struct ComplexVector {
    Vector re;
    Vector im;
};

struct RealSystem {
    Matrix h;
    Vector y;
};

/// Real block form [[Re, Im], [−Im, Re]] of a complex matrix.
Matrix complex_to_real(const ComplexMatrix& hc);
/// Real block form of the channel plus y = [Re(ỹ); Im(ỹ)].
RealSystem complex_to_real(const ComplexMatrix& hc, const ComplexVector& yc);

/// i.i.d. circular complex Gaussian mc×kc matrix, unit variance per entry.
ComplexMatrix generate_channel(const SystemConfig& cfg, RandomEngine& engine);
ComplexMatrix generate_channel(const SystemConfig& cfg, RngStream stream);

/// s = Σ 2^{i−1} z_i over binary planes z_1..z_q.
Vector compose_symbols(std::span<const Vector> planes);
/// Unique binary planes with compose_symbols(planes) == s.
std::vector<Vector> decompose_symbols(std::span<const double> s, int q);

/// Draws K symbols uniformly from the real alphabet.
Vector random_symbols(std::size_t k, int q, RandomEngine& engine);

/// y = H s + υ at the given SNR (dB); +∞ means no noise is added.
Vector awgn_transmit(const Matrix& h, std::span<const double> s, int q, double snr_db, RandomEngine& engine);

/// Nearest grid symbol per entry; ties (even integers) go toward −∞.
Vector quantize(std::span<const double> x, int q);

/// Number of complex symbols (real index k paired with k + kc) with any wrong component.
std::size_t count_symbol_errors(std::span<const double> s_hat, std::span<const double> s, std::size_t kc);
double symbol_error_rate(std::span<const double> s_hat, std::span<const double> s, std::size_t kc);

/// One detection instance in the real model.
struct RealSample {
    Vector y;
    Matrix h;
    Vector s;
    double snr_db = 0.0;
    RngStream seed;
};

/// Channel, then symbols, then unit-variance noise scaled to the SNR, all drawn
/// from the given stream. Samples from the same stream at different SNRs share
/// H, s and the noise direction.
RealSample make_sample(const SystemConfig& cfg, RngStream stream, double snr_db);

/// Either a fixed SNR (lo == hi) or uniform over [lo, hi].
struct SnrPolicy {
    double lo = 10.0;
    double hi = 10.0;

    static SnrPolicy fixed(double snr_db) { return {snr_db, snr_db}; }
    static SnrPolicy uniform(double lo, double hi) { return {lo, hi}; }
    bool is_fixed() const noexcept { return lo == hi; }
};

/// Everything needed to regenerate a dataset bit-exactly.
struct DatasetDescriptor {
    std::size_t mc = 16;
    std::size_t kc = 4;
    int q = 2;
    SnrPolicy snr;
    std::size_t m = 10000;
    std::uint64_t seed = 0;

    SystemConfig system(std::size_t layers = 1) const { return {mc, kc, q, layers}; }
};

/// Index-addressable view of a seeded dataset; sample i uses stream (seed, i).
class Dataset {
public:
    explicit Dataset(DatasetDescriptor desc);

    std::size_t size() const noexcept { return desc_.m; }
    RealSample operator[](std::size_t i) const;
    const DatasetDescriptor& descriptor() const noexcept { return desc_; }

private:
    DatasetDescriptor desc_;
};

std::vector<RealSample> generate_dataset(const DatasetDescriptor& desc);

inline constexpr double kNoiselessSnr = std::numeric_limits<double>::infinity();

} // namespace admmdet
