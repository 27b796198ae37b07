#include "admmdet/mimo_model.hpp"

#include "admmdet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace admmdet {

void SystemConfig::validate() const {
    if (kc < 1) throw ConfigError("kc must be at least 1");
    if (mc <= kc) throw ConfigError("mc must exceed kc (got mc=" + std::to_string(mc) + ", kc=" + std::to_string(kc) + ")");
    if (q < 1 || q > 20) throw ConfigError("q must lie in [1, 20], got " + std::to_string(q));
    if (layers < 1) throw ConfigError("layer count L must be at least 1");
}

int max_level(int q) { return (1 << q) - 1; }

double complex_symbol_energy(int q) { return 2.0 * real_symbol_energy(q); }

double real_symbol_energy(int q) { return (std::ldexp(1.0, 2 * q) - 1.0) / 3.0; }

double real_noise_variance(std::size_t kc, int q, double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    const double sigma_c2 = static_cast<double>(kc) * complex_symbol_energy(q) / std::pow(10.0, snr_db / 10.0);
    return sigma_c2 / 2.0;
}

std::vector<double> real_alphabet(int q) {
    const int top = max_level(q);
    std::vector<double> a;
    for (int v = -top; v <= top; v += 2) a.push_back(v);
    return a;
}

Matrix complex_to_real(const ComplexMatrix& hc) {
    if (hc.re.rows() != hc.im.rows() || hc.re.cols() != hc.im.cols())
        throw DimensionError("complex_to_real: real and imaginary parts differ in shape");
    const std::size_t m = hc.re.rows();
    const std::size_t k = hc.re.cols();
    Matrix h(2 * m, 2 * k);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < k; ++c) {
            h(r, c) = hc.re(r, c);
            h(r, c + k) = hc.im(r, c);
            h(r + m, c) = -hc.im(r, c);
            h(r + m, c + k) = hc.re(r, c);
        }
    }
    return h;
}

RealSystem complex_to_real(const ComplexMatrix& hc, const ComplexVector& yc) {
    if (yc.re.size() != yc.im.size() || yc.re.size() != hc.re.rows())
        throw DimensionError("complex_to_real: received vector does not match channel rows");
    RealSystem sys{complex_to_real(hc), Vector(2 * yc.re.size())};
    std::copy(yc.re.begin(), yc.re.end(), sys.y.begin());
    std::copy(yc.im.begin(), yc.im.end(), sys.y.begin() + static_cast<std::ptrdiff_t>(yc.re.size()));
    return sys;
}

ComplexMatrix generate_channel(const SystemConfig& cfg, RandomEngine& engine) {
    ComplexMatrix hc{Matrix(cfg.mc, cfg.kc), Matrix(cfg.mc, cfg.kc)};
    const double part_std = std::sqrt(0.5);
    for (std::size_t r = 0; r < cfg.mc; ++r) {
        for (std::size_t c = 0; c < cfg.kc; ++c) {
            hc.re(r, c) = part_std * engine.normal();
            hc.im(r, c) = part_std * engine.normal();
        }
    }
    return hc;
}

ComplexMatrix generate_channel(const SystemConfig& cfg, RngStream stream) {
    RandomEngine engine(stream);
    return generate_channel(cfg, engine);
}

Vector compose_symbols(std::span<const Vector> planes) {
    if (planes.empty()) throw DimensionError("compose_symbols: need at least one plane");
    const std::size_t k = planes.front().size();
    Vector s(k, 0.0);
    double weight = 1.0;
    for (std::size_t i = 0; i < planes.size(); ++i) {
        if (planes[i].size() != k) throw DimensionError("compose_symbols: planes differ in length");
        for (std::size_t j = 0; j < k; ++j) {
            const double z = planes[i][j];
            if (z != 1.0 && z != -1.0)
                throw DomainError("compose_symbols: plane " + std::to_string(i + 1) + " entry " + std::to_string(j) +
                                  " is not ±1");
            s[j] += weight * z;
        }
        weight *= 2.0;
    }
    return s;
}

std::vector<Vector> decompose_symbols(std::span<const double> s, int q) {
    if (q < 1) throw DomainError("decompose_symbols: q must be positive");
    const int top = max_level(q);
    std::vector<Vector> planes(static_cast<std::size_t>(q), Vector(s.size()));
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double v = s[k];
        const bool odd_int = std::isfinite(v) && v == std::floor(v) && std::fmod(std::abs(v), 2.0) == 1.0;
        if (!odd_int || std::abs(v) > top)
            throw DomainError("decompose_symbols: entry " + std::to_string(k) + " (" + std::to_string(v) +
                              ") is off the 4^" + std::to_string(q) + "-QAM grid");
        // (s + top)/2 is an integer in [0, 2^q − 1]; its bits give (z_i + 1)/2
        const auto code = static_cast<unsigned>((v + top) / 2);
        for (int i = 0; i < q; ++i) planes[static_cast<std::size_t>(i)][k] = ((code >> i) & 1u) ? 1.0 : -1.0;
    }
    return planes;
}

Vector random_symbols(std::size_t k, int q, RandomEngine& engine) {
    const auto levels = std::uint64_t{1} << q;
    const int top = max_level(q);
    Vector s(k);
    for (auto& v : s) v = 2.0 * static_cast<double>(engine.below(levels)) - top;
    return s;
}

Vector awgn_transmit(const Matrix& h, std::span<const double> s, int q, double snr_db, RandomEngine& engine) {
    if (s.size() != h.cols()) throw DimensionError("awgn_transmit: symbol vector does not match channel columns");
    const double sigma = std::sqrt(real_noise_variance(h.cols() / 2, q, snr_db));
    Vector y = multiply(h, s);
    for (auto& v : y) {
        const double n = engine.normal();
        if (sigma > 0.0) v += sigma * n;
    }
    return y;
}

Vector quantize(std::span<const double> x, int q) {
    const double top = max_level(q);
    Vector out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!std::isfinite(x[k])) throw DomainError("quantize: entry " + std::to_string(k) + " is not finite");
        // nearest odd integer, even-integer ties rounded down
        const double odd = 2.0 * std::ceil(x[k] / 2.0 - 1.0) + 1.0;
        out[k] = std::clamp(odd, -top, top);
    }
    return out;
}

std::size_t count_symbol_errors(std::span<const double> s_hat, std::span<const double> s, std::size_t kc) {
    if (s_hat.size() != s.size() || s.size() != 2 * kc)
        throw DimensionError("symbol_error_rate: expected two vectors of length 2·kc");
    std::size_t errors = 0;
    for (std::size_t k = 0; k < kc; ++k)
        if (s_hat[k] != s[k] || s_hat[k + kc] != s[k + kc]) ++errors;
    return errors;
}

double symbol_error_rate(std::span<const double> s_hat, std::span<const double> s, std::size_t kc) {
    const auto errors = count_symbol_errors(s_hat, s, kc);
    return kc == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(kc);
}

RealSample make_sample(const SystemConfig& cfg, RngStream stream, double snr_db) {
    RandomEngine engine(stream);
    RealSample sample;
    sample.h = complex_to_real(generate_channel(cfg, engine));
    sample.s = random_symbols(cfg.K(), cfg.q, engine);
    sample.y = awgn_transmit(sample.h, sample.s, cfg.q, snr_db, engine);
    sample.snr_db = snr_db;
    sample.seed = stream;
    return sample;
}

Dataset::Dataset(DatasetDescriptor desc) : desc_(desc) {
    desc_.system().validate();
    if (desc_.m < 1) throw ConfigError("dataset must contain at least one sample");
    if (!(desc_.snr.lo <= desc_.snr.hi)) throw ConfigError("dataset SNR range must satisfy lo <= hi");
}

RealSample Dataset::operator[](std::size_t i) const {
    const RngStream stream{desc_.seed, i};
    double snr = desc_.snr.lo;
    if (!desc_.snr.is_fixed()) {
        // the SNR comes from a sibling stream so H, s and noise direction match the fixed-SNR case
        RandomEngine snr_engine({derive_seed(desc_.seed, "snr"), i});
        snr = snr_engine.uniform(desc_.snr.lo, desc_.snr.hi);
    }
    return make_sample(desc_.system(), stream, snr);
}

std::vector<RealSample> generate_dataset(const DatasetDescriptor& desc) {
    const Dataset ds(desc);
    std::vector<RealSample> out;
    out.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) out.push_back(ds[i]);
    return out;
}

} // namespace admmdet
