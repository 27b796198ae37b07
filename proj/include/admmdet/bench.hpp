#pragma once

#include "admmdet/hnet.hpp"
#include "admmdet/mimo_model.hpp"
#include "admmdet/psadmm.hpp"
#include "admmdet/psnet.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace admmdet {

/// What a detector sees for one trial. `sample.s` is only read by the oracle.
struct DetectionInput {
    const RealSample& sample;
    const SystemConfig& cfg;
    double sigma2r;
};

/// A named detector returning the unquantized estimate x̂.
struct Detector {
    std::string name;
    std::function<Vector(const DetectionInput&)> run;
};

Detector oracle_detector();
Detector zf_detector();
Detector mmse_detector();
Detector psadmm_detector(PenaltyParams theta, std::size_t iters, std::string name = "psadmm");
Detector psnet_detector(PsnetModel model, std::string name = "psnet");
Detector hnet_detector(HnetModel model, std::string name = "hnet");

struct SweepSpec {
    Detector detector;
    Vector snr_grid;
    std::size_t trials = 20000;
    SystemConfig cfg;
    std::uint64_t seed = 1;

    /// Throws ConfigError unless trials >= 1 and the grid is non-empty and strictly increasing.
    void validate() const;
};

struct SerPoint {
    double snr_db = 0.0;
    std::size_t trials = 0;
    std::size_t symbol_errors = 0;
    double ser = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;

    friend bool operator==(const SerPoint&, const SerPoint&) = default;
};

struct SerCurve {
    std::string detector;
    std::uint64_t seed = 0;
    std::vector<SerPoint> points;

    friend bool operator==(const SerCurve&, const SerCurve&) = default;
};

struct Interval {
    double low;
    double high;
};

/// 95% Wilson score interval for `errors` successes out of `n`.
Interval wilson_interval(std::size_t errors, std::size_t n, double z = 1.959963984540054);
bool intervals_overlap(const SerPoint& a, const SerPoint& b) noexcept;

/// Stream used for trial `t` of a sweep; shared by every detector and SNR point.
RngStream trial_stream(std::uint64_t master_seed, std::size_t t) noexcept;

SerCurve ser_sweep(const SweepSpec& spec);
/// Paired sweep: every detector sees the identical (H, s, υ) of each trial.
std::vector<SerCurve> ser_sweep(const std::vector<Detector>& detectors, const Vector& snr_grid, std::size_t trials,
                                const SystemConfig& cfg, std::uint64_t seed);

/// One curve per layer count, all sharing the trial streams.
std::vector<SerCurve> layer_sweep(const std::function<Detector(std::size_t)>& make_detector,
                                  const std::vector<std::size_t>& layer_counts, const Vector& snr_grid,
                                  std::size_t trials, const SystemConfig& cfg, std::uint64_t seed);

struct RuntimeRow {
    std::string detector;
    std::size_t repetitions = 0;
    double mean_seconds = 0.0;
    double stddev_seconds = 0.0;
};

struct RuntimeOptions {
    std::size_t repetitions = 1000;
    std::size_t warmup = 10;
    double snr_db = 10.0;
    std::uint64_t seed = 1;
};

/// Mean wall time per detection; detectors are interleaved over one shared
/// instance stream and warm-up runs are discarded.
std::vector<RuntimeRow> runtime_bench(const std::vector<Detector>& detectors, const SystemConfig& cfg,
                                      const RuntimeOptions& opts);

inline constexpr const char* kSerCsvHeader = "detector,snr_db,trials,symbol_errors,ser,ci_low,ci_high,seed";
inline constexpr const char* kRuntimeCsvHeader = "detector,repetitions,mean_seconds,stddev_seconds";

std::string ser_csv(const std::vector<SerCurve>& curves);
std::vector<SerCurve> parse_ser_csv(const std::string& text);
std::string ser_svg(const std::vector<SerCurve>& curves, const std::string& title = "SER vs SNR");
std::string runtime_csv(const std::vector<RuntimeRow>& rows);

enum class ExportFormat { csv, svg };

/// Writes curves atomically; an empty curve list is an error and writes nothing.
void export_results(const std::vector<SerCurve>& curves, const std::filesystem::path& path, ExportFormat format);
void export_runtime(const std::vector<RuntimeRow>& rows, const std::filesystem::path& path);

} // namespace admmdet
