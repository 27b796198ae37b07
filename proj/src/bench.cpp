#include "admmdet/bench.hpp"

#include "admmdet/errors.hpp"
#include "admmdet/io.hpp"
#include "admmdet/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace admmdet {

Detector oracle_detector() {
    return {"oracle", [](const DetectionInput& in) { return in.sample.s; }};
}

Detector zf_detector() {
    return {"zf", [](const DetectionInput& in) { return detect_zf(in.sample.y, in.sample.h); }};
}

Detector mmse_detector() {
    return {"mmse", [](const DetectionInput& in) {
                return detect_mmse(in.sample.y, in.sample.h, in.sigma2r, real_symbol_energy(in.cfg.q));
            }};
}

Detector psadmm_detector(PenaltyParams theta, std::size_t iters, std::string name) {
    theta.validate();
    return {std::move(name), [theta = std::move(theta), iters](const DetectionInput& in) {
                return detect_psadmm(in.sample.y, in.sample.h, theta, iters, {.record_trace = false}).x;
            }};
}

Detector psnet_detector(PsnetModel model, std::string name) {
    model.validate();
    return {std::move(name), [model = std::move(model)](const DetectionInput& in) {
                return psnet_forward(in.sample.y, in.sample.h, model.theta, model.layers).x;
            }};
}

Detector hnet_detector(HnetModel model, std::string name) {
    model.validate();
    return {std::move(name),
            [model = std::move(model)](const DetectionInput& in) { return detect_hnet(in.sample.y, in.sample.h, model); }};
}

void SweepSpec::validate() const {
    if (!detector.run) throw ConfigError("sweep has no detector");
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (snr_grid.empty()) throw ConfigError("SNR grid is empty");
    for (std::size_t i = 1; i < snr_grid.size(); ++i)
        if (!(snr_grid[i] > snr_grid[i - 1])) throw ConfigError("SNR grid must be strictly increasing");
    cfg.validate();
}

Interval wilson_interval(std::size_t errors, std::size_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(errors) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return {std::max(0.0, std::min(center - half, p)), std::min(1.0, std::max(center + half, p))};
}

bool intervals_overlap(const SerPoint& a, const SerPoint& b) noexcept {
    return a.ci_low <= b.ci_high && b.ci_low <= a.ci_high;
}

RngStream trial_stream(std::uint64_t master_seed, std::size_t t) noexcept {
    return {derive_seed(master_seed, "trial"), t};
}

std::vector<SerCurve> ser_sweep(const std::vector<Detector>& detectors, const Vector& snr_grid, std::size_t trials,
                                const SystemConfig& cfg, std::uint64_t seed) {
    if (detectors.empty()) throw ConfigError("sweep needs at least one detector");
    for (const auto& d : detectors) SweepSpec{d, snr_grid, trials, cfg, seed}.validate();

    std::vector<SerCurve> curves;
    for (const auto& d : detectors) curves.push_back({d.name, seed, {}});

    const std::size_t nd = detectors.size();
    std::vector<std::uint32_t> errors(trials * nd);
    for (double snr : snr_grid) {
        const double sigma2r = real_noise_variance(cfg.kc, cfg.q, snr);
        parallel_for(trials, [&](std::size_t t) {
            const RealSample sample = make_sample(cfg, trial_stream(seed, t), snr);
            const DetectionInput in{sample, cfg, sigma2r};
            for (std::size_t d = 0; d < nd; ++d) {
                const Vector s_hat = quantize(detectors[d].run(in), cfg.q);
                errors[t * nd + d] = static_cast<std::uint32_t>(count_symbol_errors(s_hat, sample.s, cfg.kc));
            }
        });
        const std::size_t symbols = trials * cfg.kc;
        for (std::size_t d = 0; d < nd; ++d) {
            std::size_t e = 0;
            for (std::size_t t = 0; t < trials; ++t) e += errors[t * nd + d];
            const auto ci = wilson_interval(e, symbols);
            curves[d].points.push_back(
                {snr, trials, e, static_cast<double>(e) / static_cast<double>(symbols), ci.low, ci.high});
        }
    }
    return curves;
}

SerCurve ser_sweep(const SweepSpec& spec) {
    spec.validate();
    return ser_sweep({spec.detector}, spec.snr_grid, spec.trials, spec.cfg, spec.seed).front();
}

std::vector<SerCurve> layer_sweep(const std::function<Detector(std::size_t)>& make_detector,
                                  const std::vector<std::size_t>& layer_counts, const Vector& snr_grid,
                                  std::size_t trials, const SystemConfig& cfg, std::uint64_t seed) {
    if (layer_counts.empty()) throw ConfigError("layer sweep needs at least one layer count");
    std::vector<Detector> detectors;
    for (std::size_t l : layer_counts) detectors.push_back(make_detector(l));
    return ser_sweep(detectors, snr_grid, trials, cfg, seed);
}

std::vector<RuntimeRow> runtime_bench(const std::vector<Detector>& detectors, const SystemConfig& cfg,
                                      const RuntimeOptions& opts) {
    if (detectors.empty()) throw ConfigError("benchmark needs at least one detector");
    if (opts.repetitions < 100) throw ConfigError("benchmark repetitions must be at least 100");
    cfg.validate();

    const std::size_t total = opts.warmup + opts.repetitions;
    std::vector<RealSample> instances(total);
    parallel_for(total, [&](std::size_t i) { instances[i] = make_sample(cfg, trial_stream(opts.seed, i), opts.snr_db); });
    const double sigma2r = real_noise_variance(cfg.kc, cfg.q, opts.snr_db);

    const std::size_t nd = detectors.size();
    std::vector<Vector> times(nd);
    double sink = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
        const DetectionInput in{instances[i], cfg, sigma2r};
        for (std::size_t d = 0; d < nd; ++d) {
            const auto start = std::chrono::steady_clock::now();
            const Vector x = detectors[d].run(in);
            const auto stop = std::chrono::steady_clock::now();
            sink += x.empty() ? 0.0 : x.front();
            if (i >= opts.warmup) times[d].push_back(std::chrono::duration<double>(stop - start).count());
        }
    }
    // keeps the detector results observable
    if (std::isnan(sink)) std::fputs("", stderr);

    std::vector<RuntimeRow> rows;
    for (std::size_t d = 0; d < nd; ++d) {
        const auto& t = times[d];
        double mean = 0.0;
        for (double v : t) mean += v;
        mean /= static_cast<double>(t.size());
        double var = 0.0;
        for (double v : t) var += (v - mean) * (v - mean);
        var /= static_cast<double>(t.size() > 1 ? t.size() - 1 : 1);
        rows.push_back({detectors[d].name, t.size(), mean, std::sqrt(var)});
    }
    return rows;
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

std::string ser_csv(const std::vector<SerCurve>& curves) {
    std::string out = std::string(kSerCsvHeader) + "\n";
    for (const auto& c : curves) {
        if (c.detector.find_first_of(",\n\"") != std::string::npos)
            throw ConfigError("detector name \"" + c.detector + "\" cannot be written to CSV");
        for (const auto& p : c.points) {
            out += c.detector + "," + fmt17(p.snr_db) + "," + std::to_string(p.trials) + "," +
                   std::to_string(p.symbol_errors) + "," + fmt17(p.ser) + "," + fmt17(p.ci_low) + "," +
                   fmt17(p.ci_high) + "," + std::to_string(c.seed) + "\n";
        }
    }
    return out;
}

std::vector<SerCurve> parse_ser_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kSerCsvHeader) throw ConfigError("SER CSV header does not match the schema");
    std::vector<SerCurve> curves;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 8) throw ConfigError("SER CSV line " + std::to_string(lineno) + ": expected 8 fields");
        try {
            SerPoint p{std::stod(f[1]), std::stoul(f[2]), std::stoul(f[3]), std::stod(f[4]), std::stod(f[5]), std::stod(f[6])};
            const std::uint64_t seed = std::stoull(f[7]);
            if (curves.empty() || curves.back().detector != f[0] || curves.back().seed != seed)
                curves.push_back({f[0], seed, {}});
            curves.back().points.push_back(p);
        } catch (const std::logic_error&) {
            throw ConfigError("SER CSV line " + std::to_string(lineno) + ": malformed number");
        }
    }
    return curves;
}

std::string ser_svg(const std::vector<SerCurve>& curves, const std::string& title) {
    constexpr double width = 640, height = 480, left = 70, right = 150, top = 40, bottom = 50;
    const double pw = width - left - right;
    const double ph = height - top - bottom;

    double xmin = INFINITY, xmax = -INFINITY, ymin_pos = 1.0;
    for (const auto& c : curves)
        for (const auto& p : c.points) {
            xmin = std::min(xmin, p.snr_db);
            xmax = std::max(xmax, p.snr_db);
            if (p.ser > 0) ymin_pos = std::min(ymin_pos, p.ser);
        }
    if (!(xmax > xmin)) {
        xmin -= 1.0;
        xmax += 1.0;
    }
    const double dec_lo = std::min(-1.0, std::floor(std::log10(ymin_pos)));
    auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double ser) { return top + (0.0 - std::log10(ser)) / (0.0 - dec_lo) * ph; };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
       << title << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int d = 0; d >= static_cast<int>(dec_lo); --d) {
        const double y = sy(std::pow(10.0, d));
        os << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + pw << "\" y2=\"" << y
           << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           << "font-size=\"11\">1e" << d << "</text>\n";
    }
    for (const auto& p : curves.front().points) {
        const double x = sx(p.snr_db);
        os << "<text x=\"" << x << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           << "font-size=\"11\">" << p.snr_db << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">SNR (dB)</text>\n";
    os << "<text x=\"18\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 18 " << top + ph / 2
       << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">SER</text>\n";
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const char* color = palette[c % std::size(palette)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& p : curves[c].points)
            if (p.ser > 0) os << sx(p.snr_db) << "," << sy(p.ser) << " ";
        os << "\"/>\n";
        for (const auto& p : curves[c].points)
            if (p.ser > 0)
                os << "<circle cx=\"" << sx(p.snr_db) << "\" cy=\"" << sy(p.ser) << "\" r=\"3\" fill=\"" << color
                   << "\"/>\n";
        const double ly = top + 16 + 18.0 * static_cast<double>(c);
        os << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 34 << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << left + pw + 40 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"12\">"
           << curves[c].detector << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string runtime_csv(const std::vector<RuntimeRow>& rows) {
    std::string out = std::string(kRuntimeCsvHeader) + "\n";
    for (const auto& r : rows)
        out += r.detector + "," + std::to_string(r.repetitions) + "," + fmt17(r.mean_seconds) + "," +
               fmt17(r.stddev_seconds) + "\n";
    return out;
}

void export_results(const std::vector<SerCurve>& curves, const std::filesystem::path& path, ExportFormat format) {
    if (curves.empty()) throw ConfigError("nothing to export to " + path.string() + ": curve list is empty");
    write_file_atomic(path, format == ExportFormat::csv ? ser_csv(curves) : ser_svg(curves));
}

void export_runtime(const std::vector<RuntimeRow>& rows, const std::filesystem::path& path) {
    if (rows.empty()) throw ConfigError("nothing to export to " + path.string() + ": runtime table is empty");
    write_file_atomic(path, runtime_csv(rows));
}

} // namespace admmdet
