#include "admmdet/io.hpp"

#include "admmdet/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace admmdet {

namespace {

bool is_flat_array(const Json& j) {
    for (const auto& e : j)
        if (e.is_array() || e.is_object()) return false;
    return true;
}

void emit(const Json& j, std::string& out, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad + Json(it.key()).dump() + ": ";
            emit(it.value(), out, depth + 1);
        }
        out += "\n" + close_pad + "}";
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        if (is_flat_array(j)) {
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ", ";
                emit(j[i], out, depth + 1);
            }
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out += ",\n";
            out += pad;
            emit(j[i], out, depth + 1);
        }
        out += "\n" + close_pad + "]";
        return;
    }
    case Json::value_t::number_float: {
        const double v = j.get<double>();
        if (!std::isfinite(v)) throw DomainError("cannot serialize a non-finite number");
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        std::string s = buf;
        if (s.find_first_of(".eE") == std::string::npos) s += ".0";
        out += s;
        return;
    }
    default:
        out += j.dump();
    }
}

Json vector_json(const Vector& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(x);
    return a;
}

Json matrix_json(const Matrix& m) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (double x : m.row(r)) row.push_back(x);
        rows.push_back(std::move(row));
    }
    return rows;
}

Vector vector_from(const Json& j, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
    Vector v;
    for (const auto& e : j) {
        if (!e.is_number()) throw ConfigError(std::string(what) + " must contain only numbers");
        v.push_back(e.get<double>());
    }
    return v;
}

Matrix matrix_from(const Json& j, const char* what) {
    if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + " must be a non-empty array of rows");
    const std::size_t cols = j.front().size();
    Matrix m(j.size(), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        const Vector row = vector_from(j[r], what);
        if (row.size() != cols) throw DimensionError(std::string(what) + " has ragged rows");
        std::copy(row.begin(), row.end(), m.row(r).begin());
    }
    return m;
}

template <typename T>
T required(const Json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing key \"") + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("key \"") + key + "\" has the wrong type: " + e.what());
    }
}

Json meta_json(const TrainingMeta& m) {
    return {{"epochs_run", m.epochs_run},
            {"initial_loss", m.initial_loss},
            {"final_loss", m.final_loss},
            {"seed", m.seed},
            {"loss_history", vector_json(m.loss_history)}};
}

TrainingMeta meta_from(const Json& j) {
    TrainingMeta m;
    if (!j.is_object()) return m;
    m.epochs_run = j.value("epochs_run", std::size_t{0});
    m.initial_loss = j.value("initial_loss", 0.0);
    m.final_loss = j.value("final_loss", 0.0);
    m.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("loss_history")) m.loss_history = vector_from(j["loss_history"], "loss_history");
    return m;
}

} // namespace

std::string dump_json(const Json& j) {
    std::string out;
    emit(j, out, 0);
    out += "\n";
    return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw IoError("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Json parse_json_file(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON (" +
                          e.what() + ")");
    }
}

Json to_json(const DatasetDescriptor& d) {
    Json j = {{"mc", d.mc}, {"kc", d.kc}, {"q", d.q}, {"m", d.m}, {"seed", d.seed}};
    if (d.snr.is_fixed())
        j["snr_db"] = d.snr.lo;
    else
        j["snr_range"] = {d.snr.lo, d.snr.hi};
    return j;
}

DatasetDescriptor dataset_from_json(const Json& j) {
    DatasetDescriptor d;
    d.mc = required<std::size_t>(j, "mc");
    d.kc = required<std::size_t>(j, "kc");
    d.q = required<int>(j, "q");
    d.m = required<std::size_t>(j, "m");
    d.seed = required<std::uint64_t>(j, "seed");
    if (j.contains("snr_db") == j.contains("snr_range"))
        throw ConfigError("dataset descriptor needs exactly one of \"snr_db\" or \"snr_range\"");
    if (j.contains("snr_db")) {
        d.snr = SnrPolicy::fixed(required<double>(j, "snr_db"));
    } else {
        const Vector r = vector_from(j["snr_range"], "snr_range");
        if (r.size() != 2) throw ConfigError("snr_range must have two entries");
        d.snr = SnrPolicy::uniform(r[0], r[1]);
    }
    d.system().validate();
    return d;
}

Json to_json(const PenaltyParams& p) { return {{"rho", p.rho}, {"alpha", vector_json(p.alpha)}}; }

PenaltyParams penalties_from_json(const Json& j) {
    PenaltyParams p;
    p.rho = required<double>(j, "rho");
    if (!j.contains("alpha")) throw ConfigError("missing key \"alpha\"");
    p.alpha = vector_from(j["alpha"], "alpha");
    p.validate();
    return p;
}

Json to_json(const PsnetModel& m) {
    return {{"kind", "psnet"},
            {"q", m.theta.q()},
            {"L", m.layers},
            {"mc", m.cfg.mc},
            {"kc", m.cfg.kc},
            {"rho", m.theta.rho},
            {"alpha", vector_json(m.theta.alpha)},
            {"training_meta", meta_json(m.meta)}};
}

PsnetModel psnet_from_json(const Json& j) {
    if (j.value("kind", std::string{}) != "psnet") throw ConfigError("model file is not a psnet model");
    PsnetModel m;
    m.theta = penalties_from_json(j);
    m.layers = required<std::size_t>(j, "L");
    m.cfg.q = required<int>(j, "q");
    m.cfg.mc = j.value("mc", m.cfg.mc);
    m.cfg.kc = j.value("kc", m.cfg.kc);
    m.cfg.layers = m.layers;
    if (j.contains("training_meta")) m.meta = meta_from(j["training_meta"]);
    m.validate();
    return m;
}

Json to_json(const HnetModel& m) {
    Json layers = Json::array();
    for (const auto& w : m.layers)
        layers.push_back({{"W1", matrix_json(w.w1)}, {"b1", vector_json(w.b1)}, {"W2", matrix_json(w.w2)}, {"b2", vector_json(w.b2)}});
    Json losses = Json::array();
    for (const auto& h : m.layer_losses) losses.push_back(vector_json(h));
    Json meta = meta_json(m.meta);
    meta["layer_losses"] = std::move(losses);
    return {{"kind", "hnet"},
            {"q", m.theta.q()},
            {"L", m.layers.size()},
            {"n", m.hidden},
            {"mc", m.cfg.mc},
            {"kc", m.cfg.kc},
            {"theta", to_json(m.theta)},
            {"layers", std::move(layers)},
            {"training_meta", std::move(meta)}};
}

HnetModel hnet_from_json(const Json& j) {
    if (j.value("kind", std::string{}) != "hnet") throw ConfigError("model file is not an hnet model");
    HnetModel m;
    m.cfg.q = required<int>(j, "q");
    m.hidden = required<std::size_t>(j, "n");
    const auto depth = required<std::size_t>(j, "L");
    if (!j.contains("theta")) throw ConfigError("missing key \"theta\"");
    m.theta = penalties_from_json(j["theta"]);
    if (!j.contains("layers") || !j["layers"].is_array()) throw ConfigError("missing array \"layers\"");
    for (const auto& lj : j["layers"]) {
        MlpWeights w;
        w.w1 = matrix_from(lj.at("W1"), "W1");
        w.b1 = vector_from(lj.at("b1"), "b1");
        w.w2 = matrix_from(lj.at("W2"), "W2");
        w.b2 = vector_from(lj.at("b2"), "b2");
        m.layers.push_back(std::move(w));
    }
    if (m.layers.size() != depth) throw ConfigError("\"L\" does not match the number of stored layers");
    const std::size_t k = m.layers.front().outputs();
    m.cfg.kc = j.value("kc", k / 2);
    m.cfg.mc = j.value("mc", m.cfg.kc + 1);
    m.cfg.layers = depth;
    if (j.contains("training_meta")) {
        m.meta = meta_from(j["training_meta"]);
        if (j["training_meta"].contains("layer_losses"))
            for (const auto& h : j["training_meta"]["layer_losses"]) m.layer_losses.push_back(vector_from(h, "layer_losses"));
    }
    m.validate();
    return m;
}

void save_psnet(const PsnetModel& m, const std::filesystem::path& path) { write_file_atomic(path, dump_json(to_json(m))); }

PsnetModel load_psnet(const std::filesystem::path& path) { return psnet_from_json(parse_json_file(path)); }

void save_hnet(const HnetModel& m, const std::filesystem::path& path) { write_file_atomic(path, dump_json(to_json(m))); }

HnetModel load_hnet(const std::filesystem::path& path) { return hnet_from_json(parse_json_file(path)); }

} // namespace admmdet
