#include "admmdet/cli.hpp"

#include "admmdet/bench.hpp"
#include "admmdet/errors.hpp"
#include "admmdet/hnet.hpp"
#include "admmdet/io.hpp"
#include "admmdet/parallel.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>

namespace admmdet::cli {

namespace {

const std::set<std::string> kKnownKeys = {"mc",     "kc",      "q",           "L",      "n",
                                          "rho_init", "lr",    "lr_decay",    "epochs", "batch",
                                          "samples", "fd_step", "snr_db_grid", "trials", "seed"};
const std::vector<std::string> kRequiredKeys = {"mc", "kc", "q", "L", "seed"};

std::string locate_key(const std::string& text, const std::string& key) {
    const auto pos = text.find("\"" + key + "\"");
    if (pos == std::string::npos) return "";
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n');
    return ":" + std::to_string(line);
}

template <typename T>
T get_key(const Json& j, const std::string& key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw ConfigError(where + ": key \"" + key + "\" has the wrong type");
    }
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::filesystem::path sibling(const std::filesystem::path& p, const std::string& suffix) {
    auto out = p;
    out.replace_extension();
    out += suffix;
    return out;
}

std::vector<std::size_t> parse_layer_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::istringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            const long v = std::stol(tok, &used);
            if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::logic_error&) {
            throw ConfigError("--layers expects a comma-separated list of positive integers, got \"" + s + "\"");
        }
    }
    if (out.empty()) throw ConfigError("--layers list is empty");
    return out;
}

std::vector<std::string> split_names(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

} // namespace

DatasetDescriptor RunConfig::training_data(std::string_view purpose) const {
    DatasetDescriptor d;
    d.mc = system.mc;
    d.kc = system.kc;
    d.q = system.q;
    d.m = train.m;
    d.seed = derive_seed(seed, purpose);
    const auto [lo, hi] = std::minmax_element(snr_grid.begin(), snr_grid.end());
    d.snr = SnrPolicy::uniform(*lo, *hi);
    return d;
}

RunConfig load_run_config(const std::filesystem::path& path, const std::map<std::string, std::string>& overrides) {
    const std::string where = path.string();
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    Json j = parse_json_file(path);
    if (!j.is_object()) throw ConfigError(where + ":1: config must be a JSON object");
    for (const auto& [key, value] : overrides) {
        try {
            j[key] = Json::parse(value);
        } catch (const Json::parse_error&) {
            j[key] = value;
        }
    }
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!kKnownKeys.contains(it.key()))
            throw ConfigError(where + locate_key(text, it.key()) + ": unknown key \"" + it.key() + "\"");
    for (const auto& key : kRequiredKeys)
        if (!j.contains(key)) throw ConfigError(where + ": missing required key \"" + key + "\"");

    auto at = [&](const std::string& key) { return where + locate_key(text, key); };
    RunConfig rc;
    rc.system.mc = get_key<std::size_t>(j, "mc", at("mc"));
    rc.system.kc = get_key<std::size_t>(j, "kc", at("kc"));
    rc.system.q = get_key<int>(j, "q", at("q"));
    rc.system.layers = get_key<std::size_t>(j, "L", at("L"));
    rc.seed = get_key<std::uint64_t>(j, "seed", at("seed"));
    if (j.contains("n")) rc.hidden = get_key<std::size_t>(j, "n", at("n"));
    if (j.contains("rho_init")) rc.train.rho_init = get_key<double>(j, "rho_init", at("rho_init"));
    if (j.contains("lr")) rc.train.lr = get_key<double>(j, "lr", at("lr"));
    if (j.contains("lr_decay")) rc.train.lr_decay = get_key<double>(j, "lr_decay", at("lr_decay"));
    if (j.contains("epochs")) rc.train.epochs = get_key<std::size_t>(j, "epochs", at("epochs"));
    if (j.contains("batch")) rc.train.batch = get_key<std::size_t>(j, "batch", at("batch"));
    if (j.contains("samples")) rc.train.m = get_key<std::size_t>(j, "samples", at("samples"));
    if (j.contains("fd_step")) rc.train.fd_step = get_key<double>(j, "fd_step", at("fd_step"));
    if (j.contains("snr_db_grid")) rc.snr_grid = get_key<Vector>(j, "snr_db_grid", at("snr_db_grid"));
    if (j.contains("trials")) rc.trials = get_key<std::size_t>(j, "trials", at("trials"));

    try {
        rc.system.validate();
        rc.train.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
    }
    if (rc.hidden < 1) throw ConfigError(at("n") + ": n must be positive");
    if (rc.trials < 1) throw ConfigError(at("trials") + ": trials must be positive");
    if (rc.snr_grid.empty()) throw ConfigError(at("snr_db_grid") + ": snr_db_grid is empty");
    for (std::size_t i = 1; i < rc.snr_grid.size(); ++i)
        if (!(rc.snr_grid[i] > rc.snr_grid[i - 1]))
            throw ConfigError(at("snr_db_grid") + ": snr_db_grid must be strictly increasing");
    return rc;
}

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> set;
};

RunConfig load(const Common& c) {
    std::map<std::string, std::string> ov;
    for (const auto& s : c.set) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got \"" + s + "\"");
        ov[s.substr(0, eq)] = s.substr(eq + 1);
    }
    if (c.seed) ov["seed"] = std::to_string(*c.seed);
    return load_run_config(c.config, ov);
}

int cmd_gen_data(const Common& common, const std::string& out, const std::string& samples_out) {
    const RunConfig rc = load(common);
    const DatasetDescriptor desc = rc.training_data("dataset");
    write_file_atomic(out, dump_json(to_json(desc)));
    if (!samples_out.empty()) {
        const Dataset ds(desc);
        std::string body;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const RealSample s = ds[i];
            Json row = {{"index", i}, {"snr_db", s.snr_db}, {"s", s.s}, {"y", s.y}};
            Json h = Json::array();
            for (std::size_t r = 0; r < s.h.rows(); ++r) h.push_back(Vector(s.h.row(r).begin(), s.h.row(r).end()));
            row["H"] = std::move(h);
            body += row.dump() + "\n";
        }
        write_file_atomic(samples_out, body);
    }
    return kExitOk;
}

int cmd_train_psnet(const Common& common, const std::string& out, std::string loss_csv) {
    const RunConfig rc = load(common);
    const PsnetModel model =
        train_psnet(rc.training_data("psnet-data"), rc.system.layers, rc.train, {derive_seed(rc.seed, "psnet-init"), 0});
    if (loss_csv.empty()) loss_csv = sibling(out, ".loss.csv").string();
    std::string csv = "epoch,loss\n";
    for (std::size_t e = 0; e < model.meta.loss_history.size(); ++e)
        csv += std::to_string(e) + "," + fmt17(model.meta.loss_history[e]) + "\n";
    save_psnet(model, out);
    write_file_atomic(loss_csv, csv);
    return kExitOk;
}

int cmd_train_hnet(const Common& common, const std::string& penalties, const std::string& out, std::string loss_csv) {
    const RunConfig rc = load(common);
    const PsnetModel pre = load_psnet(penalties);
    if (pre.theta.q() != rc.system.q)
        throw ConfigError("penalties file " + penalties + " has q=" + std::to_string(pre.theta.q()) +
                          " but the config has q=" + std::to_string(rc.system.q));
    const HnetModel model = train_hnet(rc.training_data("hnet-data"), pre.theta, rc.train, rc.hidden, rc.system.layers,
                                       {derive_seed(rc.seed, "hnet-init"), 0});
    if (loss_csv.empty()) loss_csv = sibling(out, ".loss.csv").string();
    std::string csv = "layer,epoch,loss\n";
    for (std::size_t l = 0; l < model.layer_losses.size(); ++l) {
        const auto& h = model.layer_losses[l];
        for (std::size_t e = 0; e + 1 < h.size(); ++e)
            csv += std::to_string(l + 1) + "," + std::to_string(e) + "," + fmt17(h[e]) + "\n";
        csv += std::to_string(l + 1) + ",final," + fmt17(h.back()) + "\n";
    }
    save_hnet(model, out);
    write_file_atomic(loss_csv, csv);
    return kExitOk;
}

std::function<Detector(std::size_t)> detector_factory(const std::string& kind, const std::string& model_path,
                                                      const RunConfig& rc) {
    if (kind == "zf" || kind == "mmse" || kind == "oracle") {
        if (!model_path.empty()) throw ConfigError("--detector " + kind + " takes no --model");
        return [kind](std::size_t) {
            return kind == "zf" ? zf_detector() : kind == "mmse" ? mmse_detector() : oracle_detector();
        };
    }
    if (kind == "psadmm") {
        PenaltyParams theta = model_path.empty() ? PenaltyParams::proportional(rc.system.q, rc.train.rho_init.value_or(1.5))
                                                 : load_psnet(model_path).theta;
        if (theta.q() != rc.system.q) throw ConfigError("penalties in " + model_path + " do not match q");
        return [theta](std::size_t l) { return psadmm_detector(theta, l, "psadmm@L=" + std::to_string(l)); };
    }
    if (kind == "psnet") {
        if (model_path.empty()) throw ConfigError("--detector psnet requires --model");
        const PsnetModel model = load_psnet(model_path);
        if (model.theta.q() != rc.system.q) throw ConfigError("psnet model " + model_path + " does not match q");
        return [model](std::size_t l) {
            PsnetModel m = model;
            m.layers = l;
            return psnet_detector(m, "psnet@L=" + std::to_string(l));
        };
    }
    if (kind == "hnet") {
        if (model_path.empty()) throw ConfigError("--detector hnet requires --model");
        const HnetModel model = load_hnet(model_path);
        if (model.theta.q() != rc.system.q || model.cfg.K() != rc.system.K())
            throw ConfigError("hnet model " + model_path + " does not match the configured system");
        return [model](std::size_t l) { return hnet_detector(model.truncated(l), "hnet@L=" + std::to_string(l)); };
    }
    throw ConfigError("unknown detector \"" + kind + "\"");
}

std::size_t default_depth(const std::string& kind, const std::string& model_path, const RunConfig& rc) {
    if (kind == "psnet") return load_psnet(model_path).layers;
    if (kind == "hnet") return load_hnet(model_path).layers.size();
    return rc.system.layers;
}

int cmd_eval(const Common& common, const std::string& kind, const std::string& model_path, const std::string& layers,
             const std::string& out, const std::string& plot) {
    const RunConfig rc = load(common);
    const auto factory = detector_factory(kind, model_path, rc);
    const std::vector<std::size_t> depths =
        layers.empty() ? std::vector<std::size_t>{default_depth(kind, model_path, rc)} : parse_layer_list(layers);
    std::vector<SerCurve> curves =
        layer_sweep(factory, depths, rc.snr_grid, rc.trials, rc.system, derive_seed(rc.seed, "eval"));
    if (layers.empty() && (kind == "zf" || kind == "mmse" || kind == "oracle")) curves.front().detector = kind;
    export_results(curves, out, ExportFormat::csv);
    if (!plot.empty()) export_results(curves, plot, ExportFormat::svg);
    return kExitOk;
}

int cmd_bench(const Common& common, const std::string& names, const std::string& psnet_path,
              const std::string& hnet_path, std::size_t warmup, const std::string& out) {
    const RunConfig rc = load(common);
    std::vector<Detector> detectors;
    for (const auto& name : split_names(names)) {
        const std::string path = name == "psnet" ? psnet_path : name == "hnet" ? hnet_path : "";
        const auto factory = detector_factory(name, path, rc);
        Detector d = factory(default_depth(name, path, rc));
        d.name = name;
        detectors.push_back(std::move(d));
    }
    if (detectors.empty()) throw ConfigError("--detectors list is empty");
    const auto rows = runtime_bench(detectors, rc.system,
                                    {.repetitions = rc.trials, .warmup = warmup, .snr_db = rc.snr_grid.front(),
                                     .seed = derive_seed(rc.seed, "bench")});
    export_runtime(rows, out);
    return kExitOk;
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"ADMM-based massive MIMO detection: training, evaluation and benchmarks"};
    app.require_subcommand(1);
    Common common;
    std::size_t threads = 0;
    app.add_option("--threads", threads, "Cap on worker threads (0 = all cores)");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", common.config, "Run configuration JSON")->required();
        sub->add_option("--seed", common.seed, "Override the config seed");
        sub->add_option("--set", common.set, "Override a config key: key=value (value parsed as JSON)");
        sub->add_option("--threads", threads, "Cap on worker threads (0 = all cores)");
    };

    std::string out, samples_out, loss_csv, penalties, detector, model, layers, plot, detectors, psnet_model, hnet_model;
    std::size_t warmup = 10;

    auto* gen = app.add_subcommand("gen-data", "Write a dataset descriptor (and optionally the samples)");
    add_common(gen);
    gen->add_option("--out", out, "Descriptor JSON path")->required();
    gen->add_option("--samples", samples_out, "Also materialize samples as JSON lines");

    auto* tps = app.add_subcommand("train-psnet", "Learn the penalty parameters of the unfolded PS-ADMM");
    add_common(tps);
    tps->add_option("--out", out, "Model JSON path")->required();
    tps->add_option("--loss-csv", loss_csv, "Per-epoch loss CSV (default: <out without extension>.loss.csv)");

    auto* thn = app.add_subcommand("train-hnet", "Train the per-layer MLPs layer by layer");
    add_common(thn);
    thn->add_option("--penalties", penalties, "Trained psnet model supplying rho and alpha")->required();
    thn->add_option("--out", out, "Model JSON path")->required();
    thn->add_option("--loss-csv", loss_csv, "Per-layer loss CSV (default: <out without extension>.loss.csv)");

    auto* ev = app.add_subcommand("eval", "Monte-Carlo SER sweep");
    add_common(ev);
    ev->add_option("--detector", detector, "zf | mmse | psadmm | psnet | hnet | oracle")
        ->required()
        ->check(CLI::IsMember({"zf", "mmse", "psadmm", "psnet", "hnet", "oracle"}));
    ev->add_option("--model", model, "Model file (psnet, hnet; optional penalties for psadmm)");
    ev->add_option("--layers", layers, "Comma-separated layer counts for a layer sweep");
    ev->add_option("--out", out, "Results CSV path")->required();
    ev->add_option("--plot", plot, "Also write an SVG plot");

    auto* be = app.add_subcommand("bench", "Per-detection runtime table");
    add_common(be);
    be->add_option("--detectors", detectors, "Comma-separated detector list")->required();
    be->add_option("--psnet-model", psnet_model, "Model for the psnet detector");
    be->add_option("--hnet-model", hnet_model, "Model for the hnet detector");
    be->add_option("--warmup", warmup, "Discarded warm-up detections per detector");
    be->add_option("--out", out, "Runtime CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    set_max_threads(threads);
    try {
        if (gen->parsed()) return cmd_gen_data(common, out, samples_out);
        if (tps->parsed()) return cmd_train_psnet(common, out, loss_csv);
        if (thn->parsed()) return cmd_train_hnet(common, penalties, out, loss_csv);
        if (ev->parsed()) return cmd_eval(common, detector, model, layers, out, plot);
        if (be->parsed()) return cmd_bench(common, detectors, psnet_model, hnet_model, warmup, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("admmdet");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

} // namespace admmdet::cli
