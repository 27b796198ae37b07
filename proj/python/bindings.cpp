#include "admmdet/bench.hpp"
#include "admmdet/errors.hpp"
#include "admmdet/hnet.hpp"
#include "admmdet/io.hpp"
#include "admmdet/linalg.hpp"
#include "admmdet/mimo_model.hpp"
#include "admmdet/parallel.hpp"
#include "admmdet/psadmm.hpp"
#include "admmdet/psnet.hpp"

#include <pybind11/functional.h>
#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace admmdet;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
    if (a.ndim() != 2) throw DimensionError("expected a 2-D array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), m.data().begin());
    return m;
}

Vector to_vector(const Array& a) {
    if (a.ndim() != 1) throw DimensionError("expected a 1-D array");
    return Vector(a.data(), a.data() + a.size());
}

Array from_matrix(const Matrix& m) {
    Array out({m.rows(), m.cols()});
    std::copy(m.data().begin(), m.data().end(), out.mutable_data());
    return out;
}

Array from_vector(std::span<const double> v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<Vector> to_planes(const std::vector<Array>& planes) {
    std::vector<Vector> out;
    out.reserve(planes.size());
    for (const auto& p : planes) out.push_back(to_vector(p));
    return out;
}

py::dict sample_dict(const RealSample& s) {
    py::dict d;
    d["y"] = from_vector(s.y);
    d["H"] = from_matrix(s.h);
    d["s"] = from_vector(s.s);
    d["snr_db"] = s.snr_db;
    return d;
}

RealSample sample_from(const Array& y, const Array& h, const Array& s) {
    RealSample out;
    out.y = to_vector(y);
    out.h = to_matrix(h);
    out.s = to_vector(s);
    return out;
}

} // namespace

PYBIND11_MODULE(_admmdet, m) {
    m.doc() = "Deep-unfolded ADMM MIMO detectors";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
    py::register_exception<SingularityError>(m, "SingularityError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<NumericsError>(m, "NumericsError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    py::class_<SystemConfig>(m, "SystemConfig")
        .def(py::init([](std::size_t mc, std::size_t kc, int q, std::size_t layers) {
                 SystemConfig c{mc, kc, q, layers};
                 c.validate();
                 return c;
             }),
             py::arg("mc"), py::arg("kc"), py::arg("q"), py::arg("layers") = 30)
        .def_readwrite("mc", &SystemConfig::mc)
        .def_readwrite("kc", &SystemConfig::kc)
        .def_readwrite("q", &SystemConfig::q)
        .def_readwrite("layers", &SystemConfig::layers)
        .def_property_readonly("M", &SystemConfig::M)
        .def_property_readonly("K", &SystemConfig::K)
        .def("__repr__", [](const SystemConfig& c) {
            return "SystemConfig(mc=" + std::to_string(c.mc) + ", kc=" + std::to_string(c.kc) +
                   ", q=" + std::to_string(c.q) + ", layers=" + std::to_string(c.layers) + ")";
        });

    py::class_<PenaltyParams>(m, "PenaltyParams")
        .def(py::init([](Vector alpha, double rho) {
                 PenaltyParams p{std::move(alpha), rho};
                 p.validate();
                 return p;
             }),
             py::arg("alpha"), py::arg("rho"))
        .def_readonly("alpha", &PenaltyParams::alpha)
        .def_readonly("rho", &PenaltyParams::rho)
        .def_property_readonly("q", &PenaltyParams::q)
        .def("feasible", &PenaltyParams::feasible)
        .def_static("defaults", &PenaltyParams::defaults, py::arg("q"))
        .def_static("proportional", &PenaltyParams::proportional, py::arg("q"), py::arg("rho"))
        .def(py::self == py::self);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init([](std::size_t samples, std::size_t epochs, std::size_t batch, double lr, double fd_step,
                         double lr_decay, std::optional<double> rho_init) {
                 TrainConfig c{samples, epochs, batch, lr, fd_step, lr_decay, rho_init};
                 c.validate();
                 return c;
             }),
             py::arg("samples") = 2000, py::arg("epochs") = 200, py::arg("batch") = 100, py::arg("lr") = 1e-3,
             py::arg("fd_step") = 1e-3, py::arg("lr_decay") = 0.999, py::arg("rho_init") = py::none())
        .def_readwrite("samples", &TrainConfig::m)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("batch", &TrainConfig::batch)
        .def_readwrite("lr", &TrainConfig::lr)
        .def_readwrite("fd_step", &TrainConfig::fd_step)
        .def_readwrite("lr_decay", &TrainConfig::lr_decay)
        .def_static("psnet_desk", &TrainConfig::psnet_desk)
        .def_static("hnet_desk", &TrainConfig::hnet_desk);

    py::class_<TrainingMeta>(m, "TrainingMeta")
        .def_readonly("epochs_run", &TrainingMeta::epochs_run)
        .def_readonly("initial_loss", &TrainingMeta::initial_loss)
        .def_readonly("final_loss", &TrainingMeta::final_loss)
        .def_readonly("loss_history", &TrainingMeta::loss_history);

    py::class_<PsnetModel>(m, "PsnetModel")
        .def_readonly("theta", &PsnetModel::theta)
        .def_readonly("layers", &PsnetModel::layers)
        .def_readonly("meta", &PsnetModel::meta);

    py::class_<HnetModel>(m, "HnetModel")
        .def_readonly("theta", &HnetModel::theta)
        .def_readonly("hidden", &HnetModel::hidden)
        .def_property_readonly("layers", [](const HnetModel& h) { return h.layers.size(); })
        .def_readonly("layer_losses", &HnetModel::layer_losses)
        .def("truncated", &HnetModel::truncated, py::arg("depth"));

    // linear algebra
    m.def("gram_plus_ridge", [](const Array& h, double rho) { return from_matrix(gram_plus_ridge(to_matrix(h), rho)); },
          py::arg("H"), py::arg("rho"));
    m.def("solve_spd", [](const Array& a, const Array& b) { return from_vector(solve_spd(to_matrix(a), to_vector(b))); },
          py::arg("A"), py::arg("b"));

    // system model
    m.def("real_noise_variance", &real_noise_variance, py::arg("kc"), py::arg("q"), py::arg("snr_db"));
    m.def("real_alphabet", &real_alphabet, py::arg("q"));
    m.def(
        "complex_to_real",
        [](py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast> hc) {
            if (hc.ndim() != 2) throw DimensionError("expected a 2-D complex array");
            const auto rows = static_cast<std::size_t>(hc.shape(0)), cols = static_cast<std::size_t>(hc.shape(1));
            ComplexMatrix c{Matrix(rows, cols), Matrix(rows, cols)};
            for (std::size_t i = 0; i < rows * cols; ++i) {
                c.re.data()[i] = hc.data()[i].real();
                c.im.data()[i] = hc.data()[i].imag();
            }
            return from_matrix(complex_to_real(c));
        },
        py::arg("Hc"));
    m.def(
        "compose_symbols", [](const std::vector<Array>& z) { return from_vector(compose_symbols(to_planes(z))); },
        py::arg("planes"));
    m.def(
        "decompose_symbols",
        [](const Array& s, int q) {
            std::vector<Array> out;
            for (const auto& p : decompose_symbols(to_vector(s), q)) out.push_back(from_vector(p));
            return out;
        },
        py::arg("s"), py::arg("q"));
    m.def(
        "quantize", [](const Array& x, int q) { return from_vector(quantize(to_vector(x), q)); }, py::arg("x"),
        py::arg("q"));
    m.def(
        "symbol_error_rate",
        [](const Array& s_hat, const Array& s, std::size_t kc) {
            return symbol_error_rate(to_vector(s_hat), to_vector(s), kc);
        },
        py::arg("s_hat"), py::arg("s"), py::arg("kc"));
    m.def(
        "make_sample",
        [](const SystemConfig& cfg, std::uint64_t seed, std::uint64_t stream, double snr_db) {
            return sample_dict(make_sample(cfg, RngStream{seed, stream}, snr_db));
        },
        py::arg("cfg"), py::arg("seed"), py::arg("stream"), py::arg("snr_db"),
        "One (y, H, s) instance; snr_db=inf gives a noiseless sample.");

    // detectors
    m.def(
        "detect_psadmm",
        [](const Array& y, const Array& h, const PenaltyParams& theta, std::size_t iters) {
            const auto res = detect_psadmm(to_vector(y), to_matrix(h), theta, iters);
            py::dict trace;
            trace["primal_residual"] = from_vector(res.trace.primal_residual);
            trace["lagrangian"] = from_vector(res.trace.lagrangian);
            return py::make_tuple(from_vector(res.x), trace);
        },
        py::arg("y"), py::arg("H"), py::arg("theta"), py::arg("iters"));
    m.def(
        "detect_zf", [](const Array& y, const Array& h) { return from_vector(detect_zf(to_vector(y), to_matrix(h))); },
        py::arg("y"), py::arg("H"));
    m.def(
        "detect_mmse",
        [](const Array& y, const Array& h, double sigma2r, double es_real) {
            return from_vector(detect_mmse(to_vector(y), to_matrix(h), sigma2r, es_real));
        },
        py::arg("y"), py::arg("H"), py::arg("sigma2r"), py::arg("es_real"));
    m.def(
        "psnet_forward",
        [](const Array& y, const Array& h, const PenaltyParams& theta, std::size_t layers) {
            return from_vector(psnet_forward(to_vector(y), to_matrix(h), theta, layers).x);
        },
        py::arg("y"), py::arg("H"), py::arg("theta"), py::arg("layers"));
    m.def(
        "detect_hnet",
        [](const Array& y, const Array& h, const HnetModel& model) {
            return from_vector(detect_hnet(to_vector(y), to_matrix(h), model));
        },
        py::arg("y"), py::arg("H"), py::arg("model"));
    m.def("flop_estimate", &flop_estimate, py::arg("M"), py::arg("K"), py::arg("L"), py::arg("n"));

    // training
    m.def(
        "psnet_loss",
        [](const std::vector<py::dict>& batch, const PenaltyParams& theta, std::size_t layers) {
            std::vector<RealSample> samples;
            for (const auto& d : batch)
                samples.push_back(sample_from(d["y"].cast<Array>(), d["H"].cast<Array>(), d["s"].cast<Array>()));
            return psnet_loss(samples, theta, layers);
        },
        py::arg("batch"), py::arg("theta"), py::arg("layers"));
    m.def(
        "train_psnet",
        [](std::size_t mc, std::size_t kc, int q, std::pair<double, double> snr, std::size_t layers,
           const TrainConfig& cfg, std::uint64_t seed) {
            const DatasetDescriptor d{mc, kc, q, SnrPolicy{snr.first, snr.second}, cfg.m, seed};
            py::gil_scoped_release release;
            return train_psnet(d, layers, cfg, RngStream{derive_seed(seed, "psnet-init"), 0});
        },
        py::arg("mc"), py::arg("kc"), py::arg("q"), py::arg("snr_db_range"), py::arg("layers"), py::arg("cfg"),
        py::arg("seed"));
    m.def(
        "train_hnet",
        [](std::size_t mc, std::size_t kc, int q, std::pair<double, double> snr, const PenaltyParams& theta,
           std::size_t hidden, std::size_t layers, const TrainConfig& cfg, std::uint64_t seed) {
            const DatasetDescriptor d{mc, kc, q, SnrPolicy{snr.first, snr.second}, cfg.m, seed};
            py::gil_scoped_release release;
            return train_hnet(d, theta, cfg, hidden, layers, RngStream{derive_seed(seed, "hnet-init"), 0});
        },
        py::arg("mc"), py::arg("kc"), py::arg("q"), py::arg("snr_db_range"), py::arg("theta"), py::arg("hidden"),
        py::arg("layers"), py::arg("cfg"), py::arg("seed"));

    m.def("save_psnet", &save_psnet, py::arg("model"), py::arg("path"));
    m.def("load_psnet", &load_psnet, py::arg("path"));
    m.def("save_hnet", &save_hnet, py::arg("model"), py::arg("path"));
    m.def("load_hnet", &load_hnet, py::arg("path"));

    // evaluation
    m.def(
        "ser_sweep",
        [](const std::string& detector, const SystemConfig& cfg, const Vector& snr_grid, std::size_t trials,
           std::uint64_t seed, std::optional<PenaltyParams> theta, std::optional<PsnetModel> psnet,
           std::optional<HnetModel> hnet) {
            Detector det;
            if (detector == "zf") det = zf_detector();
            else if (detector == "mmse") det = mmse_detector();
            else if (detector == "oracle") det = oracle_detector();
            else if (detector == "psadmm") det = psadmm_detector(theta.value_or(PenaltyParams::defaults(cfg.q)), cfg.layers);
            else if (detector == "psnet" && psnet) det = psnet_detector(*psnet);
            else if (detector == "hnet" && hnet) det = hnet_detector(*hnet);
            else throw ConfigError("unknown detector or missing model: " + detector);
            SerCurve curve;
            {
                py::gil_scoped_release release;
                curve = ser_sweep(SweepSpec{det, snr_grid, trials, cfg, seed});
            }
            py::list points;
            for (const auto& p : curve.points) {
                py::dict d;
                d["snr_db"] = p.snr_db;
                d["trials"] = p.trials;
                d["symbol_errors"] = p.symbol_errors;
                d["ser"] = p.ser;
                d["ci"] = py::make_tuple(p.ci_low, p.ci_high);
                points.append(d);
            }
            return points;
        },
        py::arg("detector"), py::arg("cfg"), py::arg("snr_db_grid"), py::arg("trials"), py::arg("seed"),
        py::arg("theta") = py::none(), py::arg("psnet") = py::none(), py::arg("hnet") = py::none());

    m.def("set_max_threads", &set_max_threads, py::arg("n"));
}
