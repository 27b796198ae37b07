#include "admmdet/psnet.hpp"

#include "admmdet/errors.hpp"
#include "admmdet/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

namespace admmdet {

void TrainConfig::validate() const {
    if (m < 1) throw ConfigError("samples must be positive");
    if (epochs < 1) throw ConfigError("epochs must be positive");
    if (batch < 1) throw ConfigError("batch must be positive");
    if (batch > m) throw ConfigError("batch (" + std::to_string(batch) + ") exceeds samples (" + std::to_string(m) + ")");
    if (!(lr > 0.0)) throw ConfigError("lr must be positive");
    if (!(fd_step > 0.0)) throw ConfigError("fd_step must be positive");
    if (!(lr_decay > 0.0)) throw ConfigError("lr_decay must be positive");
    if (rho_init && !(*rho_init > 0.0)) throw ConfigError("rho_init must be positive");
}

TrainConfig TrainConfig::psnet_desk() { return {2000, 200, 100, 1e-3, 1e-3, 0.999, std::nullopt}; }
TrainConfig TrainConfig::psnet_full() { return {10000, 10000, 100, 1e-3, 1e-3, 0.999, std::nullopt}; }
TrainConfig TrainConfig::hnet_desk() { return {10000, 50, 32, 1e-3, 1e-3, 0.999, std::nullopt}; }
TrainConfig TrainConfig::hnet_full() { return {90000, 2000, 1024, 1e-3, 1e-3, 0.999, std::nullopt}; }

void PsnetModel::validate() const {
    theta.validate();
    if (layers < 1) throw ConfigError("PSNet needs at least one layer");
    if (theta.q() != cfg.q) throw ConfigError("PSNet theta has " + std::to_string(theta.q()) + " alphas but q = " +
                                              std::to_string(cfg.q));
}

Vector w_transform(int i, std::span<const double> x, std::span<const Vector> z, std::span<const double> u,
                   const PenaltyParams& theta) {
    theta.validate();
    Vector w(x.size());
    plane_argument(i, x, z, u, theta, w);
    return w;
}

Vector sgnlin(std::span<const double> w) {
    Vector out(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) out[k] = std::min(std::max(-1.0, w[k]), 1.0);
    return out;
}

PsnetOutput psnet_forward(const RidgeSystem& system, std::span<const double> hty, const PenaltyParams& theta,
                          std::size_t layers) {
    if (layers < 1) throw ParameterError("PSNet needs at least one layer");
    theta.validate();
    const std::size_t k = hty.size();
    Vector x(k, 0.0);
    Vector u(k, 0.0);
    std::vector<Vector> z(static_cast<std::size_t>(theta.q()), Vector(k, 0.0));
    PsnetOutput out;
    out.layer_x.reserve(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        for (int i = 1; i <= theta.q(); ++i) z[static_cast<std::size_t>(i - 1)] = sgnlin(w_transform(i, x, z, u, theta));
        const Vector s = plane_sum(z);
        x = system.x_update(hty, s, u);
        u = u_update_with_sum(u, x, s);
        out.layer_x.push_back(x);
    }
    out.x = x;
    return out;
}

PsnetOutput psnet_forward(std::span<const double> y, const Matrix& h, const PenaltyParams& theta, std::size_t layers) {
    if (y.size() != h.rows()) throw DimensionError("psnet_forward: y does not match H rows");
    theta.validate();
    return psnet_forward(RidgeSystem(h, theta.rho), multiply_transposed(h, y), theta, layers);
}

namespace {

struct PreparedSample {
    Matrix gram;
    Vector hty;
    Vector s;
};

PreparedSample prepare(const RealSample& sample) {
    return {gram(sample.h), multiply_transposed(sample.h, sample.y), sample.s};
}

double squared_error(std::span<const double> x, std::span<const double> s) {
    double e = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) e += (x[k] - s[k]) * (x[k] - s[k]);
    return e;
}

double sample_loss(const PreparedSample& p, const PenaltyParams& theta, std::size_t layers) {
    const auto sys = RidgeSystem::from_gram(p.gram, theta.rho);
    return squared_error(psnet_forward(sys, p.hty, theta, layers).x, p.s);
}

double mean_loss(std::span<const PreparedSample> samples, std::span<const std::size_t> idx, const PenaltyParams& theta,
                 std::size_t layers) {
    Vector losses(idx.size());
    parallel_for(idx.size(), [&](std::size_t b) { losses[b] = sample_loss(samples[idx[b]], theta, layers); });
    return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(idx.size());
}

double& component(PenaltyParams& theta, std::size_t c) {
    return c < theta.alpha.size() ? theta.alpha[c] : theta.rho;
}

std::string describe(const PenaltyParams& theta) {
    std::ostringstream os;
    os.precision(17);
    os << "rho=" << theta.rho << " alpha=[";
    for (std::size_t i = 0; i < theta.alpha.size(); ++i) os << (i ? ", " : "") << theta.alpha[i];
    os << "]";
    return os.str();
}

} // namespace

double psnet_loss(std::span<const RealSample> batch, const PenaltyParams& theta, std::size_t layers) {
    if (batch.empty()) throw DimensionError("psnet_loss: empty batch");
    std::vector<PreparedSample> prepared;
    prepared.reserve(batch.size());
    for (const auto& s : batch) prepared.push_back(prepare(s));
    std::vector<std::size_t> idx(batch.size());
    std::iota(idx.begin(), idx.end(), 0);
    return mean_loss(prepared, idx, theta, layers);
}

Vector grad_fd(const PenaltyLoss& loss, const PenaltyParams& theta, double h) {
    if (!(h > 0.0)) throw ParameterError("finite-difference step must be positive");
    theta.validate();
    const std::size_t n = theta.alpha.size() + 1;
    Vector g(n);
    for (std::size_t c = 0; c < n; ++c) {
        const double base = c < theta.alpha.size() ? theta.alpha[c] : theta.rho;
        const double step0 = h * std::max(1.0, std::abs(base));
        auto shifted = [&](double delta) {
            PenaltyParams p = theta;
            component(p, c) = base + delta;
            return p;
        };
        bool done = false;
        double step = step0;
        for (int tries = 0; tries <= 10 && !done; ++tries, step *= 0.5) {
            const auto plus = shifted(step);
            const auto minus = shifted(-step);
            if (plus.feasible() && minus.feasible()) {
                g[c] = (loss(plus) - loss(minus)) / (2.0 * step);
                done = true;
            }
        }
        step = step0;
        for (int tries = 0; tries <= 10 && !done; ++tries, step *= 0.5) {
            if (const auto plus = shifted(step); plus.feasible()) {
                g[c] = (loss(plus) - loss(theta)) / step;
                done = true;
            } else if (const auto minus = shifted(-step); minus.feasible()) {
                g[c] = (loss(theta) - loss(minus)) / step;
                done = true;
            }
        }
        if (!done)
            throw ParameterError("grad_fd: no feasible stencil for component " + std::to_string(c) + " at " +
                                 describe(theta));
    }
    return g;
}

Vector grad_fd(const PenaltyParams& theta, std::span<const RealSample> batch, std::size_t layers, double h) {
    if (batch.empty()) throw DimensionError("grad_fd: empty batch");
    std::vector<PreparedSample> prepared;
    prepared.reserve(batch.size());
    for (const auto& s : batch) prepared.push_back(prepare(s));
    std::vector<std::size_t> idx(batch.size());
    std::iota(idx.begin(), idx.end(), 0);
    return grad_fd([&](const PenaltyParams& p) { return mean_loss(prepared, idx, p, layers); }, theta, h);
}

PenaltyParams project_feasible(PenaltyParams theta) {
    theta.rho = std::clamp(theta.rho, 1e-3, 1e3);
    for (int i = 1; i <= theta.q(); ++i) {
        auto& a = theta.alpha[static_cast<std::size_t>(i - 1)];
        a = std::clamp(a, 0.0, theta.alpha_limit(i));
    }
    return theta;
}

PsnetModel train_psnet(const DatasetDescriptor& data, std::size_t layers, const TrainConfig& cfg, RngStream init,
                       const PsnetObserver& observer) {
    TrainConfig checked = cfg;
    checked.m = data.m;
    checked.validate();
    if (layers < 1) throw ConfigError("PSNet needs at least one layer");

    const Dataset ds(data);
    std::vector<PreparedSample> prepared(ds.size());
    parallel_for(ds.size(), [&](std::size_t i) { prepared[i] = prepare(ds[i]); });

    RandomEngine init_engine(init);
    const double rho0 = cfg.rho_init ? *cfg.rho_init : init_engine.uniform(0.5, 2.0);

    PsnetModel model;
    model.cfg = data.system(layers);
    model.layers = layers;
    model.theta = project_feasible(PenaltyParams::proportional(data.q, rho0));
    model.meta.seed = init.seed;

    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    const double initial = mean_loss(prepared, order, model.theta, layers);
    if (!std::isfinite(initial)) throw NumericsError("PSNet initial loss is not finite at " + describe(model.theta));
    model.meta.initial_loss = initial;
    model.meta.loss_history.push_back(initial);

    RandomEngine shuffle_engine({derive_seed(init.seed, "psnet-shuffle"), init.stream_id});
    double lr = cfg.lr;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        shuffle(std::span(order), shuffle_engine);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
            const auto idx = std::span(order).subspan(start, std::min(cfg.batch, order.size() - start));
            const PenaltyLoss batch_loss = [&](const PenaltyParams& p) { return mean_loss(prepared, idx, p, layers); };
            const Vector g = grad_fd(batch_loss, model.theta, cfg.fd_step);
            if (!all_finite(g))
                throw NumericsError("PSNet gradient is not finite at epoch " + std::to_string(epoch) + ", batch " +
                                    std::to_string(start / cfg.batch) + ", " + describe(model.theta));
            PenaltyParams next = model.theta;
            for (std::size_t c = 0; c < g.size(); ++c) component(next, c) -= lr * g[c];
            model.theta = project_feasible(next);
        }
        lr *= cfg.lr_decay;
        const double loss = mean_loss(prepared, order, model.theta, layers);
        if (!std::isfinite(loss))
            throw NumericsError("PSNet loss is not finite after epoch " + std::to_string(epoch) + " at " +
                                describe(model.theta) + " (seed " + std::to_string(init.seed) + ")");
        model.meta.loss_history.push_back(loss);
        model.meta.epochs_run = epoch;
        if (observer) observer(epoch, loss, model.theta);
    }
    model.meta.final_loss = model.meta.loss_history.back();
    return model;
}

} // namespace admmdet
