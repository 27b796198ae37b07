#include "admmdet/hnet.hpp"

#include "admmdet/errors.hpp"
#include "admmdet/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace admmdet {

MlpWeights MlpWeights::zeros(std::size_t k, std::size_t n) {
    return {Matrix(n, 2 * k), Vector(n, 0.0), Matrix(k, n), Vector(k, 0.0)};
}

MlpWeights MlpWeights::glorot(std::size_t k, std::size_t n, RandomEngine& engine) {
    MlpWeights w = zeros(k, n);
    const double lim1 = std::sqrt(6.0 / static_cast<double>(2 * k + n));
    for (auto& v : w.w1.data()) v = engine.uniform(-lim1, lim1);
    const double lim2 = std::sqrt(6.0 / static_cast<double>(n + k));
    for (auto& v : w.w2.data()) v = engine.uniform(-lim2, lim2);
    return w;
}

void MlpWeights::validate() const {
    const std::size_t n = b1.size();
    const std::size_t k = b2.size();
    if (n < 1 || k < 1) throw DimensionError("MLP needs at least one hidden unit and one output");
    if (w1.rows() != n || w1.cols() != 2 * k)
        throw DimensionError("W1 must be n×2K = " + std::to_string(n) + "×" + std::to_string(2 * k) + ", got " +
                             std::to_string(w1.rows()) + "×" + std::to_string(w1.cols()));
    if (w2.rows() != k || w2.cols() != n)
        throw DimensionError("W2 must be K×n = " + std::to_string(k) + "×" + std::to_string(n));
    if (!w1.all_finite() || !w2.all_finite() || !all_finite(b1) || !all_finite(b2))
        throw DomainError("MLP weights contain non-finite entries");
}

void HnetModel::validate() const {
    cfg.validate();
    theta.validate();
    if (theta.q() != cfg.q) throw ConfigError("HNet theta q does not match the system q");
    if (layers.empty()) throw ConfigError("HNet needs at least one layer");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        layers[l].validate();
        if (layers[l].outputs() != cfg.K() || layers[l].hidden() != hidden)
            throw DimensionError("HNet layer " + std::to_string(l + 1) + " does not match K=" +
                                 std::to_string(cfg.K()) + ", n=" + std::to_string(hidden));
    }
}

HnetModel HnetModel::truncated(std::size_t depth) const {
    if (depth < 1 || depth > layers.size())
        throw ConfigError("cannot truncate a " + std::to_string(layers.size()) + "-layer HNet to " + std::to_string(depth));
    HnetModel out = *this;
    out.layers.resize(depth);
    out.cfg.layers = depth;
    if (out.layer_losses.size() > depth) out.layer_losses.resize(depth);
    return out;
}

Vector residual(std::span<const double> y, const Matrix& h, std::span<const double> x) {
    if (y.size() != h.rows() || x.size() != h.cols()) throw DimensionError("residual: shape mismatch");
    Vector r(y.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = y[i] - dot(h.row(i), x);
    return r;
}

Vector feature_a1(const Matrix& h, std::span<const double> r, std::span<const double> x, std::size_t m) {
    if (x.size() != h.cols()) throw DimensionError("feature_a1: x does not match H columns");
    if (m == 0) throw DimensionError("feature_a1: M must be positive");
    Vector a1 = multiply_transposed(h, r);
    const double md = static_cast<double>(m);
    for (std::size_t k = 0; k < a1.size(); ++k) a1[k] = a1[k] / md + x[k];
    return a1;
}

Vector feature_a2(std::span<const Vector> z, std::span<const double> u, double rho) {
    const Vector s = plane_sum(z);
    if (u.size() != s.size()) throw DimensionError("feature_a2: u does not match plane length");
    Vector a2(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) a2[k] = rho * (s[k] - u[k]);
    return a2;
}

Vector stack_features(std::span<const double> a1, std::span<const double> a2) {
    if (a1.size() != a2.size()) throw DimensionError("stack_features: a1 and a2 differ in length");
    Vector a(a1.begin(), a1.end());
    a.insert(a.end(), a2.begin(), a2.end());
    return a;
}

LayerFeatures layer_features(std::span<const double> y, const Matrix& h, std::span<const double> x,
                             std::span<const Vector> z, std::span<const double> u, double rho) {
    LayerFeatures f;
    f.r = residual(y, h, x);
    f.a1 = feature_a1(h, f.r, x, h.rows());
    f.a2 = feature_a2(z, u, rho);
    f.a = stack_features(f.a1, f.a2);
    return f;
}

MlpOutput mlp_forward(std::span<const double> a, const MlpWeights& w) {
    if (a.size() != w.w1.cols()) throw DimensionError("mlp_forward: feature length does not match W1 columns");
    MlpOutput out{Vector(w.w2.rows()), Vector(w.w1.rows())};
    for (std::size_t j = 0; j < out.t.size(); ++j) out.t[j] = std::max(dot(w.w1.row(j), a) + w.b1[j], 0.0);
    for (std::size_t k = 0; k < out.x_hat.size(); ++k) out.x_hat[k] = dot(w.w2.row(k), out.t) + w.b2[k];
    return out;
}

void mlp_backward_accumulate(std::span<const double> a, const MlpWeights& w, std::span<const double> t,
                             std::span<const double> x_hat, std::span<const double> s, std::size_t batch,
                             MlpWeights& grad) {
    const std::size_t n = w.hidden();
    const std::size_t k = w.outputs();
    if (t.size() != n || x_hat.size() != k || s.size() != k || a.size() != w.w1.cols())
        throw DimensionError("mlp_backward: shape mismatch");
    const double scale = 2.0 / static_cast<double>(batch);

    Vector delta_out(k);
    for (std::size_t c = 0; c < k; ++c) delta_out[c] = scale * (x_hat[c] - s[c]);

    Vector delta_hidden(n, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        const double d = delta_out[c];
        const auto w2c = w.w2.row(c);
        auto g2c = grad.w2.row(c);
        for (std::size_t j = 0; j < n; ++j) {
            g2c[j] += d * t[j];
            delta_hidden[j] += d * w2c[j];
        }
        grad.b2[c] += d;
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!(t[j] > 0.0)) continue; // relu'(0) = 0
        const double d = delta_hidden[j];
        auto g1j = grad.w1.row(j);
        for (std::size_t i = 0; i < a.size(); ++i) g1j[i] += d * a[i];
        grad.b1[j] += d;
    }
}

MlpWeights mlp_backward(std::span<const double> a, const MlpWeights& w, std::span<const double> t,
                        std::span<const double> x_hat, std::span<const double> s, std::size_t batch) {
    MlpWeights grad = MlpWeights::zeros(w.outputs(), w.hidden());
    mlp_backward_accumulate(a, w, t, x_hat, s, batch, grad);
    return grad;
}

Vector hnet_dual_update(std::span<const double> u, std::span<const double> x_hat, std::span<const Vector> z) {
    return u_update_with_sum(u, x_hat, plane_sum(z));
}

std::uint64_t flop_estimate(std::uint64_t m, std::uint64_t k, std::uint64_t layers, std::uint64_t n) {
    return m * k + layers * (m * k + 3 * k * n);
}

namespace {

// Per-sample recursion state shared by detection and training.
struct HnetState {
    Vector x;
    Vector u;
    std::vector<Vector> z;
};

HnetState initial_state(std::span<const double> y, const Matrix& h, int q) {
    HnetState st;
    st.x = multiply_transposed(h, y);
    const double md = static_cast<double>(h.rows());
    for (auto& v : st.x) v /= md;
    st.u.assign(h.cols(), 0.0);
    st.z.assign(static_cast<std::size_t>(q), Vector(h.cols(), 0.0));
    return st;
}

// z-sweep on the current estimate, then the features for the next MLP.
LayerFeatures advance_planes(std::span<const double> y, const Matrix& h, const PenaltyParams& theta, HnetState& st) {
    z_sweep_in_place(st.z, st.x, st.u, theta);
    return layer_features(y, h, st.x, st.z, st.u, theta.rho);
}

void finish_layer(HnetState& st, Vector x_hat) {
    st.u = hnet_dual_update(st.u, x_hat, st.z);
    st.x = std::move(x_hat);
}

void add_scaled(MlpWeights& dst, const MlpWeights& src, double scale) {
    auto axpy = [scale](std::span<double> d, std::span<const double> s) {
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
    };
    axpy(dst.w1.data(), src.w1.data());
    axpy(dst.b1, src.b1);
    axpy(dst.w2.data(), src.w2.data());
    axpy(dst.b2, src.b2);
}

double squared_error(std::span<const double> x, std::span<const double> s) {
    double e = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) e += (x[k] - s[k]) * (x[k] - s[k]);
    return e;
}

// Gradient sums are formed per fixed-size chunk and reduced in chunk order,
// which keeps results independent of the worker count.
constexpr std::size_t kChunk = 32;

} // namespace

Vector detect_hnet(std::span<const double> y, const Matrix& h, const HnetModel& model, MacCounter* counter) {
    if (model.layers.empty()) throw ConfigError("HNet model has no layers");
    if (y.size() != h.rows() || h.cols() != model.layers.front().outputs())
        throw DimensionError("detect_hnet: y/H shapes do not match the model");
    const std::uint64_t mk = static_cast<std::uint64_t>(h.rows()) * h.cols();
    HnetState st = initial_state(y, h, model.theta.q());
    if (counter) counter->macs += mk;
    for (const auto& w : model.layers) {
        const LayerFeatures f = advance_planes(y, h, model.theta, st);
        MlpOutput out = mlp_forward(f.a, w);
        finish_layer(st, std::move(out.x_hat));
        if (counter) counter->macs += 2 * mk + w.w1.rows() * w.w1.cols() + w.w2.rows() * w.w2.cols();
    }
    return st.x;
}

LayerFeatures hnet_features_at(std::span<const double> y, const Matrix& h, const HnetModel& model, std::size_t layer) {
    if (layer < 1 || layer > model.layers.size()) throw ConfigError("layer index out of range");
    HnetState st = initial_state(y, h, model.theta.q());
    for (std::size_t l = 0; l + 1 < layer; ++l) {
        const LayerFeatures f = advance_planes(y, h, model.theta, st);
        finish_layer(st, mlp_forward(f.a, model.layers[l]).x_hat);
    }
    return advance_planes(y, h, model.theta, st);
}

HnetModel train_hnet(const DatasetDescriptor& data, const PenaltyParams& theta, const TrainConfig& cfg,
                     std::size_t hidden, std::size_t layers, RngStream init, const HnetObserver& observer) {
    TrainConfig checked = cfg;
    checked.m = data.m;
    checked.validate();
    theta.validate();
    if (theta.q() != data.q) throw ConfigError("penalty parameters have q=" + std::to_string(theta.q()) +
                                               " but the dataset has q=" + std::to_string(data.q));
    if (hidden < 1) throw ConfigError("hidden width n must be positive");
    if (layers < 1) throw ConfigError("HNet needs at least one layer");

    const Dataset ds(data);
    const std::size_t m = ds.size();
    const std::size_t k = data.system().K();

    std::vector<RealSample> samples(m);
    std::vector<HnetState> states(m);
    parallel_for(m, [&](std::size_t i) {
        samples[i] = ds[i];
        states[i] = initial_state(samples[i].y, samples[i].h, theta.q());
    });

    HnetModel model;
    model.theta = theta;
    model.cfg = data.system(layers);
    model.hidden = hidden;
    model.meta.seed = init.seed;

    std::vector<Vector> features(m);
    auto full_loss = [&](const MlpWeights& w) {
        Vector losses(m);
        parallel_for(m, [&](std::size_t i) { losses[i] = squared_error(mlp_forward(features[i], w).x_hat, samples[i].s); });
        return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(m);
    };

    for (std::size_t layer = 1; layer <= layers; ++layer) {
        parallel_for(m, [&](std::size_t i) {
            features[i] = advance_planes(samples[i].y, samples[i].h, theta, states[i]).a;
        });

        RandomEngine init_engine({derive_seed(init.seed, "hnet-init"), init.stream_id * 4096 + layer});
        MlpWeights w = MlpWeights::glorot(k, hidden, init_engine);
        RandomEngine shuffle_engine({derive_seed(init.seed, "hnet-shuffle"), init.stream_id * 4096 + layer});

        Vector history{full_loss(w)};
        if (!std::isfinite(history.front()))
            throw NumericsError("HNet layer " + std::to_string(layer) + " initial loss is not finite");

        std::vector<std::size_t> order(m);
        double lr = cfg.lr;
        for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
            std::iota(order.begin(), order.end(), 0);
            shuffle(std::span(order), shuffle_engine);
            double epoch_loss = 0.0;
            for (std::size_t start = 0; start < m; start += cfg.batch) {
                const std::size_t bsize = std::min(cfg.batch, m - start);
                const std::size_t chunks = (bsize + kChunk - 1) / kChunk;
                std::vector<MlpWeights> partial(chunks, MlpWeights::zeros(k, hidden));
                Vector chunk_loss(chunks, 0.0);
                parallel_for(chunks, [&](std::size_t c) {
                    const std::size_t end = std::min(bsize, (c + 1) * kChunk);
                    for (std::size_t b = c * kChunk; b < end; ++b) {
                        const std::size_t i = order[start + b];
                        const MlpOutput out = mlp_forward(features[i], w);
                        chunk_loss[c] += squared_error(out.x_hat, samples[i].s);
                        mlp_backward_accumulate(features[i], w, out.t, out.x_hat, samples[i].s, bsize, partial[c]);
                    }
                });
                const double batch_loss = std::accumulate(chunk_loss.begin(), chunk_loss.end(), 0.0);
                if (!std::isfinite(batch_loss))
                    throw NumericsError("HNet layer " + std::to_string(layer) + " loss became non-finite at epoch " +
                                        std::to_string(epoch) + ", batch starting at " + std::to_string(start));
                epoch_loss += batch_loss;
                for (const auto& g : partial) add_scaled(w, g, -lr);
            }
            lr *= cfg.lr_decay;
            history.push_back(epoch_loss / static_cast<double>(m));
            if (observer) observer(layer, epoch, history.back());
        }
        const double final_loss = full_loss(w);
        if (!std::isfinite(final_loss))
            throw NumericsError("HNet layer " + std::to_string(layer) + " final loss is not finite");
        history.push_back(final_loss);

        parallel_for(m, [&](std::size_t i) { finish_layer(states[i], mlp_forward(features[i], w).x_hat); });
        model.layers.push_back(std::move(w));
        model.layer_losses.push_back(std::move(history));
    }

    const Vector& last = model.layer_losses.back();
    model.meta.epochs_run = cfg.epochs;
    model.meta.initial_loss = last.front();
    model.meta.final_loss = last.back();
    model.meta.loss_history = last;
    return model;
}

} // namespace admmdet
