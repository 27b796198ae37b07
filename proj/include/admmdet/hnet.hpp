#pragma once

#include "admmdet/linalg.hpp"
#include "admmdet/mimo_model.hpp"
#include "admmdet/psadmm.hpp"
#include "admmdet/psnet.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace admmdet {

/// One-hidden-layer network x̂ = W2·relu(W1·a + b1) + b2 replacing the x-update
/// of one layer. W1 is n×2K, W2 is K×n.
struct MlpWeights {
    Matrix w1;
    Vector b1;
    Matrix w2;
    Vector b2;

    std::size_t hidden() const noexcept { return b1.size(); }
    std::size_t outputs() const noexcept { return b2.size(); }

    /// Zero-initialized weights for K outputs and n hidden units.
    static MlpWeights zeros(std::size_t k, std::size_t n);
    /// Glorot-uniform weights, zero biases.
    static MlpWeights glorot(std::size_t k, std::size_t n, RandomEngine& engine);

    /// Throws DimensionError unless d0 == 2K and all shapes agree.
    void validate() const;
};

struct HnetModel {
    std::vector<MlpWeights> layers;
    PenaltyParams theta; // frozen, taken from a trained PSNet
    SystemConfig cfg;
    std::size_t hidden = 128;
    TrainingMeta meta;                // loss history of the last layer
    std::vector<Vector> layer_losses; // per layer: initial, per-epoch means, final

    void validate() const;
    /// Copy keeping only the first `depth` layers.
    HnetModel truncated(std::size_t depth) const;
};

struct LayerFeatures {
    Vector r;
    Vector a1;
    Vector a2;
    Vector a;
};

/// r = y − Hx.
Vector residual(std::span<const double> y, const Matrix& h, std::span<const double> x);
/// a1 = Hᵀr / M + x.
Vector feature_a1(const Matrix& h, std::span<const double> r, std::span<const double> x, std::size_t m);
/// a2 = ρ(Σ2^{i−1}z_i − u).
Vector feature_a2(std::span<const Vector> z, std::span<const double> u, double rho);
/// [a1; a2].
Vector stack_features(std::span<const double> a1, std::span<const double> a2);

LayerFeatures layer_features(std::span<const double> y, const Matrix& h, std::span<const double> x,
                             std::span<const Vector> z, std::span<const double> u, double rho);

struct MlpOutput {
    Vector x_hat;
    Vector t; // hidden activations
};

MlpOutput mlp_forward(std::span<const double> a, const MlpWeights& w);

/// Adds the gradient of ‖x̂ − s‖²/batch w.r.t. every weight into `grad`
/// (same shapes as the weights). ReLU derivative at 0 is taken as 0.
void mlp_backward_accumulate(std::span<const double> a, const MlpWeights& w, std::span<const double> t,
                             std::span<const double> x_hat, std::span<const double> s, std::size_t batch,
                             MlpWeights& grad);
MlpWeights mlp_backward(std::span<const double> a, const MlpWeights& w, std::span<const double> t,
                        std::span<const double> x_hat, std::span<const double> s, std::size_t batch = 1);

/// u + x̂ − Σ2^{i−1}z_i.
Vector hnet_dual_update(std::span<const double> u, std::span<const double> x_hat, std::span<const Vector> z);

/// Multiply-accumulate tally of the matrix-vector work in detect_hnet.
struct MacCounter {
    std::uint64_t macs = 0;
};

/// x̂⁰ = Hᵀy/M, u⁰ = z⁰ = 0; per layer: z-sweep on x̂, features, MLP, dual update.
Vector detect_hnet(std::span<const double> y, const Matrix& h, const HnetModel& model, MacCounter* counter = nullptr);

/// Features presented to layer `layer` (1-based) during detection.
LayerFeatures hnet_features_at(std::span<const double> y, const Matrix& h, const HnetModel& model, std::size_t layer);

/// MK + L(MK + 3Kn).
std::uint64_t flop_estimate(std::uint64_t m, std::uint64_t k, std::uint64_t layers, std::uint64_t n);

/// Called after each epoch: layer (1-based), epoch (1-based), mean batch loss.
using HnetObserver = std::function<void(std::size_t, std::size_t, double)>;

/// Greedy layer-wise training against the true symbols; layers 1..ℓ−1 are frozen
/// while layer ℓ trains.
HnetModel train_hnet(const DatasetDescriptor& data, const PenaltyParams& theta, const TrainConfig& cfg,
                     std::size_t hidden, std::size_t layers, RngStream init, const HnetObserver& observer = {});

} // namespace admmdet
