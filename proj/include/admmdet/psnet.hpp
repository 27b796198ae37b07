#pragma once

#include "admmdet/linalg.hpp"
#include "admmdet/mimo_model.hpp"
#include "admmdet/psadmm.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace admmdet {

/// Optimizer knobs shared by the PSNet and HNet trainers.
struct TrainConfig {
    std::size_t m = 2000;     // training samples
    std::size_t epochs = 200; // PSNet: total epochs; HNet: epochs per layer
    std::size_t batch = 100;
    double lr = 1e-3;
    double fd_step = 1e-3;
    double lr_decay = 0.999;
    std::optional<double> rho_init; // unset: ρ ~ U[0.5, 2]

    void validate() const;

    static TrainConfig psnet_desk();
    static TrainConfig psnet_full();
    static TrainConfig hnet_desk();
    static TrainConfig hnet_full();
};

struct TrainingMeta {
    std::size_t epochs_run = 0;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::uint64_t seed = 0;
    Vector loss_history; // entry 0 is the loss before the first update
};

/// Unfolded PS-ADMM with one θ shared by all L layers.
struct PsnetModel {
    PenaltyParams theta;
    std::size_t layers = 30;
    SystemConfig cfg;
    TrainingMeta meta;

    void validate() const;
};

/// Pre-activation of plane i at one layer; identical algebra to the PS-ADMM z-sweep.
Vector w_transform(int i, std::span<const double> x, std::span<const Vector> z, std::span<const double> u,
                   const PenaltyParams& theta);

/// min(max(−1, w), 1) entrywise.
Vector sgnlin(std::span<const double> w);

struct PsnetOutput {
    Vector x;                  // x^L
    std::vector<Vector> layer_x; // x^1 .. x^L
};

PsnetOutput psnet_forward(std::span<const double> y, const Matrix& h, const PenaltyParams& theta, std::size_t layers);
/// Forward pass from a factorized system and Hᵀy.
PsnetOutput psnet_forward(const RidgeSystem& system, std::span<const double> hty, const PenaltyParams& theta,
                          std::size_t layers);

/// (1/m) Σ ‖x^L(θ) − s‖² over the batch, on unquantized outputs.
double psnet_loss(std::span<const RealSample> batch, const PenaltyParams& theta, std::size_t layers);

using PenaltyLoss = std::function<double(const PenaltyParams&)>;

/// Central-difference gradient over [α_1..α_q, ρ] with per-component step
/// h·max(1, |θ_c|). A stencil leaving the feasible set is halved up to 10 times;
/// if the central stencil still does not fit, a one-sided stencil is used, and
/// ParameterError is thrown when neither fits.
Vector grad_fd(const PenaltyLoss& loss, const PenaltyParams& theta, double h);
Vector grad_fd(const PenaltyParams& theta, std::span<const RealSample> batch, std::size_t layers, double h);

/// Clamps ρ to [1e-3, 1e3], then each α_i to [0, (1−ε)4^{i−1}ρ].
PenaltyParams project_feasible(PenaltyParams theta);

/// Called after every epoch with the epoch number (1-based), epoch loss and θ.
using PsnetObserver = std::function<void(std::size_t, double, const PenaltyParams&)>;

/// End-to-end SGD on the MSE loss using finite-difference gradients.
PsnetModel train_psnet(const DatasetDescriptor& data, std::size_t layers, const TrainConfig& cfg, RngStream init,
                       const PsnetObserver& observer = {});

} // namespace admmdet
