#pragma once

#include "admmdet/linalg.hpp"

#include <span>
#include <vector>

namespace admmdet {

/// Margin keeping every plane denominator 4^{i−1}ρ − α_i strictly positive.
inline constexpr double kFeasibilityMargin = 0.01;

/// Penalty parameters θ = {α_1..α_q, ρ}, shared by every iteration/layer.
/// The dual variable of the augmented Lagrangian is λ = ρu; only the scaled
/// dual u is ever stored.
struct PenaltyParams {
    Vector alpha;
    double rho = 1.5;

    int q() const noexcept { return static_cast<int>(alpha.size()); }

    /// Largest admissible α_i (1-based plane index): (1−ε)·4^{i−1}·ρ.
    double alpha_limit(int i) const;
    bool feasible() const noexcept;
    /// Throws ParameterError naming the offending component.
    void validate() const;
    /// 2^{i−1}ρ / (4^{i−1}ρ − α_i), the gain applied to plane i's argument.
    double plane_gain(int i) const;

    /// ρ = 1.5, α_i = 0.3·4^{i−1}·ρ.
    static PenaltyParams defaults(int q);
    /// ρ given, α_i = 0.3·4^{i−1}·ρ.
    static PenaltyParams proportional(int q, double rho);

    friend bool operator==(const PenaltyParams&, const PenaltyParams&) = default;
};

struct DetectorState {
    Vector x;
    Vector u;
    std::vector<Vector> z;
    std::size_t iter = 0;

    static DetectorState zeros(std::size_t k, int q);
};

/// Per-iteration diagnostics: primal residual ‖x − Σ2^{i−1}z_i‖₂ and the
/// augmented Lagrangian value.
struct ResidualTrace {
    Vector primal_residual;
    Vector lagrangian;
};

/// Entrywise clamp to [−1, 1].
Vector project_box(std::span<const double> v);
void project_box_in_place(std::span<double> v) noexcept;

/// Σ 2^{i−1} z_i.
Vector plane_sum(std::span<const Vector> z);

/// Pre-projection argument of plane i (1-based): gain_i · (x − Σ_{j<i} 2^{j−1}z_j
/// − Σ_{j>i} 2^{j−1}z_j + u). The caller supplies planes below i already updated.
void plane_argument(int i, std::span<const double> x, std::span<const Vector> z, std::span<const double> u,
                    const PenaltyParams& theta, std::span<double> out);

/// Gauss-Seidel sweep over planes i = 1..q, each projected onto the box.
std::vector<Vector> z_sweep(const DetectorState& state, const PenaltyParams& theta, std::span<const double> x_ref);
void z_sweep_in_place(std::vector<Vector>& z, std::span<const double> x_ref, std::span<const double> u,
                      const PenaltyParams& theta);

/// Factorization of HᵀH + ρI for one (H, ρ) pair, reusable across iterations
/// and across detections that share H.
class RidgeSystem {
public:
    RidgeSystem(const Matrix& h, double rho);
    /// From a precomputed Gram matrix HᵀH.
    static RidgeSystem from_gram(const Matrix& gram, double rho);

    double rho() const noexcept { return rho_; }
    std::size_t size() const noexcept { return chol_.size(); }

    /// Solves (HᵀH + ρI)x = Hᵀy + ρ(S − u) given Hᵀy and the plane sum S.
    Vector x_update(std::span<const double> hty, std::span<const double> plane_sum, std::span<const double> u) const;

private:
    RidgeSystem(Cholesky chol, double rho) : chol_(std::move(chol)), rho_(rho) {}

    Cholesky chol_;
    double rho_;
};

/// Stand-alone x-update: builds and factorizes HᵀH + ρI each call.
Vector x_update(const Matrix& h, std::span<const double> y, std::span<const Vector> z, std::span<const double> u,
                double rho);

/// u + x − Σ2^{i−1}z_i.
Vector u_update(std::span<const double> u, std::span<const double> x, std::span<const Vector> z);
Vector u_update_with_sum(std::span<const double> u, std::span<const double> x, std::span<const double> plane_sum);

/// ½‖y − Hx‖² − ½Σα_i‖z_i‖² + ρuᵀ(x − S) + ½ρ‖x − S‖².
double augmented_lagrangian(const Matrix& h, std::span<const double> y, const DetectorState& state,
                            const PenaltyParams& theta);

struct PsadmmOptions {
    bool record_trace = true;
};

struct PsadmmResult {
    Vector x;
    ResidualTrace trace;
    DetectorState state;
};

/// PS-ADMM from x⁰ = u⁰ = z⁰ = 0: z-sweep, x-update, u-update per iteration.
PsadmmResult detect_psadmm(std::span<const double> y, const Matrix& h, const PenaltyParams& theta, std::size_t iters,
                           PsadmmOptions opts = {});
/// Same, reusing a factorization built for (h, theta.rho).
PsadmmResult detect_psadmm(const RidgeSystem& system, std::span<const double> y, const Matrix& h,
                           const PenaltyParams& theta, std::size_t iters, PsadmmOptions opts = {});

/// Least-squares solution of HᵀH x = Hᵀy; SingularityError if the Gram matrix is singular.
Vector detect_zf(std::span<const double> y, const Matrix& h);
/// (HᵀH + σr²/Es·I)⁻¹Hᵀy with Es the per-component symbol energy.
Vector detect_mmse(std::span<const double> y, const Matrix& h, double sigma2r, double es_real);

} // namespace admmdet
