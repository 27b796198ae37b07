#include "admmdet/psadmm.hpp"

#include "admmdet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace admmdet {

double PenaltyParams::alpha_limit(int i) const {
    return (1.0 - kFeasibilityMargin) * std::ldexp(1.0, 2 * (i - 1)) * rho;
}

bool PenaltyParams::feasible() const noexcept {
    if (alpha.empty() || !(rho > 0.0) || !std::isfinite(rho)) return false;
    for (int i = 1; i <= q(); ++i) {
        const double a = alpha[static_cast<std::size_t>(i - 1)];
        if (!(a >= 0.0) || !(a <= alpha_limit(i))) return false;
    }
    return true;
}

void PenaltyParams::validate() const {
    if (alpha.empty()) throw ParameterError("penalty parameters need at least one alpha");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ParameterError("rho must be positive and finite, got " + std::to_string(rho));
    for (int i = 1; i <= q(); ++i) {
        const double a = alpha[static_cast<std::size_t>(i - 1)];
        if (!(a >= 0.0) || !(a <= alpha_limit(i)))
            throw ParameterError("alpha_" + std::to_string(i) + " = " + std::to_string(a) + " outside [0, " +
                                 std::to_string(alpha_limit(i)) + "]");
    }
}

double PenaltyParams::plane_gain(int i) const {
    const double w = std::ldexp(1.0, i - 1);
    return w * rho / (w * w * rho - alpha[static_cast<std::size_t>(i - 1)]);
}

PenaltyParams PenaltyParams::defaults(int q) { return proportional(q, 1.5); }

PenaltyParams PenaltyParams::proportional(int q, double rho) {
    PenaltyParams p;
    p.rho = rho;
    for (int i = 1; i <= q; ++i) p.alpha.push_back(0.3 * std::ldexp(1.0, 2 * (i - 1)) * rho);
    return p;
}

DetectorState DetectorState::zeros(std::size_t k, int q) {
    return {Vector(k, 0.0), Vector(k, 0.0), std::vector<Vector>(static_cast<std::size_t>(q), Vector(k, 0.0)), 0};
}

void project_box_in_place(std::span<double> v) noexcept {
    for (auto& x : v) x = std::min(std::max(-1.0, x), 1.0);
}

Vector project_box(std::span<const double> v) {
    Vector out(v.begin(), v.end());
    project_box_in_place(out);
    return out;
}

Vector plane_sum(std::span<const Vector> z) {
    if (z.empty()) throw DimensionError("plane_sum: no planes");
    Vector s(z.front().size(), 0.0);
    double w = 1.0;
    for (const auto& plane : z) {
        if (plane.size() != s.size()) throw DimensionError("plane_sum: planes differ in length");
        for (std::size_t k = 0; k < s.size(); ++k) s[k] += w * plane[k];
        w *= 2.0;
    }
    return s;
}

void plane_argument(int i, std::span<const double> x, std::span<const Vector> z, std::span<const double> u,
                    const PenaltyParams& theta, std::span<double> out) {
    const int q = static_cast<int>(z.size());
    if (i < 1 || i > q) throw DimensionError("plane index " + std::to_string(i) + " outside [1, " + std::to_string(q) + "]");
    if (theta.q() != q) throw DimensionError("penalty parameters and planes disagree on q");
    const std::size_t k = x.size();
    if (u.size() != k || out.size() != k) throw DimensionError("plane_argument: vector length mismatch");
    const double gain = theta.plane_gain(i);
    for (std::size_t c = 0; c < k; ++c) {
        double acc = x[c];
        double w = 1.0;
        for (int j = 1; j <= q; ++j, w *= 2.0)
            if (j != i) acc -= w * z[static_cast<std::size_t>(j - 1)][c];
        out[c] = gain * (acc + u[c]);
    }
}

void z_sweep_in_place(std::vector<Vector>& z, std::span<const double> x_ref, std::span<const double> u,
                      const PenaltyParams& theta) {
    theta.validate();
    Vector w(x_ref.size());
    for (int i = 1; i <= theta.q(); ++i) {
        plane_argument(i, x_ref, z, u, theta, w);
        auto& zi = z[static_cast<std::size_t>(i - 1)];
        std::copy(w.begin(), w.end(), zi.begin());
        project_box_in_place(zi);
    }
}

std::vector<Vector> z_sweep(const DetectorState& state, const PenaltyParams& theta, std::span<const double> x_ref) {
    auto z = state.z;
    z_sweep_in_place(z, x_ref, state.u, theta);
    return z;
}

RidgeSystem::RidgeSystem(const Matrix& h, double rho) : RidgeSystem(from_gram(gram(h), rho)) {}

RidgeSystem RidgeSystem::from_gram(const Matrix& g, double rho) {
    if (!(rho > 0.0)) throw ParameterError("rho must be positive, got " + std::to_string(rho));
    Matrix a = g;
    for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) += rho;
    return RidgeSystem(Cholesky(a), rho);
}

Vector RidgeSystem::x_update(std::span<const double> hty, std::span<const double> s, std::span<const double> u) const {
    const std::size_t k = size();
    if (hty.size() != k || s.size() != k || u.size() != k) throw DimensionError("x_update: vector length mismatch");
    Vector rhs(k);
    for (std::size_t c = 0; c < k; ++c) rhs[c] = hty[c] + rho_ * (s[c] - u[c]);
    chol_.solve_in_place(rhs);
    return rhs;
}

Vector x_update(const Matrix& h, std::span<const double> y, std::span<const Vector> z, std::span<const double> u,
                double rho) {
    const RidgeSystem sys(h, rho);
    return sys.x_update(multiply_transposed(h, y), plane_sum(z), u);
}

Vector u_update_with_sum(std::span<const double> u, std::span<const double> x, std::span<const double> s) {
    if (x.size() != u.size() || s.size() != u.size()) throw DimensionError("u_update: vector length mismatch");
    Vector out(u.size());
    for (std::size_t c = 0; c < u.size(); ++c) out[c] = u[c] + (x[c] - s[c]);
    return out;
}

Vector u_update(std::span<const double> u, std::span<const double> x, std::span<const Vector> z) {
    return u_update_with_sum(u, x, plane_sum(z));
}

double augmented_lagrangian(const Matrix& h, std::span<const double> y, const DetectorState& st,
                            const PenaltyParams& theta) {
    const Vector hx = multiply(h, st.x);
    double fit = 0.0;
    for (std::size_t r = 0; r < hx.size(); ++r) fit += (y[r] - hx[r]) * (y[r] - hx[r]);
    double concave = 0.0;
    for (std::size_t i = 0; i < st.z.size(); ++i) concave += theta.alpha[i] * dot(st.z[i], st.z[i]);
    const Vector s = plane_sum(st.z);
    double dual = 0.0;
    double gap = 0.0;
    for (std::size_t c = 0; c < s.size(); ++c) {
        const double d = st.x[c] - s[c];
        dual += st.u[c] * d;
        gap += d * d;
    }
    return 0.5 * fit - 0.5 * concave + theta.rho * dual + 0.5 * theta.rho * gap;
}

PsadmmResult detect_psadmm(const RidgeSystem& system, std::span<const double> y, const Matrix& h,
                           const PenaltyParams& theta, std::size_t iters, PsadmmOptions opts) {
    if (iters < 1) throw ParameterError("PS-ADMM needs at least one iteration");
    theta.validate();
    if (system.rho() != theta.rho) throw ParameterError("factorization was built for a different rho");
    if (y.size() != h.rows() || system.size() != h.cols()) throw DimensionError("detect_psadmm: shape mismatch");

    const Vector hty = multiply_transposed(h, y);
    PsadmmResult res;
    res.state = DetectorState::zeros(h.cols(), theta.q());
    auto& st = res.state;
    for (std::size_t t = 0; t < iters; ++t) {
        z_sweep_in_place(st.z, st.x, st.u, theta);
        const Vector s = plane_sum(st.z);
        st.x = system.x_update(hty, s, st.u);
        st.u = u_update_with_sum(st.u, st.x, s);
        ++st.iter;
        if (opts.record_trace) {
            double r2 = 0.0;
            for (std::size_t c = 0; c < s.size(); ++c) r2 += (st.x[c] - s[c]) * (st.x[c] - s[c]);
            res.trace.primal_residual.push_back(std::sqrt(r2));
            res.trace.lagrangian.push_back(augmented_lagrangian(h, y, st, theta));
        }
    }
    res.x = st.x;
    return res;
}

PsadmmResult detect_psadmm(std::span<const double> y, const Matrix& h, const PenaltyParams& theta, std::size_t iters,
                           PsadmmOptions opts) {
    theta.validate();
    return detect_psadmm(RidgeSystem(h, theta.rho), y, h, theta, iters, opts);
}

Vector detect_zf(std::span<const double> y, const Matrix& h) {
    if (y.size() != h.rows()) throw DimensionError("detect_zf: y does not match H rows");
    return Cholesky(gram(h)).solve(multiply_transposed(h, y));
}

Vector detect_mmse(std::span<const double> y, const Matrix& h, double sigma2r, double es_real) {
    if (y.size() != h.rows()) throw DimensionError("detect_mmse: y does not match H rows");
    if (!(sigma2r >= 0.0) || !(es_real > 0.0)) throw ParameterError("detect_mmse: need sigma2r >= 0 and es_real > 0");
    Matrix a = gram(h);
    const double ridge = sigma2r / es_real;
    for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) += ridge;
    return Cholesky(a).solve(multiply_transposed(h, y));
}

} // namespace admmdet
