#include "admmdet/linalg.hpp"

#include "admmdet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace admmdet {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DimensionError("ragged matrix initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool Matrix::all_finite() const noexcept { return admmdet::all_finite(data_); }

bool all_finite(std::span<const double> v) noexcept {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    // four independent partial sums, combined in a fixed order
    const std::size_t n = a.size();
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

Vector multiply(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.cols()) throw DimensionError("multiply: vector length does not match columns");
    Vector y(a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) y[r] = dot(a.row(r), x);
    return y;
}

Vector multiply_transposed(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.rows()) throw DimensionError("multiply_transposed: vector length does not match rows");
    Vector y(a.cols(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double xr = x[r];
        const auto row = a.row(r);
        for (std::size_t c = 0; c < a.cols(); ++c) y[c] += xr * row[c];
    }
    return y;
}

Matrix gram(const Matrix& a) {
    const std::size_t n = a.cols();
    Matrix g(n, n);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const auto h = a.row(r);
        for (std::size_t j = 0; j < n; ++j) {
            const double hj = h[j];
            auto gj = g.row(j);
            for (std::size_t k = 0; k <= j; ++k) gj[k] += hj * h[k];
        }
    }
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) g(j, k) = g(k, j);
    return g;
}

double norm2(std::span<const double> v) noexcept { return std::sqrt(dot(v, v)); }

double norm_inf(std::span<const double> v) noexcept {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

Matrix gram_plus_ridge(const Matrix& h, double rho) {
    if (!(rho > 0.0)) throw ParameterError("gram_plus_ridge: rho must be positive, got " + std::to_string(rho));
    Matrix g = gram(h);
    for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) += rho;
    return g;
}

Cholesky::Cholesky(const Matrix& a) : n_(a.rows()), l_(a.rows(), a.rows()), inv_diag_(a.rows()) {
    if (a.rows() != a.cols()) throw DimensionError("Cholesky: matrix is not square");
    for (std::size_t j = 0; j < n_; ++j) {
        auto lj = l_.row(j);
        double d = a(j, j) - dot(lj.first(j), lj.first(j));
        // pivots lost to cancellation count as singular
        const double floor = static_cast<double>(n_) * std::numeric_limits<double>::epsilon() * std::abs(a(j, j));
        if (!(d > floor)) throw SingularityError(j, d);
        const double djj = std::sqrt(d);
        lj[j] = djj;
        inv_diag_[j] = 1.0 / djj;
        for (std::size_t i = j + 1; i < n_; ++i) {
            auto li = l_.row(i);
            li[j] = (a(i, j) - dot(li.first(j), lj.first(j))) * inv_diag_[j];
        }
    }
}

void Cholesky::solve_in_place(std::span<double> b) const {
    if (b.size() != n_) throw DimensionError("Cholesky::solve: rhs length mismatch");
    // L y = b
    for (std::size_t i = 0; i < n_; ++i) {
        const auto li = l_.row(i);
        b[i] = (b[i] - dot(li.first(i), b.first(i))) * inv_diag_[i];
    }
    // Lᵀ x = y, column sweep over rows of L
    for (std::size_t i = n_; i-- > 0;) {
        b[i] *= inv_diag_[i];
        const double xi = b[i];
        const auto li = l_.row(i);
        for (std::size_t j = 0; j < i; ++j) b[j] -= li[j] * xi;
    }
}

Vector Cholesky::solve(std::span<const double> b) const {
    Vector x(b.begin(), b.end());
    solve_in_place(x);
    return x;
}

Vector solve_spd(const Matrix& a, std::span<const double> b) {
    if (a.rows() != a.cols()) throw DimensionError("solve_spd: matrix is not square");
    if (b.size() != a.rows()) throw DimensionError("solve_spd: rhs length mismatch");
    double scale = 0.0;
    for (double v : a.data()) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j)
            if (std::abs(a(i, j) - a(j, i)) > 1e-9 * scale)
                throw DomainError("solve_spd: matrix not symmetric at (" + std::to_string(i) + ", " +
                                  std::to_string(j) + ")");
    return Cholesky(a).solve(b);
}

} // namespace admmdet
