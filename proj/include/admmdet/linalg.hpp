#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace admmdet {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool all_finite() const noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

bool all_finite(std::span<const double> v) noexcept;

double dot(std::span<const double> a, std::span<const double> b) noexcept;

/// y = A x
Vector multiply(const Matrix& a, std::span<const double> x);
/// y = Aᵀ x
Vector multiply_transposed(const Matrix& a, std::span<const double> x);
/// Aᵀ A, computed on the lower triangle and mirrored.
Matrix gram(const Matrix& a);

double norm2(std::span<const double> v) noexcept;
double norm_inf(std::span<const double> v) noexcept;

/// Returns HᵀH + ρI. Exactly symmetric; throws ParameterError unless rho > 0.
Matrix gram_plus_ridge(const Matrix& h, double rho);

/// Lower-triangular factor L with A = L Lᵀ.
class Cholesky {
public:
    /// Throws SingularityError naming the first pivot that is non-positive or
    /// below n·ε·|a_jj| after elimination.
    explicit Cholesky(const Matrix& a);

    std::size_t size() const noexcept { return n_; }
    const Matrix& lower() const noexcept { return l_; }

    Vector solve(std::span<const double> b) const;
    void solve_in_place(std::span<double> b) const;

private:
    std::size_t n_;
    Matrix l_;
    Vector inv_diag_;
};

/// Solves A x = b for symmetric positive definite A by Cholesky factorization.
/// Throws DomainError when A is not symmetric to 1e-9 relative.
Vector solve_spd(const Matrix& a, std::span<const double> b);

} // namespace admmdet
