#pragma once

// Independent reference computations used only by the tests. Nothing here calls
// into the library's arithmetic: matrices are plain nested vectors and every
// routine is the textbook loop.

#include "admmdet/linalg.hpp"
#include "admmdet/random.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const admmdet::Matrix& m) {
    Dense d(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) d[r][c] = m(r, c);
    return d;
}

inline admmdet::Matrix from_dense(const Dense& d) {
    admmdet::Matrix m(d.size(), d.empty() ? 0 : d[0].size());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = d[r][c];
    return m;
}

/// Aᵀ A + ρ I by the triple loop.
inline Dense gram_plus_ridge(const Dense& a, double rho) {
    const std::size_t n = a.empty() ? 0 : a[0].size();
    Dense g(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < a.size(); ++r) s += a[r][i] * a[r][j];
            g[i][j] = s + (i == j ? rho : 0.0);
        }
    return g;
}

/// Explicit inverse by Gauss-Jordan elimination with partial pivoting.
inline Dense inverse(Dense a) {
    const std::size_t n = a.size();
    Dense inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (a[piv][col] == 0.0) throw std::runtime_error("oracle::inverse: singular");
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        const double d = a[col][col];
        for (std::size_t c = 0; c < n; ++c) {
            a[col][c] /= d;
            inv[col][c] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            for (std::size_t c = 0; c < n; ++c) {
                a[r][c] -= f * a[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    return inv;
}

inline std::vector<double> matvec(const Dense& a, const std::vector<double>& x) {
    std::vector<double> y(a.size(), 0.0);
    for (std::size_t r = 0; r < a.size(); ++r)
        for (std::size_t c = 0; c < x.size(); ++c) y[r] += a[r][c] * x[c];
    return y;
}

inline std::vector<double> matvec_t(const Dense& a, const std::vector<double>& x) {
    const std::size_t n = a.empty() ? 0 : a[0].size();
    std::vector<double> y(n, 0.0);
    for (std::size_t r = 0; r < a.size(); ++r)
        for (std::size_t c = 0; c < n; ++c) y[c] += a[r][c] * x[r];
    return y;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Random SPD matrix GᵀG + I with G ~ N(0,1)^{n×n}.
inline Dense random_spd(std::size_t n, admmdet::RandomEngine& eng) {
    Dense g(n, std::vector<double>(n));
    for (auto& row : g)
        for (auto& v : row) v = eng.normal();
    return gram_plus_ridge(g, 1.0);
}

inline Dense random_dense(std::size_t rows, std::size_t cols, admmdet::RandomEngine& eng) {
    Dense g(rows, std::vector<double>(cols));
    for (auto& row : g)
        for (auto& v : row) v = eng.normal();
    return g;
}

/// Exhaustive maximum-likelihood search over the real alphabet; test-only and
/// meant for K ≤ 4, q ≤ 2.
inline std::vector<double> exhaustive_ml(const Dense& h, const std::vector<double>& y, int q) {
    const std::size_t k = h.empty() ? 0 : h[0].size();
    const int levels = 1 << q;
    std::size_t total = 1;
    for (std::size_t i = 0; i < k; ++i) total *= static_cast<std::size_t>(levels);
    std::vector<double> best;
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<double> s(k);
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (std::size_t i = 0; i < k; ++i) {
            s[i] = 2.0 * static_cast<double>(c % static_cast<std::size_t>(levels)) - (levels - 1);
            c /= static_cast<std::size_t>(levels);
        }
        const auto hs = matvec(h, s);
        double cost = 0.0;
        for (std::size_t r = 0; r < y.size(); ++r) cost += (y[r] - hs[r]) * (y[r] - hs[r]);
        if (cost < best_cost) {
            best_cost = cost;
            best = s;
        }
    }
    return best;
}

/// Central finite difference of f at x along coordinate i.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                                 std::size_t i, double h) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double fp = f(x);
    x[i] = x0 - h;
    const double fm = f(x);
    return (fp - fm) / (2.0 * h);
}

} // namespace oracle
