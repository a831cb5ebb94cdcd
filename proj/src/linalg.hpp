#ifndef RAMANMAG_LINALG_HPP
#define RAMANMAG_LINALG_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>

namespace ramanmag {

// Dense square matrix, row-major, fixed small dimension.
template <std::size_t N>
struct Mat {
    std::array<double, N * N> a{};

    double& operator()(std::size_t i, std::size_t j) { return a[i * N + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * N + j]; }

    std::array<double, N> apply(const std::array<double, N>& x) const {
        std::array<double, N> y{};
        for (std::size_t i = 0; i < N; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < N; ++j) s += a[i * N + j] * x[j];
            y[i] = s;
        }
        return y;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : a) {
            double av = v < 0 ? -v : v;
            if (av > m) m = av;
        }
        return m;
    }
};

// Solves A x = b by Gaussian elimination with partial pivoting, in place.
// Returns false when a pivot falls below rel_tol * max|A| (rank deficient).
template <std::size_t N>
bool solve_inplace(Mat<N>& m, std::array<double, N>& b, double rel_tol = 1e-13) {
    const double scale = m.max_abs();
    if (scale == 0.0) return false;
    const double tiny = rel_tol * scale;

    for (std::size_t col = 0; col < N; ++col) {
        std::size_t piv = col;
        double best = std::abs(m(col, col));
        for (std::size_t r = col + 1; r < N; ++r) {
            double v = std::abs(m(r, col));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best <= tiny) return false;
        if (piv != col) {
            for (std::size_t j = col; j < N; ++j) std::swap(m(piv, j), m(col, j));
            std::swap(b[piv], b[col]);
        }
        const double inv_p = 1.0 / m(col, col);
        for (std::size_t r = col + 1; r < N; ++r) {
            const double f = m(r, col) * inv_p;
            if (f == 0.0) continue;
            m(r, col) = 0.0;
            for (std::size_t j = col + 1; j < N; ++j) m(r, j) -= f * m(col, j);
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = N; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < N; ++j) s -= m(i, j) * b[j];
        b[i] = s / m(i, i);
    }
    return true;
}

}  // namespace ramanmag

#endif
