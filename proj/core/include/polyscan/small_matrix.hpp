#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "polyscan/errors.hpp"

namespace polyscan {

template <std::size_t N>
using Vec = std::array<double, N>;

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

// Dense N x N matrix, row-major, N = 2 or 3. Everything the evidence and
// p-value machinery touches is at most 3-dimensional; general linear algebra
// is out of scope on purpose.
template <std::size_t N>
struct SquareMatrix {
    static_assert(N == 2 || N == 3, "only 2x2 and 3x3 matrices are supported");
    static constexpr int dim = static_cast<int>(N);

    std::array<double, N * N> a{};

    double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * N + c]; }
    double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * N + c]; }

    static SquareMatrix identity() {
        SquareMatrix m;
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    static SquareMatrix diagonal(const Vec<N>& d) {
        SquareMatrix m;
        for (int i = 0; i < dim; ++i) m(i, i) = d[i];
        return m;
    }

    static SquareMatrix scaled_identity(double s) {
        SquareMatrix m;
        for (int i = 0; i < dim; ++i) m(i, i) = s;
        return m;
    }

    friend SquareMatrix operator+(const SquareMatrix& x, const SquareMatrix& y) {
        SquareMatrix r;
        for (std::size_t i = 0; i < N * N; ++i) r.a[i] = x.a[i] + y.a[i];
        return r;
    }

    friend SquareMatrix operator*(const SquareMatrix& x, const SquareMatrix& y) {
        SquareMatrix r;
        for (int i = 0; i < dim; ++i)
            for (int k = 0; k < dim; ++k) {
                const double v = x(i, k);
                for (int j = 0; j < dim; ++j) r(i, j) += v * y(k, j);
            }
        return r;
    }

    friend Vec<N> operator*(const SquareMatrix& m, const Vec<N>& v) {
        Vec<N> r{};
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) r[i] += m(i, j) * v[j];
        return r;
    }

    SquareMatrix transposed() const {
        SquareMatrix r;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) r(i, j) = (*this)(j, i);
        return r;
    }

    // Averages away the rounding asymmetry of products like w * C * w^T so a
    // subsequent Cholesky sees an exactly symmetric matrix.
    SquareMatrix symmetrized() const {
        SquareMatrix r;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) r(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
        return r;
    }
};

using Mat2 = SquareMatrix<2>;
using Mat3 = SquareMatrix<3>;

// Lower-triangular Cholesky factor, m = L L^T.
template <std::size_t N>
struct CholeskyFactor {
    SquareMatrix<N> lower;

    Vec<N> solve(const Vec<N>& v) const {
        constexpr int dim = SquareMatrix<N>::dim;
        Vec<N> y{};
        for (int i = 0; i < dim; ++i) {
            double s = v[i];
            for (int j = 0; j < i; ++j) s -= lower(i, j) * y[j];
            y[i] = s / lower(i, i);
        }
        Vec<N> x{};
        for (int i = dim - 1; i >= 0; --i) {
            double s = y[i];
            for (int j = i + 1; j < dim; ++j) s -= lower(j, i) * x[j];
            x[i] = s / lower(i, i);
        }
        return x;
    }

    double log_det() const {
        double s = 0.0;
        for (int i = 0; i < SquareMatrix<N>::dim; ++i) s += std::log(lower(i, i));
        return 2.0 * s;
    }
};

// nullopt if a pivot is <= 0, i.e. the matrix is not (numerically) SPD.
template <std::size_t N>
std::optional<CholeskyFactor<N>> try_cholesky(const SquareMatrix<N>& m) {
    CholeskyFactor<N> f;
    for (int i = 0; i < SquareMatrix<N>::dim; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = m(i, j);
            for (int k = 0; k < j; ++k) s -= f.lower(i, k) * f.lower(j, k);
            if (i == j) {
                if (!(s > 0.0)) return std::nullopt;
                f.lower(i, i) = std::sqrt(s);
            } else {
                f.lower(i, j) = s / f.lower(j, j);
            }
        }
    }
    return f;
}

template <std::size_t N>
CholeskyFactor<N> cholesky(const SquareMatrix<N>& m) {
    CholeskyFactor<N> f;
    for (int i = 0; i < SquareMatrix<N>::dim; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = m(i, j);
            for (int k = 0; k < j; ++k) s -= f.lower(i, k) * f.lower(j, k);
            if (i == j) {
                if (!(s > 0.0)) {
                    throw SingularMatrixError(
                        "matrix is not positive definite (pivot " + std::to_string(i) + ")", i);
                }
                f.lower(i, i) = std::sqrt(s);
            } else {
                f.lower(i, j) = s / f.lower(j, j);
            }
        }
    }
    return f;
}

template <std::size_t N>
Vec<N> spd_solve(const SquareMatrix<N>& m, const Vec<N>& v) {
    return cholesky(m).solve(v);
}

template <std::size_t N>
double log_det_spd(const SquareMatrix<N>& m) {
    return cholesky(m).log_det();
}

template <std::size_t N>
SquareMatrix<N> spd_inverse(const SquareMatrix<N>& m) {
    const auto f = cholesky(m);
    SquareMatrix<N> inv;
    for (int c = 0; c < SquareMatrix<N>::dim; ++c) {
        Vec<N> e{};
        e[c] = 1.0;
        const Vec<N> col = f.solve(e);
        for (int r = 0; r < SquareMatrix<N>::dim; ++r) inv(r, c) = col[r];
    }
    return inv.symmetrized();
}

template <std::size_t N>
double dot(const Vec<N>& x, const Vec<N>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += x[i] * y[i];
    return s;
}

// v^T m v
template <std::size_t N>
double quadratic_form(const SquareMatrix<N>& m, const Vec<N>& v) {
    return dot(v, m * v);
}

} // namespace polyscan
