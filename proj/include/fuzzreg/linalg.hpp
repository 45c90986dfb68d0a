#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fuzzreg/errors.hpp"

// Dense linear-algebra kernel: Gram products, symmetric positive-definite
// solves, and a minimum-norm least-squares fallback for singular systems.

namespace fuzzreg::linalg {

using Vector = std::vector<double>;

/// Row-major dense matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t r, std::size_t c) {
        assert(r < rows_ && c < cols_);
        return entries_[r * cols_ + c];
    }
    double operator()(std::size_t r, std::size_t c) const {
        assert(r < rows_ && c < cols_);
        return entries_[r * cols_ + c];
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return entries_.empty(); }

    std::span<const double> row(std::size_t r) const {
        assert(r < rows_);
        return {entries_.data() + r * cols_, cols_};
    }
    std::span<double> row(std::size_t r) {
        assert(r < rows_);
        return {entries_.data() + r * cols_, cols_};
    }

    const Vector& entries() const { return entries_; }
    Vector& entries() { return entries_; }

    bool all_finite() const {
        for (double v : entries_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector entries_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> v) {
    return std::sqrt(dot(v, v));
}

inline Vector matvec(const Matrix& m, std::span<const double> x) {
    if (x.size() != m.cols())
        throw DimensionMismatch("matvec: vector length does not match matrix columns");
    Vector out(m.rows(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), x);
    return out;
}

inline Vector matvec_transposed(const Matrix& m, std::span<const double> x) {
    if (x.size() != m.rows())
        throw DimensionMismatch("matvec_transposed: vector length does not match matrix rows");
    Vector out(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        const double xr = x[r];
        for (std::size_t c = 0; c < m.cols(); ++c) out[c] += row[c] * xr;
    }
    return out;
}

/// Product of the matrix transpose with itself. Each off-diagonal entry is
/// computed once and mirrored, so the result is exactly symmetric; it is
/// positive semidefinite by construction.
inline Matrix gram(const Matrix& phi) {
    if (phi.empty())
        throw InvalidArgument("gram: matrix must be nonempty");
    const std::size_t q = phi.cols();
    Matrix g(q, q);
    for (std::size_t r = 0; r < phi.rows(); ++r) {
        const auto row = phi.row(r);
        for (std::size_t i = 0; i < q; ++i) {
            const double vi = row[i];
            if (vi == 0.0) continue;
            for (std::size_t j = i; j < q; ++j) g(i, j) += vi * row[j];
        }
    }
    for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = i + 1; j < q; ++j) g(j, i) = g(i, j);
    return g;
}

/// Lower-triangular Cholesky factorization of a symmetric positive-definite
/// matrix. Only the lower triangle of the input is read. Factor once, solve
/// many right-hand sides.
class CholeskyFactor {
public:
    explicit CholeskyFactor(const Matrix& m) : lower_(m.rows(), m.cols()) {
        if (m.rows() != m.cols())
            throw DimensionMismatch("cholesky: matrix must be square");
        const std::size_t n = m.rows();
        for (std::size_t j = 0; j < n; ++j) {
            double d = m(j, j);
            for (std::size_t k = 0; k < j; ++k) d -= lower_(j, k) * lower_(j, k);
            if (!(d > 0.0) || !std::isfinite(d))
                throw NotPositiveDefinite("cholesky: non-positive pivot at index " +
                                          std::to_string(j));
            lower_(j, j) = std::sqrt(d);
            for (std::size_t i = j + 1; i < n; ++i) {
                double s = m(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= lower_(i, k) * lower_(j, k);
                lower_(i, j) = s / lower_(j, j);
            }
        }
    }

    Vector solve(std::span<const double> b) const {
        const std::size_t n = lower_.rows();
        if (b.size() != n)
            throw DimensionMismatch("cholesky solve: right-hand side length mismatch");
        Vector y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double s = b[i];
            for (std::size_t k = 0; k < i; ++k) s -= lower_(i, k) * y[k];
            y[i] = s / lower_(i, i);
        }
        Vector x(n, 0.0);
        for (std::size_t ii = n; ii-- > 0;) {
            double s = y[ii];
            for (std::size_t k = ii + 1; k < n; ++k) s -= lower_(k, ii) * x[k];
            x[ii] = s / lower_(ii, ii);
        }
        return x;
    }

    const Matrix& lower() const { return lower_; }

private:
    Matrix lower_;
};

/// Solves m·x = b for symmetric positive-definite m. Throws
/// NotPositiveDefinite when the factorization hits a non-positive pivot.
inline Vector spd_solve(const Matrix& m, std::span<const double> b) {
    return CholeskyFactor(m).solve(b);
}

/// Minimum-norm least-squares solution of phi·x ~= g via one-sided Jacobi
/// SVD. Always defined, even for rank-deficient or underdetermined systems;
/// coincides with the normal-equations solution when phi has full column
/// rank. Cost is O(rows · cols^2) per sweep, fine for the dense problem
/// sizes used here.
inline Vector min_norm_lstsq(const Matrix& phi, std::span<const double> g) {
    if (phi.empty())
        throw InvalidArgument("min_norm_lstsq: matrix must be nonempty");
    if (g.size() != phi.rows())
        throw DimensionMismatch("min_norm_lstsq: right-hand side length mismatch");
    const std::size_t n = phi.rows();
    const std::size_t q = phi.cols();

    // Column-major working copy of phi; v accumulates the right rotations.
    std::vector<Vector> a(q, Vector(n, 0.0));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < q; ++c) a[c][r] = phi(r, c);
    std::vector<Vector> v(q, Vector(q, 0.0));
    for (std::size_t c = 0; c < q; ++c) v[c][c] = 1.0;

    constexpr double kOrthTol = 1e-14;
    constexpr int kMaxSweeps = 60;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < q; ++i) {
            for (std::size_t j = i + 1; j < q; ++j) {
                const double alpha = dot(a[i], a[i]);
                const double beta = dot(a[j], a[j]);
                const double gamma = dot(a[i], a[j]);
                if (std::abs(gamma) <= kOrthTol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (std::size_t r = 0; r < n; ++r) {
                    const double ai = a[i][r];
                    a[i][r] = cs * ai - sn * a[j][r];
                    a[j][r] = sn * ai + cs * a[j][r];
                }
                for (std::size_t r = 0; r < q; ++r) {
                    const double vi = v[i][r];
                    v[i][r] = cs * vi - sn * v[j][r];
                    v[j][r] = sn * vi + cs * v[j][r];
                }
            }
        }
        if (!rotated) break;
    }

    Vector sigma(q, 0.0);
    double sigma_max = 0.0;
    for (std::size_t c = 0; c < q; ++c) {
        sigma[c] = norm2(a[c]);
        sigma_max = std::max(sigma_max, sigma[c]);
    }
    const double cutoff =
        sigma_max * static_cast<double>(std::max(n, q)) * 2.220446049250313e-16;

    Vector x(q, 0.0);
    for (std::size_t c = 0; c < q; ++c) {
        if (sigma[c] <= cutoff || sigma[c] == 0.0) continue;
        const double coef = dot(a[c], g) / (sigma[c] * sigma[c]);
        for (std::size_t r = 0; r < q; ++r) x[r] += coef * v[c][r];
    }
    return x;
}

} // namespace fuzzreg::linalg
