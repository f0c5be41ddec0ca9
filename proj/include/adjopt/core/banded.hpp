#pragma once

#include "adjopt/core/error.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

namespace adjopt {

/// Solve a tridiagonal M-matrix system
///
///   -lower[i] x[i-1] + (surplus[i] + lower[i] + upper[i]) x[i] - upper[i] x[i+1] = rhs[i]
///
/// with lower, upper, surplus >= 0. The diagonal is never formed explicitly:
/// elimination updates only the surplus, which keeps full relative accuracy
/// even when surplus is tiny compared to the couplings (smoothing operators
/// with large length scales).
inline std::vector<double> solve_mmatrix_tridiag(const std::vector<double>& lower,
                                                 const std::vector<double>& upper,
                                                 const std::vector<double>& surplus,
                                                 std::vector<double> rhs)
{
    const std::size_t n = rhs.size();
    if (lower.size() != n || upper.size() != n || surplus.size() != n || n == 0)
        throw InvalidInput("solve_mmatrix_tridiag: size mismatch");
    std::vector<double> s(n), pivot(n);
    s[0] = surplus[0];
    pivot[0] = s[0] + upper[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double m = lower[i] / pivot[i - 1];
        // lower[i] * (1 - upper[i-1]/pivot[i-1]) == lower[i] * s[i-1]/pivot[i-1]
        s[i] = surplus[i] + m * s[i - 1];
        pivot[i] = s[i] + upper[i];
        rhs[i] += m * rhs[i - 1];
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!(pivot[i] > 0.0)) throw SolverFailure("solve_mmatrix_tridiag: singular system");
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / pivot[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] + upper[i] * x[i + 1]) / pivot[i];
    return x;
}

/// General banded matrix with kl sub- and ku super-diagonals, row-major band storage.
class BandMatrix {
public:
    BandMatrix(std::size_t n, std::size_t kl, std::size_t ku)
        : n_(n), kl_(kl), ku_(ku), width_(kl + ku + 1), a_(n * (kl + ku + 1), 0.0)
    {
    }

    std::size_t size() const { return n_; }

    double& at(std::size_t i, std::size_t j)
    {
        if (j + kl_ < i || j > i + ku_) throw InvalidInput("BandMatrix: entry outside band");
        return a_[i * width_ + (j + kl_ - i)];
    }
    double get(std::size_t i, std::size_t j) const
    {
        if (j + kl_ < i || j > i + ku_) return 0.0;
        return a_[i * width_ + (j + kl_ - i)];
    }

    /// Gaussian elimination without pivoting; fine for the symmetric
    /// positive definite (after diagonal scaling) systems used here.
    std::vector<double> solve(std::vector<double> b) const
    {
        if (b.size() != n_) throw InvalidInput("BandMatrix::solve: size mismatch");
        std::vector<double> a = a_;
        auto el = [&](std::size_t i, std::size_t j) -> double& { return a[i * width_ + (j + kl_ - i)]; };
        for (std::size_t k = 0; k < n_; ++k) {
            const double piv = el(k, k);
            if (piv == 0.0 || !std::isfinite(piv)) throw SolverFailure("BandMatrix::solve: zero pivot");
            const std::size_t iend = std::min(n_ - 1, k + kl_);
            const std::size_t jend = std::min(n_ - 1, k + ku_);
            for (std::size_t i = k + 1; i <= iend; ++i) {
                const double m = el(i, k) / piv;
                if (m == 0.0) continue;
                for (std::size_t j = k; j <= jend; ++j) el(i, j) -= m * el(k, j);
                b[i] -= m * b[k];
            }
        }
        for (std::size_t k = n_; k-- > 0;) {
            double sum = b[k];
            const std::size_t jend = std::min(n_ - 1, k + ku_);
            for (std::size_t j = k + 1; j <= jend; ++j) sum -= el(k, j) * b[j];
            b[k] = sum / el(k, k);
        }
        return b;
    }

    std::vector<double> multiply(const std::vector<double>& x) const
    {
        std::vector<double> y(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t jlo = i >= kl_ ? i - kl_ : 0;
            const std::size_t jhi = std::min(n_ - 1, i + ku_);
            for (std::size_t j = jlo; j <= jhi; ++j) y[i] += get(i, j) * x[j];
        }
        return y;
    }

private:
    std::size_t n_, kl_, ku_, width_;
    std::vector<double> a_;
};

} // namespace adjopt
