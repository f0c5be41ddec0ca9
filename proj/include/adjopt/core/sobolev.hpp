#pragma once

#include "adjopt/core/banded.hpp"
#include "adjopt/core/error.hpp"
#include "adjopt/core/grid.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace adjopt {

/// H^p metric: sum_q l_q^{2q} <d^q z1, d^q z2>, with l_0 = 1.
struct SobolevMetric {
    int order = 0;
    std::vector<double> lengths; // l_1 .. l_p

    SobolevMetric() = default;
    SobolevMetric(int p, std::vector<double> ls) : order(p), lengths(std::move(ls)) { validate(); }

    static SobolevMetric l2() { return {}; }
    static SobolevMetric h1(double l1) { return SobolevMetric(1, {l1}); }
    static SobolevMetric h2(double l1, double l2) { return SobolevMetric(2, {l1, l2}); }

    double length(int q) const { return q == 0 ? 1.0 : lengths.at(static_cast<std::size_t>(q - 1)); }

    void validate() const
    {
        require(order >= 0 && order <= 2, "SobolevMetric: order must be 0, 1 or 2");
        require(lengths.size() == static_cast<std::size_t>(order),
                "SobolevMetric: need exactly p length scales");
        for (double l : lengths)
            require(std::isfinite(l) && l > 0.0, "SobolevMetric: length scales must be positive");
    }
};

enum class BvpBoundaryKind { DirichletZero, NaturalOddDeriv };

namespace detail {

// Second difference with even reflection at the ends (z[-1] = z[1]).
inline std::vector<double> reflected_laplacian(const std::vector<double>& z, double h)
{
    const std::size_t n = z.size() - 1;
    const double ih2 = 1.0 / (h * h);
    std::vector<double> out(n + 1);
    out[0] = 2.0 * (z[1] - z[0]) * ih2;
    out[n] = 2.0 * (z[n - 1] - z[n]) * ih2;
    for (std::size_t i = 1; i < n; ++i) out[i] = (z[i - 1] - 2.0 * z[i] + z[i + 1]) * ih2;
    return out;
}

} // namespace detail

/// Discrete H^p inner product.
///
/// q=0 and q=2 terms use trapezoid weights; the q=1 term sums forward
/// differences over cells. The q=2 term uses the reflected second difference,
/// which is the operator appearing in the p=2 smoothing problem, so that the
/// Riesz identity <solve(f), z>_{H^p} = <f, z>_{L2} holds exactly on the grid.
inline double inner_product(const GridFunction& z1, const GridFunction& z2, const SobolevMetric& metric)
{
    z1.check_same_grid(z2);
    metric.validate();
    const std::size_t n = z1.grid.n;
    const double h = z1.grid.spacing();
    double result = l2_inner(z1, z2);
    if (metric.order >= 1) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += (z1[i + 1] - z1[i]) * (z2[i + 1] - z2[i]);
        const double l1 = metric.length(1);
        result += l1 * l1 * s / h;
    }
    if (metric.order >= 2) {
        const auto d1 = detail::reflected_laplacian(z1.values, h);
        const auto d2 = detail::reflected_laplacian(z2.values, h);
        double s = 0.0;
        for (std::size_t i = 0; i <= n; ++i) s += trapezoid_weight(i, n, h) * d1[i] * d2[i];
        const double l2 = metric.length(2);
        result += l2 * l2 * l2 * l2 * s;
    }
    return result;
}

inline double sobolev_norm(const GridFunction& z, const SobolevMetric& metric)
{
    return std::sqrt(inner_product(z, z, metric));
}

namespace detail {

// (I - c L) g = f with reflected L on all n + 1 nodes.
inline std::vector<double> solve_reflected_helmholtz(const std::vector<double>& f, double c, double h)
{
    const std::size_t m = f.size();
    const double k = c / (h * h);
    std::vector<double> lo(m, k), up(m, k), s(m, 1.0);
    lo[0] = 0.0;
    up[0] = 2.0 * k;
    lo[m - 1] = 2.0 * k;
    up[m - 1] = 0.0;
    return solve_mmatrix_tridiag(lo, up, s, f);
}

// I - l1^2 L + l2^4 L^2 assembled as a pentadiagonal band.
inline std::vector<double> solve_h2_band(const std::vector<double>& f, double c1, double c2, double h)
{
    const std::size_t m = f.size();
    BandMatrix a(m, 2, 2);
    std::vector<double> e(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        e.assign(m, 0.0);
        e[j] = 1.0;
        const auto le = reflected_laplacian(e, h);
        const auto lle = reflected_laplacian(le, h);
        const std::size_t ilo = j >= 2 ? j - 2 : 0;
        const std::size_t ihi = std::min(m - 1, j + 2);
        for (std::size_t i = ilo; i <= ihi; ++i)
            a.at(i, j) = (i == j ? 1.0 : 0.0) - c1 * le[i] + c2 * lle[i];
    }
    return a.solve(f);
}

} // namespace detail

/// Sobolev smoothing: solve (I - l1^2 d2 + l2^4 d4) g = rhs (terms up to order p).
///
/// p=1 with DirichletZero: g = 0 at both ends, tridiagonal interior solve.
/// p=2 with NaturalOddDeriv: g' = g''' = 0 imposed through even reflection
/// (ghost nodes g[-1] = g[1], g[-2] = g[2]).
inline GridFunction solve_gradient_bvp(const GridFunction& rhs, const SobolevMetric& metric, BvpBoundaryKind bc)
{
    metric.validate();
    if (!rhs.all_finite()) throw InvalidInput("solve_gradient_bvp: non-finite right-hand side");
    const double h = rhs.grid.spacing();
    const std::size_t n = rhs.grid.n;
    GridFunction out(rhs.grid);

    if (metric.order == 0) {
        out.values = rhs.values;
        return out;
    }
    if (metric.order == 1) {
        require(bc == BvpBoundaryKind::DirichletZero, "solve_gradient_bvp: p=1 requires DirichletZero");
        const double l1 = metric.length(1);
        const double k = l1 * l1 / (h * h);
        const std::size_t m = n - 1;
        std::vector<double> lo(m, k), up(m, k), s(m, 1.0);
        std::vector<double> f(rhs.values.begin() + 1, rhs.values.end() - 1);
        // couplings to the pinned end values move into the surplus
        lo[0] = 0.0;
        s[0] += k;
        up[m - 1] = 0.0;
        s[m - 1] += k;
        const auto g = solve_mmatrix_tridiag(lo, up, s, f);
        for (std::size_t i = 0; i < m; ++i) out.values[i + 1] = g[i];
        return out;
    }

    require(bc == BvpBoundaryKind::NaturalOddDeriv, "solve_gradient_bvp: p=2 requires NaturalOddDeriv");
    const double l1 = metric.length(1);
    const double l2 = metric.length(2);
    const double c1 = l1 * l1;
    const double c2 = l2 * l2 * l2 * l2;
    const double disc = c1 * c1 - 4.0 * c2;
    if (disc >= 0.0) {
        // I - c1 L + c2 L^2 = (I - a L)(I - b L) with a + b = c1, a b = c2.
        const double a = 0.5 * (c1 + std::sqrt(disc));
        const double b = c2 / a;
        out.values = detail::solve_reflected_helmholtz(detail::solve_reflected_helmholtz(rhs.values, a, h), b, h);
    } else {
        out.values = detail::solve_h2_band(rhs.values, c1, c2, h);
    }
    if (!out.all_finite()) throw SolverFailure("solve_gradient_bvp: non-finite solution");
    return out;
}

} // namespace adjopt
