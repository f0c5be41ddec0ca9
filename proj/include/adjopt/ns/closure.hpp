#pragma once

#include "adjopt/core/error.hpp"
#include "adjopt/core/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace adjopt::ns {

/// Catmull-Rom weights on a uniform grid over [0, 1] with even reflection at
/// both ends, so the interpolant has zero slope at sigma = 0 and sigma = 1.
struct CubicStencil {
    std::size_t idx[4]{};
    double w[4]{};
    double dw[4]{};  // d/dsigma
};

inline CubicStencil cubic_stencil(double sigma, std::size_t intervals)
{
    const double h = 1.0 / double(intervals);
    sigma = std::clamp(sigma, 0.0, 1.0);
    std::size_t j = std::min<std::size_t>(std::size_t(sigma / h), intervals - 1);
    const double t = sigma / h - double(j);
    const double t2 = t * t, t3 = t2 * t;
    CubicStencil s;
    s.w[0] = 0.5 * (-t + 2.0 * t2 - t3);
    s.w[1] = 0.5 * (2.0 - 5.0 * t2 + 3.0 * t3);
    s.w[2] = 0.5 * (t + 4.0 * t2 - 3.0 * t3);
    s.w[3] = 0.5 * (-t2 + t3);
    s.dw[0] = 0.5 * (-1.0 + 4.0 * t - 3.0 * t2) / h;
    s.dw[1] = 0.5 * (-10.0 * t + 9.0 * t2) / h;
    s.dw[2] = 0.5 * (1.0 + 8.0 * t - 9.0 * t2) / h;
    s.dw[3] = 0.5 * (-2.0 * t + 3.0 * t2) / h;
    auto reflect = [&](long i) -> std::size_t {
        if (i < 0) return std::size_t(-i);
        if (i > long(intervals)) return std::size_t(2 * long(intervals) - i);
        return std::size_t(i);
    };
    for (int k = 0; k < 4; ++k) s.idx[k] = reflect(long(j) + k - 1);
    return s;
}

/// phi(sigma) and dphi/dsigma from nodal values.
inline double interpolate(const GridFunction& phi, double sigma, double* dphi = nullptr)
{
    const auto s = cubic_stencil(sigma, phi.grid.n);
    double v = 0.0, d = 0.0;
    for (int k = 0; k < 4; ++k) {
        v += s.w[k] * phi[s.idx[k]];
        d += s.dw[k] * phi[s.idx[k]];
    }
    if (dphi) *dphi = (sigma < 0.0 || sigma > 1.0) ? 0.0 : d;
    return v;
}

/// Transpose of `interpolate`: spreads weight q at sigma onto the nodes.
inline void deposit(std::vector<double>& acc, std::size_t intervals, double sigma, double q)
{
    const auto s = cubic_stencil(sigma, intervals);
    for (int k = 0; k < 4; ++k) acc[s.idx[k]] += s.w[k] * q;
}

/// Turns deposited point weights into a density whose trapezoid pairing with
/// any nodal function g equals sum q * g(sigma).
inline GridFunction deposits_to_density(const UniformGrid1D& g, std::vector<double> acc)
{
    const double h = g.spacing();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] /= trapezoid_weight(i, g.n, h);
    return GridFunction(g, std::move(acc));
}

/// nu(s) = (eta^3 sqrt(s) + nu0) phi(s / s_max), or a constant.
struct EddyViscosity {
    enum class Kind { Ansatz, Constant };
    Kind kind = Kind::Ansatz;
    double eta = 0.0;
    double nu0 = 0.0;
    double s_max = 1.0;
    GridFunction phi;
    double constant = 0.0;

    static EddyViscosity ansatz(double kc, double nu0, double s_max, GridFunction phi)
    {
        require(kc > 0.0 && s_max > 0.0 && nu0 >= 0.0, "EddyViscosity: need kc > 0, s_max > 0, nu0 >= 0");
        require(phi.grid.lo == 0.0 && phi.grid.hi == 1.0, "EddyViscosity: phi must live on [0, 1]");
        EddyViscosity e;
        e.eta = 2.0 * std::numbers::pi / kc;
        e.nu0 = nu0;
        e.s_max = s_max;
        e.phi = std::move(phi);
        return e;
    }
    static EddyViscosity constant_value(double c)
    {
        EddyViscosity e;
        e.kind = Kind::Constant;
        e.constant = c;
        return e;
    }

    double sigma(double s) const { return std::min(s / s_max, 1.0); }
    /// eta^3 sqrt(s) + nu0
    double prefactor(double s) const { return eta * eta * eta * std::sqrt(s) + nu0; }

    /// nu(s) and optionally dnu/ds. At s = 0 the derivative is reported as 0;
    /// callers only use it multiplied by grad w (x) grad w, which vanishes there.
    double operator()(double s, double* dnu_ds = nullptr) const
    {
        if (kind == Kind::Constant) {
            if (dnu_ds) *dnu_ds = 0.0;
            return constant;
        }
        double dphi = 0.0;
        const double sg = s / s_max;
        const double p = interpolate(phi, sg, dnu_ds ? &dphi : nullptr);
        if (dnu_ds) {
            const double e3 = eta * eta * eta;
            *dnu_ds = s > 0.0 ? 0.5 * e3 / std::sqrt(s) * p + prefactor(s) * dphi / s_max : 0.0;
        }
        return prefactor(s) * p;
    }

    /// Part of the closure advanced implicitly with the Newtonian viscosity.
    double implicit_part() const { return std::max((*this)(0.0), 0.0); }
};

} // namespace adjopt::ns
