#pragma once

#include "adjopt/core/banded.hpp"
#include "adjopt/core/error.hpp"
#include "adjopt/core/grid.hpp"
#include "adjopt/core/sobolev.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace adjopt::heat {

/// Scalar field on the (time x rod) grid, stored time-major.
struct SpaceTimeField {
    UniformGrid1D xgrid;
    UniformGrid1D tgrid;
    std::vector<double> values;

    SpaceTimeField() = default;
    SpaceTimeField(const UniformGrid1D& xg, const UniformGrid1D& tg)
        : xgrid(xg), tgrid(tg), values(xg.size() * tg.size(), 0.0)
    {
    }

    std::size_t nx() const { return xgrid.n; }
    std::size_t nt() const { return tgrid.n; }
    double& at(std::size_t n, std::size_t i) { return values[n * xgrid.size() + i]; }
    double at(std::size_t n, std::size_t i) const { return values[n * xgrid.size() + i]; }
    std::span<const double> slice(std::size_t n) const { return {values.data() + n * xgrid.size(), xgrid.size()}; }
    std::span<double> slice(std::size_t n) { return {values.data() + n * xgrid.size(), xgrid.size()}; }

    /// u(t, x_i) as a time signal.
    TimeSignal trace(std::size_t i) const
    {
        TimeSignal s(tgrid);
        for (std::size_t n = 0; n <= nt(); ++n) s[n] = at(n, i);
        return s;
    }
};

struct HeatConfig {
    double a = 0.0;
    double b = 1.0;
    double T = 1.0;
    std::size_t nx = 200;
    std::size_t nt = 400;
    std::vector<double> u0;  // on the x grid; empty means zero
    TimeSignal target;       // u_b target on the t grid
    double E0 = 0.0;
    SobolevMetric metric = SobolevMetric::h1(0.01);

    UniformGrid1D xgrid() const { return {a, b, nx}; }
    UniformGrid1D tgrid() const { return {0.0, T, nt}; }

    void validate() const
    {
        require(a < b, "heat: need a < b");
        require(T > 0.0, "heat: need T > 0");
        require(nx >= 4 && nt >= 4, "heat: need nx, nt >= 4");
        require(u0.empty() || u0.size() == nx + 1, "heat: u0 must have nx + 1 samples");
        require(target.values.empty() || target.grid == tgrid(), "heat: target must live on the time grid");
        require(E0 >= 0.0, "heat: E0 must be non-negative");
        metric.validate();
    }
};

namespace detail {

/// Crank-Nicolson march of du/dt = L u + s(t) with Neumann data
/// du/dx(left) = left[n], du/dx(right) = right[n] by ghost-point elimination.
/// `source`, when non-null, supplies a volume source slice for each level.
template <class SourceFn>
void crank_nicolson(const UniformGrid1D& xg, const UniformGrid1D& tg, std::span<const double> initial,
                    std::span<const double> left, std::span<const double> right, SourceFn&& source,
                    SpaceTimeField& out)
{
    const std::size_t m = xg.size();
    const double h = xg.spacing();
    const double dt = tg.spacing();
    const double k = 0.5 * dt / (h * h);

    std::vector<double> lo(m, k), up(m, k), surplus(m, 1.0);
    lo[0] = 0.0;
    up[0] = 2.0 * k;
    lo[m - 1] = 2.0 * k;
    up[m - 1] = 0.0;

    out = SpaceTimeField(xg, tg);
    for (std::size_t i = 0; i < m; ++i) out.at(0, i) = initial.empty() ? 0.0 : initial[i];

    std::vector<double> rhs(m), src_old(m, 0.0), src_new(m, 0.0);
    source(0, std::span<double>(src_old));
    for (std::size_t n = 0; n < tg.n; ++n) {
        const auto u = out.slice(n);
        source(n + 1, std::span<double>(src_new));
        rhs[0] = u[0] + 2.0 * k * (u[1] - u[0]);
        rhs[m - 1] = u[m - 1] + 2.0 * k * (u[m - 2] - u[m - 1]);
        for (std::size_t i = 1; i + 1 < m; ++i) rhs[i] = u[i] + k * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
        // boundary flux enters as -2 phi / h on the left, +2 g / h on the right
        rhs[0] -= dt / h * (left[n] + left[n + 1]);
        rhs[m - 1] += dt / h * (right[n] + right[n + 1]);
        for (std::size_t i = 0; i < m; ++i) rhs[i] += 0.5 * dt * (src_old[i] + src_new[i]);
        const auto next = solve_mmatrix_tridiag(lo, up, surplus, rhs);
        std::copy(next.begin(), next.end(), out.slice(n + 1).begin());
        std::swap(src_old, src_new);
    }
}

inline auto no_source()
{
    return [](std::size_t, std::span<double> s) { std::fill(s.begin(), s.end(), 0.0); };
}

} // namespace detail

/// Forward heat solve with flux phi at x = a and zero flux at x = b.
inline SpaceTimeField solve_forward(const HeatConfig& cfg, const TimeSignal& flux)
{
    cfg.validate();
    require(flux.grid == cfg.tgrid(), "solve_forward: flux must live on the time grid");
    const std::vector<double> zero(cfg.nt + 1, 0.0);
    SpaceTimeField u;
    detail::crank_nicolson(cfg.xgrid(), cfg.tgrid(), cfg.u0, flux.values, zero, detail::no_source(), u);
    return u;
}

/// Linearized solve: response to a flux perturbation with zero initial data.
inline SpaceTimeField solve_perturbation(const HeatConfig& cfg, const TimeSignal& dflux)
{
    HeatConfig c = cfg;
    c.u0.clear();
    return solve_forward(c, dflux);
}

inline double objective(const HeatConfig& cfg, const SpaceTimeField& u)
{
    require(cfg.target.grid == u.tgrid, "objective: target missing or on a different grid");
    std::vector<double> e(u.nt() + 1);
    for (std::size_t n = 0; n <= u.nt(); ++n) {
        const double d = u.at(n, u.nx()) - cfg.target[n];
        e[n] = d * d;
    }
    return 0.5 * trapezoid(e, u.tgrid.spacing());
}

/// [E]_T = (1/2T) int int u^2 dx dt, accumulated in extended precision.
inline double energy_time_avg(const HeatConfig& cfg, const SpaceTimeField& u)
{
    const std::size_t nx = u.nx(), nt = u.nt();
    long double total = 0.0L;
    for (std::size_t n = 0; n <= nt; ++n) {
        const auto s = u.slice(n);
        long double row = 0.0L;
        for (std::size_t i = 0; i <= nx; ++i) {
            const long double w = (i == 0 || i == nx) ? 0.5L : 1.0L;
            row += w * (long double)s[i] * s[i];
        }
        total += ((n == 0 || n == nt) ? 0.5L : 1.0L) * row;
    }
    return static_cast<double>(total * u.xgrid.spacing() * u.tgrid.spacing() / (2.0L * cfg.T));
}

namespace detail {

// Backward adjoint via tau = T - t; result stored in physical time order.
template <class SourceFn>
SpaceTimeField march_backward(const HeatConfig& cfg, std::span<const double> right_rev, SourceFn&& source_rev)
{
    const std::vector<double> zero(cfg.nt + 1, 0.0);
    SpaceTimeField rev;
    crank_nicolson(cfg.xgrid(), cfg.tgrid(), {}, zero, right_rev, source_rev, rev);
    SpaceTimeField out(rev.xgrid, rev.tgrid);
    for (std::size_t n = 0; n <= cfg.nt; ++n) {
        const auto src = rev.slice(cfg.nt - n);
        std::copy(src.begin(), src.end(), out.slice(n).begin());
    }
    return out;
}

} // namespace detail

/// -du*/dt - u*_xx = 0, u*(T) = 0, du*/dx(a) = 0, du*/dx(b) = u(t,b) - target.
inline SpaceTimeField solve_adjoint_objective(const HeatConfig& cfg, const SpaceTimeField& u)
{
    require(cfg.target.grid == u.tgrid, "solve_adjoint_objective: target missing or on a different grid");
    std::vector<double> g(cfg.nt + 1);
    for (std::size_t m = 0; m <= cfg.nt; ++m) {
        const std::size_t n = cfg.nt - m;
        g[m] = u.at(n, u.nx()) - cfg.target[n];
    }
    return detail::march_backward(cfg, g, detail::no_source());
}

/// -dv*/dt - v*_xx = u, v*(T) = 0, homogeneous Neumann data.
inline SpaceTimeField solve_adjoint_constraint(const HeatConfig& cfg, const SpaceTimeField& u)
{
    const std::vector<double> zero(cfg.nt + 1, 0.0);
    auto src = [&](std::size_t m, std::span<double> s) {
        const auto row = u.slice(cfg.nt - m);
        std::copy(row.begin(), row.end(), s.begin());
    };
    return detail::march_backward(cfg, zero, src);
}

/// L2 gradient of the objective: -u*(t, a).
inline TimeSignal gradient_l2(const SpaceTimeField& ustar)
{
    TimeSignal g = ustar.trace(0);
    g *= -1.0;
    return g;
}

/// L2 normal element of the energy constraint: -(1/T) v*(t, a).
inline TimeSignal normal_element_l2(const SpaceTimeField& vstar, double T)
{
    require(T > 0.0, "normal_element_l2: need T > 0");
    TimeSignal g = vstar.trace(0);
    g *= -1.0 / T;
    return g;
}

/// Both sides of the duality identity for a flux perturbation dphi:
/// lhs = int (u(b) - target) u'(b) dt from the perturbation solve,
/// rhs = int -u*(a) dphi dt from the adjoint.
struct DualityPair {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual() const { return std::abs(lhs - rhs); }
};

inline DualityPair duality_pair(const HeatConfig& cfg, const SpaceTimeField& u, const SpaceTimeField& ustar,
                                const TimeSignal& dflux)
{
    const auto up = solve_perturbation(cfg, dflux);
    std::vector<double> f(cfg.nt + 1);
    for (std::size_t n = 0; n <= cfg.nt; ++n) f[n] = (u.at(n, u.nx()) - cfg.target[n]) * up.at(n, up.nx());
    DualityPair p;
    p.lhs = trapezoid(f, cfg.tgrid().spacing());
    p.rhs = l2_inner(gradient_l2(ustar), dflux);
    return p;
}

} // namespace adjopt::heat
