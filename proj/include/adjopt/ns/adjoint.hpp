#pragma once

#include "adjopt/core/error.hpp"
#include "adjopt/core/grid.hpp"
#include "adjopt/core/sobolev.hpp"
#include "adjopt/ns/closure.hpp"
#include "adjopt/ns/ns2d.hpp"
#include "adjopt/ns/spectral.hpp"

#include <vector>

namespace adjopt::ns {

/// Coefficients of the LES linearization at one frozen state w.
struct FrozenCoefficients {
    std::vector<double> u1, u2, wx, wy;
    std::vector<double> nu_ex;  // nu(s) minus the implicitly treated part
    std::vector<double> beta;   // 2 dnu/ds
};

inline FrozenCoefficients frozen_coefficients(const SpectralField& w, const EddyViscosity& ev, double nu_imp)
{
    auto v = velocity_and_gradient(w);
    FrozenCoefficients f;
    f.nu_ex.resize(v.wx.size());
    f.beta.resize(v.wx.size());
    for (std::size_t i = 0; i < v.wx.size(); ++i) {
        const double s = v.wx[i] * v.wx[i] + v.wy[i] * v.wy[i];
        double dnu = 0.0;
        f.nu_ex[i] = ev(s, &dnu) - nu_imp;
        f.beta[i] = 2.0 * dnu;
    }
    f.u1 = std::move(v.u1);
    f.u2 = std::move(v.u2);
    f.wx = std::move(v.wx);
    f.wy = std::move(v.wy);
    return f;
}

/// Explicit part of the linearized LES operator applied to w'.
inline SpectralField tangent_tendency(double alpha, double kc, const FrozenCoefficients& fc, const SpectralField& wp)
{
    const std::size_t n = wp.n;
    const auto vp = velocity_and_gradient(wp);
    const std::size_t m = vp.wx.size();
    std::vector<double> adv(m), q1(m), q2(m);
    for (std::size_t i = 0; i < m; ++i) {
        adv[i] = fc.u1[i] * vp.wx[i] + fc.u2[i] * vp.wy[i] + vp.u1[i] * fc.wx[i] + vp.u2[i] * fc.wy[i];
        const double gg = fc.wx[i] * vp.wx[i] + fc.wy[i] * vp.wy[i];
        q1[i] = fc.nu_ex[i] * vp.wx[i] + fc.beta[i] * gg * fc.wx[i];
        q2[i] = fc.nu_ex[i] * vp.wy[i] + fc.beta[i] * gg * fc.wy[i];
    }
    auto out = SpectralField::from_physical(n, adv);
    dealias(out);
    out *= -1.0;
    out += divergence(q1, q2, n);
    truncate_box(out, kc);
    out.axpy(-alpha, wp);
    return out;
}

/// L2 transpose of `tangent_tendency` on filtered fields.
inline SpectralField adjoint_tendency(double alpha, double kc, const FrozenCoefficients& fc, const SpectralField& a)
{
    const std::size_t n = a.n;
    const auto& g = a.grid();
    std::vector<double> ap, ax, ay;
    g.to_physical(a.c, ap);
    g.to_physical(derivative(a, 0).c, ax);
    g.to_physical(derivative(a, 1).c, ay);
    const std::size_t m = ap.size();
    std::vector<double> q1(m), q2(m), r1(m), r2(m);
    for (std::size_t i = 0; i < m; ++i) {
        // transport: div(u a); closure: div(nu_ex grad a + beta (grad w . grad a) grad w)
        const double gg = fc.wx[i] * ax[i] + fc.wy[i] * ay[i];
        q1[i] = fc.u1[i] * ap[i] + fc.nu_ex[i] * ax[i] + fc.beta[i] * gg * fc.wx[i];
        q2[i] = fc.u2[i] * ap[i] + fc.nu_ex[i] * ay[i] + fc.beta[i] * gg * fc.wy[i];
        r1[i] = ap[i] * fc.wx[i];
        r2[i] = ap[i] * fc.wy[i];
    }
    auto out = divergence(q1, q2, n);
    // streamfunction coupling: (-Delta)^{-1} [d2(a w_x) - d1(a w_y)]
    auto h = derivative(SpectralField::from_physical(n, r1), 1);
    h -= derivative(SpectralField::from_physical(n, r2), 0);
    out += inverse_neg_laplacian(h);
    truncate_box(out, kc);
    out.axpy(-alpha, a);
    return out;
}

namespace detail {

/// Forward state at t_n + theta dt from stored snapshots.
inline SpectralField interpolate_state(const FlowHistory& h, std::size_t n, double theta)
{
    if (theta <= 0.0) return h.w[n];
    if (theta >= 1.0) return h.w[n + 1];
    SpectralField w = h.w[n];
    w *= 1.0 - theta;
    w.axpy(theta, h.w[n + 1]);
    return w;
}

inline void check_history(const FlowHistory& h)
{
    if (h.w.size() != h.t.size() || h.w.size() < 2) throw InvalidState("LES history is missing stored snapshots");
}

} // namespace detail

using AdjointHistory = std::vector<SpectralField>;

enum class AdjointSourceKind { Objective, Constraint };

/// Nodal values of the adjoint source W:
/// Objective: (P(t) - P~(t)) Delta w~ / D; Constraint: w~ / T.
inline std::vector<SpectralField> adjoint_source(AdjointSourceKind kind, const FlowHistory& h,
                                                 const std::vector<double>& target_palinstrophy, double D, double T)
{
    detail::check_history(h);
    std::vector<SpectralField> W;
    W.reserve(h.w.size());
    for (std::size_t n = 0; n < h.w.size(); ++n) {
        if (kind == AdjointSourceKind::Objective) {
            require(target_palinstrophy.size() == h.w.size() && D > 0.0, "adjoint_source: need target series and D > 0");
            auto l = laplacian(h.w[n]);
            l *= (target_palinstrophy[n] - h.palinstrophy[n]) / D;
            W.push_back(std::move(l));
        } else {
            require(T > 0.0, "adjoint_source: need T > 0");
            W.push_back((1.0 / T) * h.w[n]);
        }
    }
    return W;
}

/// Backward march of -dw*/dt = (nu_N + nu_imp) Delta w* + A(t)^T w* + W(t),
/// w*(T) = 0, with the IMEX scheme in reversed time. Forward coefficients and
/// the source are interpolated linearly between stored time levels.
inline AdjointHistory solve_les_adjoint(const NsConfig& cfg, const FlowHistory& fwd, const EddyViscosity& ev,
                                        const std::vector<SpectralField>& W)
{
    detail::check_history(fwd);
    require(W.size() == fwd.w.size(), "solve_les_adjoint: source must cover every time level");
    const std::size_t nt = fwd.nt();
    const double dt = fwd.dt;
    const double nu_imp = ev.implicit_part();
    AdjointHistory adj(nt + 1, SpectralField(fwd.w[0].n));
    SpectralField a(fwd.w[0].n);
    for (std::size_t k = nt; k-- > 0;) {
        // step from t_{k+1} down to t_k; tau - tau_start = delta
        const double tau0 = double(nt - k - 1) * dt;
        ImexArs233::step(a, tau0, dt, cfg.nu_N + nu_imp, [&](double tau, const SpectralField& u, SpectralField& out) {
            const double theta = 1.0 - (tau - tau0) / dt;  // position between t_k and t_{k+1}
            const auto fc = frozen_coefficients(detail::interpolate_state(fwd, k, theta), ev, nu_imp);
            out = adjoint_tendency(cfg.alpha, cfg.k_c, fc, u);
            out.axpy(1.0 - theta, W[k]);
            out.axpy(theta, W[k + 1]);
        });
        truncate_box(a, cfg.k_c);
        adj[k] = a;
    }
    return adj;
}

/// Closure forcing of the perturbation equation: filter[div((eta^3 sqrt(s) + nu0) phi'(sigma) grad w)].
inline SpectralField closure_perturbation_source(const SpectralField& w, const EddyViscosity& ev, const GridFunction& dphi,
                                                 double kc)
{
    std::vector<double> wx, wy;
    w.grid().to_physical(derivative(w, 0).c, wx);
    w.grid().to_physical(derivative(w, 1).c, wy);
    std::vector<double> q1(wx.size()), q2(wx.size());
    for (std::size_t i = 0; i < wx.size(); ++i) {
        const double s = wx[i] * wx[i] + wy[i] * wy[i];
        const double dnu = ev.prefactor(s) * interpolate(dphi, s / ev.s_max);
        q1[i] = dnu * wx[i];
        q2[i] = dnu * wy[i];
    }
    auto d = divergence(q1, q2, w.n);
    truncate_box(d, kc);
    return d;
}

/// Forward march of the perturbation system with w'(0) = 0.
inline std::vector<SpectralField> solve_les_tangent(const NsConfig& cfg, const FlowHistory& fwd, const EddyViscosity& ev,
                                                    const GridFunction& dphi)
{
    detail::check_history(fwd);
    const std::size_t nt = fwd.nt();
    const double dt = fwd.dt;
    const double nu_imp = ev.implicit_part();
    std::vector<SpectralField> out(nt + 1, SpectralField(fwd.w[0].n));
    SpectralField wp(fwd.w[0].n);
    for (std::size_t k = 0; k < nt; ++k) {
        const double t0 = double(k) * dt;
        ImexArs233::step(wp, t0, dt, cfg.nu_N + nu_imp, [&](double t, const SpectralField& u, SpectralField& r) {
            const double theta = (t - t0) / dt;
            const auto w = detail::interpolate_state(fwd, k, theta);
            r = tangent_tendency(cfg.alpha, cfg.k_c, frozen_coefficients(w, ev, nu_imp), u);
            r += closure_perturbation_source(w, ev, dphi, cfg.k_c);
        });
        truncate_box(wp, cfg.k_c);
        out[k + 1] = wp;
    }
    return out;
}

/// Space-time weights q = -(eta^3 sqrt(s) + nu0) grad w~ . grad w* dx dt
/// deposited onto the sigma grid (transpose of the closure interpolation),
/// returned as an L2 density on [0, 1]. `total` receives sum q.
inline GridFunction extract_state_gradient(const FlowHistory& fwd, const AdjointHistory& adj, const EddyViscosity& ev,
                                           const UniformGrid1D& sigma_grid, double* total = nullptr)
{
    detail::check_history(fwd);
    require(adj.size() == fwd.w.size(), "extract_state_gradient: histories differ in length");
    require(ev.kind == EddyViscosity::Kind::Ansatz, "extract_state_gradient: needs the state-function ansatz");
    const std::size_t nt = fwd.nt();
    const auto& g = fwd.w[0].grid();
    std::vector<double> acc(sigma_grid.size(), 0.0);
    long double sum = 0.0L;
    std::vector<double> wx, wy, ax, ay;
    for (std::size_t n = 0; n <= nt; ++n) {
        const double wt = trapezoid_weight(n, nt, fwd.dt) * g.cell_area();
        g.to_physical(derivative(fwd.w[n], 0).c, wx);
        g.to_physical(derivative(fwd.w[n], 1).c, wy);
        g.to_physical(derivative(adj[n], 0).c, ax);
        g.to_physical(derivative(adj[n], 1).c, ay);
        for (std::size_t i = 0; i < wx.size(); ++i) {
            const double s = wx[i] * wx[i] + wy[i] * wy[i];
            const double q = -ev.prefactor(s) * (wx[i] * ax[i] + wy[i] * ay[i]) * wt;
            deposit(acc, sigma_grid.n, s / ev.s_max, q);
            sum += q;
        }
    }
    if (total) *total = double(sum);
    return deposits_to_density(sigma_grid, std::move(acc));
}

/// H2 Riesz representer with vanishing first and third sigma-derivatives at 0 and 1.
inline GridFunction sobolev_gradient_h2(const GridFunction& g_l2, const SobolevMetric& metric)
{
    require(metric.order == 2, "sobolev_gradient_h2: metric must be H2");
    return solve_gradient_bvp(g_l2, metric, BvpBoundaryKind::NaturalOddDeriv);
}

/// int_0^T <W, w'> dt from nodal values (trapezoid in time).
inline double space_time_pairing(const std::vector<SpectralField>& W, const std::vector<SpectralField>& wp, double dt)
{
    require(W.size() == wp.size() && W.size() >= 2, "space_time_pairing: histories differ in length");
    std::vector<double> f(W.size());
    for (std::size_t n = 0; n < W.size(); ++n) f[n] = l2_inner(W[n], wp[n]);
    return trapezoid(f, dt);
}

} // namespace adjopt::ns
