#pragma once

#include "adjopt/core/error.hpp"
#include "adjopt/core/grid.hpp"
#include "adjopt/core/log.hpp"
#include "adjopt/core/sobolev.hpp"
#include "adjopt/ns/closure.hpp"
#include "adjopt/ns/spectral.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace adjopt::ns {

struct NsConfig {
    double nu_N = 4e-4;
    double alpha = 5e-3;
    double F = 2.0;
    int k_a = 4;
    int k_b = 4;
    std::uint64_t forcing_seed = 1;
    std::size_t n_dns = 128;
    std::size_t n_les = 32;
    double k_c = 4.0;
    double dt = 1e-3;
    double T = 2.0;
    // closure ansatz
    double nu0 = 10.0;
    double s_max = 0.0;  // 0: derived from the Leith trajectory
    std::size_t n_sigma = 129;
    double C_L = 4.702e-3;
    // objective / constraint normalization; 0 means derive from the DNS
    double D = 0.0;
    double E0 = 0.0;
    SobolevMetric metric = SobolevMetric::h2(1000.0, 100.0);
    // initial condition
    std::uint64_t init_seed = 2;
    double init_enstrophy = 20.0;
    double spinup_time = 20.0;
    double spinup_dt = 5e-3;

    double eta() const { return 2.0 * std::numbers::pi / k_c; }
    std::size_t nt() const { return std::size_t(std::llround(T / dt)); }
    UniformGrid1D tgrid() const { return {0.0, T, nt()}; }
    UniformGrid1D sigma_grid() const { return {0.0, 1.0, n_sigma - 1}; }

    void validate() const
    {
        require(nu_N > 0.0 && alpha > 0.0 && F > 0.0, "ns: need nu_N, alpha, F > 0");
        require(k_a >= 1 && k_a <= k_b && 3 * k_b < int(n_dns), "ns: need 1 <= k_a <= k_b < n_dns / 3");
        require(k_c >= 1.0 && 3.0 * k_c <= double(n_les), "ns: need 1 <= k_c <= n_les / 3");
        require(double(k_b) <= k_c, "ns: forcing band must be resolved by the LES filter");
        require(dt > 0.0 && T > 0.0, "ns: need dt, T > 0");
        require(std::abs(double(nt()) * dt - T) <= 1e-9 * T, "ns: T must be a multiple of dt");
        require(nt() >= 2, "ns: need at least two time steps");
        require(s_max >= 0.0 && nu0 >= 0.0 && D >= 0.0 && E0 >= 0.0, "ns: s_max, nu0, D, E0 must be >= 0");
        require(n_sigma >= 5, "ns: need n_sigma >= 5");
        require(C_L > 0.0, "ns: need C_L > 0");
        require(spinup_time >= 0.0 && spinup_dt > 0.0 && init_enstrophy > 0.0, "ns: bad spin-up settings");
        metric.validate();
    }
};

/// Time-independent forcing: F exp(i theta_k) / sqrt(N_band) on
/// k_a <= max(|k1|, |k2|) <= k_b with seeded phases. The phases depend only
/// on k, so the same forcing is obtained on every grid that resolves the band.
inline SpectralField make_forcing(std::size_t n, double F, int ka, int kb, std::uint64_t seed)
{
    SpectralField f(n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 2.0 * std::numbers::pi);
    std::vector<std::pair<int, int>> modes;
    for (int k1 = -kb; k1 <= kb; ++k1)
        for (int k2 = 0; k2 <= kb; ++k2) {
            if (k2 == 0 && k1 <= 0) continue;
            const int m = std::max(std::abs(k1), k2);
            if (m >= ka && m <= kb) modes.emplace_back(k1, k2);
        }
    const double amp = F / std::sqrt(2.0 * double(modes.size()));
    auto idx = [&](int k1) { return std::size_t(k1 >= 0 ? k1 : int(n) + k1); };
    for (auto [k1, k2] : modes) {
        const cplx v = std::polar(amp, U(rng));
        f.at(idx(k1), std::size_t(k2)) = v;
        if (k2 == 0) f.at(idx(-k1), 0) = std::conj(v);
    }
    return f;
}

/// Seeded random field on 1 <= |k| <= kmax with enstrophy `enstrophy_target`.
inline SpectralField random_field(std::size_t n, double kmax, double enstrophy_target, std::uint64_t seed)
{
    SpectralField w(n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N01(0.0, 1.0);
    for_each_mode(w.grid(), [&](std::size_t i, double k1, double k2, std::size_t, std::size_t) {
        const double k = std::hypot(k1, k2);
        if (k < 1.0 || k > kmax) return;
        const double a = N01(rng), b = N01(rng);
        if (k2 == 0.0 && k1 < 0.0) return;
        w.c[i] = cplx(a, b) / k;
    });
    // restore Hermitian symmetry on the k2 = 0 line
    for (std::size_t m1 = 1; m1 < n / 2; ++m1) w.at(n - m1, 0) = std::conj(w.at(m1, 0));
    dealias(w);
    w *= std::sqrt(enstrophy_target / enstrophy(w));
    return w;
}

struct VelocityGradient {
    std::vector<double> u1, u2, wx, wy;
};

/// u = grad-perp psi = (d2 psi, -d1 psi) and grad w in physical space.
inline VelocityGradient velocity_and_gradient(const SpectralField& w)
{
    const auto psi = inverse_neg_laplacian(w);
    const auto& g = w.grid();
    VelocityGradient v;
    g.to_physical(derivative(psi, 1).c, v.u1);
    auto u2 = derivative(psi, 0);
    u2 *= -1.0;
    g.to_physical(u2.c, v.u2);
    g.to_physical(derivative(w, 0).c, v.wx);
    g.to_physical(derivative(w, 1).c, v.wy);
    return v;
}

inline double max_speed(const VelocityGradient& v)
{
    double m = 0.0;
    for (std::size_t i = 0; i < v.u1.size(); ++i) m = std::max(m, std::hypot(v.u1[i], v.u2[i]));
    return m;
}

/// Dealiased u . grad w.
inline SpectralField advection(const VelocityGradient& v, std::size_t n)
{
    std::vector<double> p(v.u1.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = v.u1[i] * v.wx[i] + v.u2[i] * v.wy[i];
    auto f = SpectralField::from_physical(n, p);
    dealias(f);
    return f;
}

/// div(q1, q2) of a physical flux.
inline SpectralField divergence(const std::vector<double>& q1, const std::vector<double>& q2, std::size_t n)
{
    auto d = derivative(SpectralField::from_physical(n, q1), 0);
    d += derivative(SpectralField::from_physical(n, q2), 1);
    return d;
}

/// Implicit-explicit Runge-Kutta ARS(2,3,3) for dw/dt = -nu_imp |k|^2 w + E(t, w).
/// E(t, w, out) must write the explicit tendency into `out`.
class ImexArs233 {
public:
    static constexpr double gamma = (3.0 + 1.7320508075688772) / 6.0;

    template <class Explicit>
    static void step(SpectralField& w, double t, double dt, double nu_imp, Explicit&& E)
    {
        const std::size_t n = w.n;
        const auto& g = w.grid();
        std::vector<double> kk(g.spectral_size());
        for_each_mode(g, [&](std::size_t i, double k1, double k2, std::size_t, std::size_t) { kk[i] = k1 * k1 + k2 * k2; });
        SpectralField K1(n), K2(n), K3(n), U(n), I2(n), I3(n);
        E(t, w, K1);
        for (std::size_t i = 0; i < kk.size(); ++i) {
            U.c[i] = (w.c[i] + dt * gamma * K1.c[i]) / (1.0 + dt * gamma * nu_imp * kk[i]);
            I2.c[i] = -nu_imp * kk[i] * U.c[i];
        }
        E(t + gamma * dt, U, K2);
        for (std::size_t i = 0; i < kk.size(); ++i) {
            const cplx r = w.c[i] + dt * ((gamma - 1.0) * K1.c[i] + 2.0 * (1.0 - gamma) * K2.c[i]) +
                           dt * (1.0 - 2.0 * gamma) * I2.c[i];
            U.c[i] = r / (1.0 + dt * gamma * nu_imp * kk[i]);
            I3.c[i] = -nu_imp * kk[i] * U.c[i];
        }
        E(t + (1.0 - gamma) * dt, U, K3);
        for (std::size_t i = 0; i < kk.size(); ++i)
            w.c[i] += 0.5 * dt * (K2.c[i] + K3.c[i] + I2.c[i] + I3.c[i]);
    }
};

/// Physical parameters of one vorticity solve.
struct FlowParams {
    double nu_N = 0.0;
    double alpha = 0.0;
    SpectralField forcing;  // empty means none
    double cfl_warn = 1.0;
};

inline FlowParams dns_params(const NsConfig& cfg, std::size_t n)
{
    return {cfg.nu_N, cfg.alpha, make_forcing(n, cfg.F, cfg.k_a, cfg.k_b, cfg.forcing_seed), 1.0};
}

namespace detail {

inline void warn_cfl(double speed, double dt, std::size_t n, double limit, bool& warned)
{
    const double cfl = speed * dt * double(n) / (2.0 * std::numbers::pi);
    if (cfl > limit && !warned) {
        warn("CFL number " + std::to_string(cfl) + " exceeds " + std::to_string(limit));
        warned = true;
    }
}

inline void check_finite(const SpectralField& w, const char* who)
{
    for (const auto& v : w.c)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw SolverFailure(std::string(who) + ": non-finite vorticity");
}

} // namespace detail

/// One DNS step: dw/dt + u . grad w = nu_N Delta w - alpha w + f.
inline void step_dns(const FlowParams& p, SpectralField& w, double t, double dt, bool* cfl_warned = nullptr)
{
    bool dummy = false;
    bool& warned = cfl_warned ? *cfl_warned : dummy;
    ImexArs233::step(w, t, dt, p.nu_N, [&](double, const SpectralField& u, SpectralField& out) {
        const auto v = velocity_and_gradient(u);
        detail::warn_cfl(max_speed(v), dt, u.n, p.cfl_warn, warned);
        out = advection(v, u.n);
        out *= -1.0;
        out.axpy(-p.alpha, u);
        if (!p.forcing.c.empty()) out += p.forcing;
    });
}

/// LES explicit tendency: filter[-u . grad w + div((nu(s) - nu_imp) grad w)] - alpha w + f.
inline void les_tendency(const FlowParams& p, const EddyViscosity& ev, double kc, double nu_imp, const SpectralField& u,
                         SpectralField& out, double* max_s = nullptr, double* speed = nullptr)
{
    const auto v = velocity_and_gradient(u);
    out = advection(v, u.n);
    out *= -1.0;
    std::vector<double> q1(v.wx.size()), q2(v.wx.size());
    double smax = 0.0;
    bool negative = false;
    for (std::size_t i = 0; i < q1.size(); ++i) {
        const double s = v.wx[i] * v.wx[i] + v.wy[i] * v.wy[i];
        smax = std::max(smax, s);
        const double nu = ev(s);
        if (p.nu_N + nu < 0.0) negative = true;
        q1[i] = (nu - nu_imp) * v.wx[i];
        q2[i] = (nu - nu_imp) * v.wy[i];
    }
    static bool negative_reported = false;
    if (negative && !negative_reported) {
        warn("total viscosity nu_N + nu(s) is negative somewhere");
        negative_reported = true;
    }
    out += divergence(q1, q2, u.n);
    truncate_box(out, kc);
    out.axpy(-p.alpha, u);
    if (!p.forcing.c.empty()) out += p.forcing;
    if (max_s) *max_s = smax;
    if (speed) *speed = max_speed(v);
}

/// One LES step; the filter is applied to the advection and closure terms.
inline void step_les(const FlowParams& p, const EddyViscosity& ev, double kc, SpectralField& w, double t, double dt,
                     bool* cfl_warned = nullptr)
{
    bool dummy = false;
    bool& warned = cfl_warned ? *cfl_warned : dummy;
    const double nu_imp = ev.implicit_part();
    ImexArs233::step(w, t, dt, p.nu_N + nu_imp, [&](double, const SpectralField& u, SpectralField& out) {
        double speed = 0.0;
        les_tendency(p, ev, kc, nu_imp, u, out, nullptr, &speed);
        detail::warn_cfl(speed, dt, u.n, p.cfl_warn, warned);
    });
}

/// Max over the grid of s = |grad w|^2.
inline double max_gradient_sq(const SpectralField& w)
{
    std::vector<double> wx, wy;
    w.grid().to_physical(derivative(w, 0).c, wx);
    w.grid().to_physical(derivative(w, 1).c, wy);
    double m = 0.0;
    for (std::size_t i = 0; i < wx.size(); ++i) m = std::max(m, wx[i] * wx[i] + wy[i] * wy[i]);
    return m;
}

/// Stored LES trajectory: vorticity at every time level and its diagnostics.
struct FlowHistory {
    double dt = 0.0;
    std::vector<SpectralField> w;
    std::vector<double> t, enstrophy, palinstrophy;
    double max_s = 0.0;

    std::size_t nt() const { return t.empty() ? 0 : t.size() - 1; }
};

using SnapshotFn = std::function<void(std::size_t step, double t, const SpectralField& w)>;

inline FlowHistory solve_les(const NsConfig& cfg, const SpectralField& w0, const EddyViscosity& ev,
                             bool keep_fields = true, const SnapshotFn& snap = {})
{
    require(w0.n == cfg.n_les, "solve_les: initial field must live on the LES grid");
    const auto p = dns_params(cfg, cfg.n_les);
    FlowHistory h;
    h.dt = cfg.dt;
    SpectralField w = box_filter(w0, cfg.k_c);
    bool warned = false;
    const std::size_t nt = cfg.nt();
    auto record = [&](std::size_t n) {
        const double t = double(n) * cfg.dt;
        h.t.push_back(t);
        h.enstrophy.push_back(enstrophy(w));
        h.palinstrophy.push_back(palinstrophy(w));
        h.max_s = std::max(h.max_s, max_gradient_sq(w));
        if (keep_fields) h.w.push_back(w);
        if (snap) snap(n, t, w);
    };
    record(0);
    for (std::size_t n = 0; n < nt; ++n) {
        step_les(p, ev, cfg.k_c, w, double(n) * cfg.dt, cfg.dt, &warned);
        detail::check_finite(w, "solve_les");
        record(n + 1);
    }
    return h;
}

/// DNS run over [0, T] recording raw and box-filtered diagnostics.
struct DnsRun {
    SpectralField initial;
    SpectralField final;
    std::vector<double> t, enstrophy, palinstrophy, enstrophy_filtered, palinstrophy_filtered;
};

inline DnsRun solve_dns(const NsConfig& cfg, const SpectralField& w0, const SnapshotFn& snap = {})
{
    require(w0.n == cfg.n_dns, "solve_dns: initial field must live on the DNS grid");
    const auto p = dns_params(cfg, cfg.n_dns);
    DnsRun r;
    r.initial = w0;
    SpectralField w = w0;
    bool warned = false;
    auto record = [&](std::size_t n) {
        const double t = double(n) * cfg.dt;
        const auto wf = box_filter(w, cfg.k_c);
        r.t.push_back(t);
        r.enstrophy.push_back(enstrophy(w));
        r.palinstrophy.push_back(palinstrophy(w));
        r.enstrophy_filtered.push_back(enstrophy(wf));
        r.palinstrophy_filtered.push_back(palinstrophy(wf));
        if (snap) snap(n, t, w);
    };
    record(0);
    for (std::size_t n = 0; n < cfg.nt(); ++n) {
        step_dns(p, w, double(n) * cfg.dt, cfg.dt, &warned);
        detail::check_finite(w, "solve_dns");
        record(n + 1);
    }
    r.final = w;
    return r;
}

/// Random initial field advanced to statistical equilibrium on the DNS grid.
inline SpectralField spun_up_initial(const NsConfig& cfg)
{
    auto w = random_field(cfg.n_dns, 2.0 * cfg.k_b, cfg.init_enstrophy, cfg.init_seed);
    const auto p = dns_params(cfg, cfg.n_dns);
    const auto steps = std::size_t(std::llround(cfg.spinup_time / cfg.spinup_dt));
    bool warned = false;
    for (std::size_t n = 0; n < steps; ++n) step_dns(p, w, double(n) * cfg.spinup_dt, cfg.spinup_dt, &warned);
    detail::check_finite(w, "spin-up");
    return w;
}

/// Eddy turnover time t_e = [int E dt / (8 pi^2 T)]^{-1/2}.
inline double eddy_turnover_time(const std::vector<double>& enstrophy_series, double dt)
{
    const double T = dt * double(enstrophy_series.size() - 1);
    return 1.0 / std::sqrt(trapezoid(enstrophy_series, dt) / (8.0 * std::numbers::pi * std::numbers::pi * T));
}

/// Binary snapshot: u32 n, f64 t, then n*n physical values, little-endian, row-major.
inline void write_snapshot(std::ostream& os, const SpectralField& w, double t)
{
    static_assert(std::endian::native == std::endian::little, "snapshot writer assumes a little-endian host");
    const std::uint32_t n = std::uint32_t(w.n);
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
    os.write(reinterpret_cast<const char*>(&t), sizeof t);
    const auto v = w.physical();
    os.write(reinterpret_cast<const char*>(v.data()), std::streamsize(sizeof(double) * v.size()));
}

inline bool read_snapshot(std::istream& is, std::vector<double>& values, std::uint32_t& n, double& t)
{
    if (!is.read(reinterpret_cast<char*>(&n), sizeof n)) return false;
    is.read(reinterpret_cast<char*>(&t), sizeof t);
    values.resize(std::size_t(n) * n);
    is.read(reinterpret_cast<char*>(values.data()), std::streamsize(sizeof(double) * values.size()));
    return bool(is);
}

inline void write_diagnostics_csv(const std::string& path, const std::vector<double>& t, const std::vector<double>& E,
                                  const std::vector<double>& P)
{
    std::ofstream f(path);
    if (!f) throw InvalidInput("cannot open '" + path + "' for writing");
    f << "t,enstrophy,palinstrophy\n";
    char buf[96];
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t[i], E[i], P[i]);
        f << buf;
    }
}

} // namespace adjopt::ns
