#pragma once

#include "adjopt/core/error.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstring>
#include <map>
#include <memory>
#include <numbers>
#include <vector>

namespace adjopt::ns {

using cplx = std::complex<double>;

/// FFT plans and wavenumber tables for an n x n periodic grid on [0, 2pi]^2.
///
/// Physical arrays are row-major with index [i1 * n + i2], x_j = 2 pi i_j / n.
/// Spectral arrays hold the r2c half spectrum: [m1 * (n/2 + 1) + m2], where
/// k1 = m1 (m1 < n/2) or m1 - n, and k2 = m2 in [0, n/2]. Coefficients are
/// normalized so that w(x) = sum_k w_k exp(i k.x).
class SpectralGrid {
public:
    explicit SpectralGrid(std::size_t n) : n_(n), nh_(n / 2 + 1)
    {
        require(n >= 8 && (n & (n - 1)) == 0, "SpectralGrid: n must be a power of two >= 8");
        real_ = fftw_alloc_real(n * n);
        spec_ = fftw_alloc_complex(n * nh_);
        fwd_ = fftw_plan_dft_r2c_2d(int(n), int(n), real_, spec_, FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_c2r_2d(int(n), int(n), spec_, real_, FFTW_ESTIMATE);
        k1_.resize(n);
        for (std::size_t m = 0; m < n; ++m) k1_[m] = m < n / 2 ? double(m) : double(m) - double(n);
        dealias_k_ = (n - 1) / 3;
    }
    ~SpectralGrid()
    {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(real_);
        fftw_free(spec_);
    }
    SpectralGrid(const SpectralGrid&) = delete;
    SpectralGrid& operator=(const SpectralGrid&) = delete;

    std::size_t n() const { return n_; }
    std::size_t nh() const { return nh_; }
    std::size_t spectral_size() const { return n_ * nh_; }
    std::size_t physical_size() const { return n_ * n_; }
    double k1(std::size_t m1) const { return k1_[m1]; }
    double k2(std::size_t m2) const { return double(m2); }
    /// Largest |k_i| kept by the 2/3 rule.
    std::size_t dealias_cutoff() const { return dealias_k_; }
    bool is_nyquist(std::size_t m1, std::size_t m2) const { return m1 == n_ / 2 || m2 == n_ / 2; }
    /// Multiplicity of a half-spectrum mode in the full spectrum.
    double mode_weight(std::size_t m2) const { return (m2 == 0 || m2 == n_ / 2) ? 1.0 : 2.0; }
    double cell_area() const
    {
        const double h = 2.0 * std::numbers::pi / double(n_);
        return h * h;
    }

    void to_physical(const std::vector<cplx>& in, std::vector<double>& out) const
    {
        std::memcpy(spec_, in.data(), sizeof(cplx) * spectral_size());
        fftw_execute(inv_);
        out.resize(physical_size());
        std::memcpy(out.data(), real_, sizeof(double) * physical_size());
    }

    void to_spectral(const std::vector<double>& in, std::vector<cplx>& out) const
    {
        std::memcpy(real_, in.data(), sizeof(double) * physical_size());
        fftw_execute(fwd_);
        out.resize(spectral_size());
        const double s = 1.0 / double(physical_size());
        auto* c = reinterpret_cast<const cplx*>(spec_);
        for (std::size_t i = 0; i < spectral_size(); ++i) out[i] = c[i] * s;
    }

    /// Shared grid per size; plans are created once.
    static const SpectralGrid& get(std::size_t n)
    {
        static std::map<std::size_t, std::unique_ptr<SpectralGrid>> cache;
        auto& slot = cache[n];
        if (!slot) slot = std::make_unique<SpectralGrid>(n);
        return *slot;
    }

private:
    std::size_t n_, nh_;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan fwd_ = nullptr, inv_ = nullptr;
    std::vector<double> k1_;
    std::size_t dealias_k_ = 0;
};

/// Fourier coefficients of a real field on [0, 2pi]^2.
struct SpectralField {
    std::size_t n = 0;
    std::vector<cplx> c;

    SpectralField() = default;
    explicit SpectralField(std::size_t n_) : n(n_), c(n_ * (n_ / 2 + 1), cplx(0.0)) {}

    const SpectralGrid& grid() const { return SpectralGrid::get(n); }
    std::size_t nh() const { return n / 2 + 1; }
    cplx& at(std::size_t m1, std::size_t m2) { return c[m1 * nh() + m2]; }
    cplx at(std::size_t m1, std::size_t m2) const { return c[m1 * nh() + m2]; }

    SpectralField& operator+=(const SpectralField& o)
    {
        check(o);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o)
    {
        check(o);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
        return *this;
    }
    SpectralField& operator*=(double s)
    {
        for (auto& v : c) v *= s;
        return *this;
    }
    void axpy(double a, const SpectralField& o)
    {
        check(o);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += a * o.c[i];
    }
    void check(const SpectralField& o) const
    {
        require(n == o.n, "SpectralField: size mismatch");
    }

    std::vector<double> physical() const
    {
        std::vector<double> out;
        grid().to_physical(c, out);
        return out;
    }
    static SpectralField from_physical(std::size_t n, const std::vector<double>& v)
    {
        require(v.size() == n * n, "SpectralField::from_physical: need n*n samples");
        SpectralField f(n);
        f.grid().to_spectral(v, f.c);
        return f;
    }
};

inline SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
inline SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
inline SpectralField operator*(double s, SpectralField a) { return a *= s; }

/// Visit every half-spectrum mode as f(index, k1, k2, m1, m2).
template <class F>
void for_each_mode(const SpectralGrid& g, F&& f)
{
    const std::size_t n = g.n(), nh = g.nh();
    for (std::size_t m1 = 0; m1 < n; ++m1)
        for (std::size_t m2 = 0; m2 < nh; ++m2) f(m1 * nh + m2, g.k1(m1), g.k2(m2), m1, m2);
}

/// Zero every mode with max(|k1|, |k2|) > kmax, and the Nyquist lines.
inline void truncate_box(SpectralField& w, double kmax)
{
    const auto& g = w.grid();
    for_each_mode(g, [&](std::size_t i, double k1, double k2, std::size_t m1, std::size_t m2) {
        if (std::abs(k1) > kmax || k2 > kmax || g.is_nyquist(m1, m2)) w.c[i] = 0.0;
    });
}

inline void dealias(SpectralField& w) { truncate_box(w, double(w.grid().dealias_cutoff())); }

/// Sharp cutoff at max(|k1|, |k2|) <= kc.
inline SpectralField box_filter(SpectralField w, double kc)
{
    require(kc >= 1.0, "box_filter: need kc >= 1");
    truncate_box(w, kc);
    return w;
}

/// d/dx_dir for dir = 0 (x1) or 1 (x2); Nyquist lines are zeroed.
inline SpectralField derivative(const SpectralField& w, int dir)
{
    SpectralField d(w.n);
    const auto& g = w.grid();
    for_each_mode(g, [&](std::size_t i, double k1, double k2, std::size_t m1, std::size_t m2) {
        if (g.is_nyquist(m1, m2)) return;
        d.c[i] = cplx(0.0, dir == 0 ? k1 : k2) * w.c[i];
    });
    return d;
}

inline SpectralField laplacian(const SpectralField& w)
{
    SpectralField d(w.n);
    for_each_mode(w.grid(), [&](std::size_t i, double k1, double k2, std::size_t, std::size_t) {
        d.c[i] = -(k1 * k1 + k2 * k2) * w.c[i];
    });
    return d;
}

/// (-Delta)^{-1} on zero-mean fields.
inline SpectralField inverse_neg_laplacian(const SpectralField& w)
{
    SpectralField d(w.n);
    for_each_mode(w.grid(), [&](std::size_t i, double k1, double k2, std::size_t, std::size_t) {
        const double kk = k1 * k1 + k2 * k2;
        if (kk > 0.0) d.c[i] = w.c[i] / kk;
    });
    return d;
}

/// Solve Delta psi = -w.
inline SpectralField poisson_streamfunction(const SpectralField& w)
{
    require(!w.c.empty(), "poisson_streamfunction: empty field");
    if (std::abs(w.c[0]) > 1e-12) throw InvalidInput("poisson_streamfunction: vorticity has nonzero mean");
    return inverse_neg_laplacian(w);
}

/// Sum over all modes of a_k conj(b_k); equals (2pi)^-2 int a b dx for real fields.
inline double mode_inner(const SpectralField& a, const SpectralField& b)
{
    a.check(b);
    const auto& g = a.grid();
    double s = 0.0;
    for (std::size_t m1 = 0; m1 < g.n(); ++m1)
        for (std::size_t m2 = 0; m2 < g.nh(); ++m2) {
            const std::size_t i = m1 * g.nh() + m2;
            s += g.mode_weight(m2) * (a.c[i].real() * b.c[i].real() + a.c[i].imag() * b.c[i].imag());
        }
    return s;
}

/// int_Omega a b dx.
inline double l2_inner(const SpectralField& a, const SpectralField& b)
{
    return 4.0 * std::numbers::pi * std::numbers::pi * mode_inner(a, b);
}

/// E = 1/2 int w^2 dx.
inline double enstrophy(const SpectralField& w) { return 0.5 * l2_inner(w, w); }

/// P = 1/2 int |grad w|^2 dx.
inline double palinstrophy(const SpectralField& w)
{
    const auto& g = w.grid();
    double s = 0.0;
    for_each_mode(g, [&](std::size_t i, double k1, double k2, std::size_t, std::size_t m2) {
        s += g.mode_weight(m2) * (k1 * k1 + k2 * k2) * std::norm(w.c[i]);
    });
    return 2.0 * std::numbers::pi * std::numbers::pi * s;
}

/// Copy the modes representable on both grids (|k_i| < min(n, m)/2).
inline SpectralField resample(const SpectralField& w, std::size_t m)
{
    SpectralField out(m);
    const auto& gi = w.grid();
    const auto& go = out.grid();
    const double kmax = double(std::min(w.n, m) / 2) - 1.0;
    for_each_mode(go, [&](std::size_t i, double k1, double k2, std::size_t, std::size_t) {
        if (std::abs(k1) > kmax || k2 > kmax) return;
        const std::size_t m1 = k1 >= 0 ? std::size_t(k1) : std::size_t(double(gi.n()) + k1);
        out.c[i] = w.at(m1, std::size_t(k2));
    });
    return out;
}

/// Pointwise product of two physical fields, returned dealiased in spectral space.
inline SpectralField product(const std::vector<double>& a, const std::vector<double>& b, std::size_t n)
{
    std::vector<double> p(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) p[i] = a[i] * b[i];
    auto f = SpectralField::from_physical(n, p);
    dealias(f);
    return f;
}

} // namespace adjopt::ns
