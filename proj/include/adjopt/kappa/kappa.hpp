#pragma once

#include "adjopt/core/error.hpp"
#include "adjopt/core/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace adjopt::kappa {

struct KappaRow {
    double epsilon = 0.0;
    double kappa = 0.0;
    double abs_one_minus_kappa = 0.0;
};

struct PlateauFit {
    double level = std::numeric_limits<double>::quiet_NaN();
    double width_decades = 0.0;
    double eps_lo = 0.0, eps_hi = 0.0;
    double left_slope = std::numeric_limits<double>::quiet_NaN();  // small-epsilon (round-off) branch
    double right_slope = std::numeric_limits<double>::quiet_NaN(); // large-epsilon (truncation) branch
};

struct KappaReport {
    std::vector<KappaRow> rows;
    double denominator = 0.0;
    double base_value = 0.0;
};

/// 25 log-spaced values from 1 down to 1e-14.
inline std::vector<double> default_epsilons(std::size_t count = 25, double hi = 1.0, double lo = 1e-14)
{
    require(count >= 2 && hi > lo && lo > 0.0, "default_epsilons: bad range");
    std::vector<double> e(count);
    const double a = std::log10(hi), b = std::log10(lo);
    for (std::size_t i = 0; i < count; ++i) e[i] = std::pow(10.0, a + (b - a) * double(i) / double(count - 1));
    return e;
}

/// kappa(eps) = [F(phi + eps dphi) - F(phi)] / (eps <G, dphi>_{L2}).
inline KappaReport kappa_sweep(const std::function<double(const GridFunction&)>& F, const GridFunction& phi,
                               const GridFunction& dphi, const GridFunction& g_l2, const std::vector<double>& eps,
                               double base_value = std::numeric_limits<double>::quiet_NaN())
{
    phi.check_same_grid(dphi);
    phi.check_same_grid(g_l2);
    for (std::size_t i = 0; i < eps.size(); ++i) {
        require(eps[i] > 0.0, "kappa_sweep: epsilon values must be positive");
        require(i == 0 || eps[i] < eps[i - 1], "kappa_sweep: epsilon values must be sorted descending");
    }
    KappaReport rep;
    rep.denominator = l2_inner(g_l2, dphi);
    if (!(std::abs(rep.denominator) > 1e-14 * l2_norm(g_l2) * l2_norm(dphi)))
        throw DegenerateDirection("kappa_sweep: <gradient, perturbation>_L2 pairing is numerically zero");
    rep.base_value = std::isnan(base_value) ? F(phi) : base_value;
    for (double e : eps) {
        GridFunction p = phi;
        p.axpy(e, dphi);
        const double k = (F(p) - rep.base_value) / (e * rep.denominator);
        rep.rows.push_back({e, k, std::abs(1.0 - k)});
    }
    return rep;
}

namespace detail {

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log10(x[i]), ly = std::log10(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    return den == 0.0 ? std::numeric_limits<double>::quiet_NaN() : (n * sxy - sx * sy) / den;
}

} // namespace detail

/// Plateau of |1 - kappa|. Candidates are runs of at least two neighbouring
/// points that agree within a factor `core_band`, whose smallest value lies
/// within `floor_band` of the curve's floor (its second-smallest value, so a
/// single cancellation dip cannot set it). The longest candidate wins, ties
/// going to the lower level; the level is that run's smallest value and the
/// plateau is the contiguous epsilon range around it staying below `band`
/// times the level. Without any candidate run the smallest point is used.
/// Rows with kappa == 0 (no change in F) are skipped. Flank
/// slopes are log-log fits over points at least 10x the level on either side.
inline PlateauFit plateau_fit(const KappaReport& rep, double band = 3.0, double core_band = 1.5,
                              double floor_band = 10.0)
{
    PlateauFit fit;
    const auto& r = rep.rows;
    const std::size_t n = r.size();
    if (n == 0) return fit;
    auto val = [&](std::size_t i) {
        const double v = r[i].abs_one_minus_kappa;
        return std::isfinite(v) && r[i].kappa != 0.0 ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<double> sorted;
    for (std::size_t i = 0; i < n; ++i)
        if (std::isfinite(val(i)) && val(i) > 0.0) sorted.push_back(val(i));
    if (sorted.size() < 2) return fit;
    std::sort(sorted.begin(), sorted.end());
    const double floor = sorted[1];

    std::size_t core_lo = 0, core_hi = 0, best_len = 0;
    double level = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a) {
        const double v = val(a);
        if (!(v > 0.0) || !std::isfinite(v)) continue;
        auto in_core = [&](std::size_t i) { return val(i) <= core_band * v && val(i) >= v / core_band; };
        std::size_t lo = a, hi = a;
        while (lo > 0 && in_core(lo - 1)) --lo;
        while (hi + 1 < n && in_core(hi + 1)) ++hi;
        if (hi == lo) continue;
        double low = std::numeric_limits<double>::infinity();
        for (std::size_t i = lo; i <= hi; ++i) low = std::min(low, val(i));
        if (low > floor_band * floor) continue;
        const std::size_t len = hi - lo + 1;
        if (len > best_len || (len == best_len && low < level)) {
            best_len = len;
            level = low;
            core_lo = lo;
            core_hi = hi;
        }
    }
    if (!std::isfinite(level)) {
        // no flat stretch (a V-shaped curve): fall back to the smallest point
        core_lo = core_hi = std::size_t(-1);
        for (std::size_t i = 0; i < n; ++i)
            if (val(i) > 0.0 && val(i) < level) {
                level = val(i);
                core_lo = core_hi = i;
            }
        if (!std::isfinite(level)) return fit;
    }
    std::size_t lo = core_lo, hi = core_hi;
    while (lo > 0 && val(lo - 1) <= band * level) --lo;
    while (hi + 1 < n && val(hi + 1) <= band * level) ++hi;

    fit.level = level;
    fit.eps_hi = std::max(r[lo].epsilon, r[hi].epsilon);
    fit.eps_lo = std::min(r[lo].epsilon, r[hi].epsilon);
    fit.width_decades = std::log10(fit.eps_hi / fit.eps_lo);

    std::vector<double> lx, ly, rx, ry;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(val(i)) || val(i) < 10.0 * level) continue;
        if (r[i].epsilon < fit.eps_lo) {
            lx.push_back(r[i].epsilon);
            ly.push_back(val(i));
        } else if (r[i].epsilon > fit.eps_hi) {
            rx.push_back(r[i].epsilon);
            ry.push_back(val(i));
        }
    }
    fit.left_slope = detail::loglog_slope(lx, ly);
    fit.right_slope = detail::loglog_slope(rx, ry);
    return fit;
}

inline void write_csv(const KappaReport& rep, const std::string& path)
{
    std::ofstream f(path);
    if (!f) throw InvalidInput("cannot open '" + path + "' for writing");
    f << "epsilon,kappa,abs_one_minus_kappa\n";
    char buf[128];
    for (const auto& row : rep.rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", row.epsilon, row.kappa, row.abs_one_minus_kappa);
        f << buf;
    }
}

} // namespace adjopt::kappa
