#pragma once

#include "adjopt/core/error.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>

namespace adjopt::opt {

struct Bracket {
    double lo = 0.0, mid = 0.0, hi = 0.0;
    double f_lo = 0.0, f_mid = 0.0, f_hi = 0.0;
};

struct LineMin {
    double tau = 0.0;
    double value = 0.0;
    int evals = 0;
};

/// Bracket a minimizer of f on [0, inf) starting from f(0) = f0 and a trial step.
/// Grows the step while f keeps decreasing, shrinks it while f(trial) >= f0.
inline Bracket bracket_minimum(const std::function<double(double)>& f, double f0, double trial, double growth,
                               int max_evals, int& evals)
{
    require(trial > 0.0 && growth > 1.0, "bracket_minimum: need trial > 0 and growth > 1");
    Bracket b;
    b.lo = 0.0;
    b.f_lo = f0;
    double t = trial;
    double ft = f(t);
    ++evals;
    if (!(ft < f0)) {
        // shrink until we find a decrease
        double t_hi = t, f_hi = ft;
        while (evals < max_evals) {
            t /= growth;
            ft = f(t);
            ++evals;
            if (ft < f0) {
                b.mid = t;
                b.f_mid = ft;
                b.hi = t_hi;
                b.f_hi = f_hi;
                return b;
            }
            t_hi = t;
            f_hi = ft;
        }
        throw LineSearchFailure("bracket_minimum: no decrease found along the search direction");
    }
    double t_prev = 0.0, f_prev = f0;
    while (evals < max_evals) {
        const double t_next = t * growth;
        const double f_next = f(t_next);
        ++evals;
        if (!std::isfinite(f_next) || f_next >= ft) {
            b.lo = t_prev;
            b.f_lo = f_prev;
            b.mid = t;
            b.f_mid = ft;
            b.hi = t_next;
            b.f_hi = std::isfinite(f_next) ? f_next : std::numeric_limits<double>::infinity();
            return b;
        }
        t_prev = t;
        f_prev = ft;
        t = t_next;
        ft = f_next;
    }
    throw LineSearchFailure("bracket_minimum: function keeps decreasing, growth budget exhausted");
}

/// Brent's method on [lo, hi]; tol is relative to tau.
inline LineMin brent_minimize(const std::function<double(double)>& f, double lo, double hi, double tol, int max_evals)
{
    require(hi > lo, "brent_minimize: need lo < hi");
    require(tol > 0.0 && max_evals > 0, "brent_minimize: need tol > 0 and max_evals > 0");
    const int bits = std::max(4, static_cast<int>(std::ceil(1.0 - std::log2(tol))));
    std::uintmax_t iters = static_cast<std::uintmax_t>(max_evals);
    const auto r = boost::math::tools::brent_find_minima(f, lo, hi, bits, iters);
    return {r.first, r.second, static_cast<int>(iters)};
}

/// Bracket then refine. Returns the best point seen if Brent ends worse than the bracket middle.
inline LineMin line_minimize(const std::function<double(double)>& f, double f0, double trial, double growth,
                             double tol, int max_evals)
{
    int evals = 0;
    const Bracket b = bracket_minimum(f, f0, trial, growth, max_evals, evals);
    LineMin r = brent_minimize(f, b.lo, b.hi, tol, std::max(1, max_evals - evals));
    r.evals += evals;
    if (!(r.value <= b.f_mid)) {
        r.tau = b.mid;
        r.value = b.f_mid;
    }
    return r;
}

} // namespace adjopt::opt
