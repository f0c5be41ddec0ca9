#pragma once

#include "adjopt/core/error.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace adjopt {

/// Uniform partition of [lo, hi] into n intervals (n + 1 nodes).
struct UniformGrid1D {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t n = 2;

    UniformGrid1D() = default;
    UniformGrid1D(double lo_, double hi_, std::size_t n_) : lo(lo_), hi(hi_), n(n_)
    {
        require(n >= 2, "UniformGrid1D: need at least 2 intervals");
        require(std::isfinite(lo) && std::isfinite(hi) && hi > lo,
                "UniformGrid1D: need finite lo < hi");
    }

    double spacing() const { return (hi - lo) / static_cast<double>(n); }
    double node(std::size_t i) const { return lo + static_cast<double>(i) * spacing(); }
    std::size_t size() const { return n + 1; }

    bool operator==(const UniformGrid1D&) const = default;
};

/// Nodal samples of a scalar function on a UniformGrid1D.
///
/// Used both for functions of time (heat fluxes, their gradients and normal
/// elements) and for functions of the normalized state variable in [0, 1]
/// (eddy-viscosity profiles).
struct GridFunction {
    UniformGrid1D grid;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(const UniformGrid1D& g) : grid(g), values(g.size(), 0.0) {}
    GridFunction(const UniformGrid1D& g, std::vector<double> v) : grid(g), values(std::move(v))
    {
        require(values.size() == grid.size(), "GridFunction: values length must equal n + 1");
    }

    static GridFunction sample(const UniformGrid1D& g, const std::function<double(double)>& f)
    {
        GridFunction out(g);
        for (std::size_t i = 0; i < g.size(); ++i) out.values[i] = f(g.node(i));
        return out;
    }

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    bool all_finite() const
    {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }

    GridFunction& operator+=(const GridFunction& o)
    {
        check_same_grid(o);
        for (std::size_t i = 0; i < size(); ++i) values[i] += o.values[i];
        return *this;
    }
    GridFunction& operator-=(const GridFunction& o)
    {
        check_same_grid(o);
        for (std::size_t i = 0; i < size(); ++i) values[i] -= o.values[i];
        return *this;
    }
    GridFunction& operator*=(double s)
    {
        for (double& v : values) v *= s;
        return *this;
    }

    /// this += a * x
    GridFunction& axpy(double a, const GridFunction& x)
    {
        check_same_grid(x);
        for (std::size_t i = 0; i < size(); ++i) values[i] += a * x.values[i];
        return *this;
    }

    void check_same_grid(const GridFunction& o) const
    {
        if (!(grid == o.grid) || values.size() != o.values.size())
            throw InvalidInput("GridFunction: operands live on different grids");
    }
};

inline GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
inline GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
inline GridFunction operator*(double s, GridFunction a) { return a *= s; }
inline GridFunction operator-(GridFunction a) { return a *= -1.0; }

/// Control variable of the heat problems: a flux history phi(t).
using TimeSignal = GridFunction;
/// Control variable of the closure problem: phi(sigma), sigma = s / s_max.
using StateFunction = GridFunction;

/// Composite trapezoidal rule for samples with uniform spacing.
inline double trapezoid(std::span<const double> values, double spacing)
{
    if (values.size() < 2) throw InvalidInput("trapezoid: need at least 2 samples");
    double sum = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
    return sum * spacing;
}

/// Trapezoid quadrature weight of node i out of n + 1.
inline double trapezoid_weight(std::size_t i, std::size_t n, double spacing)
{
    return (i == 0 || i == n) ? 0.5 * spacing : spacing;
}

/// Plain L2 inner product with trapezoid weights.
inline double l2_inner(const GridFunction& a, const GridFunction& b)
{
    a.check_same_grid(b);
    const std::size_t n = a.grid.n;
    double sum = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
        sum += trapezoid_weight(i, n, 1.0) * a.values[i] * b.values[i];
    return sum * a.grid.spacing();
}

inline double l2_norm(const GridFunction& a) { return std::sqrt(l2_inner(a, a)); }

} // namespace adjopt
