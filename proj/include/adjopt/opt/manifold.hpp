#pragma once

#include "adjopt/core/error.hpp"
#include "adjopt/core/grid.hpp"
#include "adjopt/core/sobolev.hpp"

#include <cmath>
#include <functional>

namespace adjopt::opt {

/// Callbacks describing one optimization problem over a GridFunction control.
struct ProblemAdapter {
    std::function<double(const GridFunction&)> eval_objective;
    std::function<double(const GridFunction&)> eval_constraint;
    std::function<GridFunction(const GridFunction&)> sobolev_gradient;
    std::function<GridFunction(const GridFunction&)> sobolev_normal;
    SobolevMetric metric;
    double constraint_level = 1.0;
    bool retraction_available = false;

    void validate() const
    {
        if (!eval_objective || !eval_constraint || !sobolev_gradient || !sobolev_normal)
            throw InvalidInput("ProblemAdapter: all callbacks must be set");
        require(constraint_level > 0.0, "ProblemAdapter: constraint_level must be positive");
        metric.validate();
    }
};

/// Phi - zeta N with zeta = <Phi, N> / <N, N> in the given metric.
inline GridFunction project_tangent(const GridFunction& Phi, const GridFunction& N, const SobolevMetric& metric)
{
    const double nn = inner_product(N, N, metric);
    const double pp = inner_product(Phi, Phi, metric);
    if (!(std::sqrt(nn) >= 1e-14 * std::sqrt(pp)) || nn == 0.0)
        throw DegenerateNormal("project_tangent: normal element is numerically zero");
    const double zeta = inner_product(Phi, N, metric) / nn;
    GridFunction out = Phi;
    out.axpy(-zeta, N);
    return out;
}

/// Rescaling retraction for constraints homogeneous of degree two.
inline GridFunction retract_rescale(const GridFunction& phi, const ProblemAdapter& adapter)
{
    if (!adapter.retraction_available) throw InvalidState("retract_rescale: problem has no rescaling retraction");
    const double c = adapter.eval_constraint(phi);
    if (!(c > 0.0)) throw InvalidState("retract_rescale: constraint value must be positive");
    return std::sqrt(adapter.constraint_level / c) * phi;
}

/// Polak-Ribiere direction with nonnegative beta and restart on non-descent.
inline GridFunction pr_cg_direction(const GridFunction& g_now, const GridFunction* g_prev, const GridFunction* d_prev,
                                    const SobolevMetric& metric)
{
    GridFunction d = -g_now;
    if (!g_prev || !d_prev) return d;
    const double gg = inner_product(*g_prev, *g_prev, metric);
    if (!(gg > 0.0)) return d;
    const double beta = std::max(0.0, inner_product(g_now, g_now - *g_prev, metric) / gg);
    d.axpy(beta, *d_prev);
    if (inner_product(d, g_now, metric) >= 0.0) return -g_now;
    return d;
}

} // namespace adjopt::opt
