#pragma once

#include "adjopt/core/error.hpp"
#include "adjopt/core/log.hpp"
#include "adjopt/opt/brent.hpp"
#include "adjopt/opt/manifold.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace adjopt::opt {

enum class DescentMode { Unconstrained, Constrained };

struct LineSearchOptions {
    double growth = 2.0;
    double tol = 1e-4;
    int max_evals = 40;
};

struct DescentOptions {
    DescentMode mode = DescentMode::Unconstrained;
    int max_iters = 500;
    double rel_tol = 1e-6;
    /// Step cap for constrained runs without retraction; 0 selects
    /// step_cap_fraction * |phi0|_L2 / |P g0|_L2 at the first iteration.
    double step_cap = 0.0;
    double step_cap_fraction = 0.05;
    bool use_pr_cg = true;
    LineSearchOptions line_search;

    void validate() const
    {
        require(max_iters >= 0, "DescentOptions: max_iters must be non-negative");
        require(rel_tol > 0.0, "DescentOptions: rel_tol must be positive");
        require(step_cap >= 0.0 && step_cap_fraction > 0.0, "DescentOptions: step cap must be positive");
        require(line_search.growth > 1.0 && line_search.tol > 0.0 && line_search.max_evals > 2,
                "DescentOptions: bad line search settings");
    }
};

struct TraceRecord {
    int n = 0;
    double J = 0.0;
    double constraint = 0.0;
    double tau = 0.0;
    double grad_norm = 0.0;
    double pgrad_norm = 0.0;
};

struct DescentTrace {
    std::vector<TraceRecord> records;
    std::string stop_reason;

    double J0() const { return records.empty() ? 0.0 : records.front().J; }
    double C0() const { return records.empty() ? 0.0 : records.front().constraint; }
};

struct DescentResult {
    GridFunction control;
    DescentTrace trace;
};

/// Projected (Sobolev) gradient descent; Polak-Ribiere CG in unconstrained mode.
///
/// Each record n holds the accepted iterate phi^(n) and the step tau that
/// produced it (tau = 0 for n = 0). Gradient norms are those evaluated at the
/// iterate the step was taken from.
inline DescentResult descend(const ProblemAdapter& adapter, const GridFunction& phi0, const DescentOptions& opts,
                             const std::function<void(const TraceRecord&)>& on_record = {})
{
    adapter.validate();
    opts.validate();
    const bool constrained = opts.mode == DescentMode::Constrained;
    const bool retract = constrained && adapter.retraction_available;

    DescentResult res;
    GridFunction phi = retract ? retract_rescale(phi0, adapter) : phi0;
    double J = adapter.eval_objective(phi);
    if (!std::isfinite(J)) throw SolverFailure("descend: objective at the initial guess is not finite");

    auto push = [&](int n, double tau, double gn, double pn) {
        TraceRecord r{n, J, adapter.eval_constraint(phi), tau, gn, pn};
        res.trace.records.push_back(r);
        if (on_record) on_record(r);
    };
    push(0, 0.0, 0.0, 0.0);

    std::optional<GridFunction> g_prev, d_prev;
    double tau_cap = opts.step_cap;
    double tau_guess = 0.0;
    res.trace.stop_reason = "max_iters";

    for (int n = 1; n <= opts.max_iters; ++n) {
        GridFunction g = adapter.sobolev_gradient(phi);
        const double gnorm = sobolev_norm(g, adapter.metric);
        GridFunction d;
        double pnorm = gnorm;
        if (constrained) {
            GridFunction Pg = g;
            try {
                Pg = project_tangent(g, adapter.sobolev_normal(phi), adapter.metric);
            } catch (const DegenerateNormal&) {
                warn("descend: degenerate normal element at iteration " + std::to_string(n) +
                     ", taking an unprojected step");
            }
            pnorm = sobolev_norm(Pg, adapter.metric);
            d = -Pg;
        } else if (opts.use_pr_cg) {
            d = pr_cg_direction(g, g_prev ? &*g_prev : nullptr, d_prev ? &*d_prev : nullptr, adapter.metric);
        } else {
            d = -g;
        }
        const double dnorm = sobolev_norm(d, adapter.metric);
        if (!(dnorm > 0.0) || !std::isfinite(dnorm)) {
            res.trace.stop_reason = "zero_direction";
            break;
        }

        auto trial = [&](double tau) {
            GridFunction p = phi;
            p.axpy(tau, d);
            return retract ? retract_rescale(p, adapter) : p;
        };
        // a trial that breaks the state solver counts as an infinitely bad step
        auto f = [&](double tau) {
            double v;
            try {
                v = adapter.eval_objective(trial(tau));
            } catch (const SolverFailure&) {
                return std::numeric_limits<double>::infinity();
            }
            return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
        };

        const bool capped = constrained && !retract;
        // step sizes relative to the control in L2; a zero control falls back to the direction
        const double d_l2 = l2_norm(d);
        const double scale = std::max(l2_norm(phi), d_l2);
        if (capped && tau_cap == 0.0) tau_cap = opts.step_cap_fraction * scale / d_l2;
        if (tau_guess == 0.0) tau_guess = opts.step_cap_fraction * scale / d_l2;

        LineMin lm{0.0, J, 0};
        bool ok = false;
        try {
            if (capped)
                lm = brent_minimize(f, 0.0, tau_cap, opts.line_search.tol, opts.line_search.max_evals);
            else
                lm = line_minimize(f, J, tau_guess, opts.line_search.growth, opts.line_search.tol,
                                   opts.line_search.max_evals);
            ok = lm.value < J && lm.tau > 0.0;
        } catch (const LineSearchFailure&) {
            ok = false;
        }
        if (!ok) {
            const double fallback = (capped ? tau_cap : tau_guess) / 10.0;
            const double v = f(fallback);
            if (v < J) {
                lm = {fallback, v, 1};
                ok = true;
            }
        }
        if (!ok) {
            res.trace.stop_reason = "line_search_failure";
            break;
        }

        const double J_prev = J;
        phi = trial(lm.tau);
        J = adapter.eval_objective(phi);
        if (!std::isfinite(J)) throw SolverFailure("descend: objective became non-finite");
        push(n, lm.tau, gnorm, pnorm);
        tau_guess = lm.tau;
        if (!constrained && opts.use_pr_cg) {
            g_prev = g;
            d_prev = d;
        }
        if ((J_prev - J) / J_prev < opts.rel_tol) {
            res.trace.stop_reason = "rel_tol";
            break;
        }
    }
    res.control = phi;
    return res;
}

} // namespace adjopt::opt
