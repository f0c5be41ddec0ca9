#pragma once

#include "adjopt/heat/heat.hpp"
#include "adjopt/heat/signals.hpp"
#include "adjopt/opt/manifold.hpp"

#include <memory>
#include <optional>

namespace adjopt::heat {

/// Heat control problem with a one-entry cache of the last forward solve.
class HeatProblem {
public:
    explicit HeatProblem(HeatConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

    const HeatConfig& config() const { return cfg_; }

    const SpaceTimeField& state(const TimeSignal& phi) const
    {
        if (!cache_ || cache_->first.values != phi.values) cache_.emplace(phi, solve_forward(cfg_, phi));
        return cache_->second;
    }

    double objective(const TimeSignal& phi) const { return heat::objective(cfg_, state(phi)); }
    double constraint(const TimeSignal& phi) const { return energy_time_avg(cfg_, state(phi)); }

    TimeSignal l2_gradient(const TimeSignal& phi) const
    {
        return gradient_l2(solve_adjoint_objective(cfg_, state(phi)));
    }
    TimeSignal l2_normal(const TimeSignal& phi) const
    {
        return normal_element_l2(solve_adjoint_constraint(cfg_, state(phi)), cfg_.T);
    }

    /// Endpoint values of the control are left untouched by the H1 gradient.
    TimeSignal sobolev_gradient(const TimeSignal& phi) const { return smooth(l2_gradient(phi)); }
    TimeSignal sobolev_normal(const TimeSignal& phi) const { return smooth(l2_normal(phi)); }

    TimeSignal smooth(const TimeSignal& g) const
    {
        if (cfg_.metric.order == 0) return g;
        return solve_gradient_bvp(g, cfg_.metric, BvpBoundaryKind::DirichletZero);
    }

    /// Rescaling is exact only when the state is linear in the flux.
    bool homogeneous() const
    {
        for (double v : cfg_.u0)
            if (v != 0.0) return false;
        return true;
    }

    opt::ProblemAdapter adapter(std::shared_ptr<const HeatProblem> self) const
    {
        opt::ProblemAdapter a;
        a.eval_objective = [self](const GridFunction& p) { return self->objective(p); };
        a.eval_constraint = [self](const GridFunction& p) { return self->constraint(p); };
        a.sobolev_gradient = [self](const GridFunction& p) { return self->sobolev_gradient(p); };
        a.sobolev_normal = [self](const GridFunction& p) { return self->sobolev_normal(p); };
        a.metric = cfg_.metric;
        a.constraint_level = cfg_.E0;
        a.retraction_available = homogeneous();
        return a;
    }

private:
    HeatConfig cfg_;
    mutable std::optional<std::pair<TimeSignal, SpaceTimeField>> cache_;
};

struct HeatSetup {
    double a = 0.0, b = 1.0, T = 1.0;
    std::size_t nx = 200, nt = 400;
    Generator u0{"zero", {}};
    Generator true_flux = heat::true_flux();
    Generator initial = heat::initial_flux();
    double l1 = 0.01;
    /// Constraint level; 0 means [E]_T of the initial guess.
    double E0 = 0.0;
};

/// Builds the configuration: target from the true flux (same grids and u0),
/// constraint level from the initial guess unless given.
inline HeatConfig build_config(const HeatSetup& s)
{
    HeatConfig c;
    c.a = s.a;
    c.b = s.b;
    c.T = s.T;
    c.nx = s.nx;
    c.nt = s.nt;
    c.metric = SobolevMetric::h1(s.l1);
    c.u0 = s.u0.sample(c.xgrid()).values;
    const auto ut = solve_forward(c, s.true_flux.sample(c.tgrid()));
    c.target = ut.trace(c.nx);
    c.E0 = s.E0 > 0.0 ? s.E0 : energy_time_avg(c, solve_forward(c, s.initial.sample(c.tgrid())));
    c.validate();
    return c;
}

/// Problem 1 (zero initial temperature) or 2 (u0 = 10 cos(pi x)).
inline HeatSetup problem_setup(int which, std::size_t nx, std::size_t nt)
{
    HeatSetup s;
    s.nx = nx;
    s.nt = nt;
    if (which == 2) s.u0 = initial_temperature_problem2();
    return s;
}

} // namespace adjopt::heat
