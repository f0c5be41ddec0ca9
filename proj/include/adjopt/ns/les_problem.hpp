#pragma once

#include "adjopt/core/error.hpp"
#include "adjopt/core/log.hpp"
#include "adjopt/ns/adjoint.hpp"
#include "adjopt/ns/ns2d.hpp"
#include "adjopt/opt/manifold.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <string>

namespace adjopt::ns {

/// J = 1/(2D) int (P - P~)^2 dt.
inline double objective_j2(const std::vector<double>& P_dns, const std::vector<double>& P_les, double dt, double D)
{
    require(P_dns.size() == P_les.size() && P_dns.size() >= 2, "objective_j2: series differ in length");
    require(D > 0.0, "objective_j2: need D > 0");
    std::vector<double> e(P_dns.size());
    for (std::size_t n = 0; n < e.size(); ++n) e[n] = (P_dns[n] - P_les[n]) * (P_dns[n] - P_les[n]);
    return trapezoid(e, dt) / (2.0 * D);
}

/// [E~]_T = (1/T) int E~ dt.
inline double constraint_enstrophy(const std::vector<double>& E_les, double dt)
{
    require(E_les.size() >= 2, "constraint_enstrophy: need at least two samples");
    return trapezoid(E_les, dt) / (dt * double(E_les.size() - 1));
}

/// Filtered DNS data the LES is compared against, on the LES time levels.
struct LesTarget {
    SpectralField w0;  // filtered initial vorticity on the LES grid
    std::vector<double> t, palinstrophy, enstrophy;
    std::vector<double> palinstrophy_raw, enstrophy_raw;
    double D = 0.0;
    double E0 = 0.0;
    double eddy_turnover = 0.0;
};

inline LesTarget prepare_target(const NsConfig& cfg, const SnapshotFn& snap = {})
{
    cfg.validate();
    const auto w_init = spun_up_initial(cfg);
    const auto run = solve_dns(cfg, w_init, snap);
    LesTarget tg;
    tg.w0 = resample(box_filter(w_init, cfg.k_c), cfg.n_les);
    tg.t = run.t;
    tg.palinstrophy = run.palinstrophy_filtered;
    tg.enstrophy = run.enstrophy_filtered;
    tg.palinstrophy_raw = run.palinstrophy;
    tg.enstrophy_raw = run.enstrophy;
    std::vector<double> p2(tg.palinstrophy.size());
    for (std::size_t n = 0; n < p2.size(); ++n) p2[n] = tg.palinstrophy[n] * tg.palinstrophy[n];
    tg.D = cfg.D > 0.0 ? cfg.D : trapezoid(p2, cfg.dt);
    tg.E0 = cfg.E0 > 0.0 ? cfg.E0 : constraint_enstrophy(tg.enstrophy, cfg.dt);
    tg.eddy_turnover = eddy_turnover_time(run.enstrophy, cfg.dt);
    return tg;
}

/// Problem 3: eddy-viscosity state function phi(sigma) for the LES.
class LesProblem {
public:
    LesProblem(NsConfig cfg, LesTarget target) : cfg_(std::move(cfg)), tg_(std::move(target))
    {
        cfg_.validate();
        require(tg_.t.size() == cfg_.nt() + 1, "LesProblem: target series must match the LES time levels");
        require(tg_.w0.n == cfg_.n_les, "LesProblem: target initial field must live on the LES grid");
        if (cfg_.s_max <= 0.0) {
            const auto h = solve_les(cfg_, tg_.w0, leith_exact(cfg_.C_L), false);
            cfg_.s_max = 1.2 * h.max_s;
        }
        cfg_.D = tg_.D;
        cfg_.E0 = tg_.E0;
    }

    const NsConfig& config() const { return cfg_; }
    const LesTarget& target() const { return tg_; }
    UniformGrid1D sigma_grid() const { return cfg_.sigma_grid(); }

    /// nu = (C_L k_c)^3 sqrt(s) exactly, independent of s_max.
    EddyViscosity leith_exact(double C_L) const
    {
        const double r = C_L * cfg_.k_c / cfg_.eta();
        return EddyViscosity::ansatz(cfg_.k_c, 0.0, 1.0,
                                     GridFunction(cfg_.sigma_grid(), std::vector<double>(cfg_.n_sigma, r * r * r)));
    }

    EddyViscosity closure(const GridFunction& phi) const
    {
        return EddyViscosity::ansatz(cfg_.k_c, cfg_.nu0, cfg_.s_max, phi);
    }

    /// phi with (eta^3 sqrt(s) + nu0) phi(s / s_max) = nu'(s) at the nodes.
    GridFunction from_viscosity(const std::function<double(double)>& nu) const
    {
        const auto ev = closure(GridFunction(sigma_grid()));
        return GridFunction::sample(sigma_grid(), [&](double sg) {
            const double s = sg * cfg_.s_max;
            return nu(s) / ev.prefactor(s);
        });
    }

    GridFunction leith_phi(double C_L) const
    {
        const double c = C_L * cfg_.k_c;
        return from_viscosity([c](double s) { return c * c * c * std::sqrt(s); });
    }
    /// Perturbation: Leith viscosity with C_L = 4.2e-3.
    GridFunction perturbation_leith() const { return leith_phi(4.2e-3); }
    /// Perturbation: nu'(s) = exp(-2 s / 30).
    GridFunction perturbation_exp() const
    {
        return from_viscosity([](double s) { return std::exp(-2.0 * s / 30.0); });
    }

    const FlowHistory& state(const GridFunction& phi) const
    {
        if (!cache_ || cache_->first.values != phi.values) {
            cache_.reset();
            cache_.emplace(phi, solve_les(cfg_, tg_.w0, closure(phi), true));
        }
        return cache_->second;
    }

    double objective(const GridFunction& phi) const
    {
        return objective_j2(tg_.palinstrophy, state(phi).palinstrophy, cfg_.dt, cfg_.D);
    }
    double constraint(const GridFunction& phi) const { return constraint_enstrophy(state(phi).enstrophy, cfg_.dt); }

    GridFunction l2_gradient(const GridFunction& phi, double* total = nullptr) const
    {
        return l2_element(phi, AdjointSourceKind::Objective, total);
    }
    GridFunction l2_normal(const GridFunction& phi, double* total = nullptr) const
    {
        return l2_element(phi, AdjointSourceKind::Constraint, total);
    }

    /// Both elements come from the same adjoint operator; only the source differs.
    GridFunction l2_element(const GridFunction& phi, AdjointSourceKind kind, double* total = nullptr) const
    {
        const auto& h = state(phi);
        const auto ev = closure(phi);
        const auto W = adjoint_source(kind, h, tg_.palinstrophy, cfg_.D, cfg_.T);
        const auto adj = solve_les_adjoint(cfg_, h, ev, W);
        return extract_state_gradient(h, adj, ev, sigma_grid(), total);
    }

    GridFunction sobolev_gradient(const GridFunction& phi) const { return smooth(l2_gradient(phi)); }
    GridFunction sobolev_normal(const GridFunction& phi) const { return smooth(l2_normal(phi)); }
    GridFunction smooth(const GridFunction& g) const
    {
        if (cfg_.metric.order == 0) return g;
        return solve_gradient_bvp(g, cfg_.metric, BvpBoundaryKind::NaturalOddDeriv);
    }

    /// Leith constant placing phi on the constraint manifold, by bisection.
    double tune_leith(double rel_tol = 1e-9, int max_iter = 200) const
    {
        auto f = [&](double C) { return constraint(leith_phi(C)) / cfg_.E0 - 1.0; };
        double lo = 0.0, hi = cfg_.C_L;
        const double f_lo = constraint(GridFunction(sigma_grid())) / cfg_.E0 - 1.0;
        if (!(f_lo > 0.0))
            throw InvalidState("tune_leith: the closure-free LES already has enstrophy below the target level");
        double f_hi = f(hi);
        for (int k = 0; f_hi > 0.0; ++k) {
            if (k > 30) throw InvalidState("tune_leith: no Leith constant reduces enstrophy to the target level");
            lo = hi;
            hi *= 2.0;
            f_hi = f(hi);
        }
        double mid = hi;
        for (int k = 0; k < max_iter; ++k) {
            mid = 0.5 * (lo + hi);
            const double fm = f(mid);
            if (std::abs(fm) <= rel_tol || hi - lo <= 1e-15 * hi) break;
            (fm > 0.0 ? lo : hi) = mid;
        }
        return mid;
    }

    opt::ProblemAdapter adapter(std::shared_ptr<const LesProblem> self) const
    {
        opt::ProblemAdapter a;
        a.eval_objective = [self](const GridFunction& p) { return self->objective(p); };
        a.eval_constraint = [self](const GridFunction& p) { return self->constraint(p); };
        a.sobolev_gradient = [self](const GridFunction& p) { return self->sobolev_gradient(p); };
        a.sobolev_normal = [self](const GridFunction& p) { return self->sobolev_normal(p); };
        a.metric = cfg_.metric;
        a.constraint_level = cfg_.E0;
        a.retraction_available = false;
        return a;
    }

private:
    NsConfig cfg_;
    LesTarget tg_;
    mutable std::optional<std::pair<GridFunction, FlowHistory>> cache_;
};

} // namespace adjopt::ns
