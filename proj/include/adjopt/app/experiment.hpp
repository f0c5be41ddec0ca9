#pragma once

#include "adjopt/app/config.hpp"
#include "adjopt/heat/problems.hpp"
#include "adjopt/kappa/kappa.hpp"
#include "adjopt/ns/les_problem.hpp"
#include "adjopt/opt/descent.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace adjopt::app {

enum class Kind {
    KappaHeat,
    KappaLes,
    OptHeat1A,
    OptHeat1B,
    OptHeat2A,
    OptHeat2B,
    OptLes3A,
    OptLes3B,
    SolveDns,
    SolveLes,
};

struct KindInfo {
    Kind kind;
    const char* name;
    const char* description;
};

inline constexpr std::array<KindInfo, 10> kinds{{
    {Kind::KappaHeat, "kappa-heat", "kappa_1 / kappa_2 sweeps for the heat flux problem over a grid ladder"},
    {Kind::KappaLes, "kappa-les", "kappa_3 / kappa_4 sweeps for the LES closure problem over a time-step ladder"},
    {Kind::OptHeat1A, "opt-heat-1A", "heat problem 1 (zero initial data), unconstrained PR-CG descent"},
    {Kind::OptHeat1B, "opt-heat-1B", "heat problem 1, energy constraint with rescaling retraction"},
    {Kind::OptHeat2A, "opt-heat-2A", "heat problem 2 (u0 = 10 cos(pi x)), unconstrained PR-CG descent"},
    {Kind::OptHeat2B, "opt-heat-2B", "heat problem 2, energy constraint by tangent projection only"},
    {Kind::OptLes3A, "opt-les-3A", "LES closure problem, unconstrained PR-CG descent"},
    {Kind::OptLes3B, "opt-les-3B", "LES closure problem, enstrophy constraint by tangent projection"},
    {Kind::SolveDns, "solve-dns", "DNS over [0, T] with raw and box-filtered diagnostics"},
    {Kind::SolveLes, "solve-les", "LES over [0, T] with the tuned Leith closure"},
}};

inline const KindInfo& kind_info(Kind k)
{
    for (const auto& i : kinds)
        if (i.kind == k) return i;
    throw InvalidInput("unknown experiment kind");
}

inline Kind parse_kind(const std::string& name)
{
    for (const auto& i : kinds)
        if (name == i.name) return i.kind;
    std::string all;
    for (const auto& i : kinds) all += std::string(all.empty() ? "" : ", ") + i.name;
    throw ConfigError("'kind': unknown experiment '" + name + "' (expected one of " + all + ")");
}

inline bool is_heat(Kind k) { return k == Kind::KappaHeat || (k >= Kind::OptHeat1A && k <= Kind::OptHeat2B); }
inline bool is_constrained(Kind k) { return k == Kind::OptHeat1B || k == Kind::OptHeat2B || k == Kind::OptLes3B; }
inline bool is_opt(Kind k) { return k >= Kind::OptHeat1A && k <= Kind::OptLes3B; }

struct Experiment {
    Kind kind = Kind::OptHeat1A;
    std::string output_dir = "out";
    bool quiet = false;

    heat::HeatSetup heat;
    heat::Generator heat_perturbation = heat::perturbation_flux();
    std::vector<std::pair<std::size_t, std::size_t>> heat_ladder;  // (nx, nt)

    ns::NsConfig ns;
    bool tune_leith = true;
    bool paper_scale = false;
    std::vector<double> les_dt_ladder;
    std::vector<std::string> les_perturbations;
    std::size_t snapshot_every = 0;

    std::size_t eps_count = 25;
    double eps_hi = 1.0, eps_lo = 1e-14;

    opt::DescentOptions descent;
};

namespace detail {

inline std::size_t parse_count(const std::string& key, const std::string& s)
{
    const double v = parse_number(key, s);
    if (!(v >= 1.0) || v != double(std::size_t(v))) throw ConfigError("'" + key + "': '" + s + "' is not a positive integer");
    return std::size_t(v);
}

inline void read_heat(const Config& c, Experiment& e)
{
    auto& h = e.heat;
    h.a = c.num("heat.a", h.a);
    h.b = c.num("heat.b", h.b);
    h.T = c.num("heat.T", h.T);
    h.nx = c.count("heat.nx", h.nx);
    h.nt = c.count("heat.nt", h.nt);
    h.u0 = c.generator("heat.u0", h.u0);
    h.true_flux = c.generator("heat.true_flux", h.true_flux);
    h.initial = c.generator("heat.initial", h.initial);
    h.l1 = c.num("heat.l1", h.l1);
    if (is_constrained(e.kind)) {
        // the constraint level must be stated; `auto` takes [E]_T of the initial guess
        const auto v = c.str("heat.E0");
        h.E0 = v == "auto" ? 0.0 : parse_number("heat.E0", v);
        if (v != "auto" && !(h.E0 > 0.0)) throw ConfigError("'heat.E0': must be positive or 'auto'");
    } else if (c.has("heat.E0") && c.str("heat.E0") != "auto") {
        h.E0 = parse_number("heat.E0", c.str("heat.E0"));
    }
    if (e.kind == Kind::KappaHeat) {
        e.heat_perturbation = c.generator("heat.perturbation", e.heat_perturbation);
        for (const auto& item : c.list("kappa.ladder")) {
            const auto x = item.find('x');
            if (x == std::string::npos) throw ConfigError("'kappa.ladder': entry '" + item + "' is not NXxNT");
            e.heat_ladder.emplace_back(parse_count("kappa.ladder", item.substr(0, x)),
                                       parse_count("kappa.ladder", item.substr(x + 1)));
        }
        if (e.heat_ladder.empty()) throw ConfigError("'kappa.ladder': needs at least one NXxNT entry");
    }
    try {
        heat::HeatConfig hc;
        hc.a = h.a;
        hc.b = h.b;
        hc.T = h.T;
        hc.nx = h.nx;
        hc.nt = h.nt;
        hc.metric = SobolevMetric::h1(h.l1);
        hc.validate();
        // unknown generators or missing parameters surface here rather than mid-run
        h.u0.sample(hc.xgrid());
        h.true_flux.sample(hc.tgrid());
        h.initial.sample(hc.tgrid());
        e.heat_perturbation.sample(hc.tgrid());
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInput& err) {
        throw ConfigError(err.what());
    }
}

inline void read_ns(const Config& c, Experiment& e)
{
    auto& n = e.ns;
    e.paper_scale = c.flag("ns.paper_scale", false);
    if (e.paper_scale) {
        n.n_dns = 256;
        n.n_les = 64;
        n.k_c = 8.0;
        n.T = 50.0;
    }
    n.nu_N = c.num("ns.nu_N", n.nu_N);
    n.alpha = c.num("ns.alpha", n.alpha);
    n.F = c.num("ns.F", n.F);
    n.k_a = int(c.count("ns.k_a", std::size_t(n.k_a)));
    n.k_b = int(c.count("ns.k_b", std::size_t(n.k_b)));
    n.forcing_seed = c.count("ns.forcing_seed", n.forcing_seed);
    n.n_dns = c.count("ns.n_dns", n.n_dns);
    n.n_les = c.count("ns.n_les", n.n_les);
    n.k_c = c.num("ns.k_c", n.k_c);
    n.dt = c.num("ns.dt", n.dt);
    n.T = c.num("ns.T", n.T);
    n.nu0 = c.num("ns.nu0", n.nu0);
    n.n_sigma = c.count("ns.n_sigma", n.n_sigma);
    n.C_L = c.num("ns.C_L", n.C_L);
    n.init_seed = c.count("ns.init_seed", n.init_seed);
    n.init_enstrophy = c.num("ns.init_enstrophy", n.init_enstrophy);
    n.spinup_time = c.num("ns.spinup_time", n.spinup_time);
    n.spinup_dt = c.num("ns.spinup_dt", n.spinup_dt);
    auto auto_or = [&](const std::string& key, double& out) {
        if (!c.has(key)) return;
        const auto v = c.str(key);
        out = v == "auto" ? 0.0 : parse_number(key, v);
        if (v != "auto" && !(out > 0.0)) throw ConfigError("'" + key + "': must be positive or 'auto'");
    };
    auto_or("ns.s_max", n.s_max);
    auto_or("ns.D", n.D);
    if (e.kind == Kind::OptLes3B) {
        c.str("ns.E0");  // must be stated
    }
    auto_or("ns.E0", n.E0);
    n.metric = SobolevMetric::h2(c.num("ns.l1", n.metric.length(1)), c.num("ns.l2", n.metric.length(2)));
    e.tune_leith = c.flag("ns.tune_leith", e.tune_leith);
    e.snapshot_every = c.count("ns.snapshot_every", 0);
    if (e.kind == Kind::KappaLes) {
        for (const auto& s : c.list("kappa.dt_ladder")) e.les_dt_ladder.push_back(parse_number("kappa.dt_ladder", s));
        if (e.les_dt_ladder.empty()) throw ConfigError("'kappa.dt_ladder': needs at least one time step");
        for (const auto& s : c.list("kappa.perturbations")) {
            if (s != "leith" && s != "exp") throw ConfigError("'kappa.perturbations': unknown perturbation '" + s + "'");
            e.les_perturbations.push_back(s);
        }
        if (e.les_perturbations.empty()) throw ConfigError("'kappa.perturbations': needs at least one entry");
    }
    try {
        n.validate();
        for (double dt : e.les_dt_ladder) {
            auto m = n;
            m.dt = dt;
            m.validate();
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInput& err) {
        throw ConfigError(err.what());
    }
}

} // namespace detail

inline Experiment build_experiment(const Config& c)
{
    Experiment e;
    e.kind = parse_kind(c.str("kind"));
    e.output_dir = c.str("output_dir", e.output_dir);
    e.quiet = c.flag("quiet", false);
    if (is_heat(e.kind))
        detail::read_heat(c, e);
    else
        detail::read_ns(c, e);
    if (e.kind == Kind::KappaHeat || e.kind == Kind::KappaLes) {
        e.eps_count = c.count("kappa.eps_count", e.eps_count);
        e.eps_hi = c.num("kappa.eps_hi", e.eps_hi);
        e.eps_lo = c.num("kappa.eps_lo", e.eps_lo);
        if (e.eps_count < 2 || !(e.eps_hi > e.eps_lo && e.eps_lo > 0.0))
            throw ConfigError("'kappa.eps_*': need eps_count >= 2 and eps_hi > eps_lo > 0");
    }
    if (is_opt(e.kind)) {
        auto& d = e.descent;
        d.mode = is_constrained(e.kind) ? opt::DescentMode::Constrained : opt::DescentMode::Unconstrained;
        d.max_iters = int(c.count("opt.max_iters", std::size_t(d.max_iters)));
        d.rel_tol = c.num("opt.rel_tol", d.rel_tol);
        d.step_cap = c.num("opt.step_cap", d.step_cap);
        d.step_cap_fraction = c.num("opt.step_cap_fraction", d.step_cap_fraction);
        d.use_pr_cg = c.flag("opt.pr_cg", d.use_pr_cg);
        d.line_search.growth = c.num("opt.ls_growth", d.line_search.growth);
        d.line_search.tol = c.num("opt.ls_tol", d.line_search.tol);
        d.line_search.max_evals = int(c.count("opt.ls_max_evals", std::size_t(d.line_search.max_evals)));
        try {
            d.validate();
        } catch (const InvalidInput& err) {
            throw ConfigError(err.what());
        }
    }
    c.reject_unused();
    return e;
}

/// Complete runnable config text for `kind` with the built-in defaults.
inline std::string emit_config(Kind kind)
{
        const auto& info = kind_info(kind);
    std::string s;
    auto line = [&](const std::string& k, const std::string& v, const std::string& note = "") {
        s += k + " = " + v + (note.empty() ? "" : "  # " + note) + "\n";
    };
    s += "# " + std::string(info.description) + "\n";
    line("kind", info.name);
    line("output_dir", std::string("out/") + info.name);
    if (is_heat(kind)) {
        const bool second = kind == Kind::KappaHeat || kind == Kind::OptHeat2A || kind == Kind::OptHeat2B;
        const heat::HeatSetup h;
        s += "\n# heat equation on [a, b] x [0, T], Neumann flux control at x = a, observation at x = b\n";
        line("heat.a", shortest(h.a));
        line("heat.b", shortest(h.b));
        line("heat.T", shortest(h.T));
        line("heat.nx", std::to_string(h.nx));
        line("heat.nt", std::to_string(h.nt));
        line("heat.u0", second ? generator_text(heat::initial_temperature_problem2()) : "zero", "initial temperature");
        line("heat.true_flux", generator_text(heat::true_flux()), "exp(-4) t (18 - 1000 cos(15 pi t / 2))");
        line("heat.initial", generator_text(heat::initial_flux()), "18 sin(pi t / 2) exp(-4 t)");
        line("heat.l1", shortest(h.l1), "H1 gradient length scale");
        if (is_constrained(kind)) line("heat.E0", "auto", "constraint level; auto = [E]_T of the initial guess");
        if (kind == Kind::KappaHeat) {
            s += "\n";
            line("heat.perturbation", generator_text(heat::perturbation_flux()), "4 t exp((pi - 4) t)");
            line("kappa.ladder", "200x400, 200x800, 200x1600", "NXxNT grids, one CSV pair each");
        }
    } else {
        const ns::NsConfig n;
        s += "\n# 2D Navier-Stokes on [0, 2pi]^2; set ns.paper_scale = true for 256/64 grids, k_c = 8, T = 50 (hours)\n";
        line("ns.paper_scale", "false");
        line("ns.nu_N", shortest(n.nu_N));
        line("ns.alpha", shortest(n.alpha), "Ekman friction");
        line("ns.F", shortest(n.F), "forcing amplitude");
        line("ns.k_a", std::to_string(n.k_a));
        line("ns.k_b", std::to_string(n.k_b));
        line("ns.forcing_seed", std::to_string(n.forcing_seed));
        line("ns.n_dns", std::to_string(n.n_dns));
        line("ns.n_les", std::to_string(n.n_les));
        line("ns.k_c", shortest(n.k_c), "LES box-filter cutoff");
        line("ns.dt", shortest(n.dt));
        line("ns.T", shortest(n.T));
        line("ns.init_seed", std::to_string(n.init_seed));
        line("ns.init_enstrophy", shortest(n.init_enstrophy));
        line("ns.spinup_time", shortest(n.spinup_time), "DNS spin-up before t = 0");
        line("ns.spinup_dt", shortest(n.spinup_dt));
        s += "\n# closure nu(s) = (eta^3 sqrt(s) + nu0) phi(s / s_max)\n";
        line("ns.nu0", shortest(n.nu0));
        line("ns.n_sigma", std::to_string(n.n_sigma));
        line("ns.s_max", "auto", "auto = 1.2 max |grad w|^2 on the Leith trajectory");
        line("ns.C_L", shortest(n.C_L), "Leith constant; starting point when tuned");
        line("ns.tune_leith", "true", "bisect C_L onto the enstrophy constraint");
        line("ns.D", "auto", "auto = int P^2 dt of the filtered DNS");
        line("ns.E0", "auto", "auto = [E]_T of the filtered DNS");
        line("ns.l1", shortest(n.metric.length(1)), "H2 gradient length scales");
        line("ns.l2", shortest(n.metric.length(2)));
        if (kind == Kind::KappaLes) {
            s += "\n";
            line("kappa.dt_ladder", "1e-3, 5e-4");
            line("kappa.perturbations", "leith, exp", "Leith with C_L = 4.2e-3; nu'(s) = exp(-2 s / 30)");
        }
        if (kind == Kind::SolveDns || kind == Kind::SolveLes)
            line("ns.snapshot_every", "0", "write a binary snapshot every N steps; 0 = none");
    }
    if (kind == Kind::KappaHeat || kind == Kind::KappaLes) {
        s += "\n";
        line("kappa.eps_count", "25");
        line("kappa.eps_hi", "1");
        line("kappa.eps_lo", "1e-14");
    }
    if (is_opt(kind)) {
        const opt::DescentOptions d;
        const bool les = kind == Kind::OptLes3A || kind == Kind::OptLes3B;
        s += "\n";
        line("opt.max_iters", les ? "20" : kind == Kind::OptHeat1B ? "100" : "200");
        line("opt.rel_tol", les ? "1e-12" : shortest(d.rel_tol));
        line("opt.pr_cg", "true", "unconstrained runs only");
        line("opt.step_cap", "0", "constrained runs without retraction; 0 = step_cap_fraction |phi0| / |P g0|");
        line("opt.step_cap_fraction", shortest(d.step_cap_fraction));
        line("opt.ls_growth", shortest(d.line_search.growth));
        line("opt.ls_tol", shortest(d.line_search.tol));
        line("opt.ls_max_evals", std::to_string(d.line_search.max_evals));
    }
    return s;
}

struct RunSummary {
    std::size_t iterations = 0;
    double J0 = 0.0, J_final = 0.0;
    double C0 = 0.0, C_final = 0.0;
    std::string stop_reason;
    double wall_seconds = 0.0;
    std::vector<std::string> extra;  // additional `key = value` lines
};

namespace detail {

inline std::string fmt17(double v) { return heat::format_double(v); }

inline void write_control(const std::string& path, const char* axis, const GridFunction& phi)
{
    std::ofstream f(path);
    if (!f) throw InvalidInput("cannot open '" + path + "' for writing");
    f << axis << ",phi\n";
    for (std::size_t i = 0; i < phi.size(); ++i) f << fmt17(phi.grid.node(i)) << ',' << fmt17(phi[i]) << '\n';
}

class TraceWriter {
public:
    explicit TraceWriter(const std::string& path) : f_(path)
    {
        if (!f_) throw InvalidInput("cannot open '" + path + "' for writing");
        f_ << "n,J,J_norm,constraint,constraint_norm,tau,grad_norm,pgrad_norm\n";
    }
    void operator()(const opt::TraceRecord& r)
    {
        if (r.n == 0) {
            J0_ = r.J;
            C0_ = r.constraint;
        }
        f_ << r.n << ',' << fmt17(r.J) << ',' << fmt17(r.J / J0_) << ',' << fmt17(r.constraint) << ','
           << fmt17(r.constraint / C0_) << ',' << fmt17(r.tau) << ',' << fmt17(r.grad_norm) << ','
           << fmt17(r.pgrad_norm) << '\n';
        f_.flush();
    }

private:
    std::ofstream f_;
    double J0_ = 1.0, C0_ = 1.0;
};

inline void write_summary(const std::string& path, const Experiment& e, const RunSummary& s)
{
    std::ofstream f(path);
    if (!f) throw InvalidInput("cannot open '" + path + "' for writing");
    f << "kind = " << kind_info(e.kind).name << '\n';
    if (is_opt(e.kind)) {
        f << "iterations = " << s.iterations << '\n';
        f << "J0 = " << fmt17(s.J0) << '\n';
        f << "J_final = " << fmt17(s.J_final) << '\n';
        f << "J_ratio = " << fmt17(s.J_final / s.J0) << '\n';
        f << "constraint_ratio = " << fmt17(s.C_final / s.C0) << '\n';
        f << "stop_reason = " << s.stop_reason << '\n';
    }
    for (const auto& x : s.extra) f << x << '\n';
    f << "wall_time_s = " << fmt17(s.wall_seconds) << '\n';
}

inline std::string tag(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline void fit_lines(RunSummary& s, const std::string& name, const kappa::KappaReport& rep)
{
    const auto f = kappa::plateau_fit(rep);
    s.extra.push_back(name + ".level = " + fmt17(f.level));
    s.extra.push_back(name + ".width_decades = " + fmt17(f.width_decades));
}

inline opt::DescentResult run_descent(const Experiment& e, const opt::ProblemAdapter& a, const GridFunction& phi0,
                                      const char* axis, RunSummary& s)
{
    const std::string dir = e.output_dir;
    write_control(dir + "/control_initial.csv", axis, phi0);
    TraceWriter tw(dir + "/trace.csv");
    auto res = opt::descend(a, phi0, e.descent, [&](const opt::TraceRecord& r) {
        tw(r);
        info("iter " + std::to_string(r.n) + "  J = " + fmt17(r.J) + "  constraint = " + fmt17(r.constraint));
    });
    write_control(dir + "/control_final.csv", axis, res.control);
    const auto& rec = res.trace.records;
    s.iterations = rec.back().n;
    s.J0 = rec.front().J;
    s.J_final = rec.back().J;
    s.C0 = rec.front().constraint;
    s.C_final = rec.back().constraint;
    s.stop_reason = res.trace.stop_reason;
    return res;
}

inline void run_heat(const Experiment& e, RunSummary& s)
{
    if (e.kind == Kind::KappaHeat) {
        const auto eps = kappa::default_epsilons(e.eps_count, e.eps_hi, e.eps_lo);
        for (auto [nx, nt] : e.heat_ladder) {
            auto setup = e.heat;
            setup.nx = nx;
            setup.nt = nt;
            const heat::HeatProblem P(heat::build_config(setup));
            const auto tg = P.config().tgrid();
            const auto phi = setup.initial.sample(tg), dphi = e.heat_perturbation.sample(tg);
            const std::string suffix = "_nx" + std::to_string(nx) + "_nt" + std::to_string(nt);
            const auto r1 = kappa::kappa_sweep([&](const GridFunction& p) { return P.objective(p); }, phi, dphi,
                                               P.l2_gradient(phi), eps);
            const auto r2 = kappa::kappa_sweep([&](const GridFunction& p) { return P.constraint(p); }, phi, dphi,
                                               P.l2_normal(phi), eps);
            kappa::write_csv(r1, e.output_dir + "/kappa_1" + suffix + ".csv");
            kappa::write_csv(r2, e.output_dir + "/kappa_2" + suffix + ".csv");
            fit_lines(s, "kappa_1" + suffix, r1);
            fit_lines(s, "kappa_2" + suffix, r2);
        }
        return;
    }
    auto P = std::make_shared<const heat::HeatProblem>(heat::build_config(e.heat));
    auto a = P->adapter(P);
    run_descent(e, a, e.heat.initial.sample(P->config().tgrid()), "t", s);
}

/// Prepared LES problem with the Leith starting point.
struct LesSetup {
    std::shared_ptr<ns::LesProblem> problem;
    double C_L = 0.0;
    GridFunction phi0;
};

inline LesSetup les_setup(const ns::NsConfig& cfg, const ns::LesTarget& tg, bool tune)
{
    LesSetup L;
    L.problem = std::make_shared<ns::LesProblem>(cfg, tg);
    L.C_L = tune ? L.problem->tune_leith() : cfg.C_L;
    L.phi0 = L.problem->leith_phi(L.C_L);
    return L;
}

inline void les_lines(RunSummary& s, const LesSetup& L)
{
    const auto& c = L.problem->config();
    s.extra.push_back("C_L = " + fmt17(L.C_L));
    s.extra.push_back("s_max = " + fmt17(c.s_max));
    s.extra.push_back("D = " + fmt17(c.D));
    s.extra.push_back("E0 = " + fmt17(c.E0));
    s.extra.push_back("eddy_turnover = " + fmt17(L.problem->target().eddy_turnover));
}

inline ns::SnapshotFn snapshot_writer(const Experiment& e, const std::string& name, std::shared_ptr<std::ofstream>& out)
{
    if (e.snapshot_every == 0) return {};
    out = std::make_shared<std::ofstream>(e.output_dir + "/" + name, std::ios::binary);
    if (!*out) throw InvalidInput("cannot open snapshot file in '" + e.output_dir + "'");
    auto f = out;
    const auto every = e.snapshot_every;
    return [f, every](std::size_t n, double t, const ns::SpectralField& w) {
        if (n % every == 0) ns::write_snapshot(*f, w, t);
    };
}

inline void run_ns(const Experiment& e, RunSummary& s)
{
    const auto& dir = e.output_dir;
    std::shared_ptr<std::ofstream> dns_snap, les_snap;
    info("preparing DNS target");
    const auto tg = ns::prepare_target(e.ns, e.kind == Kind::SolveDns ? snapshot_writer(e, "snapshots_dns.bin", dns_snap)
                                                                        : ns::SnapshotFn{});
    ns::write_diagnostics_csv(dir + "/diag_dns.csv", tg.t, tg.enstrophy_raw, tg.palinstrophy_raw);
    ns::write_diagnostics_csv(dir + "/diag_dns_filtered.csv", tg.t, tg.enstrophy, tg.palinstrophy);
    if (e.kind == Kind::SolveDns) {
        s.extra.push_back("eddy_turnover = " + fmt17(tg.eddy_turnover));
        s.extra.push_back("E0 = " + fmt17(tg.E0));
        s.extra.push_back("D = " + fmt17(tg.D));
        return;
    }
    if (e.kind == Kind::KappaLes) {
        const auto eps = kappa::default_epsilons(e.eps_count, e.eps_hi, e.eps_lo);
        for (double dt : e.les_dt_ladder) {
            auto cfg = e.ns;
            cfg.dt = dt;
            // the DNS target is resampled to the LES time levels of this rung
            const auto tgd = dt == e.ns.dt ? tg : ns::prepare_target(cfg);
            const auto L = les_setup(cfg, tgd, e.tune_leith);
            const auto& P = *L.problem;
            const auto g = P.l2_gradient(L.phi0), nrm = P.l2_normal(L.phi0);
            for (const auto& pert : e.les_perturbations) {
                const auto dphi = pert == "leith" ? P.perturbation_leith() : P.perturbation_exp();
                const std::string suffix = "_" + pert + "_dt" + tag(dt);
                const auto r3 = kappa::kappa_sweep([&](const GridFunction& p) { return P.objective(p); }, L.phi0,
                                                   dphi, g, eps);
                const auto r4 = kappa::kappa_sweep([&](const GridFunction& p) { return P.constraint(p); }, L.phi0,
                                                   dphi, nrm, eps);
                kappa::write_csv(r3, dir + "/kappa_3" + suffix + ".csv");
                kappa::write_csv(r4, dir + "/kappa_4" + suffix + ".csv");
                fit_lines(s, "kappa_3" + suffix, r3);
                fit_lines(s, "kappa_4" + suffix, r4);
            }
        }
        return;
    }
    const auto L = les_setup(e.ns, tg, e.tune_leith);
    les_lines(s, L);
    if (e.kind == Kind::SolveLes) {
        auto snap = snapshot_writer(e, "snapshots_les.bin", les_snap);
        const auto h = ns::solve_les(L.problem->config(), tg.w0, L.problem->closure(L.phi0), false, snap);
        ns::write_diagnostics_csv(dir + "/diag_les.csv", h.t, h.enstrophy, h.palinstrophy);
        write_control(dir + "/control_initial.csv", "sigma", L.phi0);
        return;
    }
    const auto res = run_descent(e, L.problem->adapter(L.problem), L.phi0, "sigma", s);
    const auto& h0 = L.problem->state(L.phi0);
    ns::write_diagnostics_csv(dir + "/diag_les_initial.csv", h0.t, h0.enstrophy, h0.palinstrophy);
    const auto& h1 = L.problem->state(res.control);
    ns::write_diagnostics_csv(dir + "/diag_les_final.csv", h1.t, h1.enstrophy, h1.palinstrophy);
}

} // namespace detail

/// Runs the experiment and writes its artifacts into `e.output_dir`.
inline RunSummary run_experiment(const Experiment& e)
{
    const auto t0 = std::chrono::steady_clock::now();
    std::filesystem::create_directories(e.output_dir);
    set_quiet(e.quiet);
    RunSummary s;
    if (is_heat(e.kind))
        detail::run_heat(e, s);
    else
        detail::run_ns(e, s);
    s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    detail::write_summary(e.output_dir + "/summary.txt", e, s);
    return s;
}

} // namespace adjopt::app
