#include "adjopt/heat/problems.hpp"
#include "adjopt/opt/brent.hpp"
#include "adjopt/opt/descent.hpp"
#include "adjopt/opt/manifold.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace adjopt;
using namespace adjopt::opt;

namespace {

GridFunction random_signal(const UniformGrid1D& g, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GridFunction f(g);
    for (double& v : f.values) v = u(rng);
    return f;
}

// J = 1/2 |phi - target|^2_{L2}; constraint = 1/2 |phi|^2_{L2} (homogeneous of degree two).
ProblemAdapter quadratic_adapter(const GridFunction& target, double level)
{
    ProblemAdapter a;
    a.eval_objective = [target](const GridFunction& p) {
        GridFunction d = p - target;
        return 0.5 * l2_inner(d, d);
    };
    a.eval_constraint = [](const GridFunction& p) { return 0.5 * l2_inner(p, p); };
    a.sobolev_gradient = [target](const GridFunction& p) { return p - target; };
    a.sobolev_normal = [](const GridFunction& p) { return p; };
    a.metric = SobolevMetric::l2();
    a.constraint_level = level;
    a.retraction_available = true;
    return a;
}

} // namespace

TEST(Brent, QuadraticAndCosine)
{
    auto q = brent_minimize([](double t) { return (t - 2.0) * (t - 2.0); }, 0.0, 5.0, 1e-8, 100);
    EXPECT_NEAR(q.tau, 2.0, 1e-6);
    auto c = brent_minimize([](double t) { return std::cos(t); }, 2.0, 4.0, 1e-8, 100);
    EXPECT_NEAR(c.tau, std::numbers::pi, 1e-6);
    auto lm = line_minimize([](double t) { return (t - 2.0) * (t - 2.0); }, 4.0, 1.0, 2.0, 1e-8, 60);
    EXPECT_NEAR(lm.tau, 2.0, 1e-6);
    auto tiny = line_minimize([](double t) { return (t - 1e-3) * (t - 1e-3); }, 1e-6, 1.0, 2.0, 1e-8, 80);
    EXPECT_NEAR(tiny.tau, 1e-3, 1e-8);
}

TEST(Brent, MonotoneFunctionFailsToBracket)
{
    int evals = 0;
    EXPECT_THROW(bracket_minimum([](double t) { return t; }, 0.0, 1.0, 2.0, 20, evals), LineSearchFailure);
    evals = 0;
    EXPECT_THROW(bracket_minimum([](double t) { return -t; }, 0.0, 1.0, 2.0, 20, evals), LineSearchFailure);
}

TEST(Projection, TangentPureNormalAndIdempotent)
{
    std::mt19937_64 rng(21);
    UniformGrid1D g(0.0, 1.0, 100);
    const auto m = SobolevMetric::h1(0.1);
    auto N = random_signal(g, rng), Phi = random_signal(g, rng);
    auto P = project_tangent(Phi, N, m);
    EXPECT_NEAR(inner_product(P, N, m), 0.0, 1e-10 * sobolev_norm(P, m) * sobolev_norm(N, m));
    auto PP = project_tangent(P, N, m);
    for (std::size_t i = 0; i <= g.n; ++i) EXPECT_NEAR(PP[i], P[i], 1e-12);
    auto zero = project_tangent(3.0 * N, N, m);
    for (double v : zero.values) EXPECT_NEAR(v, 0.0, 1e-12);
    EXPECT_THROW(project_tangent(Phi, GridFunction(g), m), DegenerateNormal);
}

TEST(Retraction, RescalesOntoLevel)
{
    std::mt19937_64 rng(22);
    UniformGrid1D g(0.0, 1.0, 50);
    auto a = quadratic_adapter(GridFunction(g), 1.0);
    auto phi = random_signal(g, rng);
    auto r = retract_rescale(phi, a);
    EXPECT_NEAR(a.eval_constraint(r), 1.0, 1e-12);
    a.constraint_level = a.eval_constraint(phi) / 4.0;
    auto half = retract_rescale(phi, a);
    for (std::size_t i = 0; i <= g.n; ++i) EXPECT_NEAR(half[i], 0.5 * phi[i], 1e-14);
    EXPECT_THROW(retract_rescale(GridFunction(g), a), InvalidState);
    a.retraction_available = false;
    EXPECT_THROW(retract_rescale(phi, a), InvalidState);
}

TEST(Retraction, HeatProblemOneExact)
{
    auto c = heat::build_config(heat::problem_setup(1, 40, 80));
    auto P = std::make_shared<heat::HeatProblem>(c);
    auto a = P->adapter(P);
    std::mt19937_64 rng(23);
    auto phi = random_signal(c.tgrid(), rng);
    EXPECT_NEAR(a.eval_constraint(retract_rescale(phi, a)) / c.E0, 1.0, 1e-10);
}

TEST(PolakRibiere, StartStationaryAndDescent)
{
    std::mt19937_64 rng(24);
    UniformGrid1D g(0.0, 1.0, 30);
    const auto m = SobolevMetric::h1(0.2);
    auto g1 = random_signal(g, rng);
    auto d0 = pr_cg_direction(g1, nullptr, nullptr, m);
    for (std::size_t i = 0; i <= g.n; ++i) EXPECT_EQ(d0[i], -g1[i]);
    auto dprev = random_signal(g, rng);
    auto same = pr_cg_direction(g1, &g1, &dprev, m);
    for (std::size_t i = 0; i <= g.n; ++i) EXPECT_EQ(same[i], -g1[i]);
    for (int trial = 0; trial < 20; ++trial) {
        auto gn = random_signal(g, rng), gp = random_signal(g, rng), dp = random_signal(g, rng);
        EXPECT_LT(inner_product(pr_cg_direction(gn, &gp, &dp, m), gn, m), 0.0);
    }
}

TEST(Descend, QuadraticConverges)
{
    std::mt19937_64 rng(25);
    UniformGrid1D g(0.0, 1.0, 40);
    auto target = random_signal(g, rng);
    auto a = quadratic_adapter(target, 1.0);
    DescentOptions o;
    o.max_iters = 50;
    o.rel_tol = 1e-14;
    auto r = descend(a, GridFunction(g, std::vector<double>(g.size(), 0.3)), o);
    EXPECT_LT(r.trace.records.back().J, 1e-10);
    for (std::size_t i = 1; i < r.trace.records.size(); ++i)
        EXPECT_LE(r.trace.records[i].J, r.trace.records[i - 1].J);
}

TEST(Descend, ConstrainedWithRetractionStaysOnLevel)
{
    std::mt19937_64 rng(26);
    UniformGrid1D g(0.0, 1.0, 40);
    auto target = random_signal(g, rng);
    auto a = quadratic_adapter(target, 0.05);
    DescentOptions o;
    o.mode = DescentMode::Constrained;
    o.max_iters = 30;
    o.rel_tol = 1e-14;
    auto r = descend(a, random_signal(g, rng), o);
    for (const auto& rec : r.trace.records) EXPECT_NEAR(rec.constraint / 0.05, 1.0, 1e-12);
    EXPECT_LT(r.trace.records.back().J, r.trace.records.front().J);
}

TEST(Descend, DegenerateNormalFallsBack)
{
    UniformGrid1D g(0.0, 1.0, 20);
    GridFunction target(g, std::vector<double>(g.size(), 1.0));
    auto a = quadratic_adapter(target, 1.0);
    a.sobolev_normal = [g](const GridFunction&) { return GridFunction(g); };
    a.retraction_available = false;
    DescentOptions o;
    o.mode = DescentMode::Constrained;
    o.max_iters = 5;
    set_quiet(true);
    auto r = descend(a, GridFunction(g), o);
    set_quiet(false);
    EXPECT_LT(r.trace.records.back().J, r.trace.records.front().J);
}

TEST(Descend, SingleStepDriftIsSecondOrder)
{
    // From phi0 on M (E0 = [E(phi0)]_T), |C(phi - tau P g) - E0| ~ tau^2.
    auto c = heat::build_config(heat::problem_setup(2, 100, 200));
    auto P = std::make_shared<heat::HeatProblem>(c);
    auto a = P->adapter(P);
    auto phi = heat::initial_flux().sample(c.tgrid());
    auto Pg = project_tangent(a.sobolev_gradient(phi), a.sobolev_normal(phi), a.metric);
    const double tau0 = 0.05 * sobolev_norm(phi, a.metric) / sobolev_norm(Pg, a.metric);
    std::vector<double> x, y;
    for (double tau : {tau0, tau0 / 2, tau0 / 4}) {
        GridFunction p = phi;
        p.axpy(-tau, Pg);
        x.push_back(std::log(tau));
        y.push_back(std::log(std::abs(a.eval_constraint(p) - c.E0)));
    }
    const double slope = ((y[2] - y[0]) / (x[2] - x[0]));
    EXPECT_NEAR(slope, 2.0, 0.3);
}
