#include "adjopt/core/banded.hpp"
#include "adjopt/core/grid.hpp"
#include "adjopt/core/sobolev.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace adjopt;

namespace {

constexpr double pi = std::numbers::pi;

GridFunction random_signal(const UniformGrid1D& g, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GridFunction f(g);
    for (double& v : f.values) v = u(rng);
    return f;
}

// Dense Gaussian elimination with partial pivoting; test-only reference.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b)
{
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
        std::swap(a[k], a[p]);
        std::swap(b[k], b[p]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) a[i][j] -= m * a[k][j];
            b[i] -= m * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= a[k][j] * x[j];
        x[k] = s / a[k][k];
    }
    return x;
}

} // namespace

TEST(Grid, RejectsDegenerateGrids)
{
    EXPECT_THROW(UniformGrid1D(0.0, 1.0, 1), InvalidInput);
    EXPECT_THROW(UniformGrid1D(1.0, 1.0, 4), InvalidInput);
    UniformGrid1D g(0.0, 2.0, 4);
    EXPECT_DOUBLE_EQ(g.spacing(), 0.5);
    EXPECT_DOUBLE_EQ(g.node(3), 1.5);
    EXPECT_THROW(GridFunction(g, std::vector<double>(3)), InvalidInput);
}

TEST(Trapezoid, ConstantAndLinearExact)
{
    std::vector<double> ones(11, 1.0);
    EXPECT_DOUBLE_EQ(trapezoid(ones, 0.1), 1.0);
    for (std::size_t n : {3u, 10u, 77u}) {
        std::vector<double> t(n + 1);
        for (std::size_t i = 0; i <= n; ++i) t[i] = static_cast<double>(i) / n;
        EXPECT_NEAR(trapezoid(t, 1.0 / n), 0.5, 1e-15);
    }
}

TEST(Trapezoid, QuadraticWithinTolerance)
{
    const std::size_t n = 1000;
    std::vector<double> t(n + 1);
    for (std::size_t i = 0; i <= n; ++i) t[i] = std::pow(static_cast<double>(i) / n, 2);
    EXPECT_NEAR(trapezoid(t, 1.0 / n), 1.0 / 3.0, 1e-6);
}

TEST(Trapezoid, TooFewSamplesThrows)
{
    std::vector<double> one{1.0};
    EXPECT_THROW(trapezoid(one, 1.0), InvalidInput);
}

TEST(InnerProduct, OrderZeroIsL2)
{
    std::mt19937_64 rng(1);
    UniformGrid1D g(0.0, 1.0, 50);
    auto a = random_signal(g, rng), b = random_signal(g, rng);
    EXPECT_DOUBLE_EQ(inner_product(a, b, SobolevMetric::l2()), l2_inner(a, b));
}

TEST(InnerProduct, VanishingLengthTendsToL2)
{
    std::mt19937_64 rng(2);
    UniformGrid1D g(0.0, 1.0, 50);
    auto a = random_signal(g, rng), b = random_signal(g, rng);
    EXPECT_NEAR(inner_product(a, b, SobolevMetric::h1(1e-9)), l2_inner(a, b), 1e-12);
}

TEST(InnerProduct, SineClosedForm)
{
    const double T = 1.0, l1 = 0.01;
    UniformGrid1D g(0.0, T, 1000);
    auto z = GridFunction::sample(g, [&](double t) { return std::sin(pi * t / T); });
    const double expect = T / 2.0 * (1.0 + l1 * l1 * pi * pi / (T * T));
    EXPECT_NEAR(inner_product(z, z, SobolevMetric::h1(l1)), expect, 1e-4);
}

TEST(InnerProduct, SymmetricAndBilinear)
{
    std::mt19937_64 rng(3);
    UniformGrid1D g(0.0, 1.0, 64);
    for (const auto& m : {SobolevMetric::h1(0.3), SobolevMetric::h2(0.2, 0.1)}) {
        auto a = random_signal(g, rng), b = random_signal(g, rng), c = random_signal(g, rng);
        EXPECT_EQ(inner_product(a, b, m), inner_product(b, a, m));
        const double al = 0.7, be = -1.3;
        GridFunction lin = al * a + be * c;
        const double lhs = inner_product(lin, b, m);
        const double rhs = al * inner_product(a, b, m) + be * inner_product(c, b, m);
        EXPECT_NEAR(lhs, rhs, 1e-12 * (std::abs(al * inner_product(a, b, m)) + std::abs(be * inner_product(c, b, m))));
    }
}

TEST(InnerProduct, MismatchedGridsThrow)
{
    GridFunction a(UniformGrid1D(0.0, 1.0, 10)), b(UniformGrid1D(0.0, 1.0, 11));
    EXPECT_THROW(inner_product(a, b, SobolevMetric::l2()), InvalidInput);
}

TEST(MMatrixTridiag, MatchesDenseSolve)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    const std::size_t n = 9;
    std::vector<double> lo(n), up(n), s(n), f(n);
    for (std::size_t i = 0; i < n; ++i) {
        lo[i] = i == 0 ? 0.0 : u(rng);
        up[i] = i + 1 == n ? 0.0 : u(rng);
        s[i] = u(rng) + 0.1;
        f[i] = u(rng) - 1.0;
    }
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        a[i][i] = s[i] + lo[i] + up[i];
        if (i > 0) a[i][i - 1] = -lo[i];
        if (i + 1 < n) a[i][i + 1] = -up[i];
    }
    const auto ref = dense_solve(a, f);
    const auto x = solve_mmatrix_tridiag(lo, up, s, f);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i], ref[i], 1e-13);
}

TEST(SolveBvp, ZeroRhsGivesZero)
{
    UniformGrid1D g(0.0, 1.0, 40);
    GridFunction z(g);
    for (double v : solve_gradient_bvp(z, SobolevMetric::h1(0.1), BvpBoundaryKind::DirichletZero).values)
        EXPECT_EQ(v, 0.0);
    for (double v : solve_gradient_bvp(z, SobolevMetric::h2(1.0, 0.5), BvpBoundaryKind::NaturalOddDeriv).values)
        EXPECT_EQ(v, 0.0);
}

TEST(SolveBvp, BoundaryKindMustMatchOrder)
{
    GridFunction z(UniformGrid1D(0.0, 1.0, 10));
    EXPECT_THROW(solve_gradient_bvp(z, SobolevMetric::h1(0.1), BvpBoundaryKind::NaturalOddDeriv), InvalidInput);
    EXPECT_THROW(solve_gradient_bvp(z, SobolevMetric::h2(0.1, 0.1), BvpBoundaryKind::DirichletZero), InvalidInput);
}

TEST(SolveBvp, H1SineEigenfunction)
{
    const double T = 2.0, l1 = 0.1;
    for (int k : {1, 3}) {
        UniformGrid1D g(0.0, T, 400);
        auto f = GridFunction::sample(g, [&](double t) { return std::sin(k * pi * t / T); });
        auto out = solve_gradient_bvp(f, SobolevMetric::h1(l1), BvpBoundaryKind::DirichletZero);
        const double ratio = 1.0 / (1.0 + l1 * l1 * std::pow(k * pi / T, 2));
        for (std::size_t i = 0; i <= g.n; ++i) EXPECT_NEAR(out[i], ratio * f[i], 1e-4);
    }
}

TEST(SolveBvp, H2CosineEigenfunctionConstantsPass)
{
    UniformGrid1D g(0.0, 1.0, 256);
    const double l1 = 0.1, l2 = 0.05;
    auto f = GridFunction::sample(g, [](double s) { return std::cos(2.0 * pi * s); });
    auto out = solve_gradient_bvp(f, SobolevMetric::h2(l1, l2), BvpBoundaryKind::NaturalOddDeriv);
    const double kp = 2.0 * pi;
    const double ratio = 1.0 / (1.0 + l1 * l1 * kp * kp + std::pow(l2 * kp, 4));
    for (std::size_t i = 0; i <= g.n; ++i) EXPECT_NEAR(out[i], ratio * f[i], 1e-4);

    GridFunction c(g, std::vector<double>(g.size(), 3.5));
    for (const auto& m : {SobolevMetric::h2(l1, l2), SobolevMetric::h2(1000.0, 100.0), SobolevMetric::h2(0.05, 0.1)}) {
        auto oc = solve_gradient_bvp(c, m, BvpBoundaryKind::NaturalOddDeriv);
        for (double v : oc.values) EXPECT_NEAR(v, 3.5, 1e-9);
    }
}

TEST(SolveBvp, H2MatchesGhostNodeDenseReference)
{
    // Assemble I - c1 D2 + c2 D4 with 5-point stencils and mirrored ghost nodes.
    std::mt19937_64 rng(5);
    for (const auto& m : {SobolevMetric::h2(0.3, 0.1), SobolevMetric::h2(0.05, 0.2)}) {
        UniformGrid1D g(0.0, 1.0, 24);
        const std::size_t n = g.n;
        const double h = g.spacing();
        const double c1 = std::pow(m.length(1), 2), c2 = std::pow(m.length(2), 4);
        auto idx = [&](long j) -> std::size_t {
            if (j < 0) j = -j;
            if (j > static_cast<long>(n)) j = 2 * static_cast<long>(n) - j;
            return static_cast<std::size_t>(j);
        };
        std::vector<std::vector<double>> a(n + 1, std::vector<double>(n + 1, 0.0));
        const double d2[3] = {1.0, -2.0, 1.0};
        const double d4[5] = {1.0, -4.0, 6.0, -4.0, 1.0};
        for (std::size_t i = 0; i <= n; ++i) {
            a[i][i] += 1.0;
            for (int o = -1; o <= 1; ++o) a[i][idx(static_cast<long>(i) + o)] -= c1 * d2[o + 1] / (h * h);
            for (int o = -2; o <= 2; ++o) a[i][idx(static_cast<long>(i) + o)] += c2 * d4[o + 2] / std::pow(h, 4);
        }
        auto f = random_signal(g, rng);
        const auto ref = dense_solve(a, f.values);
        const auto out = solve_gradient_bvp(f, m, BvpBoundaryKind::NaturalOddDeriv);
        for (std::size_t i = 0; i <= n; ++i) EXPECT_NEAR(out[i], ref[i], 1e-10);
    }
}

TEST(SolveBvp, SelfAdjointInL2)
{
    std::mt19937_64 rng(6);
    UniformGrid1D g(0.0, 1.0, 100);
    struct Case {
        SobolevMetric m;
        BvpBoundaryKind bc;
    };
    for (const auto& c : {Case{SobolevMetric::h1(0.05), BvpBoundaryKind::DirichletZero},
                          Case{SobolevMetric::h2(0.2, 0.1), BvpBoundaryKind::NaturalOddDeriv},
                          Case{SobolevMetric::h2(1000.0, 100.0), BvpBoundaryKind::NaturalOddDeriv}}) {
        auto a = random_signal(g, rng), b = random_signal(g, rng);
        if (c.bc == BvpBoundaryKind::DirichletZero) {
            a[0] = a[g.n] = b[0] = b[g.n] = 0.0;
        }
        const double lhs = l2_inner(solve_gradient_bvp(a, c.m, c.bc), b);
        const double rhs = l2_inner(a, solve_gradient_bvp(b, c.m, c.bc));
        EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(std::abs(lhs), 1e-3 * l2_norm(a) * l2_norm(b)));
    }
}

TEST(SolveBvp, RieszIdentity)
{
    std::mt19937_64 rng(7);
    UniformGrid1D g(0.0, 1.0, 120);
    {
        auto f = random_signal(g, rng), z = random_signal(g, rng);
        z[0] = z[g.n] = 0.0;
        const auto m = SobolevMetric::h1(0.01);
        const double lhs = inner_product(solve_gradient_bvp(f, m, BvpBoundaryKind::DirichletZero), z, m);
        EXPECT_NEAR(lhs, l2_inner(f, z), 1e-8 * std::abs(l2_inner(f, z)));
    }
    // Evaluating the H2 form with very long length scales cancels catastrophically,
    // so the identity is checked at moderate scales; the long-scale solve is
    // covered by the cosine-basis reference below.
    for (const auto& m : {SobolevMetric::h2(0.2, 0.1), SobolevMetric::h2(1.0, 0.5)}) {
        auto f = random_signal(g, rng), z = random_signal(g, rng);
        const double lhs = inner_product(solve_gradient_bvp(f, m, BvpBoundaryKind::NaturalOddDeriv), z, m);
        EXPECT_NEAR(lhs, l2_inner(f, z), 1e-8 * std::abs(l2_inner(f, z)));
    }
}

TEST(SolveBvp, H2MatchesCosineSeriesAtLongScales)
{
    // The reflected operator is diagonal in cos(k pi i / n) with trapezoid weights.
    std::mt19937_64 rng(8);
    UniformGrid1D g(0.0, 1.0, 64);
    const std::size_t n = g.n;
    const double h = g.spacing();
    for (const auto& m : {SobolevMetric::h2(1000.0, 100.0), SobolevMetric::h2(3.0, 1.0)}) {
        auto f = random_signal(g, rng);
        const double c1 = std::pow(m.length(1), 2), c2 = std::pow(m.length(2), 4);
        std::vector<double> ref(n + 1, 0.0);
        for (std::size_t k = 0; k <= n; ++k) {
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i <= n; ++i) {
                const double c = std::cos(pi * double(k) * double(i) / double(n));
                const double w = trapezoid_weight(i, n, h);
                num += w * f[i] * c;
                den += w * c * c;
            }
            const double mu = std::pow(2.0 / h * std::sin(pi * double(k) / (2.0 * double(n))), 2);
            const double coef = num / den / (1.0 + c1 * mu + c2 * mu * mu);
            for (std::size_t i = 0; i <= n; ++i) ref[i] += coef * std::cos(pi * double(k) * double(i) / double(n));
        }
        const auto out = solve_gradient_bvp(f, m, BvpBoundaryKind::NaturalOddDeriv);
        for (std::size_t i = 0; i <= n; ++i) EXPECT_NEAR(out[i], ref[i], 1e-12);
    }
}

TEST(SolveBvp, LowPassMonotoneInWavenumber)
{
    UniformGrid1D g(0.0, 1.0, 200);
    const auto m = SobolevMetric::h1(0.05);
    double prev = 2.0;
    for (int k = 1; k <= 8; ++k) {
        auto f = GridFunction::sample(g, [&](double t) { return std::sin(k * pi * t); });
        auto out = solve_gradient_bvp(f, m, BvpBoundaryKind::DirichletZero);
        const double amp = l2_norm(out) / l2_norm(f);
        EXPECT_LT(amp, prev);
        prev = amp;
    }
}
