#include "biharm/expr.hpp"
#include "biharm/fd.hpp"
#include "biharm/jet.hpp"
#include "biharm/random_expr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace biharm;

TEST(Jet, SeedOfOneCoordinate)
{
    const auto x = seed(std::vector<double>{2.0});
    ASSERT_EQ(x.size(), 1u);
    EXPECT_EQ(x[0].value(), 2.0);
    EXPECT_EQ(x[0].partial(0), 1.0);
    EXPECT_EQ(x[0].partial(0, 0), 0.0);
    EXPECT_EQ(x[0].partial(0, 0, 0), 0.0);
}

TEST(Jet, SeedRejectsEmptyAndOversizedPoints)
{
    EXPECT_THROW(seed(std::vector<double>{}), std::invalid_argument);
    EXPECT_THROW(seed(std::vector<double>(kMaxJetDirections + 1, 0.0)), std::invalid_argument);
}

TEST(Jet, ProductOfSeeds)
{
    const Jet3 x = Jet3::variable(3.0, 1, 0);
    const Jet3 sq = x * x;
    EXPECT_EQ(sq.value(), 9.0);
    EXPECT_EQ(sq.partial(0), 6.0);
    EXPECT_EQ(sq.partial(0, 0), 2.0);
    EXPECT_EQ(sq.partial(0, 0, 0), 0.0);
}

TEST(Jet, ExpAtZero)
{
    const Jet3 e = exp(Jet3::variable(0.0, 1, 0));
    EXPECT_DOUBLE_EQ(e.value(), 1.0);
    EXPECT_DOUBLE_EQ(e.partial(0), 1.0);
    EXPECT_DOUBLE_EQ(e.partial(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(e.partial(0, 0, 0), 1.0);
}

TEST(Jet, MixedPartialsAreSymmetric)
{
    const auto x = seed(std::vector<double>{0.4, -0.3, 1.2});
    const Jet3 f = sin(x[0] * x[1]) * exp(x[2]) + x[0] * x[1] * x[2];
    EXPECT_EQ(f.partial(0, 1), f.partial(1, 0));
    EXPECT_EQ(f.partial(0, 1, 2), f.partial(2, 1, 0));
    EXPECT_EQ(f.partial(0, 0, 2), f.partial(0, 2, 0));
    const double expected = std::cos(0.4 * -0.3) - 0.4 * -0.3 * std::sin(0.4 * -0.3);
    EXPECT_NEAR(f.partial(0, 1), expected * std::exp(1.2) + 1.2, 1e-14);
}

TEST(Jet, OrderTracking)
{
    const Jet3 x = Jet3::variable(1.5, 1, 0);
    EXPECT_EQ(x.order(), 3);
    const Jet3 d = (x * x * x).derivative(0);
    EXPECT_EQ(d.order(), 2);
    EXPECT_DOUBLE_EQ(d.value(), 3 * 1.5 * 1.5);
    EXPECT_DOUBLE_EQ(d.partial(0), 6 * 1.5);
    EXPECT_DOUBLE_EQ(d.partial(0, 0), 6.0);
    EXPECT_EQ((d + x).order(), 2);
    const Jet3 d3 = d.derivative(0).derivative(0);
    EXPECT_EQ(d3.order(), 0);
    EXPECT_DOUBLE_EQ(d3.value(), 6.0);
    EXPECT_THROW(d3.derivative(0), std::logic_error);
    EXPECT_THROW(d.partial(0, 0, 0), std::logic_error);
}

TEST(Jet, ConstantsBroadcast)
{
    const Jet3 c(2.5);
    const Jet3 x = Jet3::variable(1.0, 3, 1);
    const Jet3 s = c * x + c;
    EXPECT_EQ(s.directions(), 3);
    EXPECT_DOUBLE_EQ(s.value(), 5.0);
    EXPECT_DOUBLE_EQ(s.partial(1), 2.5);
    EXPECT_DOUBLE_EQ(s.partial(0), 0.0);
}

TEST(Jet, RestrictedAndEmbedded)
{
    const auto x = seed(std::vector<double>{0.5, 2.0});
    const Jet3 f = x[0] * x[0] * x[1];
    const std::vector<int> kept{1};
    const Jet3 r = f.restricted(kept);
    EXPECT_EQ(r.directions(), 1);
    EXPECT_DOUBLE_EQ(r.value(), 0.5);
    EXPECT_DOUBLE_EQ(r.partial(0), 0.25);
    EXPECT_DOUBLE_EQ(r.partial(0, 0), 0.0);
    const std::vector<int> map{2, 0};
    const Jet3 e = f.embedded(3, map);
    EXPECT_EQ(e.directions(), 3);
    EXPECT_DOUBLE_EQ(e.partial(2), f.partial(0));
    EXPECT_DOUBLE_EQ(e.partial(0), f.partial(1));
    EXPECT_DOUBLE_EQ(e.partial(2, 2, 0), f.partial(0, 0, 1));
}

TEST(Jet, LinearityIsExact)
{
    std::mt19937_64 rng(3);
    const std::vector<std::string> vars{"x", "y"};
    const auto p = seed(std::vector<double>{0.2, -0.4});
    for (int i = 0; i < 20; ++i) {
        const auto f = expr::random_expression(rng, vars, 3);
        const auto g = expr::random_expression(rng, vars, 3);
        const Jet3 jf = expr::eval<Jet3>(f, vars, p);
        const Jet3 jg = expr::eval<Jet3>(g, vars, p);
        const Jet3 combo = expr::eval<Jet3>(expr::Expression::constant(2.0) * f + expr::Expression::constant(-3.0) * g,
                                            vars, p);
        const Jet3 lin = 2.0 * jf + (-3.0) * jg;
        for (std::size_t k = 0; k < combo.coefficients().size(); ++k)
            EXPECT_NEAR(combo.coefficients()[k], lin.coefficients()[k], 1e-12 * (1 + std::abs(lin.coefficients()[k])));
    }
}

TEST(Jet, ChainRuleMatchesComposition)
{
    // sin(g) through the expression language equals sin applied to the jet of g.
    const std::vector<std::string> vars{"x", "y"};
    const auto p = seed(std::vector<double>{0.7, 0.1});
    const auto g = expr::parse("x^2*y+exp(y)");
    const Jet3 direct = expr::eval<Jet3>(expr::call(expr::UnaryOp::sin, g), vars, p);
    const Jet3 composed = sin(expr::eval<Jet3>(g, vars, p));
    for (std::size_t k = 0; k < direct.coefficients().size(); ++k)
        EXPECT_DOUBLE_EQ(direct.coefficients()[k], composed.coefficients()[k]);
}

TEST(Fd, Examples)
{
    const RealFunction sq = [](std::span<const double> x) { return x[0] * x[0]; };
    const std::vector<double> one{1.0};
    EXPECT_NEAR(fd_partial(sq, one, std::vector<int>{0, 0}, FDScheme::uniform(1e-3)), 2.0, 1e-6);

    const RealFunction two_ln = [](std::span<const double> y) { return 2 * std::log(y[0]); };
    const std::vector<double> two{2.0};
    EXPECT_NEAR(fd_partial(two_ln, two, std::vector<int>{0, 0, 0}, FDScheme::uniform(1e-2)), 0.5, 1e-3);

    const RealFunction s = [](std::span<const double> x) { return std::sin(x[0]); };
    const std::vector<double> zero{0.0};
    EXPECT_NEAR(fd_partial(s, zero, std::vector<int>{0}, FDScheme::uniform(1e-4)), 1.0, 1e-8);
}

TEST(Fd, Errors)
{
    const RealFunction ln = [](std::span<const double> x) { return std::log(x[0]); };
    const std::vector<double> p{1e-5};
    EXPECT_THROW(fd_partial(ln, p, std::vector<int>{0, 0, 0, 0}), FdError);
    EXPECT_THROW(fd_partial(ln, p, std::vector<int>{0, 0, 0}, {}, [](std::span<const double> x) { return x[0] > 0; }),
                 FdError);
    EXPECT_THROW(fd_partial(ln, std::vector<double>{1.0}, std::vector<int>{0}, FDScheme::uniform(-1.0)), FdError);
}

TEST(Jet, AgreesWithFiniteDifferences)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 3;
        std::vector<std::string> vars;
        for (int i = 1; i <= n; ++i)
            vars.push_back("x" + std::to_string(i));
        const auto e = expr::random_expression(rng, vars, 3);
        std::vector<double> p;
        for (int i = 0; i < n; ++i)
            p.push_back(u(rng));
        const Jet3 jet = expr::eval<Jet3>(e, vars, seed(p));
        const RealFunction f = [&](std::span<const double> q) { return expr::eval<double>(e, vars, q); };
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
                for (int k = j; k < n; ++k) {
                    const std::vector<int> m1{i}, m2{i, j}, m3{i, j, k};
                    const double a1 = jet.partial(i), a2 = jet.partial(i, j), a3 = jet.partial(i, j, k);
                    EXPECT_NEAR(fd_partial(f, p, m1), a1, std::max(1e-5 * std::abs(a1), 1e-6)) << expr::print(e);
                    EXPECT_NEAR(fd_partial(f, p, m2), a2, std::max(1e-5 * std::abs(a2), 1e-6)) << expr::print(e);
                    EXPECT_NEAR(fd_partial(f, p, m3), a3, std::max(1e-3 * std::abs(a3), 1e-4)) << expr::print(e);
                }
    }
}
