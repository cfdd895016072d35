#include "biharm/submersion.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace biharm;
using namespace biharm::submersion;
using expr::parse;

namespace {

geometry::MetricField half_plane()
{
    const auto one = expr::Expression::constant(1.0), zero = expr::Expression::constant(0.0);
    return geometry::MetricField({"x", "y"}, {one, zero, zero, one}, {parse("y")});
}

WarpedProduct quartic_warping(double c)
{
    return WarpedProduct{half_plane(), 1, parse("0.5*ln(" + std::to_string(c) + ")+2*ln(y)"), {"z"}};
}

} // namespace

TEST(Submersion, WarpedTotalMetric)
{
    const auto g = total_metric(quartic_warping(3.0));
    EXPECT_EQ(g.vars(), (std::vector<std::string>{"x", "y", "z"}));
    const auto m = g.evaluate(std::vector<double>{0.1, 2.0, 0.7});
    EXPECT_NEAR(m[0], 1.0, 1e-15);
    EXPECT_NEAR(m[4], 1.0, 1e-15);
    EXPECT_NEAR(m[8], 3.0 * 16.0, 1e-12);
    EXPECT_EQ(m[1], 0.0);
    EXPECT_EQ(m[5], 0.0);
}

TEST(Submersion, TwistedAndCylindricalMetrics)
{
    const auto flat = total_metric(TwistedProduct{2, expr::Expression::constant(0.0)});
    const auto f = flat.evaluate(std::vector<double>{0.3, 0.4, 0.5});
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            EXPECT_DOUBLE_EQ(f[i * 3 + j], i == j ? 1.0 : 0.0);
    const auto cyl = total_metric(Cylindrical{});
    EXPECT_EQ(cyl.vars(), (std::vector<std::string>{"r", "theta", "phi", "x4"}));
    const auto c = cyl.evaluate(std::vector<double>{2.0, std::numbers::pi / 6, 0.3, 1.0});
    EXPECT_NEAR(c[0], 1.0, 1e-15);
    EXPECT_NEAR(c[5], 4.0, 1e-15);
    EXPECT_NEAR(c[10], 1.0, 1e-14);
    EXPECT_NEAR(c[15], 1.0, 1e-15);
}

TEST(Submersion, CylinderMeanCurvatureAndTension)
{
    const std::vector<double> p{2.0, std::numbers::pi / 3, 0.0, 0.5};
    const auto mu = mean_curvature(Cylindrical{}, p);
    EXPECT_NEAR(mu.components[0], -0.5, 1e-14);
    EXPECT_NEAR(mu.components[1], 0.0, 1e-14);
    EXPECT_NEAR(mu.components[2], 0.0, 1e-14);
    EXPECT_NEAR(mu.components[3], 0.0, 1e-14);
    const auto tau = tension_field(Cylindrical{}, p);
    ASSERT_EQ(tau.components.size(), 2u);
    EXPECT_NEAR(tau.components[0], 1.0, 1e-14);
    EXPECT_NEAR(tau.components[1], 0.0, 1e-14);
}

TEST(Submersion, WarpedMeanCurvatureIsMinusGradLambda)
{
    const std::vector<double> p{0.3, 2.0, -1.0};
    const auto mu = mean_curvature(quartic_warping(1.0), p);
    EXPECT_NEAR(mu.components[0], 0.0, 1e-14);
    EXPECT_NEAR(mu.components[1], -1.0, 1e-14);
    EXPECT_NEAR(mu.components[2], 0.0, 1e-14);
    const auto tau = tension_field(quartic_warping(1.0), p);
    EXPECT_NEAR(tau.components[0], 0.0, 1e-14);
    EXPECT_NEAR(tau.components[1], 1.0, 1e-14);
}

TEST(Submersion, TensionIsComposedFromMeanCurvature)
{
    const AdaptedChart chart(WarpedProduct{geometry::MetricField::sphere2(), 2, parse("sin(theta)*cos(phi)"), {}});
    const std::vector<double> p{1.1, 0.4, 0.2, -0.3};
    const auto mu = mean_curvature(chart, p);
    const auto tau = tension_field(chart, p);
    const double k = chart.fiber_dim();
    EXPECT_EQ(tau.components[0], -k * mu.components[0]);
    EXPECT_EQ(tau.components[1], -k * mu.components[1]);
}

TEST(Submersion, ConstantLambdaHasTotallyGeodesicFibers)
{
    const auto mu = mean_curvature(WarpedProduct{geometry::MetricField::euclidean(2), 3, parse("0.7"), {}},
                                   std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5});
    for (double v : mu.components)
        EXPECT_EQ(v, 0.0);
}

TEST(Submersion, Basicness)
{
    const std::vector<std::vector<double>> base{{0.5, 1.0}, {1.5, 2.0}};
    EXPECT_TRUE(is_basic_mean_curvature(quartic_warping(2.0), base).basic);
    const std::vector<std::vector<double>> line{{0.5}, {1.0}};
    const auto twisted = is_basic_mean_curvature(TwistedProduct{1, parse("x1*t")}, line);
    EXPECT_FALSE(twisted.basic);
    EXPECT_GT(twisted.max_variation, 1e-3);
    EXPECT_TRUE(is_basic_mean_curvature(TwistedProduct{1, parse("x1^2")}, line).basic);
}

TEST(Submersion, TwistedFrameConnection)
{
    const auto fc = frame_connection(TwistedProduct{2, parse("x1^2+t")}, std::vector<double>{1.0, 0.0, 0.3});
    EXPECT_NEAR(fc.kappa[0], -2.0, 1e-14);
    EXPECT_NEAR(fc.kappa[1], 0.0, 1e-14);
    for (double v : fc.p)
        EXPECT_EQ(v, 0.0);
    for (double v : fc.sigma)
        EXPECT_EQ(v, 0.0);
}

TEST(Submersion, IntegrabilityDataFrameConnection)
{
    auto zero = expr::Expression::constant(0.0), one = expr::Expression::constant(1.0);
    auto data = make_integrability_data(2, {{one, zero, zero}, {zero, one, zero}, {zero, zero, one}}, {zero, zero});
    const std::vector<double> p{0.1, 0.2, 0.3};
    for (double v : frame_connection(data, p).p)
        EXPECT_EQ(v, 0.0);

    set_f(data, 0, 1, 0, parse("0.7"));
    set_f(data, 0, 1, 1, parse("-0.4"));
    const auto fc = frame_connection(data, p);
    const double f1 = 0.7, f2 = -0.4;
    EXPECT_NEAR(fc.P(1, 0, 0), -f1, 1e-15);
    EXPECT_NEAR(fc.P(0, 0, 1), f1, 1e-15);
    EXPECT_NEAR(fc.P(1, 1, 0), -f2, 1e-15);
    EXPECT_NEAR(fc.P(0, 1, 1), f2, 1e-15);
    EXPECT_NEAR(fc.P(0, 0, 0), 0.0, 1e-15);
    EXPECT_NEAR(fc.P(1, 1, 1), 0.0, 1e-15);
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                EXPECT_NEAR(fc.P(k, i, j) - fc.P(k, j, i), data.f_at(i, j, k).kind() == expr::NodeKind::constant
                                                               ? data.f_at(i, j, k).constant_value()
                                                               : expr::eval<double>(data.f_at(i, j, k), data.vars, p),
                            1e-15);
}

TEST(Submersion, BracketsReproduceDeclaredData)
{
    // Heisenberg-type frame: e2 has a vertical component, so sigma is nonzero.
    auto zero = expr::Expression::constant(0.0), one = expr::Expression::constant(1.0);
    auto data = make_integrability_data(2, {{one, zero, zero}, {zero, one, parse("x")}, {zero, zero, one}},
                                        {zero, zero}, {"x", "y", "t"});
    set_sigma(data, 0, 1, parse("-0.5"));
    const AdaptedChart chart(data);
    for (const std::vector<double>& p : {std::vector<double>{0.2, 0.1, 0.0}, std::vector<double>{-1.0, 2.0, 3.0}}) {
        EXPECT_LT(frame_orthonormality_error(chart, p), 1e-12);
        const auto m = measure_integrability_data(chart, p);
        for (double v : m.f)
            EXPECT_NEAR(v, 0.0, 1e-12);
        EXPECT_NEAR(m.sigma[1], -0.5, 1e-12);
        EXPECT_NEAR(m.sigma[2], 0.5, 1e-12);
    }
}

TEST(Submersion, ModelErrors)
{
    EXPECT_THROW(AdaptedChart(WarpedProduct{half_plane(), 1, parse("ln(q)"), {}}), ModelError);
    EXPECT_THROW(AdaptedChart(WarpedProduct{half_plane(), 1, parse("y"), {"x"}}), ModelError);
    auto zero = expr::Expression::constant(0.0);
    EXPECT_THROW(AdaptedChart(make_integrability_data(2, {{zero, zero}}, {zero, zero})), ModelError);
}

TEST(Submersion, DomainChecks)
{
    const AdaptedChart chart(quartic_warping(1.0));
    EXPECT_TRUE(chart.in_domain(std::vector<double>{0.0, 1.0, 0.0}));
    EXPECT_FALSE(chart.in_domain(std::vector<double>{0.0, -1.0, 0.0}));
    EXPECT_THROW(chart.require_domain(std::vector<double>{0.0, -1.0, 0.0}), geometry::ChartDomainError);
    EXPECT_THROW(mean_curvature(chart, std::vector<double>{0.0, 0.0, 0.0}), geometry::ChartDomainError);
    const AdaptedChart cyl(Cylindrical{});
    EXPECT_THROW(cyl.require_domain(std::vector<double>{0.0, 1.0, 0.0, 0.0}), geometry::ChartDomainError);
}
