#include "biharm/biharmonic.hpp"
#include "biharm/random_expr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace biharm;
using namespace biharm::biharmonic;
using expr::parse;
using submersion::AdaptedChart;

namespace {

geometry::MetricField half_plane()
{
    const auto one = expr::Expression::constant(1.0), zero = expr::Expression::constant(0.0);
    return geometry::MetricField({"x", "y"}, {one, zero, zero, one}, {parse("y")});
}

std::string num(double v)
{
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

// (2c - c²)/y³: W-P residual of λ = c ln y on the flat half-plane with one fiber dimension.
double perturbation_oracle(double c, double y) { return (2 * c - c * c) / (y * y * y); }

} // namespace

TEST(Biharmonic, CriterionNames)
{
    EXPECT_EQ(parse_criterion("eq1-general"), Criterion::eq1_general);
    EXPECT_EQ(parse_criterion("1de-integrability"), Criterion::integrability_1de);
    EXPECT_FALSE(parse_criterion("eq2").has_value());
    for (auto c : all_criteria())
        EXPECT_EQ(parse_criterion(criterion_name(c)), c);
    EXPECT_EQ(all_criteria().size(), 7u);
    EXPECT_EQ(default_tolerance(Criterion::bochner), 1e-4);
    EXPECT_EQ(default_tolerance(Criterion::wp_warped), 1e-6);
}

TEST(Biharmonic, QuarticWarpingIsBiharmonic)
{
    for (double c : {0.5, 1.0, 2.0}) {
        const submersion::WarpedProduct w{half_plane(), 1, parse("0.5*ln(" + num(c) + ")+2*ln(y)"), {}};
        const AdaptedChart chart(w);
        for (double y : {0.5, 1.3, 4.0}) {
            const std::vector<double> p{0.2, y, 0.1};
            EXPECT_LT(warped_residual(w.base, w.lambda, 1, std::vector<double>{0.2, y}).norm, 1e-10);
            EXPECT_LT(bitension_basic(chart, p).norm, 1e-10);
            EXPECT_LT(bitension_general(chart, p).norm, 1e-10);
            EXPECT_NEAR(mean_curvature_norm(chart, p), 2.0 / y, 1e-12);
        }
    }
}

TEST(Biharmonic, PerturbationMatchesClosedForm)
{
    for (double c : {2.05, 2.1, 2.25}) {
        for (double y : {0.5, 1.0, 4.0}) {
            const auto r = warped_residual(half_plane(), parse(num(c) + "*ln(y)"), 1, std::vector<double>{0.0, y});
            EXPECT_NEAR(r.components[0], 0.0, 1e-14);
            EXPECT_NEAR(r.components[1], perturbation_oracle(c, y), 1e-12);
        }
    }
    // Frozen values.
    EXPECT_NEAR(perturbation_oracle(2.25, 0.5), -4.5, 1e-15);
    EXPECT_NEAR(perturbation_oracle(2.1, 1.0), -0.21, 1e-15);
    EXPECT_NEAR(perturbation_oracle(2.25, 4.0), -0.0087890625, 1e-15);
}

TEST(Biharmonic, EvaluatorsAgreeOnSphereBaseWithTwoDimensionalFibers)
{
    const submersion::WarpedProduct w{geometry::MetricField::sphere2(), 2, parse("0.3*cos(theta)+0.2*sin(phi)"), {}};
    const AdaptedChart chart(w);
    const std::vector<double> p{1.0, 0.4, 0.3, -0.2};
    const auto gen = bitension_general(chart, p);
    const auto bas = bitension_basic(chart, p);
    const auto pull = bitension_pullback(chart, p);
    const auto wp = warped_residual(w.base, w.lambda, 2, std::vector<double>{1.0, 0.4});
    ASSERT_GT(wp.norm, 1e-3);
    for (int i = 0; i < 2; ++i) {
        EXPECT_NEAR(gen.components[i], bas.components[i], 1e-9);
        EXPECT_NEAR(pull.components[i], bas.components[i], 1e-9);
        EXPECT_NEAR(bas.components[i], 2.0 * wp.components[i], 1e-9);
    }
}

TEST(Biharmonic, BasicEqualsFiberDimTimesWarpedOnRandomModels)
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int k = 1 + trial % 3;
        const submersion::WarpedProduct w{geometry::MetricField::euclidean(2), k,
                                          expr::Expression::constant(0.5) *
                                              expr::random_expression(rng, {"x1", "x2"}, 2),
                                          {}};
        const AdaptedChart chart(w);
        std::vector<double> p;
        for (int i = 0; i < chart.total_dim(); ++i)
            p.push_back(u(rng));
        const auto bas = bitension_basic(chart, p);
        const auto gen = bitension_general(chart, p);
        const auto wp = warped_residual(w.base, w.lambda, k, chart.project(p));
        for (int i = 0; i < 2; ++i) {
            const double scale = std::max(1.0, std::abs(bas.components[i]));
            EXPECT_NEAR(bas.components[i], k * wp.components[i], 1e-6 * scale);
            EXPECT_NEAR(gen.components[i], bas.components[i], 1e-6 * scale);
        }
    }
}

TEST(Biharmonic, HarmonicModelsGiveZero)
{
    const submersion::WarpedProduct w{geometry::MetricField::hyperbolic2(), 2, parse("1.5"), {}};
    const AdaptedChart chart(w);
    const std::vector<double> p{0.2, 1.4, 0.0, 0.0};
    for (auto c : {Criterion::eq1_general, Criterion::bas_basic, Criterion::wp_warped, Criterion::bochner})
        EXPECT_LT(evaluate(chart, c, p).norm, 1e-10) << criterion_name(c);
    const AdaptedChart twisted(submersion::TwistedProduct{2, parse("0.4*t")});
    const std::vector<double> q{0.3, 0.1, 0.5};
    EXPECT_LT(evaluate(twisted, Criterion::twisted, q).norm, 1e-10);
    EXPECT_LT(evaluate(twisted, Criterion::integrability_1de, q).norm, 1e-10);
    EXPECT_LT(evaluate(twisted, Criterion::eq1_general, q).norm, 1e-10);
}

TEST(Biharmonic, CylinderIsBiharmonic)
{
    const AdaptedChart chart(submersion::Cylindrical{});
    const std::vector<double> p{1.7, std::numbers::pi / 3, 0.0, 0.25};
    EXPECT_LT(bitension_general(chart, p).norm, 1e-10);
    EXPECT_LT(bitension_basic(chart, p).norm, 1e-10);
    EXPECT_LT(bitension_pullback(chart, p).norm, 1e-10);
}

TEST(Biharmonic, SinhWarpings)
{
    const auto flat = geometry::MetricField::euclidean(1);
    const std::vector<double> one{1.0};
    EXPECT_NEAR(std::abs(warped_residual(flat, parse("ln(sinh(x1))"), 1, one).components[0]), 0.95071850972601949,
                1e-12);
    EXPECT_LT(warped_residual(flat, parse("2*ln(sinh(x1))"), 1, one).norm, 1e-12);
}

TEST(Biharmonic, NonBasicMeanCurvatureIsRefused)
{
    const AdaptedChart chart(submersion::TwistedProduct{1, parse("x1*t")});
    EXPECT_THROW(bitension_basic(chart, std::vector<double>{0.5, 0.3}), NonBasicError);
    EXPECT_NO_THROW(bitension_general(chart, std::vector<double>{0.5, 0.3}));
}

TEST(Biharmonic, NotApplicable)
{
    const AdaptedChart cyl(submersion::Cylindrical{});
    const std::vector<double> p{1.0, 1.0, 0.0, 0.0};
    EXPECT_THROW(evaluate(cyl, Criterion::wp_warped, p), NotApplicableError);
    EXPECT_THROW(evaluate(cyl, Criterion::twisted, p), NotApplicableError);
    EXPECT_THROW(evaluate(cyl, Criterion::integrability_1de, p), NotApplicableError);
}

TEST(Biharmonic, EinsteinFirstIntegral)
{
    EXPECT_NEAR(einstein_constant(geometry::MetricField::sphere2(), std::vector<double>{1.0, 0.0}), 1.0, 1e-12);
    EXPECT_NEAR(einstein_constant(geometry::MetricField::hyperbolic2(), std::vector<double>{0.0, 1.0}), -1.0, 1e-12);
    const auto flat = geometry::MetricField::euclidean(2);
    // Δλ + (n/2)|grad λ|² for λ = 2 ln x1 + 2 ln x2 is -2/x1² - 2/x2² + 2/x1² + 2/x2² = 0.
    const auto lambda = parse("2*ln(x1)+2*ln(x2)");
    EXPECT_NEAR(einstein_first_integral(flat, lambda, 0.0, 1, std::vector<double>{0.7, 1.9}), 0.0, 1e-13);
    // Scale covariance: shifting λ by a constant changes the integral by exactly 2a·const.
    const auto sphere = geometry::MetricField::sphere2();
    const auto mu = parse("cos(theta)");
    const std::vector<double> q{0.9, 0.1};
    const double base = einstein_first_integral(sphere, mu, 1.0, 1, q);
    EXPECT_NEAR(einstein_first_integral(sphere, parse("cos(theta)+0.75"), 1.0, 1, q) - base, 1.5, 1e-12);
    EXPECT_THROW(einstein_first_integral(sphere, mu, 0.5, 1, q), NotEinsteinError);
    EXPECT_NEAR(einstein_constant(geometry::MetricField({"x", "y"}, {parse("1+x^2"), parse("0"), parse("0"), parse("1")}),
                                  std::vector<double>{0.5, 0.0}),
                0.0, 1e-12);
    const auto z = parse("0"), one = parse("1");
    const geometry::MetricField curved_slab({"x", "y", "z"}, {one, z, z, z, parse("(1+x^2)^2"), z, z, z, one});
    EXPECT_THROW(einstein_constant(curved_slab, std::vector<double>{0.5, 0.0, 0.0}), NotEinsteinError);
}

TEST(Biharmonic, WarpedResidualIgnoresConstantShift)
{
    const auto sphere = geometry::MetricField::sphere2();
    const std::vector<double> q{0.9, 0.1};
    const auto a = warped_residual(sphere, parse("sin(theta)*phi"), 2, q);
    const auto b = warped_residual(sphere, parse("sin(theta)*phi+3"), 2, q);
    EXPECT_NEAR(a.components[0], b.components[0], 1e-12);
    EXPECT_NEAR(a.components[1], b.components[1], 1e-12);
}

TEST(Biharmonic, Constancy)
{
    const std::vector<double> same{2.0, 2.0 + 1e-12, 2.0};
    EXPECT_TRUE(constancy(same, 1e-8).constant);
    const std::vector<double> varies{1.0, 1.1};
    const auto r = constancy(varies, 1e-8);
    EXPECT_FALSE(r.constant);
    EXPECT_DOUBLE_EQ(r.min, 1.0);
    EXPECT_DOUBLE_EQ(r.max, 1.1);
    EXPECT_TRUE(constancy(std::vector<double>{}, 1e-8).constant);
}

TEST(Biharmonic, TwistedResidualExamples)
{
    const submersion::TwistedProduct model{2, parse("x1^2*t")};
    EXPECT_NEAR(twisted_residual(model, std::vector<double>{1.0, 2.0, 0.5}, 0), -0.26424111765711536, 1e-12);
    EXPECT_NEAR(twisted_residual(model, std::vector<double>{1.0, 2.0, 0.0}, 0), 2.0, 1e-12);
    EXPECT_EQ(twisted_residual(submersion::TwistedProduct{1, parse("t^2")}, std::vector<double>{0.3, 0.2}, 0), 0.0);
    EXPECT_THROW(twisted_residual(model, std::vector<double>{1.0, 2.0}, 0), geometry::ChartDomainError);
}

TEST(Biharmonic, TwistedResidualMatchesLaplaceBeltrami)
{
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 3;
        std::vector<std::string> vars;
        for (int i = 1; i <= n; ++i)
            vars.push_back("x" + std::to_string(i));
        vars.push_back("t");
        const submersion::TwistedProduct model{n, expr::Expression::constant(0.5) * expr::random_expression(rng, vars, 2)};
        const auto total = submersion::total_metric(model);
        std::vector<double> p;
        for (int i = 0; i <= n; ++i)
            p.push_back(u(rng));
        const auto r = integrability_residuals(AdaptedChart(model), p);
        for (int i = 0; i < n; ++i) {
            const geometry::ScalarFieldFn k = [&, i](std::span<const Jet3> x) {
                return -expr::eval<Jet3>(model.lambda, vars, x).derivative(i);
            };
            const double lb = geometry::laplacian(total, k, p);
            EXPECT_NEAR(twisted_residual(model, p, i), lb, 1e-8 * std::max(1.0, std::abs(lb)));
            EXPECT_NEAR(r[i], lb, 1e-8 * std::max(1.0, std::abs(lb)));
        }
    }
}

TEST(Biharmonic, BitensionOfOneDimensionalFibersIsMinusIntegrabilityResidual)
{
    const AdaptedChart chart(submersion::TwistedProduct{2, parse("x1^2*t+0.3*x2*t^2")});
    const std::vector<double> p{0.4, -0.6, 0.8};
    const auto gen = bitension_general(chart, p);
    const auto r = integrability_residuals(chart, p);
    const auto expanded = integrability_residuals_expanded(chart, p);
    // The frame e_1, e_2 is the coordinate frame on the flat base.
    for (int k = 0; k < 2; ++k) {
        EXPECT_NEAR(gen.components[k], -r[k], 1e-9);
        EXPECT_NEAR(expanded[k], r[k], 1e-9);
    }
}

TEST(Biharmonic, ClosedFormForTwoDimensionalBase)
{
    auto zero = expr::Expression::constant(0.0);
    // Flat frame on a hyperbolic-type base: e1 = y∂x, e2 = y∂y, e3 = ∂t.
    auto data = submersion::make_integrability_data(2, {{parse("y"), zero, zero}, {zero, parse("y"), zero},
                                                        {zero, zero, parse("1")}},
                                                    {parse("-y*y"), parse("-y*(x+0.4*y)")}, {"x", "y", "t"});
    submersion::set_f(data, 0, 1, 0, parse("-1"));
    submersion::set_gauss_curvature(data, parse("-1"));
    const std::vector<double> p{0.3, 1.2, 0.0};
    const auto full = integrability_residuals(AdaptedChart(data), p);
    const auto corrected = wo_n2_residuals(data, p);
    const auto printed = wo_n2_residuals(data, p, WoForm::as_printed);
    EXPECT_NEAR(full[0], corrected[0], 1e-9);
    EXPECT_NEAR(full[1], corrected[1], 1e-9);
    EXPECT_EQ(printed[0], corrected[0]);
    EXPECT_GT(std::abs(printed[1] - corrected[1]), 1e-3);

    auto trivial = submersion::make_integrability_data(2, {{parse("1"), zero, zero}, {zero, parse("1"), zero},
                                                           {zero, zero, parse("1")}},
                                                       {zero, zero});
    const auto z = wo_n2_residuals(trivial, std::vector<double>{0.1, 0.2, 0.3});
    EXPECT_EQ(z[0], 0.0);
    EXPECT_EQ(z[1], 0.0);
}

TEST(Biharmonic, Bochner)
{
    const auto flat = geometry::MetricField::euclidean(2, {"x", "y"});
    EXPECT_NEAR(bochner_residual(flat, parse("3*x-2*y"), std::vector<double>{0.1, 0.2}), 0.0, 1e-14);
    EXPECT_NEAR(bochner_residual(flat, parse("x^2+y^2"), std::vector<double>{0.7, -0.2}), 0.0, 1e-12);
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> theta(0.4, 2.7), phi(-1.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        const auto lambda = expr::random_expression(rng, {"theta", "phi"}, 3);
        EXPECT_LT(std::abs(bochner_residual(geometry::MetricField::sphere2(), lambda,
                                            std::vector<double>{theta(rng), phi(rng)})),
                  1e-4)
            << expr::print(lambda);
    }
}
