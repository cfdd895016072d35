#include "biharm/cli.hpp"
#include "biharm/golden.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace biharm;
using namespace biharm::cli;
using nlohmann::json;

namespace {

json half_plane_manifest(const std::string& lambda)
{
    return json{{"model",
                 {{"kind", "warped_product"},
                  {"base", {{"vars", {"x", "y"}}, {"entries", {{1, 0}, {0, 1}}}, {"validity", {"y"}}}},
                  {"lambda", lambda}}},
                {"criteria", {"wp-warped"}},
                {"grid", {"y=0.5:4:30"}}};
}

std::string pointer_of(const json& j)
{
    try {
        parse_manifest(j);
    } catch (const ManifestError& e) {
        return e.pointer();
    }
    return "<no error>";
}

} // namespace

TEST(Cli, GridAxis)
{
    const auto a = parse_grid_axis("y=0.5:4:30");
    EXPECT_EQ(a.var, "y");
    EXPECT_EQ(a.count, 30);
    EXPECT_DOUBLE_EQ(a.at(0), 0.5);
    EXPECT_DOUBLE_EQ(a.at(29), 4.0);
    const auto fixed = parse_grid_axis("theta=pi/3");
    EXPECT_EQ(fixed.count, 1);
    EXPECT_NEAR(fixed.min, std::numbers::pi / 3, 1e-15);
    EXPECT_THROW(parse_grid_axis("y=0:1:1"), ManifestError);
    EXPECT_THROW(parse_grid_axis("y=0:1"), ManifestError);
    EXPECT_THROW(parse_grid_axis("y0:1:3"), ManifestError);
    EXPECT_THROW(parse_grid_axis("y=0:x:3"), ManifestError);
    EXPECT_THROW(parse_grid_axis("y=0:1:3.5"), ManifestError);
}

TEST(Cli, ManifestErrorsCarryPointers)
{
    auto m = half_plane_manifest("2*ln(y)");
    EXPECT_EQ(pointer_of(m), "<no error>");

    auto bad_lambda = m;
    bad_lambda["model"]["lambda"] = "2*ln(";
    EXPECT_EQ(pointer_of(bad_lambda), "/model/lambda");

    auto bad_kind = m;
    bad_kind["model"]["kind"] = "torus";
    EXPECT_EQ(pointer_of(bad_kind), "/model/kind");

    auto bad_criterion = m;
    bad_criterion["criteria"] = {"wp-warped", "nonsense"};
    EXPECT_EQ(pointer_of(bad_criterion), "/criteria/1");

    auto bad_grid = m;
    bad_grid["grid"] = {"y=0.5:4:30", "q=0:1:3"};
    EXPECT_EQ(pointer_of(bad_grid), "/grid/1");

    auto bad_entries = m;
    bad_entries["model"]["base"]["entries"] = {{1, 0}};
    EXPECT_EQ(pointer_of(bad_entries), "/model/base/entries");

    auto bad_tol = m;
    bad_tol["tolerances"] = {{"wp-warped", -1}};
    EXPECT_EQ(pointer_of(bad_tol), "/tolerances/wp-warped");

    auto missing = m;
    missing.erase("criteria");
    EXPECT_EQ(pointer_of(missing), "/criteria");

    auto unknown = m;
    unknown["colour"] = "blue";
    EXPECT_EQ(pointer_of(unknown), "/colour");

    EXPECT_EQ(pointer_of(json::array()), "");
}

TEST(Cli, ParsesEveryModelKind)
{
    const json twisted{{"kind", "twisted_product"}, {"base_dim", 2}, {"lambda", "x1*t"}};
    EXPECT_TRUE(std::holds_alternative<submersion::TwistedProduct>(parse_model(twisted)));
    EXPECT_TRUE(std::holds_alternative<submersion::Cylindrical>(parse_model(json{{"kind", "cylindrical"}})));
    const json sphere{{"kind", "warped_product"}, {"base", "sphere2"}, {"fiber_dim", 2}, {"lambda", "cos(theta)"}};
    const auto w = std::get<submersion::WarpedProduct>(parse_model(sphere));
    EXPECT_EQ(w.fiber_dim, 2);
    EXPECT_EQ(submersion::AdaptedChart(w).vars(), (std::vector<std::string>{"theta", "phi", "t1", "t2"}));
    const json data{{"kind", "integrability_data"},
                    {"base_dim", 2},
                    {"vars", {"x", "y", "t"}},
                    {"frame", {{"y", 0, 0}, {0, "y", 0}, {0, 0, 1}}},
                    {"kappa", {"-y*y", 0}},
                    {"f", {{"1,2,1", -1}}},
                    {"base_ricci", {{"gauss", -1}}}};
    const auto d = std::get<submersion::IntegrabilityData>(parse_model(data));
    EXPECT_EQ(d.f_at(0, 1, 0).constant_value(), -1.0);
    EXPECT_EQ(expr::print(d.f_at(1, 0, 0)), "-(-1)");
    auto bad_key = data;
    bad_key["f"] = {{"1,2", 1}};
    try {
        parse_model(bad_key);
        FAIL();
    } catch (const ManifestError& e) {
        EXPECT_EQ(e.pointer(), "/model/f/1,2");
    }
}

TEST(Cli, QuarticWarpingIsProperBiharmonic)
{
    const auto report = run_check(parse_manifest(golden::quartic_warping_manifest(1.0)));
    EXPECT_TRUE(report.passed());
    EXPECT_EQ(report.exit_code(), ExitCode::ok);
    ASSERT_EQ(report.summary.size(), 3u);
    for (const auto& s : report.summary) {
        EXPECT_EQ(s.verdict, "proper-biharmonic");
        EXPECT_LT(s.max_norm, 1e-6);
    }
}

TEST(Cli, ConstantLambdaIsHarmonic)
{
    const auto report = run_check(parse_manifest(half_plane_manifest("0.3")));
    EXPECT_TRUE(report.passed());
    EXPECT_EQ(report.summary[0].verdict, "biharmonic");
    EXPECT_LT(report.summary[0].max_norm, 1e-10);
}

TEST(Cli, PerturbedWarpingFails)
{
    const auto report = run_check(parse_manifest(half_plane_manifest("2.25*ln(y)")));
    EXPECT_FALSE(report.passed());
    EXPECT_EQ(report.exit_code(), ExitCode::verdict_failure);
    EXPECT_EQ(report.summary[0].verdict, "not-biharmonic");
    EXPECT_GT(report.summary[0].max_norm, 1e-2);
    EXPECT_NEAR(report.summary[0].max_norm, 4.5, 1e-9);
    EXPECT_DOUBLE_EQ(report.summary[0].argmax[1], 0.5);
}

TEST(Cli, ReportInvariants)
{
    auto m = half_plane_manifest("2*ln(y)+0.1*x^2");
    m["criteria"] = {"wp-warped", "bochner", "eq1-general"};
    m["grid"] = {"x=-1:1:4", "y=0.5:2:5"};
    m["tolerances"] = {{"bochner", 1e-5}};
    const auto report = run_check(parse_manifest(m), {3, std::nullopt});
    EXPECT_EQ(report.records.size(), 4u * 5u * 3u);
    EXPECT_EQ(report.grid_vars, (std::vector<std::string>{"x", "y"}));
    for (std::size_t c = 0; c < 3; ++c) {
        double max = 0.0;
        for (std::size_t k = c; k < report.records.size(); k += 3) {
            EXPECT_EQ(report.records[k].criterion, report.summary[c].criterion);
            max = std::max(max, report.records[k].norm);
        }
        EXPECT_EQ(max, report.summary[c].max_norm);
    }
    EXPECT_EQ(report.summary[1].tolerance, 1e-5);
    EXPECT_EQ(report.summary[0].tolerance, 1e-6);
    // Last axis varies fastest.
    EXPECT_EQ(report.records[3].index, (std::vector<int>{0, 1}));
    EXPECT_EQ(report_body(report)["summary"][1]["tolerance"], 1e-5);

    const auto overridden = run_check(parse_manifest(m), {1, 10.0});
    for (const auto& s : overridden.summary)
        EXPECT_EQ(s.tolerance, 10.0);
}

TEST(Cli, EinsteinVerdictUsesConstancy)
{
    auto m = half_plane_manifest("2*ln(y)");
    m["criteria"] = {"einstein"};
    const auto ok = run_check(parse_manifest(m));
    EXPECT_TRUE(ok.passed());
    ASSERT_TRUE(ok.summary[0].constancy.has_value());
    EXPECT_NEAR(ok.summary[0].constancy->mean, 0.0, 1e-12);

    m["model"]["lambda"] = "2.25*ln(y)";
    EXPECT_FALSE(run_check(parse_manifest(m)).passed());
}

TEST(Cli, RequireProper)
{
    auto m = half_plane_manifest("0.3");
    m["require_proper"] = true;
    const auto report = run_check(parse_manifest(m));
    EXPECT_EQ(report.summary[0].verdict, "biharmonic");
    EXPECT_FALSE(report.passed());
}

TEST(Cli, DomainAndApplicabilityErrors)
{
    auto outside = half_plane_manifest("2*ln(y)");
    outside["grid"] = {"y=-1:1:3"};
    EXPECT_THROW(run_check(parse_manifest(outside)), geometry::ChartDomainError);

    const json cyl{{"model", {{"kind", "cylindrical"}}}, {"criteria", {"eq1-general", "twisted"}}};
    try {
        run_check(parse_manifest(cyl));
        FAIL();
    } catch (const ManifestError& e) {
        EXPECT_EQ(e.pointer(), "/criteria/1");
    }
}

TEST(Cli, PointErrorsAreReported)
{
    // bas-basic refuses a twisted product whose mean curvature is not basic.
    const json m{{"model", {{"kind", "twisted_product"}, {"base_dim", 1}, {"lambda", "x1*t"}}},
                 {"criteria", {"bas-basic", "eq1-general"}},
                 {"grid", {"x1=0.5:1:3", "t=0.2"}}};
    const auto report = run_check(parse_manifest(m));
    EXPECT_EQ(report.summary[0].errors, 3);
    EXPECT_EQ(report.summary[0].verdict, "error");
    EXPECT_EQ(report.exit_code(), ExitCode::numerical_error);
    EXPECT_TRUE(report.records[0].error.has_value());
    EXPECT_EQ(report.summary[1].errors, 0);
}

TEST(Cli, DeterministicAcrossWorkerCounts)
{
    const auto m = parse_manifest(golden::quartic_warping_manifest(2.0));
    const auto one = report_json(run_check(m, {1, std::nullopt}), "T");
    EXPECT_EQ(one, report_json(run_check(m, {1, std::nullopt}), "T"));
    EXPECT_EQ(one, report_json(run_check(m, {8, std::nullopt}), "T"));
    EXPECT_EQ(one.substr(0, one.find('\n')), R"({"generated":"T","tool":"biharm","version":"0.1.0"})");
}

TEST(Cli, CsvLayout)
{
    const auto csv = report_csv(run_check(parse_manifest(half_plane_manifest("2*ln(y)"))), "T");
    EXPECT_EQ(csv.rfind("# generated T", 0), 0u);
    const auto header = csv.substr(csv.find('\n') + 1, csv.find('\n', csv.find('\n') + 1) - csv.find('\n') - 1);
    EXPECT_EQ(header, "i_y,x,y,t,criterion,norm,mu_norm,error,c0,c1");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 32);
}

TEST(Cli, FamiliesManifest)
{
    const std::vector<kappa::KappaFamily> two_i{{kappa::Case::I, 1.0, 0.0, 0}, {kappa::Case::I, 1.0, 0.0, 1}};
    const auto j = families_manifest(two_i, {});
    EXPECT_EQ(j["model"]["lambda"], "2*ln(x1)+2*ln(x2)");
    EXPECT_EQ(j["model"]["base"], "euclidean(2)");
    const auto report = run_check(parse_manifest(j));
    EXPECT_TRUE(report.passed());

    const std::vector<kappa::KappaFamily> single_ii{{kappa::Case::II, 2.0, 0.0, 0}};
    EXPECT_EQ(families_manifest(single_ii, {})["model"]["lambda"], "2*ln(cos(1*(x1)))");

    EXPECT_THROW(families_manifest({}, {}), kappa::FamilyError);
    const std::vector<GridAxis> through_pole{parse_grid_axis("x1=-1:1:5")};
    EXPECT_THROW(families_manifest(two_i, through_pole), kappa::PoleError);
    const std::vector<GridAxis> stray{parse_grid_axis("x3=1:2:3")};
    EXPECT_THROW(families_manifest(two_i, stray), kappa::FamilyError);
}

TEST(Cli, DefaultAxesAvoidPoles)
{
    for (auto c : {kappa::Case::I, kappa::Case::II, kappa::Case::III}) {
        const kappa::KappaFamily f{c, 1.7, -0.4, 0};
        const auto a = default_axis(f);
        EXPECT_NO_THROW(kappa::require_interval(f, a.min, a.max));
        EXPECT_EQ(a.count, 5);
    }
}
