#include "biharm/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <sstream>
#include <thread>

namespace biharm::cli {

using nlohmann::json;
using biharmonic::Criterion;

namespace {

constexpr double kProperThreshold = 1e-9;

bool applies(const submersion::AdaptedChart& chart, Criterion c)
{
    const auto& m = chart.model();
    switch (c) {
    case Criterion::eq1_general:
    case Criterion::bas_basic: return true;
    case Criterion::wp_warped:
    case Criterion::einstein:
    case Criterion::bochner: return std::holds_alternative<submersion::WarpedProduct>(m);
    case Criterion::integrability_1de:
        return std::holds_alternative<submersion::TwistedProduct>(m) ||
               std::holds_alternative<submersion::IntegrabilityData>(m);
    case Criterion::twisted: return std::holds_alternative<submersion::TwistedProduct>(m);
    }
    return false;
}

struct Sweep {
    std::vector<GridAxis> axes; // manifest grid, in order
    std::vector<int> axis_var;  // chart index of each axis
    std::vector<double> base;   // values for coordinates outside the grid
    std::size_t size = 1;

    std::vector<int> index(std::size_t flat) const
    {
        std::vector<int> idx(axes.size());
        for (std::size_t a = axes.size(); a-- > 0;) {
            const auto n = static_cast<std::size_t>(axes[a].count);
            idx[a] = static_cast<int>(flat % n);
            flat /= n;
        }
        return idx;
    }

    std::vector<double> point(const std::vector<int>& idx) const
    {
        auto p = base;
        for (std::size_t a = 0; a < axes.size(); ++a)
            p[static_cast<std::size_t>(axis_var[a])] = axes[a].at(idx[a]);
        return p;
    }
};

Sweep make_sweep(const Manifest& m, const submersion::AdaptedChart& chart)
{
    Sweep s;
    s.base = chart.default_point();
    const auto& vars = chart.vars();
    for (const auto& axis : m.grid) {
        const auto it = std::find(vars.begin(), vars.end(), axis.var);
        if (it == vars.end())
            throw ManifestError("/grid", "'" + axis.var + "' is not a chart variable of this model");
        s.axes.push_back(axis);
        s.axis_var.push_back(static_cast<int>(it - vars.begin()));
        s.size *= static_cast<std::size_t>(axis.count);
    }
    return s;
}

std::string fmt(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string verdict_label(Criterion c, bool holds, double max_mu)
{
    if (c == Criterion::bochner)
        return holds ? "identity-holds" : "identity-violated";
    if (!holds)
        return "not-biharmonic";
    return max_mu > kProperThreshold ? "proper-biharmonic" : "biharmonic";
}

} // namespace

bool ResidualReport::passed() const
{
    return std::all_of(summary.begin(), summary.end(), [](const auto& s) { return s.passed; });
}

int ResidualReport::exit_code() const
{
    if (passed())
        return ExitCode::ok;
    for (const auto& s : summary)
        if (s.errors > 0)
            return ExitCode::numerical_error;
    return ExitCode::verdict_failure;
}

int default_jobs()
{
    if (const char* env = std::getenv("BIHARM_JOBS")) {
        int v = 0;
        const std::string_view s(env);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && ptr == s.data() + s.size() && v >= 1)
            return v;
    }
    return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

ResidualReport run_check(const Manifest& manifest, const CheckOptions& options)
{
    const submersion::AdaptedChart chart(manifest.model);
    for (std::size_t i = 0; i < manifest.criteria.size(); ++i)
        if (!applies(chart, manifest.criteria[i]))
            throw ManifestError("/criteria/" + std::to_string(i),
                                std::string(biharmonic::criterion_name(manifest.criteria[i])) + " does not apply to " +
                                    submersion::kind_name(manifest.model));

    const Sweep sweep = make_sweep(manifest, chart);
    for (std::size_t k = 0; k < sweep.size; ++k)
        chart.require_domain(sweep.point(sweep.index(k)));

    ResidualReport report;
    report.manifest = manifest.source;
    report.vars = chart.vars();
    for (const auto& a : sweep.axes)
        report.grid_vars.push_back(a.var);

    const std::size_t nc = manifest.criteria.size();
    report.records.resize(sweep.size * nc);

    auto work = [&](std::size_t k) {
        const auto idx = sweep.index(k);
        const auto p = sweep.point(idx);
        double mu = 0.0;
        std::optional<std::string> mu_error;
        try {
            mu = biharmonic::mean_curvature_norm(chart, p);
        } catch (const std::exception& e) {
            mu_error = e.what();
        }
        for (std::size_t c = 0; c < nc; ++c) {
            auto& rec = report.records[k * nc + c];
            rec.index = idx;
            rec.coordinates = p;
            rec.criterion = manifest.criteria[c];
            rec.mu_norm = mu;
            if (mu_error) {
                rec.error = *mu_error;
                continue;
            }
            try {
                const auto r = biharmonic::evaluate(chart, rec.criterion, p);
                rec.components = r.components;
                rec.norm = r.norm;
                if (!std::isfinite(rec.norm))
                    rec.error = "non-finite residual";
            } catch (const std::exception& e) {
                rec.error = e.what();
            }
        }
    };

    const int jobs = std::max(1, options.jobs);
    if (jobs == 1 || sweep.size <= 1) {
        for (std::size_t k = 0; k < sweep.size; ++k)
            work(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const auto n = std::min<std::size_t>(static_cast<std::size_t>(jobs), sweep.size);
        for (std::size_t t = 0; t < n; ++t)
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < sweep.size; k = next++)
                    work(k);
            });
        for (auto& t : pool)
            t.join();
    }

    for (std::size_t c = 0; c < nc; ++c) {
        CriterionSummary s;
        s.criterion = manifest.criteria[c];
        s.tolerance = options.tolerance ? *options.tolerance
                      : manifest.tolerances.contains(s.criterion) ? manifest.tolerances.at(s.criterion)
                                                                   : biharmonic::default_tolerance(s.criterion);
        std::vector<double> values;
        bool first = true;
        for (std::size_t k = 0; k < sweep.size; ++k) {
            const auto& rec = report.records[k * nc + c];
            if (rec.error) {
                ++s.errors;
                continue;
            }
            s.max_mu = std::max(s.max_mu, rec.mu_norm);
            if (first || rec.norm > s.max_norm) {
                s.max_norm = rec.norm;
                s.argmax = rec.coordinates;
                first = false;
            }
            if (s.criterion == Criterion::einstein)
                values.push_back(rec.components.front());
        }
        if (s.errors > 0) {
            s.verdict = "error";
            s.passed = false;
        } else {
            bool holds = s.max_norm < s.tolerance;
            if (s.criterion == Criterion::einstein) {
                s.constancy = biharmonic::constancy(values, s.tolerance);
                holds = s.constancy->constant;
            }
            s.verdict = verdict_label(s.criterion, holds, s.max_mu);
            s.passed = holds && (!manifest.require_proper || s.criterion == Criterion::bochner ||
                                 s.verdict == "proper-biharmonic");
        }
        report.summary.push_back(std::move(s));
    }
    return report;
}

json report_body(const ResidualReport& report)
{
    json body;
    body["tool"] = "biharm";
    body["version"] = std::string(kVersion);
    body["manifest"] = report.manifest;
    body["vars"] = report.vars;
    body["grid_vars"] = report.grid_vars;
    json records = json::array();
    for (const auto& r : report.records) {
        json j;
        j["index"] = r.index;
        j["coordinates"] = r.coordinates;
        j["criterion"] = std::string(biharmonic::criterion_name(r.criterion));
        j["components"] = r.components;
        j["norm"] = r.norm;
        j["mu_norm"] = r.mu_norm;
        if (r.error)
            j["error"] = *r.error;
        records.push_back(std::move(j));
    }
    body["records"] = std::move(records);
    json summary = json::array();
    for (const auto& s : report.summary) {
        json j;
        j["criterion"] = std::string(biharmonic::criterion_name(s.criterion));
        j["tolerance"] = s.tolerance;
        j["max_norm"] = s.max_norm;
        j["argmax"] = s.argmax;
        j["max_mu_norm"] = s.max_mu;
        j["errors"] = s.errors;
        j["verdict"] = s.verdict;
        j["passed"] = s.passed;
        if (s.constancy)
            j["constancy"] = {{"constant", s.constancy->constant},
                              {"min", s.constancy->min},
                              {"max", s.constancy->max},
                              {"mean", s.constancy->mean}};
        summary.push_back(std::move(j));
    }
    body["summary"] = std::move(summary);
    body["passed"] = report.passed();
    return body;
}

std::string report_json(const ResidualReport& report, const std::string& timestamp)
{
    const json header{{"generated", timestamp}, {"tool", "biharm"}, {"version", std::string(kVersion)}};
    return header.dump() + "\n" + report_body(report).dump() + "\n";
}

std::string report_csv(const ResidualReport& report, const std::string& timestamp)
{
    std::size_t width = 0;
    for (const auto& r : report.records)
        width = std::max(width, r.components.size());
    std::ostringstream out;
    out << "# generated " << timestamp << " by biharm " << kVersion << "\n";
    std::vector<std::string> cols;
    for (const auto& v : report.grid_vars)
        cols.push_back("i_" + v);
    for (const auto& v : report.vars)
        cols.push_back(v);
    for (const char* c : {"criterion", "norm", "mu_norm", "error"})
        cols.emplace_back(c);
    for (std::size_t i = 0; i < width; ++i)
        cols.push_back("c" + std::to_string(i));
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << (i ? "," : "") << csv_field(cols[i]);
    out << "\n";
    for (const auto& r : report.records) {
        std::vector<std::string> row;
        for (int i : r.index)
            row.push_back(std::to_string(i));
        for (double x : r.coordinates)
            row.push_back(fmt(x));
        row.emplace_back(biharmonic::criterion_name(r.criterion));
        row.push_back(fmt(r.norm));
        row.push_back(fmt(r.mu_norm));
        row.push_back(r.error.value_or(""));
        for (std::size_t i = 0; i < width; ++i)
            row.push_back(i < r.components.size() ? fmt(r.components[i]) : "");
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << csv_field(row[i]);
        out << "\n";
    }
    return out.str();
}

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

GridAxis default_axis(const kappa::KappaFamily& fam)
{
    GridAxis axis;
    axis.var = "x" + std::to_string(fam.var + 1);
    axis.count = 5;
    switch (fam.kase) {
    case kappa::Case::I:
    case kappa::Case::III:
        axis.min = 0.5 - fam.b;
        axis.max = 2.0 - fam.b;
        break;
    case kappa::Case::II:
        axis.min = -2.0 / fam.a - fam.b;
        axis.max = 2.0 / fam.a - fam.b;
        break;
    }
    return axis;
}

json families_manifest(std::span<const kappa::KappaFamily> families, const std::vector<GridAxis>& grid)
{
    const auto lambda = kappa::assemble_lambda(families);
    const int n = static_cast<int>(families.size());
    json axes = json::array();
    for (int i = 0; i < n; ++i) {
        const auto& fam = *std::find_if(families.begin(), families.end(), [&](auto& f) { return f.var == i; });
        const std::string var = "x" + std::to_string(i + 1);
        auto it = std::find_if(grid.begin(), grid.end(), [&](auto& a) { return a.var == var; });
        const GridAxis axis = it == grid.end() ? default_axis(fam) : *it;
        kappa::require_interval(fam, axis.min, axis.max);
        if (axis.count <= 1)
            axes.push_back(var + "=" + fmt(axis.min));
        else
            axes.push_back(var + "=" + fmt(axis.min) + ":" + fmt(axis.max) + ":" + std::to_string(axis.count));
    }
    for (const auto& a : grid) {
        if (a.var.size() < 2 || a.var[0] != 'x')
            throw kappa::FamilyError("grid variable '" + a.var + "' is not one of x1..x" + std::to_string(n));
        int i = 0;
        auto [ptr, ec] = std::from_chars(a.var.data() + 1, a.var.data() + a.var.size(), i);
        if (ec != std::errc() || ptr != a.var.data() + a.var.size() || i < 1 || i > n)
            throw kappa::FamilyError("grid variable '" + a.var + "' is not one of x1..x" + std::to_string(n));
    }
    json model{{"kind", "warped_product"},
               {"base", "euclidean(" + std::to_string(n) + ")"},
               {"fiber_dim", 1},
               {"lambda", kappa::lambda_source(families)}};
    (void)lambda;
    return json{{"model", model}, {"criteria", {"wp-warped", "einstein"}}, {"grid", axes}};
}

} // namespace biharm::cli
