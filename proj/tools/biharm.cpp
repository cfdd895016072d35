#include "biharm/cli.hpp"
#include "biharm/golden.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace bc = biharm::cli;

namespace {

bool write_output(const std::optional<std::string>& path, const std::string& text)
{
    if (!path || *path == "-") {
        std::cout << text;
        return static_cast<bool>(std::cout);
    }
    std::ofstream out(*path, std::ios::binary);
    out << text;
    return static_cast<bool>(out);
}

double parse_number(const std::string& flag, const std::string& s)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw biharm::kappa::FamilyError(flag + " expects a number, got '" + s + "'");
    return v;
}

// --case X [--a A] [--b B] groups, one per coordinate, plus repeated --grid specs.
void parse_family_args(const std::vector<std::string>& args, std::vector<biharm::kappa::KappaFamily>& fams,
                       std::vector<bc::GridAxis>& grid)
{
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& flag = args[i];
        if (i + 1 >= args.size())
            throw biharm::kappa::FamilyError(flag + " needs a value");
        const std::string& value = args[++i];
        if (flag == "--case") {
            biharm::kappa::KappaFamily f;
            f.kase = biharm::kappa::parse_case(value);
            f.var = static_cast<int>(fams.size());
            fams.push_back(f);
        } else if (flag == "--a" || flag == "--b") {
            if (fams.empty())
                throw biharm::kappa::FamilyError(flag + " must follow a --case");
            (flag == "--a" ? fams.back().a : fams.back().b) = parse_number(flag, value);
        } else if (flag == "--grid") {
            grid.push_back(bc::parse_grid_axis(value, "--grid"));
        } else {
            throw biharm::kappa::FamilyError("unknown option " + flag);
        }
    }
    if (fams.empty())
        throw biharm::kappa::FamilyError("at least one --case is required");
    for (const auto& f : fams)
        biharm::kappa::validate(f);
}

int run_check(const std::string& manifest_path, const std::optional<std::string>& out,
              const std::optional<std::string>& format, const std::optional<double>& tol, int jobs)
{
    bc::Manifest m;
    try {
        m = bc::load_manifest(manifest_path);
    } catch (const bc::ManifestError& e) {
        std::cerr << "manifest error: " << e.what() << "\n";
        return bc::ExitCode::manifest_error;
    }
    const std::string fmt = format.value_or(m.format);
    if (fmt != "json" && fmt != "csv") {
        std::cerr << "unknown format '" << fmt << "'\n";
        return bc::ExitCode::manifest_error;
    }
    if (tol && !(*tol > 0.0)) {
        std::cerr << "--tol must be positive\n";
        return bc::ExitCode::manifest_error;
    }
    bc::ResidualReport report;
    try {
        report = bc::run_check(m, {jobs, tol});
    } catch (const bc::ManifestError& e) {
        std::cerr << "manifest error: " << e.what() << "\n";
        return bc::ExitCode::manifest_error;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return bc::ExitCode::numerical_error;
    }
    const auto ts = bc::utc_timestamp();
    const auto text = fmt == "csv" ? bc::report_csv(report, ts) : bc::report_json(report, ts);
    if (!write_output(out ? out : m.output, text)) {
        std::cerr << "cannot write report\n";
        return bc::ExitCode::numerical_error;
    }
    for (const auto& s : report.summary)
        std::cerr << biharm::biharmonic::criterion_name(s.criterion) << ": " << s.verdict << " (max " << s.max_norm
                  << ", tol " << s.tolerance << (s.errors ? ", " + std::to_string(s.errors) + " point errors" : "")
                  << ")\n";
    return report.exit_code();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Numerical biharmonicity checks for Riemannian submersions", "biharm"};
    app.set_version_flag("--version", std::string(bc::kVersion));
    app.require_subcommand(1);

    auto* check = app.add_subcommand("check", "Evaluate the criteria of a manifest over its grid");
    std::string manifest;
    std::optional<std::string> out, format;
    std::optional<double> tol;
    int jobs = bc::default_jobs();
    check->add_option("--manifest", manifest, "Manifest JSON file")->required();
    check->add_option("--out", out, "Report path (default: manifest output or stdout)");
    check->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    check->add_option("--tol", tol, "Tolerance for every criterion");
    check->add_option("--jobs", jobs, "Worker threads (default: BIHARM_JOBS or all cores)")->check(CLI::PositiveNumber);

    auto* families = app.add_subcommand("families", "Emit a warped-product manifest from Riccati families");
    families->allow_extras();
    std::optional<std::string> emit;
    families->add_option("--emit", emit, "Manifest path (default: stdout)");
    families->footer("Families: --case I|II|III [--a A] [--b B], repeated once per coordinate x1..xn.\n"
                     "Grid: --grid x1=min:max:count (default: a pole-free interval per family).");

    auto* golden = app.add_subcommand("golden", "Run the built-in acceptance suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : bc::ExitCode::manifest_error;
    }

    if (*check)
        return run_check(manifest, out, format, tol, jobs);

    if (*families) {
        try {
            std::vector<biharm::kappa::KappaFamily> fams;
            std::vector<bc::GridAxis> grid;
            parse_family_args(families->remaining(), fams, grid);
            const auto j = bc::families_manifest(fams, grid);
            if (!write_output(emit, j.dump(2) + "\n")) {
                std::cerr << "cannot write manifest\n";
                return bc::ExitCode::numerical_error;
            }
            return bc::ExitCode::ok;
        } catch (const std::exception& e) {
            std::cerr << "families: " << e.what() << "\n";
            return bc::ExitCode::manifest_error;
        }
    }

    if (*golden) {
        bool all = true;
        for (const auto& r : biharm::golden::run_golden()) {
            std::printf("[%s] %d %s: %s\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str());
            all = all && r.passed;
        }
        return all ? bc::ExitCode::ok : bc::ExitCode::verdict_failure;
    }
    return bc::ExitCode::ok;
}
