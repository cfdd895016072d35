#pragma once

#include "biharm/biharmonic.hpp"
#include "biharm/kappa.hpp"
#include "biharm/submersion.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace biharm::cli {

inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode { ok = 0, verdict_failure = 2, manifest_error = 3, numerical_error = 4 };

class ManifestError : public std::runtime_error {
public:
    ManifestError(std::string pointer, const std::string& message)
        : std::runtime_error(pointer.empty() ? message : pointer + ": " + message), pointer_(std::move(pointer))
    {
    }
    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

/// One axis of a grid: "var=min:max:count" (count >= 2) or "var=value".
struct GridAxis {
    std::string var;
    double min = 0.0;
    double max = 0.0;
    int count = 1;

    double at(int i) const;
};

/// Throws ManifestError with `pointer` on malformed specs.
GridAxis parse_grid_axis(std::string_view spec, const std::string& pointer = "/grid");

struct Manifest {
    nlohmann::json source;
    submersion::SubmersionModel model = submersion::Cylindrical{};
    std::vector<biharmonic::Criterion> criteria;
    std::vector<GridAxis> grid;
    std::map<biharmonic::Criterion, double> tolerances; // overrides of the module defaults
    bool require_proper = false;
    std::optional<std::string> output;
    std::string format = "json";
};

submersion::SubmersionModel parse_model(const nlohmann::json& j, const std::string& pointer = "/model");
Manifest parse_manifest(const nlohmann::json& j);
/// Reads and parses a manifest file; unreadable or malformed JSON is a ManifestError.
Manifest load_manifest(const std::string& path);

struct PointRecord {
    std::vector<int> index;
    std::vector<double> coordinates;
    biharmonic::Criterion criterion = biharmonic::Criterion::eq1_general;
    std::vector<double> components;
    double norm = 0.0;
    double mu_norm = 0.0;
    std::optional<std::string> error;
};

struct CriterionSummary {
    biharmonic::Criterion criterion = biharmonic::Criterion::eq1_general;
    double tolerance = 0.0;
    double max_norm = 0.0;
    std::vector<double> argmax;
    double max_mu = 0.0;
    int errors = 0;
    std::string verdict;
    bool passed = false;
    std::optional<biharmonic::ConstancyReport> constancy; // einstein only
};

struct ResidualReport {
    nlohmann::json manifest;
    std::vector<std::string> vars;
    std::vector<std::string> grid_vars;
    std::vector<PointRecord> records; // grid order, criteria in manifest order within a point
    std::vector<CriterionSummary> summary;

    bool passed() const;
    int exit_code() const;
};

struct CheckOptions {
    int jobs = 1;
    std::optional<double> tolerance; // overrides every criterion
};

/// Worker count from BIHARM_JOBS, else the hardware concurrency (at least 1).
int default_jobs();

/// Evaluates every criterion at every grid point. Throws geometry::ChartDomainError when
/// a grid point lies outside the chart, ManifestError when a criterion does not apply to
/// the model.
ResidualReport run_check(const Manifest& manifest, const CheckOptions& options = {});

nlohmann::json report_body(const ResidualReport& report);
/// Header line (timestamp, tool, version) followed by the canonical body, one JSON
/// document per line.
std::string report_json(const ResidualReport& report, const std::string& timestamp);
/// Comment line with the timestamp, a header row, then one row per record.
std::string report_csv(const ResidualReport& report, const std::string& timestamp);
std::string utc_timestamp();

/// Warped-product manifest over euclidean(n) whose λ is assembled from the families.
/// Each grid axis is checked against the poles of its family.
nlohmann::json families_manifest(std::span<const kappa::KappaFamily> families, const std::vector<GridAxis>& grid);
/// Pole-free default axis for one family (5 samples).
GridAxis default_axis(const kappa::KappaFamily& fam);

} // namespace biharm::cli
