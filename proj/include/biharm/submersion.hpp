#pragma once

#include "biharm/expr.hpp"
#include "biharm/geometry.hpp"

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace biharm::submersion {

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Projection of (M × R^n, g_M + e^{2λ} g_flat) onto M; λ depends on the base variables only.
struct WarpedProduct {
    geometry::MetricField base;
    int fiber_dim = 1;
    expr::Expression lambda;
    std::vector<std::string> fiber_vars; // defaults to t (or t1..tn) when empty
};

/// Projection of (R^n × R, g_0 + e^{2λ(x, t)} dt²) onto R^n, chart (x1..xn, t).
struct TwistedProduct {
    int base_dim = 1;
    expr::Expression lambda;
};

/// R^4 minus a line in coordinates (r, theta, phi, x4), projected to (r, x4).
struct Cylindrical {};

/// A 1-dimensional-fiber submersion given by an orthonormal frame on the chart
/// (x_1..x_n, t) -> (x_1..x_n) together with its integrability data. Indices are
/// zero-based: f(i, j, k) stores f^k_ij.
struct IntegrabilityData {
    int base_dim = 2;
    std::vector<std::string> vars;                  // n + 1 names, fiber variable last
    std::vector<std::vector<expr::Expression>> frame; // e_1..e_{n+1}, coordinate components
    std::vector<expr::Expression> f;                // n³ entries, f^k_ij at (i * n + j) * n + k
    std::vector<expr::Expression> kappa;            // n entries
    std::vector<expr::Expression> sigma;            // n² entries, antisymmetric
    std::vector<expr::Expression> base_ricci;       // n² entries in the frame basis {dφ(e_i)}
    std::optional<std::vector<expr::Expression>> metric; // total metric; induced by the frame when absent
    std::vector<expr::Expression> validity;

    const expr::Expression& f_at(int i, int j, int k) const { return f[(i * base_dim + j) * base_dim + k]; }
};

using SubmersionModel = std::variant<WarpedProduct, TwistedProduct, Cylindrical, IntegrabilityData>;

/// Builds IntegrabilityData with zero f, sigma and base Ricci; fill in what is needed.
IntegrabilityData make_integrability_data(int base_dim, std::vector<std::vector<expr::Expression>> frame,
                                          std::vector<expr::Expression> kappa, std::vector<std::string> vars = {});
/// Sets f^k_ij = value and f^k_ji = -value.
void set_f(IntegrabilityData& data, int i, int j, int k, const expr::Expression& value);
/// Sets sigma_ij = value and sigma_ji = -value.
void set_sigma(IntegrabilityData& data, int i, int j, const expr::Expression& value);
/// Base Ricci K·δ_ij, the 2-dimensional case with Gaussian curvature K.
void set_gauss_curvature(IntegrabilityData& data, const expr::Expression& k);

std::string kind_name(const SubmersionModel& model);

/// Everything the residual evaluators need about a model, in submersion-adapted
/// coordinates: the projection is the coordinate projection onto `base_index`.
class AdaptedChart {
public:
    explicit AdaptedChart(SubmersionModel model);

    const SubmersionModel& model() const { return model_; }
    const geometry::MetricField& total() const { return total_; }
    int total_dim() const { return total_.dim(); }
    int base_dim() const { return static_cast<int>(base_index_.size()); }
    int fiber_dim() const { return total_dim() - base_dim(); }
    const std::vector<int>& base_index() const { return base_index_; }
    const std::vector<int>& fiber_index() const { return fiber_index_; }
    const std::vector<std::string>& vars() const { return total_.vars(); }
    std::vector<std::string> base_vars() const;

    /// Throws geometry::ChartDomainError when `p` is outside the chart or λ fails to evaluate.
    void require_domain(std::span<const double> p) const;
    bool in_domain(std::span<const double> p) const;

    std::vector<double> project(std::span<const double> p) const;

    /// Orthonormal frame on coordinate jets: base_dim horizontal fields followed by the
    /// vertical ones.
    std::vector<geometry::JetVector> frame(std::span<const Jet3> x, const geometry::Connection& c) const;

    /// Base metric h at φ(x), in base coordinates, on total-chart jets.
    geometry::JetVector base_metric(std::span<const Jet3> x) const;
    /// Connection of the base metric at φ(p), on jets seeded in the base directions.
    geometry::Connection base_connection(std::span<const double> p) const;
    /// Ric^a_b of the base at φ(p) in base coordinates.
    std::vector<double> base_ricci_operator(std::span<const double> p) const;

    /// Default fiber sampling range per fiber coordinate, used by basicness checks.
    std::vector<std::pair<double, double>> fiber_ranges() const;
    /// Default values for chart coordinates left unspecified by a grid.
    std::vector<double> default_point() const;

private:
    SubmersionModel model_;
    geometry::MetricField total_;
    std::vector<int> base_index_;
    std::vector<int> fiber_index_;
};

struct FrameConnection {
    int n = 0;
    std::vector<double> p;     // P^k_ij at (k * n + i) * n + j
    std::vector<double> sigma; // n²
    std::vector<double> kappa; // n

    double P(int k, int i, int j) const { return p[(k * n + i) * n + j]; }
};

struct BasicnessReport {
    bool basic = true;
    double max_variation = 0.0;
};

geometry::MetricField total_metric(const SubmersionModel& model);

/// Connection, adapted frame and fiber mean curvature expanded as jets around one point.
struct LocalFrame {
    int base_dim = 0;
    geometry::Connection connection;
    std::vector<geometry::JetVector> frame; // horizontal first
    geometry::JetVector mu;

    int total_dim() const { return connection.dim; }
    int fiber_dim() const { return total_dim() - base_dim; }
    geometry::JetVector horizontal(const geometry::JetVector& v) const;
    geometry::JetVector vertical(const geometry::JetVector& v) const;
};

LocalFrame local_frame(const AdaptedChart& chart, std::span<const double> p);

/// Mean curvature of the fibers in total chart components at p.
geometry::TangentVector mean_curvature(const AdaptedChart& chart, std::span<const double> p);
geometry::TangentVector mean_curvature(const SubmersionModel& model, std::span<const double> p);

/// τ(φ) = -(m - n) dφ(μ), as a base vector at φ(p).
geometry::TangentVector tension_field(const AdaptedChart& chart, std::span<const double> p);
geometry::TangentVector tension_field(const SubmersionModel& model, std::span<const double> p);

/// Samples `fiber_samples` evenly spaced values along each fiber coordinate above every
/// base point and measures how much dφ(μ) varies; basic iff the variation is < 1e-9.
BasicnessReport is_basic_mean_curvature(const AdaptedChart& chart, std::span<const std::vector<double>> base_points,
                                        int fiber_samples = 5);
BasicnessReport is_basic_mean_curvature(const SubmersionModel& model, std::span<const std::vector<double>> base_points,
                                        int fiber_samples = 5);

/// P, sigma and kappa at p: the closed form for twisted products, the declared data for
/// IntegrabilityData (after checking the frame is orthonormal at p within 1e-8).
FrameConnection frame_connection(const SubmersionModel& model, std::span<const double> p);

/// f, kappa, sigma measured from Lie brackets of the actual frame (1-dimensional fibers).
struct MeasuredData {
    int n = 0;
    std::vector<double> f;     // f^k_ij at (i * n + j) * n + k
    std::vector<double> kappa; // n
    std::vector<double> sigma; // n²
};
MeasuredData measure_integrability_data(const AdaptedChart& chart, std::span<const double> p);

/// max |g(e_a, e_b) - δ_ab| of the frame at p.
double frame_orthonormality_error(const AdaptedChart& chart, std::span<const double> p);

} // namespace biharm::submersion
