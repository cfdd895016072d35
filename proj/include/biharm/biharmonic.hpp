#pragma once

#include "biharm/expr.hpp"
#include "biharm/geometry.hpp"
#include "biharm/submersion.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace biharm::biharmonic {

enum class Criterion { eq1_general, bas_basic, wp_warped, einstein, integrability_1de, twisted, bochner };

std::string_view criterion_name(Criterion c);
/// Accepts the CLI spellings ("eq1-general", "bas-basic", ...).
std::optional<Criterion> parse_criterion(std::string_view name);
const std::vector<Criterion>& all_criteria();

/// Residuals computed purely from jets use 1e-6; the Bochner diagnostic uses 1e-4.
double default_tolerance(Criterion c);

class NotApplicableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonBasicError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotEinsteinError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Residual {
    std::vector<double> point;
    std::vector<double> components;
    double norm = 0.0;
    Criterion criterion = Criterion::eq1_general;
};

Residual make_residual(Criterion c, std::span<const double> point, std::vector<double> components);

/// τ₂(φ) from the frame form of the bitension field, in base coordinates at φ(p).
Residual bitension_general(const submersion::AdaptedChart& chart, std::span<const double> p);
/// Tr(∇^N)²τ + ∇_τ τ + Ricci^N(τ) on the base. Throws NonBasicError unless dφ(μ) is
/// constant along the fiber through p.
Residual bitension_basic(const submersion::AdaptedChart& chart, std::span<const double> p);
/// τ₂(φ) straight from its definition Tr(∇^φ)²τ - Σ R^N(dφ e_A, τ)dφ e_A, with τ
/// pulled back to the total space. Used as an independent check of the frame formulas.
Residual bitension_pullback(const submersion::AdaptedChart& chart, std::span<const double> p);

/// grad Δλ + 2 Ricci(grad λ) + (n/2) grad |grad λ|² at a base point.
Residual warped_residual(const geometry::MetricField& base, const expr::Expression& lambda, int fiber_dim,
                         std::span<const double> p);

/// Δλ + 2aλ + (n/2)|grad λ|². Throws NotEinsteinError when |Ric - a·id| > 1e-6 at p.
double einstein_first_integral(const geometry::MetricField& base, const expr::Expression& lambda, double a,
                               int fiber_dim, std::span<const double> p);
/// Einstein constant of a base read off its Ricci operator at p (trace / dim), after
/// checking the operator is a multiple of the identity.
double einstein_constant(const geometry::MetricField& base, std::span<const double> p);

struct ConstancyReport {
    bool constant = true;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
};
/// max - min < tol·(1 + |mean|); an empty sample is trivially constant.
ConstancyReport constancy(std::span<const double> values, double tol);

/// Left-hand side of the integrability-data equation for 1-dimensional fibers, all k,
/// in the frame basis {dφ(e_k)}.
std::vector<double> integrability_residuals(const submersion::AdaptedChart& chart, std::span<const double> p);
/// The k-th (zero-based) component.
double integrability_residual(const submersion::AdaptedChart& chart, std::span<const double> p, int k);
/// The same system before the Laplacian is assembled: Σ e_i e_i(κ_k) over the whole
/// frame with the connection terms written out.
std::vector<double> integrability_residuals_expanded(const submersion::AdaptedChart& chart,
                                                     std::span<const double> p);

enum class WoForm {
    corrected, // Δκ₂ in the second equation
    as_printed // Δκ₁ in both equations
};
/// Closed form for n = 2 data with f¹₁₂ = f₁, f²₁₂ = f₂ and base Ricci K·id.
std::vector<double> wo_n2_residuals(const submersion::IntegrabilityData& data, std::span<const double> p,
                                    WoForm form = WoForm::corrected);

/// Δ_M κ_i of a twisted product from its explicit coordinate formula, κ_i = -∂λ/∂x_i.
double twisted_residual(const submersion::TwistedProduct& model, std::span<const double> p, int i);
std::vector<double> twisted_residuals(const submersion::TwistedProduct& model, std::span<const double> p);

/// ½Δ|grad λ|² - |∇dλ|² - ⟨grad λ, grad Δλ⟩ - Ric(grad λ, grad λ).
double bochner_residual(const geometry::MetricField& metric, const expr::Expression& lambda,
                        std::span<const double> p);

/// g-norm of the fiber mean curvature at p.
double mean_curvature_norm(const submersion::AdaptedChart& chart, std::span<const double> p);

/// Dispatches one criterion at a total-chart point. Throws NotApplicableError when the
/// criterion does not apply to the model kind.
Residual evaluate(const submersion::AdaptedChart& chart, Criterion c, std::span<const double> p);

} // namespace biharm::biharmonic
