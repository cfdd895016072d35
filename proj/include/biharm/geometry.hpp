#pragma once

#include "biharm/expr.hpp"
#include "biharm/jet.hpp"

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace biharm::geometry {

using JetVector = std::vector<Jet3>;

class SingularMetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ChartDomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scalar field on a chart, evaluated on seeded coordinate jets.
using ScalarFieldFn = std::function<Jet3(std::span<const Jet3>)>;
/// Vector field on a chart: coordinate components as jets.
using VectorFieldFn = std::function<JetVector(std::span<const Jet3>)>;

ScalarFieldFn scalar_field(expr::Expression f, std::vector<std::string> vars);

/// Riemannian metric on a single global coordinate chart.
///
/// Entries are either Expressions in the chart variables or a jet-valued rule (used for
/// metrics induced by an orthonormal frame). Positivity of every validity Expression
/// defines the chart domain.
class MetricField {
public:
    using Evaluator = std::function<JetVector(std::span<const Jet3>)>;

    MetricField(std::vector<std::string> vars, std::vector<expr::Expression> entries,
                std::vector<expr::Expression> validity = {}, std::string description = {});
    MetricField(std::vector<std::string> vars, Evaluator evaluator, std::vector<expr::Expression> validity,
                std::string description);

    static MetricField euclidean(int n, std::vector<std::string> vars = {});
    /// Unit round sphere dθ² + sin²θ dφ² on (theta, phi).
    static MetricField sphere2(std::vector<std::string> vars = {});
    /// Upper half-plane model (dx² + dy²)/y².
    static MetricField hyperbolic2(std::vector<std::string> vars = {});
    /// "euclidean(n)", "sphere2" or "hyperbolic2".
    static MetricField builtin(std::string_view name, std::vector<std::string> vars = {});

    int dim() const { return static_cast<int>(vars_.size()); }
    const std::vector<std::string>& vars() const { return vars_; }
    const std::vector<expr::Expression>& validity() const { return validity_; }
    /// Row-major entries when the metric was declared by Expressions.
    const std::optional<std::vector<expr::Expression>>& entries() const { return entries_; }
    const std::string& description() const { return description_; }

    bool in_domain(std::span<const double> p) const;
    /// Throws ChartDomainError when `p` fails a validity predicate or has the wrong size.
    void require_domain(std::span<const double> p) const;

    /// Row-major n×n entries on coordinate jets.
    JetVector evaluate(std::span<const Jet3> x) const;
    std::vector<double> evaluate(std::span<const double> p) const;

private:
    std::vector<std::string> vars_;
    std::optional<std::vector<expr::Expression>> entries_;
    Evaluator evaluator_;
    std::vector<expr::Expression> validity_;
    std::string description_;
};

/// Metric, inverse and Christoffel symbols as jets at one point.
struct Connection {
    int dim = 0;
    JetVector metric;  // g_ij, row-major
    JetVector inverse; // g^ij
    JetVector gamma;   // Γ^k_ij at (k * dim + i) * dim + j

    const Jet3& g(int i, int j) const { return metric[i * dim + j]; }
    const Jet3& ginv(int i, int j) const { return inverse[i * dim + j]; }
    const Jet3& christoffel(int k, int i, int j) const { return gamma[(k * dim + i) * dim + j]; }
};

/// Inverse of a symmetric positive-definite jet matrix via Cholesky; throws
/// SingularMetricError when a pivot is not positive.
JetVector spd_inverse(const JetVector& a, int n);

/// Builds the connection from metric jets; throws SingularMetricError when the metric
/// is not positive definite at the expansion point.
Connection make_connection(JetVector metric, int dim);
/// Seeds the chart coordinates at `p` and evaluates the metric there.
Connection connection_at(const MetricField& g, std::span<const double> p);

// Jet-level calculus. Each operation lowers the exact order of its inputs by the number
// of derivatives it takes.
Jet3 inner(const Connection& c, const JetVector& a, const JetVector& b);
Jet3 directional_derivative(const JetVector& x, const Jet3& f);
JetVector covariant_derivative(const Connection& c, const JetVector& x, const JetVector& v);
JetVector lie_bracket(const JetVector& x, const JetVector& y);
JetVector gradient(const Connection& c, const Jet3& f);
JetVector hessian(const Connection& c, const Jet3& f);
Jet3 laplacian(const Connection& c, const Jet3& f);
/// Tr_g ∇²V.
JetVector rough_laplacian(const Connection& c, const JetVector& v);
/// g-contraction raising the index of a covector.
JetVector raise_index(const Connection& c, const JetVector& covector);

/// R^l_{ijk} at [((l * n + i) * n + j) * n + k], R(∂_i, ∂_j)∂_k = R^l_{ijk} ∂_l with
/// R(X, Y) = [∇_X, ∇_Y] - ∇_[X,Y].
std::vector<double> riemann(const Connection& c);
/// Ric_ij = R^k_{kij}; positive on the round sphere.
std::vector<double> ricci(const Connection& c);
/// Ric^i_j = g^{ik} Ric_kj.
std::vector<double> ricci_operator(const Connection& c);

struct TangentVector {
    std::vector<double> point;
    std::vector<double> components;
};

struct CurvatureSlice {
    std::vector<double> point;
    std::vector<double> riemann;        // R^l_{ijk}
    std::vector<double> ricci;          // Ric_ij
    std::vector<double> ricci_operator; // Ric^i_j
};

// Point-level operations on a MetricField. All throw ChartDomainError outside the chart
// domain and SingularMetricError at degenerate points.
std::vector<double> christoffel(const MetricField& g, std::span<const double> p);
std::vector<double> riemann(const MetricField& g, std::span<const double> p);
std::vector<double> ricci(const MetricField& g, std::span<const double> p);
TangentVector ricci_op(const MetricField& g, std::span<const double> p, std::span<const double> x);
CurvatureSlice curvature(const MetricField& g, std::span<const double> p);
/// Gaussian curvature R_{1212} / det g of a 2-dimensional metric.
double sectional_curvature(const MetricField& g, std::span<const double> p);

TangentVector gradient(const MetricField& g, const expr::Expression& f, std::span<const double> p);
std::vector<double> hessian(const MetricField& g, const expr::Expression& f, std::span<const double> p);
double laplacian(const MetricField& g, const expr::Expression& f, std::span<const double> p);
double laplacian(const MetricField& g, const ScalarFieldFn& f, std::span<const double> p);
TangentVector rough_laplacian_vec(const MetricField& g, const VectorFieldFn& v, std::span<const double> p);

} // namespace biharm::geometry
