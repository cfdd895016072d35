#include "biharm/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

namespace biharm::geometry {

namespace {

using expr::Expression;

Jet3 full(Jet3 j, int d)
{
    if (j.directions() == 0 && d > 0)
        return Jet3::constant(j.value(), d);
    return j;
}

std::vector<std::string> default_vars(int n, std::vector<std::string> given, const std::vector<std::string>& fallback)
{
    if (given.empty())
        return fallback;
    if (static_cast<int>(given.size()) != n)
        throw std::invalid_argument("metric expects " + std::to_string(n) + " chart variables");
    return given;
}

std::vector<std::string> numbered(const std::string& stem, int n)
{
    std::vector<std::string> v;
    for (int i = 1; i <= n; ++i)
        v.push_back(stem + std::to_string(i));
    return v;
}

} // namespace

ScalarFieldFn scalar_field(expr::Expression f, std::vector<std::string> vars)
{
    return [f = std::move(f), vars = std::move(vars)](std::span<const Jet3> x) {
        const int d = x.empty() ? 0 : x[0].directions();
        return full(expr::eval<Jet3>(f, vars, x), d);
    };
}

MetricField::MetricField(std::vector<std::string> vars, std::vector<expr::Expression> entries,
                         std::vector<expr::Expression> validity, std::string description)
    : vars_(std::move(vars)), validity_(std::move(validity)), description_(std::move(description))
{
    const int n = dim();
    if (n == 0)
        throw std::invalid_argument("metric needs at least one chart variable");
    if (static_cast<int>(entries.size()) != n * n)
        throw std::invalid_argument("metric needs " + std::to_string(n * n) + " entries, got " +
                                    std::to_string(entries.size()));
    entries_ = std::move(entries);
    if (description_.empty())
        description_ = "explicit(" + std::to_string(n) + ")";
    evaluator_ = [vars = vars_, e = *entries_, n](std::span<const Jet3> x) {
        const int d = x.empty() ? 0 : x[0].directions();
        JetVector out(static_cast<std::size_t>(n * n));
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                out[i * n + j] = full(expr::eval<Jet3>(e[i * n + j], vars, x), d);
                out[j * n + i] = out[i * n + j];
            }
        return out;
    };
}

MetricField::MetricField(std::vector<std::string> vars, Evaluator evaluator, std::vector<expr::Expression> validity,
                         std::string description)
    : vars_(std::move(vars)), evaluator_(std::move(evaluator)), validity_(std::move(validity)),
      description_(std::move(description))
{
    if (vars_.empty())
        throw std::invalid_argument("metric needs at least one chart variable");
}

MetricField MetricField::euclidean(int n, std::vector<std::string> vars)
{
    if (n < 1)
        throw std::invalid_argument("euclidean(n) needs n >= 1");
    vars = default_vars(n, std::move(vars), numbered("x", n));
    std::vector<Expression> e;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            e.push_back(Expression::constant(i == j ? 1.0 : 0.0));
    return MetricField(std::move(vars), std::move(e), {}, "euclidean(" + std::to_string(n) + ")");
}

MetricField MetricField::sphere2(std::vector<std::string> vars)
{
    vars = default_vars(2, std::move(vars), {"theta", "phi"});
    const Expression theta = Expression::variable(vars[0]);
    const Expression s = call(expr::UnaryOp::sin, theta);
    std::vector<Expression> e{Expression::constant(1.0), Expression::constant(0.0), Expression::constant(0.0),
                              Expression::binary(expr::BinaryOp::pow, s, Expression::constant(2.0))};
    return MetricField(std::move(vars), std::move(e), {s}, "sphere2");
}

MetricField MetricField::hyperbolic2(std::vector<std::string> vars)
{
    vars = default_vars(2, std::move(vars), {"x", "y"});
    const Expression y = Expression::variable(vars[1]);
    const Expression diag =
        Expression::constant(1.0) / Expression::binary(expr::BinaryOp::pow, y, Expression::constant(2.0));
    std::vector<Expression> e{diag, Expression::constant(0.0), Expression::constant(0.0), diag};
    return MetricField(std::move(vars), std::move(e), {y}, "hyperbolic2");
}

MetricField MetricField::builtin(std::string_view name, std::vector<std::string> vars)
{
    if (name == "sphere2")
        return sphere2(std::move(vars));
    if (name == "hyperbolic2")
        return hyperbolic2(std::move(vars));
    constexpr std::string_view prefix = "euclidean(";
    if (name.starts_with(prefix) && name.ends_with(")")) {
        const auto digits = name.substr(prefix.size(), name.size() - prefix.size() - 1);
        int n = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
        if (ec == std::errc() && ptr == digits.data() + digits.size() && n >= 1 && n <= kMaxJetDirections)
            return euclidean(n, std::move(vars));
    }
    throw std::invalid_argument("unknown built-in metric '" + std::string(name) + "'");
}

bool MetricField::in_domain(std::span<const double> p) const
{
    if (static_cast<int>(p.size()) != dim())
        return false;
    for (const auto& v : validity_) {
        try {
            if (!(expr::eval<double>(v, vars_, p) > 0.0))
                return false;
        } catch (const expr::EvalError&) {
            return false;
        }
    }
    return true;
}

void MetricField::require_domain(std::span<const double> p) const
{
    if (static_cast<int>(p.size()) != dim())
        throw ChartDomainError("point has " + std::to_string(p.size()) + " coordinates, chart has " +
                               std::to_string(dim()));
    for (const auto& v : validity_) {
        double value = 0.0;
        try {
            value = expr::eval<double>(v, vars_, p);
        } catch (const expr::EvalError& e) {
            throw ChartDomainError(std::string("validity predicate failed to evaluate: ") + e.what());
        }
        if (!(value > 0.0))
            throw ChartDomainError("point violates chart validity predicate '" + expr::print(v) + " > 0'");
    }
}

JetVector MetricField::evaluate(std::span<const Jet3> x) const { return evaluator_(x); }

std::vector<double> MetricField::evaluate(std::span<const double> p) const
{
    std::vector<Jet3> x;
    for (double v : p)
        x.emplace_back(v);
    const JetVector g = evaluator_(x);
    std::vector<double> out;
    for (const auto& j : g)
        out.push_back(j.value());
    return out;
}

// ---------------------------------------------------------------------------
// Connection
// ---------------------------------------------------------------------------

JetVector spd_inverse(const JetVector& a, int n)
{
    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        scale = std::max(scale, std::abs(a[i * n + i].value()));
    const double tol = 1e-13 * std::max(scale, 1e-300);

    JetVector l(static_cast<std::size_t>(n * n), Jet3(0.0));
    for (int j = 0; j < n; ++j) {
        Jet3 s = a[j * n + j];
        for (int k = 0; k < j; ++k)
            s -= l[j * n + k] * l[j * n + k];
        if (!(s.value() > tol))
            throw SingularMetricError("metric is not positive definite (pivot " + std::to_string(j) + ")");
        l[j * n + j] = sqrt(s);
        for (int i = j + 1; i < n; ++i) {
            Jet3 t = a[i * n + j];
            for (int k = 0; k < j; ++k)
                t -= l[i * n + k] * l[j * n + k];
            l[i * n + j] = t / l[j * n + j];
        }
    }
    // m = l^{-1}, lower triangular.
    JetVector m(static_cast<std::size_t>(n * n), Jet3(0.0));
    for (int i = 0; i < n; ++i) {
        m[i * n + i] = Jet3(1.0) / l[i * n + i];
        for (int j = 0; j < i; ++j) {
            Jet3 s(0.0);
            for (int k = j; k < i; ++k)
                s += l[i * n + k] * m[k * n + j];
            m[i * n + j] = -s / l[i * n + i];
        }
    }
    JetVector inv(static_cast<std::size_t>(n * n), Jet3(0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Jet3 s(0.0);
            for (int k = j; k < n; ++k)
                s += m[k * n + i] * m[k * n + j];
            inv[i * n + j] = s;
            inv[j * n + i] = s;
        }
    return inv;
}

namespace {

void require_order(const Jet3& j, int needed, const char* what)
{
    if (j.directions() > 0 && j.order() < needed)
        throw std::logic_error(std::string(what) + ": input jets lack the derivative order required");
}

} // namespace

Connection make_connection(JetVector metric, int dim)
{
    if (static_cast<int>(metric.size()) != dim * dim)
        throw std::invalid_argument("metric jets do not form a square matrix");
    Connection c;
    c.dim = dim;
    c.metric = std::move(metric);
    c.inverse = spd_inverse(c.metric, dim);

    const int n = dim;
    // dg[(l * n + i) * n + j] = ∂_l g_ij
    JetVector dg(static_cast<std::size_t>(n * n * n));
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                dg[(l * n + i) * n + j] = c.g(i, j).derivative(l);
                dg[(l * n + j) * n + i] = dg[(l * n + i) * n + j];
            }
    auto d = [&](int l, int i, int j) -> const Jet3& { return dg[(l * n + i) * n + j]; };

    JetVector lowered(static_cast<std::size_t>(n * n * n));
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                lowered[(l * n + i) * n + j] = 0.5 * (d(i, j, l) + d(j, i, l) - d(l, i, j));
                lowered[(l * n + j) * n + i] = lowered[(l * n + i) * n + j];
            }
    c.gamma.assign(static_cast<std::size_t>(n * n * n), Jet3(0.0));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Jet3 s(0.0);
                for (int l = 0; l < n; ++l)
                    s += c.ginv(k, l) * lowered[(l * n + i) * n + j];
                c.gamma[(k * n + i) * n + j] = s;
                c.gamma[(k * n + j) * n + i] = s;
            }
    return c;
}

Connection connection_at(const MetricField& g, std::span<const double> p)
{
    g.require_domain(p);
    const auto x = seed(p);
    return make_connection(g.evaluate(x), g.dim());
}

Jet3 inner(const Connection& c, const JetVector& a, const JetVector& b)
{
    Jet3 s(0.0);
    for (int i = 0; i < c.dim; ++i)
        for (int j = 0; j < c.dim; ++j)
            s += c.g(i, j) * a[i] * b[j];
    return s;
}

Jet3 directional_derivative(const JetVector& x, const Jet3& f)
{
    Jet3 s(0.0);
    for (std::size_t j = 0; j < x.size(); ++j)
        s += x[j] * f.derivative(static_cast<int>(j));
    return s;
}

JetVector covariant_derivative(const Connection& c, const JetVector& x, const JetVector& v)
{
    const int n = c.dim;
    JetVector out(static_cast<std::size_t>(n), Jet3(0.0));
    for (int k = 0; k < n; ++k) {
        Jet3 s = directional_derivative(x, v[k]);
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l)
                s += c.christoffel(k, j, l) * x[j] * v[l];
        out[k] = s;
    }
    return out;
}

JetVector lie_bracket(const JetVector& x, const JetVector& y)
{
    JetVector out(x.size(), Jet3(0.0));
    for (std::size_t k = 0; k < x.size(); ++k)
        out[k] = directional_derivative(x, y[k]) - directional_derivative(y, x[k]);
    return out;
}

JetVector raise_index(const Connection& c, const JetVector& covector)
{
    const int n = c.dim;
    JetVector out(static_cast<std::size_t>(n), Jet3(0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out[i] += c.ginv(i, j) * covector[j];
    return out;
}

JetVector gradient(const Connection& c, const Jet3& f)
{
    JetVector df;
    for (int j = 0; j < c.dim; ++j)
        df.push_back(f.derivative(j));
    return raise_index(c, df);
}

JetVector hessian(const Connection& c, const Jet3& f)
{
    const int n = c.dim;
    JetVector df;
    for (int k = 0; k < n; ++k)
        df.push_back(f.derivative(k));
    JetVector h(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Jet3 s = df[i].derivative(j);
            for (int k = 0; k < n; ++k)
                s -= c.christoffel(k, i, j) * df[k];
            h[i * n + j] = s;
            h[j * n + i] = s;
        }
    return h;
}

Jet3 laplacian(const Connection& c, const Jet3& f)
{
    const JetVector h = hessian(c, f);
    Jet3 s(0.0);
    for (int i = 0; i < c.dim; ++i)
        for (int j = 0; j < c.dim; ++j)
            s += c.ginv(i, j) * h[i * c.dim + j];
    return s;
}

JetVector rough_laplacian(const Connection& c, const JetVector& v)
{
    const int n = c.dim;
    // t[k * n + j] = (∇_j V)^k
    JetVector t(static_cast<std::size_t>(n * n));
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) {
            Jet3 s = v[k].derivative(j);
            for (int l = 0; l < n; ++l)
                s += c.christoffel(k, j, l) * v[l];
            t[k * n + j] = s;
        }
    JetVector out(static_cast<std::size_t>(n), Jet3(0.0));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                // (∇_i ∇V)^k_j
                Jet3 s = t[k * n + j].derivative(i);
                for (int l = 0; l < n; ++l) {
                    s += c.christoffel(k, i, l) * t[l * n + j];
                    s -= c.christoffel(l, i, j) * t[k * n + l];
                }
                out[k] += c.ginv(i, j) * s;
            }
    return out;
}

std::vector<double> riemann(const Connection& c)
{
    const int n = c.dim;
    for (const auto& g : c.gamma)
        require_order(g, 1, "riemann");
    auto gam = [&](int k, int i, int j) { return c.christoffel(k, i, j).value(); };
    auto dgam = [&](int m, int k, int i, int j) {
        const Jet3& g = c.christoffel(k, i, j);
        return g.directions() == 0 ? 0.0 : g.partial(m);
    };
    std::vector<double> r(static_cast<std::size_t>(n * n * n * n), 0.0);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double s = dgam(i, l, j, k) - dgam(j, l, i, k);
                    for (int m = 0; m < n; ++m)
                        s += gam(l, i, m) * gam(m, j, k) - gam(l, j, m) * gam(m, i, k);
                    r[((l * n + i) * n + j) * n + k] = s;
                }
    return r;
}

std::vector<double> ricci(const Connection& c)
{
    const int n = c.dim;
    const auto r = riemann(c);
    std::vector<double> ric(static_cast<std::size_t>(n * n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                ric[i * n + j] += r[((k * n + k) * n + i) * n + j];
    return ric;
}

std::vector<double> ricci_operator(const Connection& c)
{
    const int n = c.dim;
    const auto ric = ricci(c);
    std::vector<double> op(static_cast<std::size_t>(n * n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                op[i * n + j] += c.ginv(i, k).value() * ric[k * n + j];
    return op;
}

// ---------------------------------------------------------------------------
// Point-level wrappers
// ---------------------------------------------------------------------------

namespace {

std::vector<double> values(const JetVector& v)
{
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& j : v)
        out.push_back(j.value());
    return out;
}

Jet3 eval_field(const expr::Expression& f, const MetricField& g, const JetVector& x)
{
    return full(expr::eval<Jet3>(f, g.vars(), std::span<const Jet3>(x)), g.dim());
}

} // namespace

std::vector<double> christoffel(const MetricField& g, std::span<const double> p)
{
    return values(connection_at(g, p).gamma);
}

std::vector<double> riemann(const MetricField& g, std::span<const double> p) { return riemann(connection_at(g, p)); }

std::vector<double> ricci(const MetricField& g, std::span<const double> p) { return ricci(connection_at(g, p)); }

TangentVector ricci_op(const MetricField& g, std::span<const double> p, std::span<const double> x)
{
    const int n = g.dim();
    if (static_cast<int>(x.size()) != n)
        throw std::invalid_argument("ricci_op: vector dimension does not match the metric");
    const auto op = ricci_operator(connection_at(g, p));
    TangentVector out{{p.begin(), p.end()}, std::vector<double>(static_cast<std::size_t>(n), 0.0)};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.components[i] += op[i * n + j] * x[j];
    return out;
}

CurvatureSlice curvature(const MetricField& g, std::span<const double> p)
{
    const Connection c = connection_at(g, p);
    CurvatureSlice s;
    s.point.assign(p.begin(), p.end());
    s.riemann = riemann(c);
    const int n = c.dim;
    s.ricci.assign(static_cast<std::size_t>(n * n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                s.ricci[i * n + j] += s.riemann[((k * n + k) * n + i) * n + j];
    s.ricci_operator = ricci_operator(c);
    return s;
}

double sectional_curvature(const MetricField& g, std::span<const double> p)
{
    if (g.dim() != 2)
        throw std::invalid_argument("sectional_curvature: metric must be 2-dimensional");
    const Connection c = connection_at(g, p);
    const auto r = riemann(c);
    // R_{1212} = g(R(∂1, ∂2)∂2, ∂1) = g_{0l} R^l_{011}
    double r1212 = 0.0;
    for (int l = 0; l < 2; ++l)
        r1212 += c.g(0, l).value() * r[((l * 2 + 0) * 2 + 1) * 2 + 1];
    const double det = c.g(0, 0).value() * c.g(1, 1).value() - c.g(0, 1).value() * c.g(1, 0).value();
    return r1212 / det;
}

TangentVector gradient(const MetricField& g, const expr::Expression& f, std::span<const double> p)
{
    const Connection c = connection_at(g, p);
    const auto x = seed(p);
    return {{p.begin(), p.end()}, values(gradient(c, eval_field(f, g, x)))};
}

std::vector<double> hessian(const MetricField& g, const expr::Expression& f, std::span<const double> p)
{
    const Connection c = connection_at(g, p);
    const auto x = seed(p);
    return values(hessian(c, eval_field(f, g, x)));
}

double laplacian(const MetricField& g, const expr::Expression& f, std::span<const double> p)
{
    const Connection c = connection_at(g, p);
    const auto x = seed(p);
    return laplacian(c, eval_field(f, g, x)).value();
}

double laplacian(const MetricField& g, const ScalarFieldFn& f, std::span<const double> p)
{
    const Connection c = connection_at(g, p);
    const auto x = seed(p);
    return laplacian(c, full(f(x), g.dim())).value();
}

TangentVector rough_laplacian_vec(const MetricField& g, const VectorFieldFn& v, std::span<const double> p)
{
    const Connection c = connection_at(g, p);
    const auto x = seed(p);
    JetVector field = v(x);
    if (static_cast<int>(field.size()) != g.dim())
        throw std::invalid_argument("rough_laplacian_vec: field has the wrong number of components");
    for (auto& j : field)
        j = full(j, g.dim());
    return {{p.begin(), p.end()}, values(rough_laplacian(c, field))};
}

} // namespace biharm::geometry
