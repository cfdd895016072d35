#include "biharm/submersion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace biharm::submersion {

using expr::Expression;
using geometry::Connection;
using geometry::JetVector;
using geometry::MetricField;

namespace {

Expression c0() { return Expression::constant(0.0); }
Expression c1() { return Expression::constant(1.0); }

Expression exp2(const Expression& lambda)
{
    return call(expr::UnaryOp::exp, Expression::constant(2.0) * lambda);
}

std::vector<std::string> numbered(const std::string& stem, int n)
{
    std::vector<std::string> v;
    for (int i = 1; i <= n; ++i)
        v.push_back(stem + std::to_string(i));
    return v;
}

void require_vars_subset(const Expression& e, const std::vector<std::string>& allowed, const std::string& what)
{
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& v : expr::free_vars(e))
        if (!ok.contains(v))
            throw ModelError(what + " uses variable '" + v + "' which is not a coordinate here");
}

Jet3 full(Jet3 j, int d)
{
    if (j.directions() == 0 && d > 0)
        return Jet3::constant(j.value(), d);
    return j;
}

Jet3 eval_jet(const Expression& e, const std::vector<std::string>& vars, std::span<const Jet3> x)
{
    const int d = x.empty() ? 0 : x[0].directions();
    return full(expr::eval<Jet3>(e, vars, x), d);
}

double eval_at(const Expression& e, const std::vector<std::string>& vars, std::span<const double> p)
{
    return expr::eval<double>(e, vars, p);
}

// Dense solve for small real matrices, row-major, partial pivoting.
std::vector<double> inverse(std::vector<double> a, int n)
{
    std::vector<double> inv(static_cast<std::size_t>(n * n), 0.0);
    for (int i = 0; i < n; ++i)
        inv[i * n + i] = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col]))
                piv = r;
        if (std::abs(a[piv * n + col]) < 1e-300)
            throw geometry::SingularMetricError("projected frame is degenerate");
        for (int k = 0; k < n; ++k) {
            std::swap(a[col * n + k], a[piv * n + k]);
            std::swap(inv[col * n + k], inv[piv * n + k]);
        }
        const double d = a[col * n + col];
        for (int k = 0; k < n; ++k) {
            a[col * n + k] /= d;
            inv[col * n + k] /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col)
                continue;
            const double m = a[r * n + col];
            for (int k = 0; k < n; ++k) {
                a[r * n + k] -= m * a[col * n + k];
                inv[r * n + k] -= m * inv[col * n + k];
            }
        }
    }
    return inv;
}

struct Built {
    MetricField total;
    std::vector<int> base_index;
    std::vector<int> fiber_index;
};

Built build(const WarpedProduct& w)
{
    const auto& base = w.base;
    const int m = base.dim();
    const int k = w.fiber_dim;
    if (k < 1)
        throw ModelError("warped product needs a fiber of dimension >= 1");
    if (m + k > kMaxJetDirections)
        throw ModelError("total dimension exceeds " + std::to_string(kMaxJetDirections));
    require_vars_subset(w.lambda, base.vars(), "warping function");

    std::vector<std::string> fiber = w.fiber_vars;
    if (fiber.empty())
        fiber = k == 1 ? std::vector<std::string>{"t"} : numbered("t", k);
    if (static_cast<int>(fiber.size()) != k)
        throw ModelError("warped product expects " + std::to_string(k) + " fiber variable names");
    std::vector<std::string> vars = base.vars();
    for (const auto& f : fiber) {
        if (std::find(vars.begin(), vars.end(), f) != vars.end())
            throw ModelError("fiber variable '" + f + "' clashes with a base variable");
        vars.push_back(f);
    }
    const int n = m + k;

    Built out{MetricField::euclidean(1), {}, {}};
    for (int i = 0; i < m; ++i)
        out.base_index.push_back(i);
    for (int i = m; i < n; ++i)
        out.fiber_index.push_back(i);

    const std::string desc = "warped(" + base.description() + ", " + std::to_string(k) + ")";
    if (base.entries()) {
        std::vector<Expression> e(static_cast<std::size_t>(n * n), c0());
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                e[i * n + j] = (*base.entries())[i * m + j];
        const Expression f = exp2(w.lambda);
        for (int i = m; i < n; ++i)
            e[i * n + i] = f;
        out.total = MetricField(vars, std::move(e), base.validity(), desc);
    } else {
        auto eval = [base, lambda = w.lambda, bvars = base.vars(), m, n](std::span<const Jet3> x) {
            const int d = x.empty() ? 0 : x[0].directions();
            const JetVector gb = base.evaluate(x.subspan(0, static_cast<std::size_t>(m)));
            JetVector g(static_cast<std::size_t>(n * n), Jet3::constant(0.0, d));
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    g[i * n + j] = full(gb[i * m + j], d);
            const Jet3 f = exp(2.0 * eval_jet(lambda, bvars, x.subspan(0, static_cast<std::size_t>(m))));
            for (int i = m; i < n; ++i)
                g[i * n + i] = f;
            return g;
        };
        out.total = MetricField(vars, eval, base.validity(), desc);
    }
    return out;
}

Built build(const TwistedProduct& t)
{
    const int m = t.base_dim;
    if (m < 1 || m + 1 > kMaxJetDirections)
        throw ModelError("twisted product base dimension must be in 1.." + std::to_string(kMaxJetDirections - 1));
    std::vector<std::string> vars = numbered("x", m);
    vars.push_back("t");
    require_vars_subset(t.lambda, vars, "twisting function");
    const int n = m + 1;
    std::vector<Expression> e(static_cast<std::size_t>(n * n), c0());
    for (int i = 0; i < m; ++i)
        e[i * n + i] = c1();
    e[m * n + m] = exp2(t.lambda);
    Built out{MetricField(vars, std::move(e), {}, "twisted(" + std::to_string(m) + ")"), {}, {m}};
    for (int i = 0; i < m; ++i)
        out.base_index.push_back(i);
    return out;
}

Built build(const Cylindrical&)
{
    const auto r = Expression::variable("r");
    const auto theta = Expression::variable("theta");
    const auto two = Expression::constant(2.0);
    const auto r2 = Expression::binary(expr::BinaryOp::pow, r, two);
    const auto s = call(expr::UnaryOp::sin, theta);
    std::vector<Expression> e(16, c0());
    e[0] = c1();
    e[5] = r2;
    e[10] = r2 * Expression::binary(expr::BinaryOp::pow, s, two);
    e[15] = c1();
    const auto margin = Expression::constant(1e-3);
    return Built{MetricField({"r", "theta", "phi", "x4"}, std::move(e), {r - margin, s - margin}, "cylindrical"),
                 {0, 3},
                 {1, 2}};
}

Built build(const IntegrabilityData& d)
{
    const int n = d.base_dim;
    const int N = n + 1;
    if (n < 1 || N > kMaxJetDirections)
        throw ModelError("integrability data base dimension must be in 1.." + std::to_string(kMaxJetDirections - 1));
    std::vector<std::string> vars = d.vars;
    if (vars.empty()) {
        vars = numbered("x", n);
        vars.push_back("t");
    }
    if (static_cast<int>(vars.size()) != N)
        throw ModelError("integrability data needs " + std::to_string(N) + " chart variables");
    if (static_cast<int>(d.frame.size()) != N)
        throw ModelError("frame needs " + std::to_string(N) + " vector fields");
    for (const auto& v : d.frame)
        if (static_cast<int>(v.size()) != N)
            throw ModelError("frame vectors need " + std::to_string(N) + " components");
    if (static_cast<int>(d.f.size()) != n * n * n)
        throw ModelError("f needs n^3 entries");
    if (static_cast<int>(d.kappa.size()) != n)
        throw ModelError("kappa needs n entries");
    if (static_cast<int>(d.sigma.size()) != n * n)
        throw ModelError("sigma needs n^2 entries");
    if (static_cast<int>(d.base_ricci.size()) != n * n)
        throw ModelError("base Ricci needs n^2 entries");
    auto check = [&](const Expression& e, const char* what) { require_vars_subset(e, vars, what); };
    for (const auto& v : d.frame)
        for (const auto& c : v)
            check(c, "frame component");
    for (const auto& e : d.f)
        check(e, "f");
    for (const auto& e : d.kappa)
        check(e, "kappa");
    for (const auto& e : d.sigma)
        check(e, "sigma");
    for (const auto& e : d.base_ricci)
        check(e, "base Ricci");

    Built out{MetricField::euclidean(1), {}, {n}};
    for (int i = 0; i < n; ++i)
        out.base_index.push_back(i);
    if (d.metric) {
        if (static_cast<int>(d.metric->size()) != N * N)
            throw ModelError("metric needs (n+1)^2 entries");
        out.total = MetricField(vars, *d.metric, d.validity, "integrability(" + std::to_string(n) + ")");
        return out;
    }
    // g = (E E^T)^{-1} where the rows of E are the frame fields.
    auto eval = [frame = d.frame, vars, N](std::span<const Jet3> x) {
        const int dirs = x.empty() ? 0 : x[0].directions();
        std::vector<JetVector> e;
        for (const auto& v : frame) {
            JetVector c;
            for (const auto& comp : v)
                c.push_back(eval_jet(comp, vars, x));
            e.push_back(std::move(c));
        }
        JetVector ginv(static_cast<std::size_t>(N * N), Jet3::constant(0.0, dirs));
        for (int a = 0; a < N; ++a)
            for (int b = a; b < N; ++b) {
                Jet3 s = Jet3::constant(0.0, dirs);
                for (const auto& v : e)
                    s += v[a] * v[b];
                ginv[a * N + b] = s;
                ginv[b * N + a] = s;
            }
        return geometry::spd_inverse(ginv, N);
    };
    out.total = MetricField(vars, eval, d.validity, "integrability(" + std::to_string(n) + ")");
    return out;
}

} // namespace

IntegrabilityData make_integrability_data(int base_dim, std::vector<std::vector<Expression>> frame,
                                          std::vector<Expression> kappa, std::vector<std::string> vars)
{
    IntegrabilityData d;
    const int n = base_dim;
    d.base_dim = n;
    d.vars = std::move(vars);
    d.frame = std::move(frame);
    d.kappa = std::move(kappa);
    d.f.assign(static_cast<std::size_t>(n * n * n), c0());
    d.sigma.assign(static_cast<std::size_t>(n * n), c0());
    d.base_ricci.assign(static_cast<std::size_t>(n * n), c0());
    return d;
}

void set_f(IntegrabilityData& data, int i, int j, int k, const Expression& value)
{
    const int n = data.base_dim;
    data.f.at(static_cast<std::size_t>((i * n + j) * n + k)) = value;
    data.f.at(static_cast<std::size_t>((j * n + i) * n + k)) = i == j ? c0() : -value;
}

void set_sigma(IntegrabilityData& data, int i, int j, const Expression& value)
{
    const int n = data.base_dim;
    data.sigma.at(static_cast<std::size_t>(i * n + j)) = value;
    data.sigma.at(static_cast<std::size_t>(j * n + i)) = i == j ? c0() : -value;
}

void set_gauss_curvature(IntegrabilityData& data, const Expression& k)
{
    const int n = data.base_dim;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            data.base_ricci[static_cast<std::size_t>(i * n + j)] = i == j ? k : c0();
}

std::string kind_name(const SubmersionModel& model)
{
    struct V {
        std::string operator()(const WarpedProduct&) const { return "warped"; }
        std::string operator()(const TwistedProduct&) const { return "twisted"; }
        std::string operator()(const Cylindrical&) const { return "cylindrical"; }
        std::string operator()(const IntegrabilityData&) const { return "integrability"; }
    };
    return std::visit(V{}, model);
}

// ---------------------------------------------------------------------------
// AdaptedChart
// ---------------------------------------------------------------------------

AdaptedChart::AdaptedChart(SubmersionModel model)
    : model_(std::move(model)), total_(MetricField::euclidean(1))
{
    Built b = std::visit([](const auto& m) { return build(m); }, model_);
    total_ = std::move(b.total);
    base_index_ = std::move(b.base_index);
    fiber_index_ = std::move(b.fiber_index);
}

std::vector<std::string> AdaptedChart::base_vars() const
{
    std::vector<std::string> out;
    for (int i : base_index_)
        out.push_back(vars()[static_cast<std::size_t>(i)]);
    return out;
}

void AdaptedChart::require_domain(std::span<const double> p) const
{
    total_.require_domain(p);
    try {
        const auto g = total_.evaluate(p);
        for (double v : g)
            if (!std::isfinite(v))
                throw geometry::ChartDomainError("metric is not finite at this point");
        if (const auto* d = std::get_if<IntegrabilityData>(&model_)) {
            for (const auto& e : d->kappa)
                eval_at(e, vars(), p);
            for (const auto& e : d->base_ricci)
                eval_at(e, vars(), p);
        }
    } catch (const expr::EvalError& e) {
        throw geometry::ChartDomainError(std::string("model fails to evaluate: ") + e.what());
    } catch (const geometry::SingularMetricError& e) {
        throw geometry::ChartDomainError(e.what());
    }
}

bool AdaptedChart::in_domain(std::span<const double> p) const
{
    try {
        require_domain(p);
        return true;
    } catch (const geometry::ChartDomainError&) {
        return false;
    }
}

std::vector<double> AdaptedChart::project(std::span<const double> p) const
{
    std::vector<double> out;
    for (int i : base_index_)
        out.push_back(p[static_cast<std::size_t>(i)]);
    return out;
}

std::vector<JetVector> AdaptedChart::frame(std::span<const Jet3> x, const Connection& c) const
{
    const int N = total_dim();
    const int d = x.empty() ? 0 : x[0].directions();
    if (const auto* data = std::get_if<IntegrabilityData>(&model_)) {
        std::vector<JetVector> out;
        for (const auto& v : data->frame) {
            JetVector comp;
            for (const auto& e : v)
                comp.push_back(eval_jet(e, vars(), x));
            out.push_back(std::move(comp));
        }
        return out;
    }
    // Gram-Schmidt on coordinate fields, vertical ones first.
    std::vector<int> order = fiber_index_;
    order.insert(order.end(), base_index_.begin(), base_index_.end());
    std::vector<JetVector> done;
    for (int idx : order) {
        JetVector u(static_cast<std::size_t>(N), Jet3::constant(0.0, d));
        u[static_cast<std::size_t>(idx)] = Jet3::constant(1.0, d);
        for (const auto& e : done) {
            const Jet3 proj = geometry::inner(c, u, e);
            for (int a = 0; a < N; ++a)
                u[a] -= proj * e[a];
        }
        const Jet3 norm = sqrt(geometry::inner(c, u, u));
        for (auto& comp : u)
            comp = comp / norm;
        done.push_back(std::move(u));
    }
    const int k = fiber_dim();
    std::vector<JetVector> out(done.begin() + k, done.end());
    out.insert(out.end(), done.begin(), done.begin() + k);
    return out;
}

JetVector AdaptedChart::base_metric(std::span<const Jet3> x) const
{
    const int n = base_dim();
    const int d = x.empty() ? 0 : x[0].directions();
    if (const auto* w = std::get_if<WarpedProduct>(&model_)) {
        JetVector h = w->base.evaluate(x.subspan(0, static_cast<std::size_t>(n)));
        for (auto& e : h)
            e = full(e, d);
        return h;
    }
    if (const auto* data = std::get_if<IntegrabilityData>(&model_)) {
        JetVector hinv(static_cast<std::size_t>(n * n), Jet3::constant(0.0, d));
        for (int i = 0; i < n; ++i) {
            JetVector eps;
            for (int a = 0; a < n; ++a)
                eps.push_back(eval_jet(data->frame[i][base_index_[a]], vars(), x));
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    hinv[a * n + b] += eps[a] * eps[b];
        }
        return geometry::spd_inverse(hinv, n);
    }
    JetVector h(static_cast<std::size_t>(n * n), Jet3::constant(0.0, d));
    for (int a = 0; a < n; ++a)
        h[a * n + a] = Jet3::constant(1.0, d);
    return h;
}

Connection AdaptedChart::base_connection(std::span<const double> p) const
{
    require_domain(p);
    const auto y = project(p);
    const int n = base_dim();
    if (const auto* w = std::get_if<WarpedProduct>(&model_))
        return geometry::connection_at(w->base, y);
    // Base directions seeded, fiber coordinates held at their values in p.
    const auto yj = seed(y);
    std::vector<Jet3> x(static_cast<std::size_t>(total_dim()));
    for (int a = 0; a < n; ++a)
        x[static_cast<std::size_t>(base_index_[a])] = yj[static_cast<std::size_t>(a)];
    for (int i : fiber_index_)
        x[static_cast<std::size_t>(i)] = Jet3::constant(p[static_cast<std::size_t>(i)], n);
    return geometry::make_connection(base_metric(x), n);
}

std::vector<double> AdaptedChart::base_ricci_operator(std::span<const double> p) const
{
    const auto* data = std::get_if<IntegrabilityData>(&model_);
    if (!data)
        return geometry::ricci_operator(base_connection(p));
    require_domain(p);
    const int n = base_dim();
    // E has columns dφ(e_i); Ric = E R E^{-1}.
    std::vector<double> e(static_cast<std::size_t>(n * n));
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i)
            e[a * n + i] = eval_at(data->frame[i][base_index_[a]], vars(), p);
    std::vector<double> r(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n * n; ++i)
        r[i] = eval_at(data->base_ricci[i], vars(), p);
    const auto einv = inverse(e, n);
    std::vector<double> er(static_cast<std::size_t>(n * n), 0.0), out(static_cast<std::size_t>(n * n), 0.0);
    for (int a = 0; a < n; ++a)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                er[a * n + j] += e[a * n + i] * r[i * n + j];
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int j = 0; j < n; ++j)
                out[a * n + b] += er[a * n + j] * einv[j * n + b];
    return out;
}

std::vector<std::pair<double, double>> AdaptedChart::fiber_ranges() const
{
    if (std::holds_alternative<Cylindrical>(model_))
        return {{0.3, std::numbers::pi - 0.3}, {0.0, 6.0}};
    return std::vector<std::pair<double, double>>(static_cast<std::size_t>(fiber_dim()), {-1.0, 1.0});
}

std::vector<double> AdaptedChart::default_point() const
{
    if (std::holds_alternative<Cylindrical>(model_))
        return {1.0, std::numbers::pi / 2, 0.0, 0.0};
    return std::vector<double>(static_cast<std::size_t>(total_dim()), 0.0);
}

// ---------------------------------------------------------------------------
// Fiber geometry
// ---------------------------------------------------------------------------

MetricField total_metric(const SubmersionModel& model) { return AdaptedChart(model).total(); }

JetVector LocalFrame::horizontal(const JetVector& v) const
{
    const int N = total_dim();
    JetVector out(static_cast<std::size_t>(N), Jet3(0.0));
    for (int i = 0; i < base_dim; ++i) {
        const Jet3 c = geometry::inner(connection, v, frame[i]);
        for (int a = 0; a < N; ++a)
            out[a] += c * frame[i][a];
    }
    return out;
}

JetVector LocalFrame::vertical(const JetVector& v) const
{
    const JetVector h = horizontal(v);
    JetVector out(v.size());
    for (std::size_t a = 0; a < v.size(); ++a)
        out[a] = v[a] - h[a];
    return out;
}

LocalFrame local_frame(const AdaptedChart& chart, std::span<const double> p)
{
    chart.require_domain(p);
    LocalFrame lf;
    lf.base_dim = chart.base_dim();
    const auto x = seed(p);
    lf.connection = geometry::make_connection(chart.total().evaluate(x), chart.total_dim());
    lf.frame = chart.frame(x, lf.connection);
    const int N = chart.total_dim();
    const int k = chart.fiber_dim();
    JetVector sum(static_cast<std::size_t>(N), Jet3(0.0));
    for (int s = lf.base_dim; s < N; ++s) {
        const JetVector d = geometry::covariant_derivative(lf.connection, lf.frame[s], lf.frame[s]);
        for (int a = 0; a < N; ++a)
            sum[a] += d[a];
    }
    lf.mu = lf.horizontal(sum);
    for (auto& c : lf.mu)
        c *= 1.0 / k;
    return lf;
}

geometry::TangentVector mean_curvature(const AdaptedChart& chart, std::span<const double> p)
{
    const auto lf = local_frame(chart, p);
    geometry::TangentVector out{{p.begin(), p.end()}, {}};
    for (const auto& c : lf.mu)
        out.components.push_back(c.value());
    return out;
}

geometry::TangentVector mean_curvature(const SubmersionModel& model, std::span<const double> p)
{
    return mean_curvature(AdaptedChart(model), p);
}

geometry::TangentVector tension_field(const AdaptedChart& chart, std::span<const double> p)
{
    const auto mu = mean_curvature(chart, p);
    geometry::TangentVector out{chart.project(p), {}};
    for (int i : chart.base_index())
        out.components.push_back(-chart.fiber_dim() * mu.components[static_cast<std::size_t>(i)]);
    return out;
}

geometry::TangentVector tension_field(const SubmersionModel& model, std::span<const double> p)
{
    return tension_field(AdaptedChart(model), p);
}

BasicnessReport is_basic_mean_curvature(const AdaptedChart& chart, std::span<const std::vector<double>> base_points,
                                        int fiber_samples)
{
    if (fiber_samples < 2)
        throw std::invalid_argument("basicness check needs at least 2 fiber samples");
    const auto ranges = chart.fiber_ranges();
    const int k = chart.fiber_dim();
    BasicnessReport report;
    for (const auto& y : base_points) {
        if (static_cast<int>(y.size()) != chart.base_dim())
            throw std::invalid_argument("base point has the wrong dimension");
        std::vector<double> p = chart.default_point();
        for (int a = 0; a < chart.base_dim(); ++a)
            p[static_cast<std::size_t>(chart.base_index()[a])] = y[static_cast<std::size_t>(a)];
        std::vector<int> cursor(static_cast<std::size_t>(k), 0);
        std::vector<double> lo, hi;
        for (;;) {
            for (int s = 0; s < k; ++s) {
                const auto [a, b] = ranges[static_cast<std::size_t>(s)];
                p[static_cast<std::size_t>(chart.fiber_index()[s])] = a + (b - a) * cursor[s] / (fiber_samples - 1);
            }
            const auto tau = tension_field(chart, p);
            if (lo.empty()) {
                lo = tau.components;
                hi = tau.components;
            }
            for (std::size_t a = 0; a < lo.size(); ++a) {
                lo[a] = std::min(lo[a], tau.components[a]);
                hi[a] = std::max(hi[a], tau.components[a]);
            }
            int s = 0;
            for (; s < k; ++s) {
                if (++cursor[s] < fiber_samples)
                    break;
                cursor[s] = 0;
            }
            if (s == k)
                break;
        }
        // Variation of dφ(μ), not of τ = -k dφ(μ).
        for (std::size_t a = 0; a < lo.size(); ++a)
            report.max_variation = std::max(report.max_variation, (hi[a] - lo[a]) / k);
    }
    report.basic = report.max_variation < 1e-9;
    return report;
}

BasicnessReport is_basic_mean_curvature(const SubmersionModel& model, std::span<const std::vector<double>> base_points,
                                        int fiber_samples)
{
    return is_basic_mean_curvature(AdaptedChart(model), base_points, fiber_samples);
}

double frame_orthonormality_error(const AdaptedChart& chart, std::span<const double> p)
{
    chart.require_domain(p);
    std::vector<Jet3> x;
    for (double v : p)
        x.emplace_back(v);
    const Connection c{chart.total_dim(), chart.total().evaluate(x), {}, {}};
    const auto e = chart.frame(x, c);
    double err = 0.0;
    for (std::size_t a = 0; a < e.size(); ++a)
        for (std::size_t b = 0; b < e.size(); ++b)
            err = std::max(err, std::abs(geometry::inner(c, e[a], e[b]).value() - (a == b ? 1.0 : 0.0)));
    return err;
}

FrameConnection frame_connection(const SubmersionModel& model, std::span<const double> p)
{
    if (const auto* t = std::get_if<TwistedProduct>(&model)) {
        const AdaptedChart chart(model);
        chart.require_domain(p);
        const int n = t->base_dim;
        const auto x = seed(p);
        const Jet3 lambda = eval_jet(t->lambda, chart.vars(), x);
        FrameConnection fc;
        fc.n = n;
        fc.p.assign(static_cast<std::size_t>(n * n * n), 0.0);
        fc.sigma.assign(static_cast<std::size_t>(n * n), 0.0);
        for (int i = 0; i < n; ++i)
            fc.kappa.push_back(-lambda.partial(i));
        return fc;
    }
    if (const auto* d = std::get_if<IntegrabilityData>(&model)) {
        const AdaptedChart chart(model);
        const double err = frame_orthonormality_error(chart, p);
        if (err > 1e-8)
            throw ModelError("declared frame is not orthonormal at this point (error " + std::to_string(err) + ")");
        const int n = d->base_dim;
        const auto& vars = chart.vars();
        std::vector<double> f(static_cast<std::size_t>(n * n * n));
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] = eval_at(d->f[i], vars, p);
        auto F = [&](int i, int j, int k) { return f[static_cast<std::size_t>((i * n + j) * n + k)]; };
        FrameConnection fc;
        fc.n = n;
        fc.p.resize(static_cast<std::size_t>(n * n * n));
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    fc.p[static_cast<std::size_t>((k * n + i) * n + j)] =
                        0.5 * (-F(i, k, j) - F(j, k, i) + F(i, j, k));
        for (const auto& e : d->sigma)
            fc.sigma.push_back(eval_at(e, vars, p));
        for (const auto& e : d->kappa)
            fc.kappa.push_back(eval_at(e, vars, p));
        return fc;
    }
    throw ModelError("frame connection data needs a twisted product or integrability data, got " + kind_name(model));
}

MeasuredData measure_integrability_data(const AdaptedChart& chart, std::span<const double> p)
{
    if (chart.fiber_dim() != 1)
        throw ModelError("integrability data is defined for 1-dimensional fibers");
    chart.require_domain(p);
    const int n = chart.base_dim();
    const auto x = seed(p);
    const auto c = geometry::make_connection(chart.total().evaluate(x), chart.total_dim());
    const auto e = chart.frame(x, c);
    auto g = [&](const JetVector& a, const JetVector& b) { return geometry::inner(c, a, b).value(); };
    MeasuredData m;
    m.n = n;
    m.f.assign(static_cast<std::size_t>(n * n * n), 0.0);
    m.sigma.assign(static_cast<std::size_t>(n * n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const auto br = geometry::lie_bracket(e[i], e[j]);
            for (int k = 0; k < n; ++k)
                m.f[static_cast<std::size_t>((i * n + j) * n + k)] = g(br, e[k]);
            m.sigma[static_cast<std::size_t>(i * n + j)] = -0.5 * g(br, e[n]);
        }
    for (int i = 0; i < n; ++i)
        m.kappa.push_back(g(geometry::lie_bracket(e[i], e[n]), e[n]));
    return m;
}

} // namespace biharm::submersion
