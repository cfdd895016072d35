#include "biharm/biharmonic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace biharm::biharmonic {

using geometry::Connection;
using geometry::JetVector;
using geometry::MetricField;
using submersion::AdaptedChart;

namespace {

constexpr std::array<std::pair<Criterion, std::string_view>, 7> kNames{{
    {Criterion::eq1_general, "eq1-general"},
    {Criterion::bas_basic, "bas-basic"},
    {Criterion::wp_warped, "wp-warped"},
    {Criterion::einstein, "einstein"},
    {Criterion::integrability_1de, "1de-integrability"},
    {Criterion::twisted, "twisted"},
    {Criterion::bochner, "bochner"},
}};

std::vector<double> values(const JetVector& v)
{
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& j : v)
        out.push_back(j.value());
    return out;
}

void axpy(JetVector& acc, double a, const JetVector& x)
{
    for (std::size_t i = 0; i < acc.size(); ++i)
        acc[i] += a * x[i];
}

std::vector<double> mat_vec(const std::vector<double>& m, const std::vector<double>& v)
{
    const std::size_t n = v.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            out[a] += m[a * n + b] * v[b];
    return out;
}

Jet3 eval_jet(const expr::Expression& e, const std::vector<std::string>& vars, std::span<const Jet3> x)
{
    Jet3 j = expr::eval<Jet3>(e, vars, x);
    const int d = x.empty() ? 0 : x[0].directions();
    if (j.directions() == 0 && d > 0)
        return Jet3::constant(j.value(), d);
    return j;
}

std::vector<double> dphi(const AdaptedChart& chart, const std::vector<double>& v)
{
    std::vector<double> out;
    for (int i : chart.base_index())
        out.push_back(v[static_cast<std::size_t>(i)]);
    return out;
}

const submersion::WarpedProduct& require_warped(const AdaptedChart& chart, Criterion c)
{
    const auto* w = std::get_if<submersion::WarpedProduct>(&chart.model());
    if (!w)
        throw NotApplicableError(std::string(criterion_name(c)) + " applies to warped products, not " +
                                 submersion::kind_name(chart.model()));
    return *w;
}

// Frame data of a 1-dimensional-fiber model as jets around p.
struct FrameJets {
    int n = 0;
    Connection c;
    std::vector<JetVector> e;
    JetVector kappa;
    JetVector P; // P^k_ij at (k * n + i) * n + j
    std::vector<double> ricci; // Ric(dφ e_i, dφ e_k)

    const Jet3& p(int k, int i, int j) const { return P[static_cast<std::size_t>((k * n + i) * n + j)]; }
    Jet3 d(int i, const Jet3& f) const { return geometry::directional_derivative(e[static_cast<std::size_t>(i)], f); }
};

std::vector<double> ricci_in_frame(const AdaptedChart& chart, std::span<const double> p)
{
    const int n = chart.base_dim();
    std::vector<double> out(static_cast<std::size_t>(n * n), 0.0);
    if (const auto* data = std::get_if<submersion::IntegrabilityData>(&chart.model())) {
        for (int i = 0; i < n * n; ++i)
            out[i] = expr::eval<double>(data->base_ricci[i], chart.vars(), p);
        return out;
    }
    // Ric(ε_i, ε_k) = h(Ric ε_i, ε_k) with ε_i = dφ(e_i).
    std::vector<Jet3> x;
    for (double v : p)
        x.emplace_back(v);
    const Connection c{chart.total_dim(), chart.total().evaluate(x), {}, {}};
    const auto frame = chart.frame(x, c);
    const auto h = values(chart.base_metric(x));
    const auto ric = chart.base_ricci_operator(p);
    std::vector<std::vector<double>> eps;
    for (int i = 0; i < n; ++i)
        eps.push_back(dphi(chart, values(frame[i])));
    for (int i = 0; i < n; ++i) {
        const auto r = mat_vec(ric, eps[i]);
        for (int k = 0; k < n; ++k)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    out[i * n + k] += h[a * n + b] * r[a] * eps[k][b];
    }
    return out;
}

FrameJets frame_jets(const AdaptedChart& chart, std::span<const double> p)
{
    if (chart.fiber_dim() != 1)
        throw NotApplicableError("integrability equations need 1-dimensional fibers");
    const auto& model = chart.model();
    const auto* twisted = std::get_if<submersion::TwistedProduct>(&model);
    const auto* data = std::get_if<submersion::IntegrabilityData>(&model);
    if (!twisted && !data)
        throw NotApplicableError("integrability equations apply to twisted products and integrability data, not " +
                                 submersion::kind_name(model));
    chart.require_domain(p);
    FrameJets fj;
    const int n = chart.base_dim();
    fj.n = n;
    const auto x = seed(p);
    fj.c = geometry::make_connection(chart.total().evaluate(x), chart.total_dim());
    fj.e = chart.frame(x, fj.c);
    const int d = chart.total_dim();
    fj.P.assign(static_cast<std::size_t>(n * n * n), Jet3::constant(0.0, d));
    if (twisted) {
        const Jet3 lambda = eval_jet(twisted->lambda, chart.vars(), x);
        for (int i = 0; i < n; ++i)
            fj.kappa.push_back(-lambda.derivative(i));
    } else {
        const double err = submersion::frame_orthonormality_error(chart, p);
        if (err > 1e-8)
            throw submersion::ModelError("declared frame is not orthonormal at this point");
        for (const auto& k : data->kappa)
            fj.kappa.push_back(eval_jet(k, chart.vars(), x));
        JetVector f;
        for (const auto& e : data->f)
            f.push_back(eval_jet(e, chart.vars(), x));
        auto F = [&](int i, int j, int k) -> const Jet3& { return f[static_cast<std::size_t>((i * n + j) * n + k)]; };
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    fj.P[static_cast<std::size_t>((k * n + i) * n + j)] = 0.5 * (F(i, j, k) - F(i, k, j) - F(j, k, i));
    }
    fj.ricci = ricci_in_frame(chart, p);
    return fj;
}

} // namespace

std::string_view criterion_name(Criterion c)
{
    for (const auto& [k, name] : kNames)
        if (k == c)
            return name;
    return "unknown";
}

std::optional<Criterion> parse_criterion(std::string_view name)
{
    for (const auto& [k, n] : kNames)
        if (n == name)
            return k;
    return std::nullopt;
}

const std::vector<Criterion>& all_criteria()
{
    static const std::vector<Criterion> all = [] {
        std::vector<Criterion> v;
        for (const auto& [k, n] : kNames)
            v.push_back(k);
        return v;
    }();
    return all;
}

double default_tolerance(Criterion c) { return c == Criterion::bochner ? 1e-4 : 1e-6; }

Residual make_residual(Criterion c, std::span<const double> point, std::vector<double> components)
{
    Residual r;
    r.point.assign(point.begin(), point.end());
    double s = 0.0;
    for (double v : components)
        s += v * v;
    r.norm = std::sqrt(s);
    r.components = std::move(components);
    r.criterion = c;
    return r;
}

Residual bitension_general(const AdaptedChart& chart, std::span<const double> p)
{
    const auto lf = submersion::local_frame(chart, p);
    const auto& c = lf.connection;
    const int N = lf.total_dim();
    const int n = lf.base_dim;
    const double k = lf.fiber_dim();
    auto nabla = [&](const JetVector& x, const JetVector& v) { return geometry::covariant_derivative(c, x, v); };
    auto bracket = [](const JetVector& x, const JetVector& y) { return geometry::lie_bracket(x, y); };
    const JetVector& mu = lf.mu;

    JetVector b(static_cast<std::size_t>(N), Jet3(0.0));
    for (int i = 0; i < n; ++i) {
        const auto& ei = lf.frame[i];
        const JetVector dii = nabla(ei, ei);
        axpy(b, 1.0, nabla(ei, lf.horizontal(nabla(ei, mu))));
        axpy(b, -1.0, nabla(lf.horizontal(dii), mu));
        axpy(b, 1.0, bracket(mu, lf.vertical(dii)));
    }
    for (int s = n; s < N; ++s) {
        const auto& es = lf.frame[s];
        axpy(b, 1.0, bracket(bracket(mu, es), es));
        axpy(b, 1.0, bracket(mu, lf.vertical(nabla(es, es))));
    }
    axpy(b, -k, nabla(mu, mu));

    const auto db = dphi(chart, values(b));
    const auto ric = mat_vec(chart.base_ricci_operator(p), dphi(chart, values(mu)));
    std::vector<double> tau2(db.size());
    for (std::size_t a = 0; a < db.size(); ++a)
        tau2[a] = -k * (db[a] + ric[a]);
    return make_residual(Criterion::eq1_general, p, std::move(tau2));
}

Residual bitension_basic(const AdaptedChart& chart, std::span<const double> p)
{
    const auto lf = submersion::local_frame(chart, p);
    const int n = lf.base_dim;
    const double k = lf.fiber_dim();
    const auto& base_index = chart.base_index();

    // dφ(μ) must not change along the fiber; its fiber derivatives are available exactly.
    double variation = 0.0;
    for (int a : base_index)
        for (int s : chart.fiber_index())
            variation = std::max(variation, std::abs(lf.mu[static_cast<std::size_t>(a)].partial(s)));
    if (variation >= 1e-9)
        throw NonBasicError("mean curvature of the fibers is not basic at this point (fiber derivative " +
                            std::to_string(variation) + ")");

    JetVector tau;
    for (int a : base_index)
        tau.push_back(-k * lf.mu[static_cast<std::size_t>(a)].restricted(base_index));
    const Connection bc = chart.base_connection(p);
    const auto lap = values(geometry::rough_laplacian(bc, tau));
    const auto adv = values(geometry::covariant_derivative(bc, tau, tau));
    const auto ric = mat_vec(chart.base_ricci_operator(p), values(tau));
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a)
        out[a] = lap[a] + adv[a] + ric[a];
    return make_residual(Criterion::bas_basic, p, std::move(out));
}

Residual bitension_pullback(const AdaptedChart& chart, std::span<const double> p)
{
    const auto lf = submersion::local_frame(chart, p);
    const auto& c = lf.connection;
    const int N = lf.total_dim();
    const int n = lf.base_dim;
    const double k = lf.fiber_dim();
    const auto& base_index = chart.base_index();

    const auto x = seed(p);
    const Connection hn = geometry::make_connection(chart.base_metric(x), n);
    // Coordinate directions of the total chart that project onto base direction b.
    auto dphi_coord = [&](int j, int b) { return base_index[static_cast<std::size_t>(b)] == j ? 1.0 : 0.0; };
    auto gamma_n = [&](int a, int b, int cc) -> const Jet3& {
        return hn.christoffel(a, b, cc);
    };

    JetVector v;
    for (int a : base_index)
        v.push_back(-k * lf.mu[static_cast<std::size_t>(a)]);

    // w[j][a] = (∇^φ_{∂_j} V)^a
    std::vector<JetVector> w(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j)
        for (int a = 0; a < n; ++a) {
            Jet3 s = v[a].derivative(j);
            for (int b = 0; b < n; ++b)
                if (dphi_coord(j, b) != 0.0)
                    for (int cc = 0; cc < n; ++cc)
                        s += gamma_n(a, b, cc) * v[cc];
            w[j].push_back(s);
        }
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const double gij = c.ginv(i, j).value();
            if (gij == 0.0)
                continue;
            for (int a = 0; a < n; ++a) {
                double s = w[j][a].derivative(i).value();
                for (int b = 0; b < n; ++b)
                    if (dphi_coord(i, b) != 0.0)
                        for (int cc = 0; cc < n; ++cc)
                            s += gamma_n(a, b, cc).value() * w[j][cc].value();
                for (int l = 0; l < N; ++l)
                    s -= c.christoffel(l, i, j).value() * w[l][a].value();
                out[a] += gij * s;
            }
        }
    const auto ric = mat_vec(chart.base_ricci_operator(p), values(v));
    for (int a = 0; a < n; ++a)
        out[a] += ric[a];
    return make_residual(Criterion::eq1_general, p, std::move(out));
}

Residual warped_residual(const MetricField& base, const expr::Expression& lambda, int fiber_dim,
                         std::span<const double> p)
{
    const Connection c = geometry::connection_at(base, p);
    const auto x = seed(p);
    const Jet3 l = eval_jet(lambda, base.vars(), x);
    const JetVector grad = geometry::gradient(c, l);
    const auto grad_lap = values(geometry::gradient(c, geometry::laplacian(c, l)));
    const auto grad_sq = values(geometry::gradient(c, geometry::inner(c, grad, grad)));
    const auto ric = mat_vec(geometry::ricci_operator(c), values(grad));
    std::vector<double> out(static_cast<std::size_t>(c.dim));
    for (int a = 0; a < c.dim; ++a)
        out[a] = grad_lap[a] + 2.0 * ric[a] + 0.5 * fiber_dim * grad_sq[a];
    return make_residual(Criterion::wp_warped, p, std::move(out));
}

double einstein_constant(const MetricField& base, std::span<const double> p)
{
    const auto ric = geometry::ricci_operator(geometry::connection_at(base, p));
    const int n = base.dim();
    double a = 0.0;
    for (int i = 0; i < n; ++i)
        a += ric[i * n + i];
    a /= n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (std::abs(ric[i * n + j] - (i == j ? a : 0.0)) > 1e-6)
                throw NotEinsteinError("base metric is not Einstein at this point");
    return a;
}

double einstein_first_integral(const MetricField& base, const expr::Expression& lambda, double a, int fiber_dim,
                               std::span<const double> p)
{
    const Connection c = geometry::connection_at(base, p);
    const auto ric = geometry::ricci_operator(c);
    const int n = base.dim();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (std::abs(ric[i * n + j] - (i == j ? a : 0.0)) > 1e-6)
                throw NotEinsteinError("base Ricci operator differs from " + std::to_string(a) +
                                       "·id at this point");
    const auto x = seed(p);
    const Jet3 l = eval_jet(lambda, base.vars(), x);
    const JetVector grad = geometry::gradient(c, l);
    return geometry::laplacian(c, l).value() + 2.0 * a * l.value() +
           0.5 * fiber_dim * geometry::inner(c, grad, grad).value();
}

ConstancyReport constancy(std::span<const double> v, double tol)
{
    ConstancyReport r;
    if (v.empty())
        return r;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    r.min = *lo;
    r.max = *hi;
    double s = 0.0;
    for (double x : v)
        s += x;
    r.mean = s / static_cast<double>(v.size());
    r.constant = r.max - r.min < tol * (1.0 + std::abs(r.mean));
    return r;
}

std::vector<double> integrability_residuals(const AdaptedChart& chart, std::span<const double> p)
{
    const auto fj = frame_jets(chart, p);
    const int n = fj.n;
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        Jet3 s = geometry::laplacian(fj.c, fj.kappa[k]);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Jet3 inner = fj.d(i, fj.p(k, i, j)) - fj.kappa[i] * fj.p(k, i, j);
                for (int l = 0; l < n; ++l)
                    inner += fj.p(l, i, j) * fj.p(k, i, l) - fj.p(l, i, i) * fj.p(k, l, j);
                s += 2.0 * fj.d(i, fj.kappa[j]) * fj.p(k, i, j) + fj.kappa[j] * inner;
            }
        double ric = 0.0;
        for (int i = 0; i < n; ++i)
            ric += fj.kappa[i].value() * fj.ricci[i * n + k];
        out[k] = s.value() + ric;
    }
    return out;
}

double integrability_residual(const AdaptedChart& chart, std::span<const double> p, int k)
{
    const auto r = integrability_residuals(chart, p);
    if (k < 0 || k >= static_cast<int>(r.size()))
        throw std::out_of_range("integrability residual index out of range");
    return r[static_cast<std::size_t>(k)];
}

std::vector<double> integrability_residuals_expanded(const AdaptedChart& chart, std::span<const double> p)
{
    const auto fj = frame_jets(chart, p);
    const int n = fj.n;
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const Jet3& kk = fj.kappa[k];
        Jet3 s(0.0);
        for (int i = 0; i <= n; ++i)
            s += fj.d(i, fj.d(i, kk));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j)
                s -= fj.p(j, i, i) * fj.d(j, kk);
            s -= fj.kappa[i] * fj.d(i, kk);
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const Jet3& pk = fj.p(k, i, j);
                s += 2.0 * fj.d(i, fj.kappa[j]) * pk + fj.kappa[j] * fj.d(i, pk) -
                     fj.kappa[i] * fj.kappa[j] * pk;
                for (int l = 0; l < n; ++l)
                    s += fj.kappa[j] * (fj.p(l, i, j) * fj.p(k, i, l) - fj.p(l, i, i) * fj.p(k, l, j));
            }
        double ric = 0.0;
        for (int i = 0; i < n; ++i)
            ric += fj.kappa[i].value() * fj.ricci[i * n + k];
        out[k] = s.value() + ric;
    }
    return out;
}

std::vector<double> wo_n2_residuals(const submersion::IntegrabilityData& data, std::span<const double> p, WoForm form)
{
    if (data.base_dim != 2)
        throw NotApplicableError("the closed form is stated for a 2-dimensional base");
    const AdaptedChart chart(data);
    chart.require_domain(p);
    const auto x = seed(p);
    const auto c = geometry::make_connection(chart.total().evaluate(x), 3);
    const auto e = chart.frame(x, c);
    const auto& vars = chart.vars();
    const Jet3 f1 = eval_jet(data.f_at(0, 1, 0), vars, x);
    const Jet3 f2 = eval_jet(data.f_at(0, 1, 1), vars, x);
    const Jet3 k1 = eval_jet(data.kappa[0], vars, x);
    const Jet3 k2 = eval_jet(data.kappa[1], vars, x);
    const double K = expr::eval<double>(data.base_ricci[0], vars, p);
    auto e1 = [&](const Jet3& f) { return geometry::directional_derivative(e[0], f); };
    auto e2 = [&](const Jet3& f) { return geometry::directional_derivative(e[1], f); };
    const Jet3 lap1 = geometry::laplacian(c, k1);
    const Jet3 lap2 = geometry::laplacian(c, k2);
    const Jet3 q = -K + f1 * f1 + f2 * f2;

    const Jet3 r1 = lap1 + e1(k2) * f1 + e2(k2) * f2 + e1(k2 * f1) + e2(k2 * f2) - k1 * k2 * f1 - k2 * k2 * f2 - k1 * q;
    const Jet3 r2 = (form == WoForm::corrected ? lap2 : lap1) - e1(k1) * f1 - e2(k1) * f2 - e1(k1 * f1) -
                    e2(k1 * f2) + k1 * k2 * f2 + k1 * k1 * f1 - k2 * q;
    return {r1.value(), r2.value()};
}

double twisted_residual(const submersion::TwistedProduct& model, std::span<const double> p, int i)
{
    const int n = model.base_dim;
    if (static_cast<int>(p.size()) != n + 1)
        throw geometry::ChartDomainError("twisted product point needs " + std::to_string(n + 1) + " coordinates");
    if (i < 0 || i >= n)
        throw std::out_of_range("twisted residual index out of range");
    const AdaptedChart chart(model);
    chart.require_domain(p);
    const auto x = seed(p);
    const Jet3 l = eval_jet(model.lambda, chart.vars(), x);
    const int t = n;
    const double w = std::exp(-2.0 * l.value());
    double s = -w * l.partial(i, t, t) + w * l.partial(t) * l.partial(i, t);
    for (int j = 0; j < n; ++j)
        s += -l.partial(i, j, j) - l.partial(j) * l.partial(i, j);
    return s;
}

std::vector<double> twisted_residuals(const submersion::TwistedProduct& model, std::span<const double> p)
{
    std::vector<double> out;
    for (int i = 0; i < model.base_dim; ++i)
        out.push_back(twisted_residual(model, p, i));
    return out;
}

double bochner_residual(const MetricField& metric, const expr::Expression& lambda, std::span<const double> p)
{
    const Connection c = geometry::connection_at(metric, p);
    const int n = c.dim;
    const auto x = seed(p);
    const Jet3 l = eval_jet(lambda, metric.vars(), x);
    const JetVector grad = geometry::gradient(c, l);
    const JetVector hess = geometry::hessian(c, l);
    const auto grad_lap = geometry::gradient(c, geometry::laplacian(c, l));
    const double half_lap = 0.5 * geometry::laplacian(c, geometry::inner(c, grad, grad)).value();

    double hess_sq = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    hess_sq += c.ginv(i, a).value() * c.ginv(j, b).value() * hess[i * n + j].value() *
                               hess[a * n + b].value();
    const double cross = geometry::inner(c, grad, grad_lap).value();
    const auto ric = geometry::ricci(c);
    const auto g = values(grad);
    double ric_term = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            ric_term += ric[i * n + j] * g[i] * g[j];
    return half_lap - hess_sq - cross - ric_term;
}

double mean_curvature_norm(const AdaptedChart& chart, std::span<const double> p)
{
    const auto lf = submersion::local_frame(chart, p);
    return std::sqrt(std::max(0.0, geometry::inner(lf.connection, lf.mu, lf.mu).value()));
}

Residual evaluate(const AdaptedChart& chart, Criterion c, std::span<const double> p)
{
    switch (c) {
    case Criterion::eq1_general: return bitension_general(chart, p);
    case Criterion::bas_basic: return bitension_basic(chart, p);
    case Criterion::wp_warped: {
        const auto& w = require_warped(chart, c);
        auto r = warped_residual(w.base, w.lambda, w.fiber_dim, chart.project(p));
        r.point.assign(p.begin(), p.end());
        return r;
    }
    case Criterion::einstein: {
        const auto& w = require_warped(chart, c);
        const auto y = chart.project(p);
        const double a = einstein_constant(w.base, y);
        return make_residual(c, p, {einstein_first_integral(w.base, w.lambda, a, w.fiber_dim, y)});
    }
    case Criterion::integrability_1de: return make_residual(c, p, integrability_residuals(chart, p));
    case Criterion::twisted: {
        const auto* t = std::get_if<submersion::TwistedProduct>(&chart.model());
        if (!t)
            throw NotApplicableError("twisted applies to twisted products, not " + submersion::kind_name(chart.model()));
        return make_residual(c, p, twisted_residuals(*t, p));
    }
    case Criterion::bochner: {
        const auto& w = require_warped(chart, c);
        return make_residual(c, p, {bochner_residual(w.base, w.lambda, chart.project(p))});
    }
    }
    throw NotApplicableError("unknown criterion");
}

} // namespace biharm::biharmonic
