#include "biharm/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace biharm::cli {

using nlohmann::json;

namespace {

std::string child(const std::string& pointer, std::string_view key)
{
    std::string escaped;
    for (char c : key) {
        if (c == '~')
            escaped += "~0";
        else if (c == '/')
            escaped += "~1";
        else
            escaped += c;
    }
    return pointer + "/" + escaped;
}

std::string child(const std::string& pointer, std::size_t index) { return pointer + "/" + std::to_string(index); }

const json& require(const json& j, std::string_view key, const std::string& pointer)
{
    if (!j.is_object())
        throw ManifestError(pointer, "expected an object");
    const auto it = j.find(key);
    if (it == j.end())
        throw ManifestError(child(pointer, key), "required field is missing");
    return *it;
}

std::string require_string(const json& j, const std::string& pointer)
{
    if (!j.is_string())
        throw ManifestError(pointer, "expected a string");
    return j.get<std::string>();
}

int require_int(const json& j, const std::string& pointer, int lo, int hi)
{
    if (!j.is_number_integer())
        throw ManifestError(pointer, "expected an integer");
    const auto v = j.get<long long>();
    if (v < lo || v > hi)
        throw ManifestError(pointer, "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
}

double require_number(const json& j, const std::string& pointer)
{
    if (!j.is_number())
        throw ManifestError(pointer, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        throw ManifestError(pointer, "expected a finite number");
    return v;
}

expr::Expression expression(const json& j, const std::string& pointer)
{
    if (j.is_number())
        return expr::Expression::constant(require_number(j, pointer));
    const std::string src = require_string(j, pointer);
    try {
        return expr::parse(src);
    } catch (const expr::ParseError& e) {
        throw ManifestError(pointer, e.what());
    }
}

std::vector<std::string> strings(const json& j, const std::string& pointer)
{
    if (!j.is_array())
        throw ManifestError(pointer, "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(require_string(j[i], child(pointer, i)));
    return out;
}

std::vector<expr::Expression> expressions(const json& j, const std::string& pointer, std::optional<std::size_t> size)
{
    if (!j.is_array())
        throw ManifestError(pointer, "expected an array");
    if (size && j.size() != *size)
        throw ManifestError(pointer, "expected " + std::to_string(*size) + " entries, got " + std::to_string(j.size()));
    std::vector<expr::Expression> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(expression(j[i], child(pointer, i)));
    return out;
}

// Square matrix of expressions, row-major.
std::vector<expr::Expression> matrix(const json& j, const std::string& pointer, std::size_t n)
{
    if (!j.is_array() || j.size() != n)
        throw ManifestError(pointer, "expected " + std::to_string(n) + " rows");
    std::vector<expr::Expression> out;
    for (std::size_t i = 0; i < n; ++i) {
        auto row = expressions(j[i], child(pointer, i), n);
        out.insert(out.end(), row.begin(), row.end());
    }
    return out;
}

std::vector<int> index_key(std::string_view key, std::size_t arity, int n, const std::string& pointer)
{
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= key.size()) {
        const auto comma = key.find(',', start);
        const auto part = key.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        int v = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc() || ptr != part.data() + part.size() || v < 1 || v > n)
            throw ManifestError(pointer, "index key must list " + std::to_string(arity) +
                                             " comma-separated indices in 1.." + std::to_string(n));
        out.push_back(v - 1);
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    if (out.size() != arity)
        throw ManifestError(pointer, "index key must list " + std::to_string(arity) + " indices");
    return out;
}

geometry::MetricField base_metric(const json& j, const std::vector<std::string>& vars, const std::string& pointer)
{
    if (j.is_string()) {
        try {
            return geometry::MetricField::builtin(j.get<std::string>(), vars);
        } catch (const std::invalid_argument& e) {
            throw ManifestError(pointer, e.what());
        }
    }
    if (!j.is_object())
        throw ManifestError(pointer, "expected a built-in metric name or an object with vars and entries");
    const auto mvars = strings(require(j, "vars", pointer), child(pointer, "vars"));
    if (mvars.empty() || mvars.size() > static_cast<std::size_t>(kMaxJetDirections))
        throw ManifestError(child(pointer, "vars"), "expected 1.." + std::to_string(kMaxJetDirections) + " variables");
    auto entries = matrix(require(j, "entries", pointer), child(pointer, "entries"), mvars.size());
    std::vector<expr::Expression> validity;
    if (j.contains("validity"))
        validity = expressions(j["validity"], child(pointer, "validity"), std::nullopt);
    return geometry::MetricField(mvars, std::move(entries), std::move(validity));
}

submersion::IntegrabilityData integrability(const json& j, const std::string& pointer)
{
    const int n = require_int(require(j, "base_dim", pointer), child(pointer, "base_dim"), 1, kMaxJetDirections - 1);
    const auto N = static_cast<std::size_t>(n + 1);
    std::vector<std::string> vars;
    if (j.contains("vars")) {
        vars = strings(j["vars"], child(pointer, "vars"));
        if (vars.size() != N)
            throw ManifestError(child(pointer, "vars"), "expected " + std::to_string(N) + " variables");
    }
    const auto& fj = require(j, "frame", pointer);
    const std::string fp = child(pointer, "frame");
    if (!fj.is_array() || fj.size() != N)
        throw ManifestError(fp, "expected " + std::to_string(N) + " vector fields");
    std::vector<std::vector<expr::Expression>> frame;
    for (std::size_t i = 0; i < N; ++i)
        frame.push_back(expressions(fj[i], child(fp, i), N));
    auto kappa = expressions(require(j, "kappa", pointer), child(pointer, "kappa"), static_cast<std::size_t>(n));
    auto data = submersion::make_integrability_data(n, std::move(frame), std::move(kappa), vars);

    if (j.contains("f")) {
        const std::string p = child(pointer, "f");
        if (!j["f"].is_object())
            throw ManifestError(p, "expected an object keyed by \"i,j,k\" for f^k_ij");
        for (const auto& [key, value] : j["f"].items()) {
            const auto idx = index_key(key, 3, n, child(p, key));
            if (idx[0] == idx[1])
                throw ManifestError(child(p, key), "f^k_ii vanishes by antisymmetry");
            submersion::set_f(data, idx[0], idx[1], idx[2], expression(value, child(p, key)));
        }
    }
    if (j.contains("sigma")) {
        const std::string p = child(pointer, "sigma");
        if (!j["sigma"].is_object())
            throw ManifestError(p, "expected an object keyed by \"i,j\"");
        for (const auto& [key, value] : j["sigma"].items()) {
            const auto idx = index_key(key, 2, n, child(p, key));
            if (idx[0] == idx[1])
                throw ManifestError(child(p, key), "sigma_ii vanishes by antisymmetry");
            submersion::set_sigma(data, idx[0], idx[1], expression(value, child(p, key)));
        }
    }
    const std::string rp = child(pointer, "base_ricci");
    if (j.contains("base_ricci")) {
        const auto& r = j["base_ricci"];
        if (r.is_string() && r.get<std::string>() == "flat") {
        } else if (r.is_object() && r.contains("gauss")) {
            submersion::set_gauss_curvature(data, expression(r["gauss"], child(rp, "gauss")));
        } else if (r.is_array()) {
            data.base_ricci = matrix(r, rp, static_cast<std::size_t>(n));
        } else {
            throw ManifestError(rp, "expected \"flat\", {\"gauss\": K} or an n x n matrix");
        }
    }
    if (j.contains("metric"))
        data.metric = matrix(j["metric"], child(pointer, "metric"), N);
    if (j.contains("validity"))
        data.validity = expressions(j["validity"], child(pointer, "validity"), std::nullopt);
    return data;
}

} // namespace

double GridAxis::at(int i) const
{
    if (count <= 1)
        return min;
    return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
}

GridAxis parse_grid_axis(std::string_view spec, const std::string& pointer)
{
    const auto eq = spec.find('=');
    if (eq == std::string_view::npos || eq == 0)
        throw ManifestError(pointer, "grid spec must look like var=min:max:count or var=value");
    GridAxis axis;
    axis.var = std::string(spec.substr(0, eq));
    std::vector<std::string_view> parts;
    auto rest = spec.substr(eq + 1);
    for (;;) {
        const auto colon = rest.find(':');
        parts.push_back(rest.substr(0, colon));
        if (colon == std::string_view::npos)
            break;
        rest = rest.substr(colon + 1);
    }
    auto number = [&](std::string_view s) {
        double v = 0.0;
        // Accept expression syntax (e.g. pi/3) as long as it is constant.
        try {
            const auto e = expr::parse(s);
            if (!expr::free_vars(e).empty())
                throw ManifestError(pointer, "grid bound '" + std::string(s) + "' is not a constant");
            v = expr::eval<double>(e, std::map<std::string, double>{});
        } catch (const expr::ParseError& err) {
            throw ManifestError(pointer, std::string("bad grid bound: ") + err.what());
        } catch (const expr::EvalError& err) {
            throw ManifestError(pointer, std::string("bad grid bound: ") + err.what());
        }
        return v;
    };
    if (parts.size() == 1) {
        axis.min = axis.max = number(parts[0]);
        axis.count = 1;
        return axis;
    }
    if (parts.size() != 3)
        throw ManifestError(pointer, "grid spec must look like var=min:max:count or var=value");
    axis.min = number(parts[0]);
    axis.max = number(parts[1]);
    int count = 0;
    auto [ptr, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), count);
    if (ec != std::errc() || ptr != parts[2].data() + parts[2].size())
        throw ManifestError(pointer, "grid count must be an integer");
    if (count < 2)
        throw ManifestError(pointer, "a swept variable needs count >= 2");
    if (count > 100000)
        throw ManifestError(pointer, "grid count is unreasonably large");
    axis.count = count;
    return axis;
}

submersion::SubmersionModel parse_model(const json& j, const std::string& pointer)
{
    const std::string kind = require_string(require(j, "kind", pointer), child(pointer, "kind"));
    try {
        if (kind == "warped_product") {
            std::vector<std::string> base_vars;
            if (j.contains("base_vars"))
                base_vars = strings(j["base_vars"], child(pointer, "base_vars"));
            submersion::WarpedProduct w{base_metric(require(j, "base", pointer), base_vars, child(pointer, "base")), 1,
                                        expression(require(j, "lambda", pointer), child(pointer, "lambda")), {}};
            if (j.contains("fiber_dim"))
                w.fiber_dim = require_int(j["fiber_dim"], child(pointer, "fiber_dim"), 1, kMaxJetDirections - 1);
            if (j.contains("fiber_vars"))
                w.fiber_vars = strings(j["fiber_vars"], child(pointer, "fiber_vars"));
            submersion::AdaptedChart check(w);
            return w;
        }
        if (kind == "twisted_product") {
            submersion::TwistedProduct t{
                require_int(require(j, "base_dim", pointer), child(pointer, "base_dim"), 1, kMaxJetDirections - 1),
                expression(require(j, "lambda", pointer), child(pointer, "lambda"))};
            submersion::AdaptedChart check(t);
            return t;
        }
        if (kind == "cylindrical")
            return submersion::Cylindrical{};
        if (kind == "integrability_data") {
            auto d = integrability(j, pointer);
            submersion::AdaptedChart check(d);
            return d;
        }
    } catch (const submersion::ModelError& e) {
        throw ManifestError(pointer, e.what());
    }
    throw ManifestError(child(pointer, "kind"),
                        "unknown model kind '" + kind +
                            "' (expected warped_product, twisted_product, cylindrical or integrability_data)");
}

Manifest parse_manifest(const json& j)
{
    if (!j.is_object())
        throw ManifestError("", "manifest must be a JSON object");
    static const std::set<std::string> known{"model", "criteria", "grid", "tolerances", "tolerance", "require_proper",
                                             "output"};
    for (const auto& [key, value] : j.items())
        if (!known.contains(key))
            throw ManifestError(child("", key), "unknown field");

    Manifest m;
    m.source = j;
    m.model = parse_model(require(j, "model", ""), "/model");
    const submersion::AdaptedChart chart(m.model);

    const auto& crit = require(j, "criteria", "");
    if (!crit.is_array() || crit.empty())
        throw ManifestError("/criteria", "expected a non-empty array of criterion names");
    for (std::size_t i = 0; i < crit.size(); ++i) {
        const auto name = require_string(crit[i], child("/criteria", i));
        const auto c = biharmonic::parse_criterion(name);
        if (!c)
            throw ManifestError(child("/criteria", i), "unknown criterion '" + name + "'");
        if (std::find(m.criteria.begin(), m.criteria.end(), *c) != m.criteria.end())
            throw ManifestError(child("/criteria", i), "criterion listed twice");
        m.criteria.push_back(*c);
    }

    if (j.contains("grid")) {
        const auto& g = j["grid"];
        std::set<std::string> seen;
        auto add = [&](const GridAxis& axis, const std::string& p) {
            if (std::find(chart.vars().begin(), chart.vars().end(), axis.var) == chart.vars().end())
                throw ManifestError(p, "'" + axis.var + "' is not a chart variable of this model");
            if (!seen.insert(axis.var).second)
                throw ManifestError(p, "variable '" + axis.var + "' appears twice");
            m.grid.push_back(axis);
        };
        if (g.is_array()) {
            for (std::size_t i = 0; i < g.size(); ++i)
                add(parse_grid_axis(require_string(g[i], child("/grid", i)), child("/grid", i)), child("/grid", i));
        } else if (g.is_object()) {
            for (const auto& [key, value] : g.items()) {
                const auto p = child("/grid", key);
                add(parse_grid_axis(key + "=" + require_string(value, p), p), p);
            }
        } else {
            throw ManifestError("/grid", "expected an array of \"var=min:max:count\" strings");
        }
    }

    if (j.contains("tolerance")) {
        const double t = require_number(j["tolerance"], "/tolerance");
        if (!(t > 0.0))
            throw ManifestError("/tolerance", "tolerance must be positive");
        for (auto c : m.criteria)
            m.tolerances[c] = t;
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        if (!t.is_object())
            throw ManifestError("/tolerances", "expected an object keyed by criterion name");
        for (const auto& [key, value] : t.items()) {
            const auto p = child("/tolerances", key);
            const auto c = biharmonic::parse_criterion(key);
            if (!c)
                throw ManifestError(p, "unknown criterion '" + key + "'");
            const double v = require_number(value, p);
            if (!(v > 0.0))
                throw ManifestError(p, "tolerance must be positive");
            m.tolerances[*c] = v;
        }
    }
    if (j.contains("require_proper")) {
        if (!j["require_proper"].is_boolean())
            throw ManifestError("/require_proper", "expected a boolean");
        m.require_proper = j["require_proper"].get<bool>();
    }
    if (j.contains("output")) {
        const auto& o = j["output"];
        if (!o.is_object())
            throw ManifestError("/output", "expected an object with path and/or format");
        if (o.contains("path"))
            m.output = require_string(o["path"], "/output/path");
        if (o.contains("format")) {
            m.format = require_string(o["format"], "/output/format");
            if (m.format != "json" && m.format != "csv")
                throw ManifestError("/output/format", "expected \"json\" or \"csv\"");
        }
    }
    return m;
}

Manifest load_manifest(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ManifestError("", "cannot open manifest '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ManifestError("", std::string("malformed JSON: ") + e.what());
    }
    return parse_manifest(j);
}

} // namespace biharm::cli
