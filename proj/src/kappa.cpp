#include "biharm/kappa.hpp"

#include "biharm/jet.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

namespace biharm::kappa {

namespace {

std::string num(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string var_name(const KappaFamily& fam) { return "x" + std::to_string(fam.var + 1); }

// x + b as source text: "x1", "x1+0.5", "x1-0.5".
std::string shifted(const KappaFamily& fam)
{
    if (fam.b == 0.0)
        return var_name(fam);
    if (fam.b < 0.0)
        return var_name(fam) + "-" + num(-fam.b);
    return var_name(fam) + "+" + num(fam.b);
}

template <class T>
T kappa_of(const KappaFamily& fam, const T& x, Form form)
{
    using std::cosh, std::exp, std::sinh, std::tan;
    const double a = fam.a;
    switch (fam.kase) {
    case Case::I: return -2.0 / (x + fam.b);
    case Case::II: return a * tan(0.5 * a * (x + fam.b));
    case Case::III:
        if (form == Form::ratio) {
            const T e = exp(a * (x + fam.b));
            return a * (1.0 + e) / (1.0 - e);
        }
        return -a * cosh(0.5 * a * (x + fam.b)) / sinh(0.5 * a * (x + fam.b));
    }
    return T(0.0);
}

// Distance-like measure to the nearest pole of κ at x.
void check_pole(const KappaFamily& fam, double x)
{
    double gap = 0.0;
    switch (fam.kase) {
    case Case::I: gap = std::abs(x + fam.b); break;
    case Case::II: gap = std::abs(std::cos(0.5 * fam.a * (x + fam.b))); break;
    case Case::III: gap = std::abs(std::expm1(fam.a * (x + fam.b))); break;
    }
    if (!(gap >= kPoleMargin))
        throw PoleError("x = " + num(x) + " is within " + num(kPoleMargin) + " of a pole of case " +
                        case_name(fam.kase) + " on " + var_name(fam));
}

// A point inside the branch on which the antiderivative is real.
double interior_point(const KappaFamily& fam)
{
    switch (fam.kase) {
    case Case::I: return 1.0 - fam.b;
    case Case::II: return 0.5 / fam.a - fam.b;
    case Case::III: return 1.0 / fam.a - fam.b;
    }
    return 0.0;
}

} // namespace

std::string case_name(Case c)
{
    switch (c) {
    case Case::I: return "I";
    case Case::II: return "II";
    case Case::III: return "III";
    }
    return "?";
}

Case parse_case(std::string_view s)
{
    if (s == "I")
        return Case::I;
    if (s == "II")
        return Case::II;
    if (s == "III")
        return Case::III;
    throw FamilyError("unknown case '" + std::string(s) + "' (expected I, II or III)");
}

void validate(const KappaFamily& fam)
{
    if (fam.var < 0)
        throw FamilyError("coordinate index must be non-negative");
    if (!std::isfinite(fam.b))
        throw FamilyError("b must be finite");
    if (fam.kase != Case::I && !(fam.a > 0.0 && std::isfinite(fam.a)))
        throw FamilyError("case " + case_name(fam.kase) + " needs a > 0");
}

double kappa_value(const KappaFamily& fam, double x, Form form)
{
    validate(fam);
    check_pole(fam, x);
    return kappa_of(fam, x, form);
}

double riccati_residual(const KappaFamily& fam, double c, double x)
{
    validate(fam);
    check_pole(fam, x);
    const Jet3 k = kappa_of(fam, Jet3::variable(x, 1, 0), Form::stable);
    return k.partial(0) - 0.5 * k.value() * k.value() - c;
}

double family_constant(const KappaFamily& fam)
{
    switch (fam.kase) {
    case Case::I: return 0.0;
    case Case::II: return 0.5 * fam.a * fam.a;
    case Case::III: return -0.5 * fam.a * fam.a;
    }
    return 0.0;
}

std::string lambda_term(const KappaFamily& fam)
{
    validate(fam);
    switch (fam.kase) {
    case Case::I: return "2*ln(" + shifted(fam) + ")";
    case Case::II: return "2*ln(cos(" + num(0.5 * fam.a) + "*(" + shifted(fam) + ")))";
    case Case::III: return "2*ln(sinh(" + num(0.5 * fam.a) + "*(" + shifted(fam) + ")))";
    }
    return {};
}

std::string lambda_source(std::span<const KappaFamily> families)
{
    if (families.empty())
        throw FamilyError("at least one family is required");
    std::vector<const KappaFamily*> sorted;
    for (const auto& f : families)
        sorted.push_back(&f);
    std::sort(sorted.begin(), sorted.end(), [](auto* l, auto* r) { return l->var < r->var; });
    for (std::size_t i = 0; i < sorted.size(); ++i)
        if (sorted[i]->var != static_cast<int>(i))
            throw FamilyError("families must cover x1..x" + std::to_string(sorted.size()) +
                              " exactly once each");
    std::string out;
    for (const auto* f : sorted) {
        if (!out.empty())
            out += "+";
        out += lambda_term(*f);
    }
    return out;
}

expr::Expression assemble_lambda(std::span<const KappaFamily> families)
{
    const auto lambda = expr::parse(lambda_source(families));
    const int n = static_cast<int>(families.size());
    std::vector<std::string> names;
    for (int i = 1; i <= n; ++i)
        names.push_back("x" + std::to_string(i));
    for (const auto& fam : families) {
        std::vector<double> p;
        for (int i = 0; i < n; ++i) {
            const auto it = std::find_if(families.begin(), families.end(), [&](auto& f) { return f.var == i; });
            p.push_back(interior_point(*it));
        }
        std::vector<Jet3> x;
        for (int i = 0; i < n; ++i)
            x.push_back(Jet3::variable(p[i], n, i));
        const double lhs = -expr::eval<Jet3>(lambda, names, x).partial(fam.var);
        const double rhs = kappa_value(fam, p[fam.var]);
        if (std::abs(lhs - rhs) > 1e-10 * std::max(1.0, std::abs(rhs)))
            throw std::logic_error("assembled warping function does not reproduce kappa on " + var_name(fam));
    }
    return lambda;
}

void require_interval(const KappaFamily& fam, double lo, double hi)
{
    validate(fam);
    if (lo > hi)
        std::swap(lo, hi);
    bool ok = true;
    switch (fam.kase) {
    case Case::I:
    case Case::III: ok = lo + fam.b >= kPoleMargin; break;
    case Case::II: {
        const double half = std::numbers::pi / 2;
        const double u_lo = 0.5 * fam.a * (lo + fam.b);
        const double u_hi = 0.5 * fam.a * (hi + fam.b);
        ok = u_lo > -half && u_hi < half && std::cos(u_lo) >= kPoleMargin && std::cos(u_hi) >= kPoleMargin;
        break;
    }
    }
    if (!ok)
        throw PoleError("pole inside requested grid: case " + case_name(fam.kase) + " on " + var_name(fam) +
                        " over [" + num(lo) + ", " + num(hi) + "]");
}

} // namespace biharm::kappa
