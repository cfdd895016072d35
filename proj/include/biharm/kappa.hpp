#pragma once

#include "biharm/expr.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace biharm::kappa {

/// Solutions of κ' - κ²/2 = C on one coordinate:
///   I:   κ = -2/(x+b),               C = 0
///   II:  κ = a tan(a/2 (x+b)),       C = a²/2
///   III: κ = a(1+e^{a(x+b)})/(1-e^{a(x+b)}) = -a coth(a/2 (x+b)),  C = -a²/2
enum class Case { I, II, III };

struct KappaFamily {
    Case kase = Case::I;
    double a = 1.0; // unused for Case I
    double b = 0.0;
    int var = 0;    // zero-based coordinate index; the variable is x{var+1}
};

class PoleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class FamilyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kPoleMargin = 1e-3;

std::string case_name(Case c);
/// "I", "II" or "III".
Case parse_case(std::string_view s);

/// Throws FamilyError for a non-positive or non-finite a (Cases II, III) or a negative index.
void validate(const KappaFamily& fam);

enum class Form {
    stable, // Case III as -a coth(a/2 (x+b))
    ratio   // Case III as a(1+e^{a(x+b)})/(1-e^{a(x+b)})
};

/// Throws PoleError within kPoleMargin of a pole.
double kappa_value(const KappaFamily& fam, double x, Form form = Form::stable);
/// κ'(x) - κ(x)²/2 - c, with κ' from a jet.
double riccati_residual(const KappaFamily& fam, double c, double x);
double family_constant(const KappaFamily& fam);

/// Antiderivative term -∫κ dx with zero additive constant, as source text, e.g.
/// "2*ln(x1)", "2*ln(cos(1*(x1)))", "2*ln(sinh(0.5*(x2-0.25)))".
std::string lambda_term(const KappaFamily& fam);
/// Terms joined by '+', one family per coordinate x1..xn in index order.
std::string lambda_source(std::span<const KappaFamily> families);
/// Parses lambda_source and checks -∂λ/∂x_i = κ_i at one interior point per coordinate.
/// Throws FamilyError for an empty list or when the indices are not exactly 0..n-1.
expr::Expression assemble_lambda(std::span<const KappaFamily> families);

/// Throws PoleError unless λ's term is smooth on [lo, hi] at distance >= kPoleMargin from
/// the edge of its branch.
void require_interval(const KappaFamily& fam, double lo, double hi);

} // namespace biharm::kappa
