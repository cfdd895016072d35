#include "biharm/random_expr.hpp"

#include <cmath>

namespace biharm::expr {

namespace {

Expression leaf(std::mt19937_64& rng, const std::vector<std::string>& vars)
{
    std::uniform_int_distribution<std::size_t> pick(0, vars.size() - 1);
    std::uniform_real_distribution<double> coef(-1.5, 1.5);
    // Round to quarters so printed expressions stay readable.
    const double c = std::round(coef(rng) * 4.0) / 4.0;
    auto v = Expression::variable(vars[pick(rng)]);
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
    case 0: return v;
    case 1: return Expression::constant(c == 0.0 ? 0.5 : c) * v;
    case 2: return v + Expression::constant(c);
    default: return Expression::constant(c == 0.0 ? 0.75 : c) * v * Expression::variable(vars[pick(rng)]);
    }
}

Expression one_plus_square(const Expression& u)
{
    return Expression::constant(1.0) + Expression::binary(BinaryOp::pow, u, Expression::constant(2.0));
}

} // namespace

Expression random_expression(std::mt19937_64& rng, const std::vector<std::string>& vars, int depth)
{
    if (depth <= 0 || vars.empty())
        return vars.empty() ? Expression::constant(1.0) : leaf(rng, vars);
    const auto u = random_expression(rng, vars, depth - 1);
    switch (std::uniform_int_distribution<int>(0, 9)(rng)) {
    case 0: return call(UnaryOp::sin, u);
    case 1: return call(UnaryOp::cos, u);
    case 2: return call(UnaryOp::tanh, u);
    case 3: return call(UnaryOp::exp, call(UnaryOp::sin, u));
    case 4: return call(UnaryOp::ln, one_plus_square(u));
    case 5: return call(UnaryOp::sqrt, one_plus_square(u));
    case 6: return Expression::constant(1.0) / one_plus_square(u);
    case 7: return u + random_expression(rng, vars, depth - 1);
    case 8: return u * random_expression(rng, vars, depth - 2);
    default: return u - random_expression(rng, vars, depth - 1);
    }
}

} // namespace biharm::expr
