#pragma once

#include "biharm/expr.hpp"

#include <random>
#include <string>
#include <vector>

namespace biharm::expr {

/// Random smooth expression in `vars`, finite with all derivatives bounded on bounded
/// boxes: sums and products of polynomial leaves wrapped in sin, cos, tanh, exp∘sin,
/// ln(1+u²), sqrt(1+u²) and 1/(1+u²).
Expression random_expression(std::mt19937_64& rng, const std::vector<std::string>& vars, int depth = 3);

} // namespace biharm::expr
