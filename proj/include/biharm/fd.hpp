#pragma once

#include <array>
#include <functional>
#include <span>
#include <stdexcept>

namespace biharm {

/// Central-difference steps per derivative order. With `scale_by_coordinate` the step
/// along coordinate i is multiplied by max(1, |p_i|).
struct FDScheme {
    std::array<double, 3> step{1e-6, 1e-4, 1e-3};
    bool scale_by_coordinate = true;

    /// Same fixed step for every order, no coordinate scaling.
    static FDScheme uniform(double h);

    double step_for(int order, double coordinate) const;
};

class FdError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using RealFunction = std::function<double(std::span<const double>)>;
using DomainPredicate = std::function<bool(std::span<const double>)>;

/// Central-difference estimate of the partial given by `multi_index` (a list of
/// directions such as {0, 0, 1}). Throws FdError when the order exceeds 3, a step is not
/// positive, or a stencil point leaves the domain (predicate false or `f` throws).
double fd_partial(const RealFunction& f, std::span<const double> point, std::span<const int> multi_index,
                  const FDScheme& scheme = {}, const DomainPredicate& domain = {});

} // namespace biharm
