#include "biharm/fd.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace biharm {

FDScheme FDScheme::uniform(double h)
{
    FDScheme s;
    s.step = {h, h, h};
    s.scale_by_coordinate = false;
    return s;
}

double FDScheme::step_for(int order, double coordinate) const
{
    const double h = step.at(static_cast<std::size_t>(order - 1));
    return scale_by_coordinate ? h * std::max(1.0, std::abs(coordinate)) : h;
}

namespace {

struct Stencil1D {
    std::vector<int> offsets;
    std::vector<double> weights; // before dividing by h^m
};

const Stencil1D& stencil(int multiplicity)
{
    static const Stencil1D first{{-1, 1}, {-0.5, 0.5}};
    static const Stencil1D second{{-1, 0, 1}, {1.0, -2.0, 1.0}};
    static const Stencil1D third{{-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}};
    switch (multiplicity) {
    case 1: return first;
    case 2: return second;
    default: return third;
    }
}

} // namespace

double fd_partial(const RealFunction& f, std::span<const double> point, std::span<const int> multi_index,
                  const FDScheme& scheme, const DomainPredicate& domain)
{
    const int order = static_cast<int>(multi_index.size());
    if (order > 3)
        throw FdError("fd_partial: total order " + std::to_string(order) + " exceeds 3");
    for (double h : scheme.step)
        if (!(h > 0.0))
            throw FdError("fd_partial: steps must be positive");
    std::vector<double> x(point.begin(), point.end());
    auto call = [&](std::span<const double> at) {
        if (domain && !domain(at))
            throw FdError("fd_partial: stencil point leaves the domain");
        try {
            return f(at);
        } catch (const std::exception& e) {
            throw FdError(std::string("fd_partial: evaluation failed inside the stencil: ") + e.what());
        }
    };
    if (order == 0)
        return call(x);

    std::map<int, int> multiplicity;
    for (int d : multi_index) {
        if (d < 0 || d >= static_cast<int>(x.size()))
            throw FdError("fd_partial: direction out of range");
        ++multiplicity[d];
    }
    struct Axis {
        int dir;
        double h;
        const Stencil1D* s;
    };
    std::vector<Axis> axes;
    double scale = 1.0;
    for (auto [dir, m] : multiplicity) {
        const double h = scheme.step_for(order, point[dir]);
        axes.push_back({dir, h, &stencil(m)});
        scale *= std::pow(h, m);
    }

    // Tensor-product stencil, enumerated in a fixed order.
    double sum = 0.0;
    std::vector<std::size_t> cursor(axes.size(), 0);
    for (;;) {
        double w = 1.0;
        std::copy(point.begin(), point.end(), x.begin());
        for (std::size_t a = 0; a < axes.size(); ++a) {
            const auto& ax = axes[a];
            w *= ax.s->weights[cursor[a]];
            x[ax.dir] = point[ax.dir] + ax.s->offsets[cursor[a]] * ax.h;
        }
        sum += w * call(x);
        std::size_t a = 0;
        for (; a < axes.size(); ++a) {
            if (++cursor[a] < axes[a].s->offsets.size())
                break;
            cursor[a] = 0;
        }
        if (a == axes.size())
            break;
    }
    return sum / scale;
}

} // namespace biharm
