#include "biharm/jet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace biharm {

namespace detail {

struct JetLayout {
    int dirs = 0;
    int size = 1;
    // Sorted directions of each multi-index; entries past degree are unused.
    std::vector<std::array<std::int8_t, 3>> multi;
    std::vector<std::int8_t> degree;
    std::array<std::array<std::array<std::int16_t, kMaxJetDirections>, kMaxJetDirections>, kMaxJetDirections> index3{};
    std::array<std::array<std::int16_t, kMaxJetDirections>, kMaxJetDirections> index2{};
    std::array<std::int16_t, kMaxJetDirections> index1{};
    // raise[i][a]: index of a + e_i (-1 when degree(a) == 3); factor a_i + 1.
    std::array<std::vector<std::int16_t>, kMaxJetDirections> raise;
    std::array<std::vector<double>, kMaxJetDirections> raise_factor;
    struct Term {
        std::int16_t a, b, c;
    };
    std::vector<Term> products; // sorted by degree of c
    std::array<int, kJetOrder + 1> products_end{};

    int index_of(std::span<const int> dirs_sorted) const
    {
        switch (dirs_sorted.size()) {
        case 0: return 0;
        case 1: return index1[dirs_sorted[0]];
        case 2: return index2[dirs_sorted[0]][dirs_sorted[1]];
        case 3: return index3[dirs_sorted[0]][dirs_sorted[1]][dirs_sorted[2]];
        default: return -1;
        }
    }
};

namespace {

JetLayout build_layout(int d)
{
    JetLayout L;
    L.dirs = d;
    L.size = jet_size(d);
    L.multi.push_back({-1, -1, -1});
    L.degree.push_back(0);
    for (int i = 0; i < d; ++i) {
        L.index1[i] = static_cast<std::int16_t>(L.multi.size());
        L.multi.push_back({static_cast<std::int8_t>(i), -1, -1});
        L.degree.push_back(1);
    }
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            auto idx = static_cast<std::int16_t>(L.multi.size());
            L.index2[i][j] = L.index2[j][i] = idx;
            L.multi.push_back({static_cast<std::int8_t>(i), static_cast<std::int8_t>(j), -1});
            L.degree.push_back(2);
        }
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
            for (int k = j; k < d; ++k) {
                auto idx = static_cast<std::int16_t>(L.multi.size());
                int p[3] = {i, j, k};
                do {
                    L.index3[p[0]][p[1]][p[2]] = idx;
                } while (std::next_permutation(p, p + 3));
                L.multi.push_back({static_cast<std::int8_t>(i), static_cast<std::int8_t>(j), static_cast<std::int8_t>(k)});
                L.degree.push_back(3);
            }

    auto dirs_of = [&](int a) {
        std::vector<int> v;
        for (int t = 0; t < L.degree[a]; ++t)
            v.push_back(L.multi[a][t]);
        return v;
    };

    for (int i = 0; i < d; ++i) {
        L.raise[i].assign(L.size, -1);
        L.raise_factor[i].assign(L.size, 0.0);
        for (int a = 0; a < L.size; ++a) {
            if (L.degree[a] == kJetOrder)
                continue;
            auto v = dirs_of(a);
            int count = static_cast<int>(std::count(v.begin(), v.end(), i));
            v.push_back(i);
            std::sort(v.begin(), v.end());
            L.raise[i][a] = static_cast<std::int16_t>(L.index_of(v));
            L.raise_factor[i][a] = count + 1.0;
        }
    }

    for (int target = 0; target <= kJetOrder; ++target) {
        for (int a = 0; a < L.size; ++a)
            for (int b = 0; b < L.size; ++b) {
                if (L.degree[a] + L.degree[b] != target)
                    continue;
                auto v = dirs_of(a);
                auto w = dirs_of(b);
                v.insert(v.end(), w.begin(), w.end());
                std::sort(v.begin(), v.end());
                L.products.push_back({static_cast<std::int16_t>(a), static_cast<std::int16_t>(b),
                                      static_cast<std::int16_t>(L.index_of(v))});
            }
        L.products_end[target] = static_cast<int>(L.products.size());
    }
    return L;
}

} // namespace

const JetLayout& jet_layout(int d)
{
    static const std::array<JetLayout, kMaxJetDirections + 1> layouts = [] {
        std::array<JetLayout, kMaxJetDirections + 1> all;
        for (int d = 0; d <= kMaxJetDirections; ++d)
            all[d] = build_layout(d);
        return all;
    }();
    return layouts[d];
}

} // namespace detail

namespace {

void check_direction(int direction, int dirs)
{
    if (direction < 0 || direction >= dirs)
        throw std::out_of_range("jet direction " + std::to_string(direction) + " out of range for " +
                                std::to_string(dirs) + " directions");
}

double multiplicity_factor(std::span<const int> sorted)
{
    // Taylor coefficient -> partial derivative: multiply by the multi-index factorial.
    double factor = 1.0;
    int run = 1;
    for (std::size_t t = 1; t <= sorted.size(); ++t) {
        if (t < sorted.size() && sorted[t] == sorted[t - 1]) {
            ++run;
        } else {
            for (int q = 2; q <= run; ++q)
                factor *= q;
            run = 1;
        }
    }
    return factor;
}

} // namespace

Jet3::Jet3(double value) { c_[0] = value; }

Jet3 Jet3::constant(double value, int directions)
{
    if (directions < 0 || directions > kMaxJetDirections)
        throw std::invalid_argument("jet direction count must be in [0, 8]");
    Jet3 j(value);
    j.dirs_ = static_cast<std::int8_t>(directions);
    return j;
}

Jet3 Jet3::variable(double value, int directions, int direction)
{
    Jet3 j = constant(value, directions);
    check_direction(direction, directions);
    j.c_[detail::jet_layout(directions).index1[direction]] = 1.0;
    return j;
}

std::vector<Jet3> seed(std::span<const double> point)
{
    const int d = static_cast<int>(point.size());
    if (d == 0)
        throw std::invalid_argument("seed: point must have at least one coordinate");
    if (d > kMaxJetDirections)
        throw std::invalid_argument("seed: at most 8 directions are supported");
    std::vector<Jet3> out;
    out.reserve(d);
    for (int i = 0; i < d; ++i)
        out.push_back(Jet3::variable(point[i], d, i));
    return out;
}

double Jet3::partial(int i) const
{
    check_direction(i, dirs_);
    if (order_ < 1)
        throw std::logic_error("jet carries no exact first derivatives");
    return c_[detail::jet_layout(dirs_).index1[i]];
}

double Jet3::partial(int i, int j) const
{
    const int idx[2] = {i, j};
    return partial(std::span<const int>(idx, 2));
}

double Jet3::partial(int i, int j, int k) const
{
    const int idx[3] = {i, j, k};
    return partial(std::span<const int>(idx, 3));
}

double Jet3::partial(std::span<const int> directions) const
{
    if (directions.size() > static_cast<std::size_t>(kJetOrder))
        throw std::invalid_argument("jet partials are available up to total order 3");
    if (static_cast<int>(directions.size()) > order_ && dirs_ > 0)
        throw std::logic_error("jet carries exact derivatives only up to order " + std::to_string(order_));
    std::array<int, 3> sorted{};
    for (std::size_t t = 0; t < directions.size(); ++t) {
        check_direction(directions[t], dirs_);
        sorted[t] = directions[t];
    }
    std::sort(sorted.begin(), sorted.begin() + directions.size());
    std::span<const int> s(sorted.data(), directions.size());
    return c_[detail::jet_layout(dirs_).index_of(s)] * multiplicity_factor(s);
}

Jet3 Jet3::derivative(int direction) const
{
    if (dirs_ == 0)
        return Jet3(0.0);
    check_direction(direction, dirs_);
    if (order_ == 0)
        throw std::logic_error("cannot differentiate a jet with no exact derivative information");
    const auto& L = detail::jet_layout(dirs_);
    Jet3 out = constant(0.0, dirs_);
    out.order_ = static_cast<std::int8_t>(order_ - 1);
    for (int a = 0; a < L.size; ++a) {
        if (L.degree[a] >= out.order_ + 1 || L.raise[direction][a] < 0)
            continue;
        out.c_[a] = L.raise_factor[direction][a] * c_[L.raise[direction][a]];
    }
    return out;
}

Jet3 Jet3::truncated(int order) const
{
    Jet3 out = *this;
    if (order >= order_)
        return out;
    const auto& L = detail::jet_layout(dirs_);
    out.order_ = static_cast<std::int8_t>(std::max(0, order));
    for (int a = 0; a < L.size; ++a)
        if (L.degree[a] > out.order_)
            out.c_[a] = 0.0;
    return out;
}

Jet3 Jet3::restricted(std::span<const int> kept) const
{
    const int nd = static_cast<int>(kept.size());
    Jet3 out = constant(c_[0], nd);
    out.order_ = order_;
    if (dirs_ == 0)
        return out;
    for (int k : kept)
        check_direction(k, dirs_);
    const auto& src = detail::jet_layout(dirs_);
    const auto& dst = detail::jet_layout(nd);
    std::array<int, 3> mapped{};
    for (int a = 1; a < dst.size; ++a) {
        const int deg = dst.degree[a];
        for (int t = 0; t < deg; ++t)
            mapped[t] = kept[dst.multi[a][t]];
        std::sort(mapped.begin(), mapped.begin() + deg);
        out.c_[a] = c_[src.index_of(std::span<const int>(mapped.data(), deg))];
    }
    return out;
}

Jet3 Jet3::embedded(int directions, std::span<const int> dir_map) const
{
    if (static_cast<int>(dir_map.size()) != dirs_)
        throw std::invalid_argument("jet embedding map must list every source direction");
    Jet3 out = constant(c_[0], directions);
    out.order_ = order_;
    const auto& src = detail::jet_layout(dirs_);
    const auto& dst = detail::jet_layout(directions);
    std::array<int, 3> mapped{};
    for (int a = 1; a < src.size; ++a) {
        const int deg = src.degree[a];
        for (int t = 0; t < deg; ++t) {
            mapped[t] = dir_map[src.multi[a][t]];
            check_direction(mapped[t], directions);
        }
        std::sort(mapped.begin(), mapped.begin() + deg);
        out.c_[dst.index_of(std::span<const int>(mapped.data(), deg))] = c_[a];
    }
    return out;
}

void Jet3::promote_to(int directions)
{
    // Only constants (zero directions) are promoted; their higher coefficients are zero.
    dirs_ = static_cast<std::int8_t>(directions);
}

namespace {

int common_directions(const Jet3& a, const Jet3& b)
{
    if (a.directions() == b.directions() || b.directions() == 0)
        return a.directions();
    if (a.directions() == 0)
        return b.directions();
    throw std::invalid_argument("jet direction counts differ: " + std::to_string(a.directions()) + " vs " +
                                std::to_string(b.directions()));
}

} // namespace

Jet3 Jet3::operator-() const
{
    Jet3 out = *this;
    for (int a = 0; a < size(); ++a)
        out.c_[a] = -c_[a];
    return out;
}

Jet3& Jet3::operator+=(const Jet3& rhs)
{
    const int d = common_directions(*this, rhs);
    promote_to(d);
    const int n = jet_size(rhs.dirs_);
    for (int a = 0; a < n; ++a)
        c_[a] += rhs.c_[a];
    if (rhs.order_ < order_)
        *this = truncated(rhs.order_);
    return *this;
}

Jet3& Jet3::operator-=(const Jet3& rhs)
{
    const int d = common_directions(*this, rhs);
    promote_to(d);
    const int n = jet_size(rhs.dirs_);
    for (int a = 0; a < n; ++a)
        c_[a] -= rhs.c_[a];
    if (rhs.order_ < order_)
        *this = truncated(rhs.order_);
    return *this;
}

Jet3& Jet3::operator*=(double rhs)
{
    for (int a = 0; a < size(); ++a)
        c_[a] *= rhs;
    return *this;
}

Jet3 operator*(const Jet3& lhs, const Jet3& rhs)
{
    if (lhs.dirs_ == 0) {
        Jet3 out = rhs;
        out *= lhs.c_[0];
        if (lhs.order_ < out.order_)
            out = out.truncated(lhs.order_);
        return out;
    }
    if (rhs.dirs_ == 0) {
        Jet3 out = lhs;
        out *= rhs.c_[0];
        if (rhs.order_ < out.order_)
            out = out.truncated(rhs.order_);
        return out;
    }
    const int d = common_directions(lhs, rhs);
    const auto& L = detail::jet_layout(d);
    Jet3 out = Jet3::constant(0.0, d);
    out.order_ = std::min(lhs.order_, rhs.order_);
    const int end = L.products_end[out.order_];
    for (int t = 0; t < end; ++t) {
        const auto& term = L.products[t];
        out.c_[term.c] += lhs.c_[term.a] * rhs.c_[term.b];
    }
    return out;
}

Jet3& Jet3::operator*=(const Jet3& rhs) { return *this = *this * rhs; }

Jet3 operator/(const Jet3& lhs, const Jet3& rhs)
{
    const double u = rhs.value();
    if (rhs.dirs_ == 0) {
        Jet3 out = lhs;
        out *= 1.0 / u;
        if (rhs.order_ < out.order_)
            out = out.truncated(rhs.order_);
        return out;
    }
    const double r = 1.0 / u;
    return lhs * compose(rhs, r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r);
}

Jet3& Jet3::operator/=(const Jet3& rhs) { return *this = *this / rhs; }

Jet3 compose(const Jet3& u, double f0, double f1, double f2, double f3)
{
    Jet3 out = Jet3::constant(f0, u.dirs_);
    out.order_ = u.order_;
    if (u.dirs_ == 0 || u.order_ == 0)
        return out;
    Jet3 delta = u;
    delta.c_[0] = 0.0;
    const int n = u.size();
    for (int a = 1; a < n; ++a)
        out.c_[a] = f1 * delta.c_[a];
    if (u.order_ >= 2) {
        const Jet3 delta2 = delta * delta;
        for (int a = 1; a < n; ++a)
            out.c_[a] += 0.5 * f2 * delta2.c_[a];
        if (u.order_ >= 3) {
            const Jet3 delta3 = delta2 * delta;
            for (int a = 1; a < n; ++a)
                out.c_[a] += (f3 / 6.0) * delta3.c_[a];
        }
    }
    return out;
}

bool is_constant(const Jet3& u)
{
    const auto c = u.coefficients();
    return std::all_of(c.begin() + 1, c.end(), [](double x) { return x == 0.0; });
}

Jet3 sin(const Jet3& u)
{
    const double s = std::sin(u.value()), c = std::cos(u.value());
    return compose(u, s, c, -s, -c);
}

Jet3 cos(const Jet3& u)
{
    const double s = std::sin(u.value()), c = std::cos(u.value());
    return compose(u, c, -s, -c, s);
}

Jet3 tan(const Jet3& u)
{
    const double t = std::tan(u.value());
    const double sec2 = 1.0 + t * t;
    return compose(u, t, sec2, 2.0 * t * sec2, (2.0 + 6.0 * t * t) * sec2);
}

Jet3 sinh(const Jet3& u)
{
    const double s = std::sinh(u.value()), c = std::cosh(u.value());
    return compose(u, s, c, s, c);
}

Jet3 cosh(const Jet3& u)
{
    const double s = std::sinh(u.value()), c = std::cosh(u.value());
    return compose(u, c, s, c, s);
}

Jet3 tanh(const Jet3& u)
{
    const double t = std::tanh(u.value());
    const double sech2 = 1.0 - t * t;
    return compose(u, t, sech2, -2.0 * t * sech2, (6.0 * t * t - 2.0) * sech2);
}

Jet3 exp(const Jet3& u)
{
    const double e = std::exp(u.value());
    return compose(u, e, e, e, e);
}

Jet3 log(const Jet3& u)
{
    const double r = 1.0 / u.value();
    return compose(u, std::log(u.value()), r, -r * r, 2.0 * r * r * r);
}

Jet3 sqrt(const Jet3& u)
{
    const double s = std::sqrt(u.value());
    const double r = 1.0 / u.value();
    return compose(u, s, 0.5 / s, -0.25 * s * r * r, 0.375 * s * r * r * r);
}

Jet3 abs(const Jet3& u)
{
    const double sign = u.value() < 0.0 ? -1.0 : 1.0;
    return compose(u, std::abs(u.value()), sign, 0.0, 0.0);
}

Jet3 pow(const Jet3& base, double exponent)
{
    const double u = base.value();
    double f[4];
    double falling = 1.0;
    for (int k = 0; k <= kJetOrder; ++k) {
        f[k] = falling == 0.0 ? 0.0 : falling * std::pow(u, exponent - k);
        falling *= exponent - k;
    }
    return compose(base, f[0], f[1], f[2], f[3]);
}

Jet3 pow(const Jet3& base, const Jet3& exponent)
{
    if (is_constant(exponent))
        return pow(base, exponent.value());
    return exp(exponent * log(base));
}

} // namespace biharm
