#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace biharm {

inline constexpr int kMaxJetDirections = 8;
inline constexpr int kJetOrder = 3;

/// Number of Taylor coefficients of total order <= 3 in `d` directions.
constexpr int jet_size(int d) { return 1 + d + d * (d + 1) / 2 + d * (d + 1) * (d + 2) / 6; }

inline constexpr int kMaxJetCoefficients = jet_size(kMaxJetDirections);

/// Truncated third-order multivariate Taylor scalar.
///
/// Coefficients are stored once per symmetric multi-index as Taylor coefficients
/// (the partial derivative divided by the multi-index factorial), so products are
/// plain truncated convolutions. Each jet also tracks the highest total order whose
/// coefficients are exact: differentiating a jet lowers it by one, and arithmetic
/// propagates the minimum of its operands. Coefficients above that order are zero.
///
/// A jet with zero directions is a constant and mixes with jets of any direction count.
class Jet3 {
public:
    Jet3() = default;
    Jet3(double value); // NOLINT(google-explicit-constructor): constants mix freely

    static Jet3 constant(double value, int directions);
    /// Coordinate `direction` seeded at `value`: first-order coefficient e_direction.
    static Jet3 variable(double value, int directions, int direction);

    int directions() const { return dirs_; }
    int order() const { return order_; }
    int size() const { return jet_size(dirs_); }

    double value() const { return c_[0]; }
    double partial(int i) const;
    double partial(int i, int j) const;
    double partial(int i, int j, int k) const;
    /// Partial derivative for a multi-index given as a list of directions, e.g. {0, 0, 1}.
    double partial(std::span<const int> directions) const;

    Jet3 derivative(int direction) const;
    Jet3 truncated(int order) const;
    /// Taylor expansion along the listed directions only, the others held fixed.
    Jet3 restricted(std::span<const int> kept) const;
    /// Re-expresses this jet in `directions` new directions; old direction i becomes dir_map[i].
    Jet3 embedded(int directions, std::span<const int> dir_map) const;

    std::span<const double> coefficients() const { return {c_.data(), static_cast<std::size_t>(size())}; }

    Jet3 operator-() const;
    Jet3& operator+=(const Jet3& rhs);
    Jet3& operator-=(const Jet3& rhs);
    Jet3& operator*=(const Jet3& rhs);
    Jet3& operator/=(const Jet3& rhs);
    Jet3& operator*=(double rhs);

    friend Jet3 operator+(Jet3 lhs, const Jet3& rhs) { return lhs += rhs; }
    friend Jet3 operator-(Jet3 lhs, const Jet3& rhs) { return lhs -= rhs; }
    friend Jet3 operator*(const Jet3& lhs, const Jet3& rhs);
    friend Jet3 operator/(const Jet3& lhs, const Jet3& rhs);
    friend Jet3 operator*(Jet3 lhs, double rhs) { return lhs *= rhs; }
    friend Jet3 operator*(double lhs, Jet3 rhs) { return rhs *= lhs; }

    /// f(u) from the derivatives f(u0), f'(u0), f''(u0), f'''(u0) at u0 = u.value().
    friend Jet3 compose(const Jet3& u, double f0, double f1, double f2, double f3);

private:
    void promote_to(int directions);

    std::array<double, kMaxJetCoefficients> c_{};
    std::int8_t dirs_ = 0;
    std::int8_t order_ = kJetOrder;
};

/// Seeds one variable per coordinate of `point`; throws std::invalid_argument for an
/// empty point or more than kMaxJetDirections coordinates.
std::vector<Jet3> seed(std::span<const double> point);

Jet3 sin(const Jet3& u);
Jet3 cos(const Jet3& u);
Jet3 tan(const Jet3& u);
Jet3 sinh(const Jet3& u);
Jet3 cosh(const Jet3& u);
Jet3 tanh(const Jet3& u);
Jet3 exp(const Jet3& u);
Jet3 log(const Jet3& u);
Jet3 sqrt(const Jet3& u);
Jet3 abs(const Jet3& u);
Jet3 pow(const Jet3& base, double exponent);
Jet3 pow(const Jet3& base, const Jet3& exponent);

/// True when every coefficient but the value is zero.
bool is_constant(const Jet3& u);

inline double value_of(double x) { return x; }
inline double value_of(const Jet3& x) { return x.value(); }

} // namespace biharm
