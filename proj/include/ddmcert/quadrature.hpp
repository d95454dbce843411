#pragma once

#include <array>
#include <cmath>
#include <span>

#include "ddmcert/core.hpp"

namespace ddmcert::quadrature {

/// Barycentric point with a weight normalized to sum 1 over the triangle.
struct TriPoint {
    std::array<double, 3> bary;
    double weight;
};

/// Edge-midpoint rule, exact for quadratics.
inline constexpr std::array<TriPoint, 3> midpoint3{{
    {{0.5, 0.5, 0.0}, 1.0 / 3.0},
    {{0.0, 0.5, 0.5}, 1.0 / 3.0},
    {{0.5, 0.0, 0.5}, 1.0 / 3.0},
}};

namespace detail {
inline const double s15 = std::sqrt(15.0);
inline const double a7 = (6.0 - s15) / 21.0;
inline const double b7 = (6.0 + s15) / 21.0;
inline const double wa7 = (155.0 - s15) / 1200.0;
inline const double wb7 = (155.0 + s15) / 1200.0;
}  // namespace detail

/// Seven-point rule exact for polynomials of degree 5.
inline const std::array<TriPoint, 7> degree5{{
    {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 9.0 / 40.0},
    {{detail::a7, detail::a7, 1.0 - 2.0 * detail::a7}, detail::wa7},
    {{detail::a7, 1.0 - 2.0 * detail::a7, detail::a7}, detail::wa7},
    {{1.0 - 2.0 * detail::a7, detail::a7, detail::a7}, detail::wa7},
    {{detail::b7, detail::b7, 1.0 - 2.0 * detail::b7}, detail::wb7},
    {{detail::b7, 1.0 - 2.0 * detail::b7, detail::b7}, detail::wb7},
    {{1.0 - 2.0 * detail::b7, detail::b7, detail::b7}, detail::wb7},
}};

/// Gauss–Legendre on [0,1], exact for degree 5.
struct LinePoint {
    double t;
    double weight;
};
inline const std::array<LinePoint, 3> gauss3{{
    {0.5 - 0.5 * std::sqrt(0.6), 5.0 / 18.0},
    {0.5, 8.0 / 18.0},
    {0.5 + 0.5 * std::sqrt(0.6), 5.0 / 18.0},
}};

inline Point map(const std::array<Point, 3>& v, const std::array<double, 3>& bary) {
    return bary[0] * v[0] + bary[1] * v[1] + bary[2] * v[2];
}

}  // namespace ddmcert::quadrature
