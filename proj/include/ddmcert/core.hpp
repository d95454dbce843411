#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace ddmcert {

using Index = std::ptrdiff_t;

inline constexpr double pi = 3.14159265358979323846;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

using Point = Vec2;

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }

/// Symmetric 2x2 matrix; used for the diffusion coefficient.
struct Mat2 {
    double xx = 1.0;
    double xy = 0.0;
    double yy = 1.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 1.0}; }

    constexpr Vec2 operator*(const Vec2& v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
    friend constexpr Mat2 operator*(double s, const Mat2& m) { return {s * m.xx, s * m.xy, s * m.yy}; }

    constexpr double det() const { return xx * yy - xy * xy; }
    Mat2 inverse() const {
        const double d = det();
        if (!(std::abs(d) > 0.0)) throw std::invalid_argument("Mat2::inverse: singular matrix");
        return {yy / d, -xy / d, xx / d};
    }
    /// Eigenvalues in ascending order.
    std::array<double, 2> eigenvalues() const {
        const double mean = 0.5 * (xx + yy);
        const double r = std::hypot(0.5 * (xx - yy), xy);
        return {mean - r, mean + r};
    }
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual = 0.0)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ddmcert
