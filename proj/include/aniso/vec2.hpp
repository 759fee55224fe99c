#pragma once

#include <array>
#include <cmath>
#include <type_traits>

namespace aniso {

namespace detail {

/// a*b - c*d with one rounding error (Kahan's fma trick) at run time.
constexpr double diff_of_products(double a, double b, double c, double d) {
    if (std::is_constant_evaluated()) return a * b - c * d;
    const double w = c * d;
    const double e = std::fma(-c, d, w);
    const double f = std::fma(a, b, -w);
    return f + e;
}

} // namespace detail

/// Point or vector in the plane.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return detail::diff_of_products(a.x, b.y, a.y, b.x); }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// General 2x2 matrix, row-major: (a b; c d).
struct Mat2 {
    double a = 0.0, b = 0.0;
    double c = 0.0, d = 0.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 diag(double p, double q) { return {p, 0.0, 0.0, q}; }
    /// Counterclockwise rotation by `theta`.
    static Mat2 rotation(double theta) {
        const double cs = std::cos(theta), sn = std::sin(theta);
        return {cs, -sn, sn, cs};
    }

    constexpr double det() const { return detail::diff_of_products(a, d, b, c); }
    constexpr Mat2 transposed() const { return {a, c, b, d}; }
    constexpr Mat2 inverse() const {
        const double k = 1.0 / det();
        return {d * k, -b * k, -c * k, a * k};
    }

    friend constexpr Vec2 operator*(const Mat2& m, Vec2 v) {
        return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
    }
    friend constexpr Mat2 operator*(const Mat2& m, const Mat2& n) {
        return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
                m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
    }
    friend constexpr Mat2 operator*(double s, const Mat2& m) {
        return {s * m.a, s * m.b, s * m.c, s * m.d};
    }
    friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

} // namespace aniso
