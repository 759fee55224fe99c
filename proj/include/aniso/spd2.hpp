#pragma once

/**
 * @file spd2.hpp
 * @brief 2x2 symmetric matrices: closed-form eigendecomposition and spectral
 *        matrix functions (absolute value, square root, real powers).
 */

#include "aniso/poly2d.hpp"
#include "aniso/vec2.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aniso {

/// Symmetric matrix (m11 m12; m12 m22).
struct SymMat2 {
    double m11 = 0.0;
    double m12 = 0.0;
    double m22 = 0.0;

    static constexpr SymMat2 identity() { return {1.0, 0.0, 1.0}; }
    static constexpr SymMat2 diag(double p, double q) { return {p, 0.0, q}; }

    constexpr double det() const { return detail::diff_of_products(m11, m22, m12, m12); }
    constexpr double trace() const { return m11 + m22; }
    constexpr Mat2 full() const { return {m11, m12, m12, m22}; }
    /// Quadratic form v^T M v.
    constexpr double quad(Vec2 v) const { return m11 * v.x * v.x + 2.0 * m12 * v.x * v.y + m22 * v.y * v.y; }
    constexpr SymMat2 inverse() const {
        const double k = 1.0 / det();
        return {m22 * k, -m12 * k, m11 * k};
    }

    friend constexpr SymMat2 operator+(SymMat2 p, SymMat2 q) { return {p.m11 + q.m11, p.m12 + q.m12, p.m22 + q.m22}; }
    friend constexpr SymMat2 operator-(SymMat2 p, SymMat2 q) { return {p.m11 - q.m11, p.m12 - q.m12, p.m22 - q.m22}; }
    friend constexpr SymMat2 operator*(double s, SymMat2 p) { return {s * p.m11, s * p.m12, s * p.m22}; }
    friend constexpr Vec2 operator*(const SymMat2& m, Vec2 v) { return {m.m11 * v.x + m.m12 * v.y, m.m12 * v.x + m.m22 * v.y}; }
    friend constexpr bool operator==(const SymMat2&, const SymMat2&) = default;
};

/// M * M for a symmetric M (the result is symmetric).
constexpr SymMat2 square(const SymMat2& m) {
    return {m.m11 * m.m11 + m.m12 * m.m12, m.m12 * (m.m11 + m.m22), m.m12 * m.m12 + m.m22 * m.m22};
}

/// A^T M A.
constexpr SymMat2 congruence(const SymMat2& m, const Mat2& A) {
    const Mat2 r = A.transposed() * m.full() * A;
    return {r.a, 0.5 * (r.b + r.c), r.d};
}

/// Matrix [pi] of the quadratic form pi = a x^2 + 2b xy + c y^2.
constexpr SymMat2 bracket(const Quadratic& p) { return {p.coeffs[0], p.coeffs[1], p.coeffs[2]}; }

/**
 * Spectral decomposition M = U^T diag(lambda1, lambda2) U with lambda1 >= lambda2.
 *
 * The rows of U are the unit eigenvectors (cos angle, sin angle) for lambda1
 * and (-sin angle, cos angle) for lambda2. A multiple of the identity returns
 * angle 0.
 */
struct Eigen2 {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double angle = 0.0;

    Mat2 rotation() const {
        const double cs = std::cos(angle), sn = std::sin(angle);
        return {cs, sn, -sn, cs};
    }
    Vec2 v1() const { return {std::cos(angle), std::sin(angle)}; }
    Vec2 v2() const { return {-std::sin(angle), std::cos(angle)}; }
};

inline Eigen2 eigen(const SymMat2& m) {
    const double mean = 0.5 * (m.m11 + m.m22);
    const double half_gap = 0.5 * (m.m11 - m.m22);
    const double radius = std::hypot(half_gap, m.m12);
    const double det = m.det();
    Eigen2 e;
    // The eigenvalue of larger magnitude comes from the stable sum; the other
    // is recovered through the determinant to avoid cancellation.
    if (mean >= 0.0) {
        e.lambda1 = mean + radius;
        e.lambda2 = e.lambda1 != 0.0 ? det / e.lambda1 : 0.0;
    } else {
        e.lambda2 = mean - radius;
        e.lambda1 = det / e.lambda2;
    }
    e.angle = (m.m12 == 0.0 && half_gap == 0.0) ? 0.0 : 0.5 * std::atan2(m.m12, half_gap);
    return e;
}

/// U^T diag(f1, f2) U for the eigenvectors of `e`.
inline SymMat2 from_eigen(const Eigen2& e, double f1, double f2) {
    const Vec2 v1 = e.v1();
    const Vec2 v2 = e.v2();
    return {f1 * v1.x * v1.x + f2 * v2.x * v2.x,
            f1 * v1.x * v1.y + f2 * v2.x * v2.y,
            f1 * v1.y * v1.y + f2 * v2.y * v2.y};
}

/// Largest eigenvalue magnitude.
inline double operator_norm(const SymMat2& m) {
    const Eigen2 e = eigen(m);
    return std::max(std::abs(e.lambda1), std::abs(e.lambda2));
}

enum class MatrixFunction { abs, sqrt, power };

namespace detail {

// Eigenvalues within this relative distance below zero count as zero for
// sqrt and non-negative powers; anything further is a domain error.
inline constexpr double kNegativeEigenTolerance = 1e-14;

inline double checked_nonnegative(double lambda, double scale, const char* what) {
    if (lambda >= 0.0) return lambda;
    if (lambda >= -kNegativeEigenTolerance * scale) return 0.0;
    throw std::domain_error(std::string(what) + ": negative eigenvalue " + std::to_string(lambda));
}

} // namespace detail

/// Applies a scalar function to the eigenvalues. `alpha` is used by `power` only.
inline SymMat2 matrix_function(const SymMat2& m, MatrixFunction kind, double alpha = 1.0) {
    const Eigen2 e = eigen(m);
    const double scale = std::max(std::abs(e.lambda1), std::abs(e.lambda2));
    switch (kind) {
    case MatrixFunction::abs:
        return from_eigen(e, std::abs(e.lambda1), std::abs(e.lambda2));
    case MatrixFunction::sqrt: {
        const double l1 = detail::checked_nonnegative(e.lambda1, scale, "sqrt");
        const double l2 = detail::checked_nonnegative(e.lambda2, scale, "sqrt");
        return from_eigen(e, std::sqrt(l1), std::sqrt(l2));
    }
    case MatrixFunction::power: {
        if (alpha == 0.0) return SymMat2::identity();
        if (alpha < 0.0) {
            if (!(e.lambda2 > 0.0))
                throw std::domain_error("negative power of a matrix that is not positive definite");
            return from_eigen(e, std::pow(e.lambda1, alpha), std::pow(e.lambda2, alpha));
        }
        const double l1 = detail::checked_nonnegative(e.lambda1, scale, "power");
        const double l2 = detail::checked_nonnegative(e.lambda2, scale, "power");
        return from_eigen(e, std::pow(l1, alpha), std::pow(l2, alpha));
    }
    }
    return m;
}

inline SymMat2 abs(const SymMat2& m) { return matrix_function(m, MatrixFunction::abs); }
inline SymMat2 sqrt(const SymMat2& m) { return matrix_function(m, MatrixFunction::sqrt); }
inline SymMat2 power(const SymMat2& m, double alpha) { return matrix_function(m, MatrixFunction::power, alpha); }

inline bool is_spd(const SymMat2& m) { return m.m11 > 0.0 && m.det() > 0.0; }

inline void require_spd(const SymMat2& m, const char* what) {
    if (!is_spd(m)) throw std::domain_error(std::string(what) + ": matrix is not symmetric positive definite");
}

} // namespace aniso
