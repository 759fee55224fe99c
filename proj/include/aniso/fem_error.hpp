#pragma once

/**
 * @file fem_error.hpp
 * @brief Triangle shape matrices, Lagrange P1/P2 interpolation and averaged
 *        H^1 interpolation errors.
 *
 * For a triangle T with vertices v_i and barycenter z_T the shape matrix is
 *
 *     H_T = ( 2/3 sum_i (v_i - z_T)(v_i - z_T)^T )^(-1).
 *
 * The equilateral triangle T_eq inscribed in the unit circle has H = Id, every
 * triangle satisfies |T| sqrt(det H_T) = |T_eq| = 3 sqrt(3) / 4, and the
 * vertices lie on the ellipse (z - z_T)^T H_T (z - z_T) = 1.
 */

#include "aniso/detail/optimize.hpp"
#include "aniso/detail/parallel.hpp"
#include "aniso/mesh.hpp"
#include "aniso/poly2d.hpp"
#include "aniso/quadrature.hpp"
#include "aniso/spd2.hpp"
#include "aniso/vec2.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aniso {

/// Anything with value(p) and grad(p): the functions whose interpolation error we measure.
template <class F>
concept ScalarField = requires(const F& f, Vec2 p) {
    { f.value(p) } -> std::convertible_to<double>;
    { f.grad(p) } -> std::convertible_to<Vec2>;
};

inline constexpr double kEquilateralArea = 0.75 * std::numbers::sqrt3;

struct Triangle {
    std::array<Vec2, 3> v;

    double signed_area() const { return 0.5 * cross(v[1] - v[0], v[2] - v[0]); }
    double area() const { return std::abs(signed_area()); }
    Vec2 barycenter() const { return (v[0] + v[1] + v[2]) / 3.0; }
    double diameter() const {
        return std::max({norm(v[1] - v[0]), norm(v[2] - v[1]), norm(v[0] - v[2])});
    }
    /// Image under z -> A z + b.
    Triangle mapped(const Mat2& A, Vec2 b = {}) const {
        return {{A * v[0] + b, A * v[1] + b, A * v[2] + b}};
    }
    Vec2 from_barycentric(const std::array<double, 3>& l) const {
        return l[0] * v[0] + l[1] * v[1] + l[2] * v[2];
    }
};

/// T_eq: vertices (cos(2k pi/3), sin(2k pi/3)), k = 0, 1, 2.
inline Triangle equilateral_triangle() {
    const double s = 0.5 * std::numbers::sqrt3;
    return {{Vec2{1.0, 0.0}, Vec2{-0.5, s}, Vec2{-0.5, -s}}};
}

inline Triangle mesh_triangle(const Mesh& mesh, std::size_t t) {
    const auto& [i, j, k] = mesh.triangles[t];
    return {{mesh.vertices[i], mesh.vertices[j], mesh.vertices[k]}};
}

inline bool is_degenerate(const Triangle& t) {
    const double d = t.diameter();
    return !(t.area() > 1e-14 * d * d);
}

inline SymMat2 shape_matrix(const Triangle& t) {
    if (is_degenerate(t)) throw std::domain_error("shape_matrix: degenerate triangle");
    // sum_i (v_i - z)(v_i - z)^T = 1/3 sum_{i<j} e_ij e_ij^T over edge vectors,
    // which avoids rounding the barycenter.
    SymMat2 s;
    for (int i = 0; i < 3; ++i) {
        const Vec2 e = t.v[(i + 1) % 3] - t.v[i];
        s.m11 += e.x * e.x;
        s.m12 += e.x * e.y;
        s.m22 += e.y * e.y;
    }
    // det(sum e e^T) = 12 |T|^2, free of the cancellation in s11 s22 - s12^2.
    const double area = t.area();
    const double det = (2.0 / 9.0) * (2.0 / 9.0) * 12.0 * area * area;
    const double k = (2.0 / 9.0) / det;
    return {s.m22 * k, -s.m12 * k, s.m11 * k};
}

inline Triangle triangle_from_shape(const SymMat2& metric, double theta, Vec2 z = {}) {
    require_spd(metric, "triangle_from_shape");
    const Mat2 A = power(metric, -0.5).full() * Mat2::rotation(-theta);
    return equilateral_triangle().mapped(A, z);
}

inline std::vector<Vec2> lagrange_nodes(const Triangle& t, int degree) {
    if (degree == 1) return {t.v[0], t.v[1], t.v[2]};
    if (degree == 2)
        return {t.v[0], t.v[1], t.v[2], 0.5 * (t.v[0] + t.v[1]), 0.5 * (t.v[0] + t.v[2]),
                0.5 * (t.v[1] + t.v[2])};
    throw std::invalid_argument("lagrange_nodes: unsupported degree " + std::to_string(degree));
}

/**
 * P1 or P2 Lagrange interpolant on a triangle, built from the barycentric
 * basis. Node order follows lagrange_nodes: vertices, then midpoints of
 * edges (0,1), (0,2), (1,2).
 */
class LagrangeInterpolant {
public:
    LagrangeInterpolant(const Triangle& t, int degree, std::span<const double> values)
        : tri_(t), degree_(degree) {
        if (degree != 1 && degree != 2)
            throw std::invalid_argument("interpolate: unsupported degree " + std::to_string(degree));
        const std::size_t count = degree == 1 ? 3 : 6;
        if (values.size() != count)
            throw std::invalid_argument("interpolate: expected " + std::to_string(count) + " nodal values");
        std::copy(values.begin(), values.end(), values_.begin());
        const double twice = 2.0 * t.signed_area();
        for (int i = 0; i < 3; ++i) {
            const Vec2 a = t.v[(i + 1) % 3], b = t.v[(i + 2) % 3];
            grad_bary_[i] = Vec2{a.y - b.y, b.x - a.x} / twice;
        }
    }

    int degree() const { return degree_; }

    std::array<double, 3> barycentric(Vec2 p) const {
        std::array<double, 3> l{};
        for (int i = 0; i < 3; ++i) l[i] = dot(grad_bary_[i], p - tri_.v[(i + 1) % 3]);
        return l;
    }

    double value(Vec2 p) const { return value_bary(barycentric(p)); }
    Vec2 grad(Vec2 p) const { return grad_bary(barycentric(p)); }

    double value_bary(const std::array<double, 3>& l) const {
        if (degree_ == 1) return values_[0] * l[0] + values_[1] * l[1] + values_[2] * l[2];
        double r = 0.0;
        for (int i = 0; i < 3; ++i) r += values_[i] * l[i] * (2.0 * l[i] - 1.0);
        r += values_[3] * 4.0 * l[0] * l[1] + values_[4] * 4.0 * l[0] * l[2] + values_[5] * 4.0 * l[1] * l[2];
        return r;
    }

    Vec2 grad_bary(const std::array<double, 3>& l) const {
        const auto& g = grad_bary_;
        if (degree_ == 1) return values_[0] * g[0] + values_[1] * g[1] + values_[2] * g[2];
        Vec2 r{};
        for (int i = 0; i < 3; ++i) r += values_[i] * (4.0 * l[i] - 1.0) * g[i];
        r += 4.0 * values_[3] * (l[1] * g[0] + l[0] * g[1]);
        r += 4.0 * values_[4] * (l[2] * g[0] + l[0] * g[2]);
        r += 4.0 * values_[5] * (l[2] * g[1] + l[1] * g[2]);
        return r;
    }

private:
    Triangle tri_;
    int degree_;
    std::array<double, 6> values_{};
    std::array<Vec2, 3> grad_bary_{};
};

inline LagrangeInterpolant interpolate(const Triangle& t, std::span<const double> values, int degree) {
    return LagrangeInterpolant(t, degree, values);
}

template <ScalarField F>
LagrangeInterpolant interpolate(const Triangle& t, const F& f, int degree) {
    const std::vector<Vec2> nodes = lagrange_nodes(t, degree);
    std::array<double, 6> vals{};
    for (std::size_t i = 0; i < nodes.size(); ++i) vals[i] = f.value(nodes[i]);
    return LagrangeInterpolant(t, degree, std::span<const double>(vals.data(), nodes.size()));
}

/// Integral over T of |grad(f - I f)|^2 for P(fe_degree) interpolation.
template <ScalarField F>
double interp_error_integral(const Triangle& t, const F& f, int fe_degree,
                             const QuadratureRule& rule = triangle_rule_deg8()) {
    const LagrangeInterpolant interp = interpolate(t, f, fe_degree);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto& l = rule.points[q];
        const Vec2 d = f.grad(t.from_barycentric(l)) - interp.grad_bary(l);
        acc += rule.weights[q] * dot(d, d);
    }
    return acc * t.area();
}

/// e_T(f)_m = sqrt( (1/|T|) int_T |grad(f - I^(m-1) f)|^2 ).
template <ScalarField F>
double interp_error_h1(const Triangle& t, const F& f, int m, const QuadratureRule& rule = triangle_rule_deg8()) {
    if (m != 2 && m != 3) throw std::invalid_argument("interp_error_h1: m must be 2 or 3");
    return std::sqrt(interp_error_integral(t, f, m - 1, rule) / t.area());
}

struct ShapeError {
    double value = 0.0;
    double theta = 0.0;  ///< maximizing rotation in [0, 2 pi / 3)
};

/**
 * e_M(pi)_m: the largest e_T(pi)_m over triangles with H_T = M, searched over
 * the rotation family triangle_from_shape(M, theta) with a uniform scan of
 * [0, 2 pi / 3) followed by golden-section refinement of each peak.
 */
template <int M>
ShapeError shape_error(const SymMat2& metric, const HomPoly<M>& p, std::size_t scan = 256) {
    static_assert(M == 2 || M == 3);
    require_spd(metric, "sup_error_over_shape");
    const Mat2 root = power(metric, -0.5).full();
    const Triangle eq = equilateral_triangle();
    auto error_at = [&](double theta) {
        const Triangle t = eq.mapped(root * Mat2::rotation(-theta));
        return interp_error_h1(t, p, M, triangle_rule_deg4());
    };
    const detail::ArgMax best = detail::maximize_periodic(error_at, 2.0 * std::numbers::pi / 3.0, scan);
    double theta = std::fmod(best.arg, 2.0 * std::numbers::pi / 3.0);
    if (theta < 0.0) theta += 2.0 * std::numbers::pi / 3.0;
    return {best.value, theta};
}

template <int M>
double sup_error_over_shape(const SymMat2& metric, const HomPoly<M>& p, std::size_t scan = 256) {
    return shape_error(metric, p, scan).value;
}

/**
 * ||grad(f - I_T f)||_{L^2(Omega)} over a mesh with P(fe_degree) elements,
 * using the degree-8 rule on each triangle. Per-triangle contributions may be
 * computed concurrently; they are summed in triangle order with compensation.
 */
template <ScalarField F>
double mesh_error(const Mesh& mesh, const F& f, int fe_degree) {
    if (fe_degree != 1 && fe_degree != 2) throw std::invalid_argument("mesh_error: fe degree must be 1 or 2");
    std::vector<double> parts(mesh.num_triangles());
    detail::parallel_for(mesh.num_triangles(), [&](std::size_t t) {
        if (!(mesh.signed_area(t) > 0.0))
            throw std::domain_error("mesh_error: triangle " + std::to_string(t) + " is inverted or degenerate");
        parts[t] = interp_error_integral(mesh_triangle(mesh, t), f, fe_degree);
    });
    detail::CompensatedSum sum;
    for (double v : parts) sum.add(v);
    return std::sqrt(sum.value());
}

} // namespace aniso
