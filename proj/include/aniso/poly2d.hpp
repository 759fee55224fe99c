#pragma once

/**
 * @file poly2d.hpp
 * @brief Homogeneous bivariate polynomials of degree 1, 2 and 3.
 *
 * A polynomial of degree M is stored in the symmetric-tensor convention
 *
 *     pi(x, y) = sum_k binom(M, k) c_k x^(M-k) y^k,
 *
 * so degree 2 reads a x^2 + 2b xy + c y^2 and degree 3 reads
 * a x^3 + 3b x^2 y + 3c x y^2 + d y^3. In this convention the partial
 * derivatives are M (c_0..c_{M-1}) and M (c_1..c_M), and the cubic
 * discriminant reads directly off the stored coefficients.
 *
 * Under a linear change of variables the cubic discriminant transforms as
 * disc(pi o A) = det(A)^6 disc(pi); the exponent is checked in the tests.
 */

#include "aniso/detail/optimize.hpp"
#include "aniso/vec2.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>

namespace aniso {

namespace detail {

constexpr double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Number of uniform samples on the half circle [0, pi) used by the sup-norms.
inline constexpr std::size_t kCircleSamples = 4096;

struct CircleTable {
    std::array<double, kCircleSamples> cs{};
    std::array<double, kCircleSamples> sn{};
    CircleTable() {
        for (std::size_t i = 0; i < kCircleSamples; ++i) {
            const double t = std::numbers::pi * static_cast<double>(i) / kCircleSamples;
            cs[i] = std::cos(t);
            sn[i] = std::sin(t);
        }
    }
};

inline const CircleTable& circle_table() {
    static const CircleTable table;
    return table;
}

} // namespace detail

template <int M>
struct GradPoly;

/// Homogeneous polynomial of degree M in (x, y).
template <int M>
struct HomPoly {
    static_assert(M >= 1 && M <= 3, "supported degrees are 1, 2 and 3");
    static constexpr int degree = M;

    std::array<double, M + 1> coeffs{};

    constexpr bool is_zero() const {
        for (double v : coeffs)
            if (v != 0.0) return false;
        return true;
    }

    constexpr double eval(Vec2 u) const {
        // Horner in t = y / x, done without division.
        double xp = 1.0, result = 0.0;
        std::array<double, M + 1> ypow{};
        ypow[0] = 1.0;
        for (int k = 1; k <= M; ++k) ypow[k] = ypow[k - 1] * u.y;
        for (int k = M; k >= 0; --k) {
            result += detail::binomial(M, k) * coeffs[k] * xp * ypow[k];
            xp *= u.x;
        }
        return result;
    }

    constexpr GradPoly<M> gradient() const;

    /// Scalar-field interface (see fem_error.hpp).
    constexpr double value(Vec2 u) const { return eval(u); }
    constexpr Vec2 grad(Vec2 u) const;

    friend constexpr HomPoly operator*(double s, HomPoly p) {
        for (double& v : p.coeffs) v *= s;
        return p;
    }
    friend constexpr HomPoly operator+(HomPoly p, const HomPoly& q) {
        for (int k = 0; k <= M; ++k) p.coeffs[k] += q.coeffs[k];
        return p;
    }
    friend constexpr bool operator==(const HomPoly&, const HomPoly&) = default;
};

/// The two partial derivatives of a degree-M polynomial.
template <int M>
struct GradPoly {
    HomPoly<M - 1> dx;
    HomPoly<M - 1> dy;

    constexpr Vec2 eval(Vec2 u) const { return {dx.eval(u), dy.eval(u)}; }
};

template <int M>
constexpr GradPoly<M> HomPoly<M>::gradient() const {
    static_assert(M >= 2, "gradient of a linear form is constant");
    GradPoly<M> g;
    for (int k = 0; k < M; ++k) {
        g.dx.coeffs[k] = M * coeffs[k];
        g.dy.coeffs[k] = M * coeffs[k + 1];
    }
    return g;
}

template <int M>
constexpr Vec2 HomPoly<M>::grad(Vec2 u) const {
    if constexpr (M == 1) {
        return {coeffs[0], coeffs[1]};
    } else {
        return gradient().eval(u);
    }
}

using Quadratic = HomPoly<2>;
using Cubic = HomPoly<3>;

template <int M>
constexpr double eval(const HomPoly<M>& p, Vec2 u) { return p.eval(u); }

template <int M>
constexpr GradPoly<M> gradient(const HomPoly<M>& p) { return p.gradient(); }

/// sup over the closed unit disc of |p|.
template <int M>
double sup_norm(const HomPoly<M>& p) {
    if (p.is_zero()) return 0.0;
    const auto& tab = detail::circle_table();
    std::array<double, detail::kCircleSamples> samples;
    for (std::size_t i = 0; i < samples.size(); ++i)
        samples[i] = std::abs(p.eval({tab.cs[i], tab.sn[i]}));
    auto f = [&](double t) { return std::abs(p.eval({std::cos(t), std::sin(t)})); };
    return detail::refine_periodic_max(f, std::span<const double>(samples), std::numbers::pi).value;
}

/// sup over the closed unit disc of the Euclidean norm of grad p.
template <int M>
double grad_sup_norm(const HomPoly<M>& p) {
    if (p.is_zero()) return 0.0;
    const auto& tab = detail::circle_table();
    std::array<double, detail::kCircleSamples> samples;
    auto norm2 = [&](Vec2 u) {
        const Vec2 g = p.grad(u);
        return g.x * g.x + g.y * g.y;
    };
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = norm2({tab.cs[i], tab.sn[i]});
    auto f = [&](double t) { return norm2({std::cos(t), std::sin(t)}); };
    return std::sqrt(
        detail::refine_periodic_max(f, std::span<const double>(samples), std::numbers::pi).value);
}

/// Coefficients of u -> p(A u), expanded exactly.
template <int M>
constexpr HomPoly<M> compose(const HomPoly<M>& p, const Mat2& A) {
    // (A u) = (l1, l2) with l1 = a x + b y, l2 = c x + d y.
    // Polynomials below are indexed by the power of y.
    using Poly = std::array<double, M + 1>;
    auto mul_linear = [](const Poly& q, double cx, double cy) {
        Poly r{};
        for (int k = 0; k <= M; ++k) {
            if (q[k] == 0.0) continue;
            r[k] += q[k] * cx;
            if (k + 1 <= M) r[k + 1] += q[k] * cy;
        }
        return r;
    };
    Poly total{};
    for (int k = 0; k <= M; ++k) {
        Poly term{};
        term[0] = detail::binomial(M, k) * p.coeffs[k];
        for (int i = 0; i < M - k; ++i) term = mul_linear(term, A.a, A.b);
        for (int i = 0; i < k; ++i) term = mul_linear(term, A.c, A.d);
        for (int j = 0; j <= M; ++j) total[j] += term[j];
    }
    HomPoly<M> out;
    for (int j = 0; j <= M; ++j) out.coeffs[j] = total[j] / detail::binomial(M, j);
    return out;
}

/// Discriminant 4(ac - b^2)(bd - c^2) - (ad - bc)^2 of a binary cubic.
constexpr double disc(const Cubic& p) {
    const auto& [a, b, c, d] = p.coeffs;
    const double q = detail::diff_of_products(a, d, b, c);
    return 4.0 * detail::diff_of_products(a, c, b, b) * detail::diff_of_products(b, d, c, c) - q * q;
}

} // namespace aniso
