#pragma once

/**
 * @file optimal_metric.hpp
 * @brief Near-optimal aspect-ratio metrics for P1 and P2 interpolation, and the
 *        Riemannian metric fields built from them.
 *
 * For a quadratic form pi the metric is ||pi|| |[pi]|. For a cubic form it is
 *
 *     sqrt([d_x pi]^2 + [d_y pi]^2) + ((-disc pi) / ||pi||)_+^(1/3) Id.
 *
 * Both are positive semidefinite and degenerate exactly on univariate forms.
 */

#include "aniso/poly2d.hpp"
#include "aniso/spd2.hpp"
#include "aniso/vec2.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace aniso {

/// All partial derivatives d^(k+l) f / dx^k dy^l at a point, for k + l <= order.
class TaylorJet {
public:
    TaylorJet() = default;
    TaylorJet(int order, Vec2 point)
        : order_(order), point_(point), derivs_(static_cast<std::size_t>((order + 1) * (order + 2) / 2), 0.0) {
        if (order < 0) throw std::invalid_argument("TaylorJet: negative order");
    }

    int order() const { return order_; }
    Vec2 point() const { return point_; }

    double& d(int k, int l) { return derivs_.at(index(k, l)); }
    double d(int k, int l) const { return derivs_.at(index(k, l)); }

private:
    std::size_t index(int k, int l) const {
        const int n = k + l;
        if (k < 0 || l < 0 || n > order_) throw std::out_of_range("TaylorJet: multi-index out of range");
        return static_cast<std::size_t>(n * (n + 1) / 2 + l);
    }

    int order_ = 0;
    Vec2 point_{};
    std::vector<double> derivs_;
};

/**
 * Degree-M homogeneous Taylor term of the jet,
 * sum_{k+l=M} d^M f / dx^k dy^l (z) x^k / k! y^l / l!,
 * in the binomial coefficient convention (stored c_l = D(M-l, l) / M!).
 */
template <int M>
HomPoly<M> taylor_hom(const TaylorJet& jet) {
    static_assert(M == 2 || M == 3, "Taylor terms are supported for degrees 2 and 3");
    if (jet.order() != M)
        throw std::invalid_argument("taylor_hom: jet order " + std::to_string(jet.order()) +
                                    " does not match degree " + std::to_string(M));
    double factorial = 1.0;
    for (int i = 2; i <= M; ++i) factorial *= i;
    HomPoly<M> p;
    for (int l = 0; l <= M; ++l) p.coeffs[l] = jet.d(M - l, l) / factorial;
    return p;
}

/// ||pi|| |[pi]| for a quadratic form.
inline SymMat2 metric_p1(const Quadratic& p) { return sup_norm(p) * abs(bracket(p)); }

/// Aspect-ratio metric for P2 elements driven by the cubic term `p`.
inline SymMat2 metric_p2(const Cubic& p) {
    const double norm = sup_norm(p);
    if (norm == 0.0) throw std::domain_error("metric_p2: zero polynomial");
    const GradPoly<3> g = p.gradient();
    const SymMat2 gx = bracket(g.dx), gy = bracket(g.dy);
    const SymMat2 sum = square(gx) + square(gy);

    // sum = C^T C with C the 4x2 stack of gx and gy; Cauchy-Binet gives its
    // determinant as a sum of squared 2x2 minors, accurate also when the
    // rows are nearly parallel (univariate p).
    const std::array<Vec2, 4> rows{Vec2{gx.m11, gx.m12}, Vec2{gx.m12, gx.m22}, Vec2{gy.m11, gy.m12},
                                   Vec2{gy.m12, gy.m22}};
    double det = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) det += cross(rows[i], rows[j]) * cross(rows[i], rows[j]);
    // Square root of a 2x2 PSD matrix: (S + sqrt(det) Id) / sqrt(tr + 2 sqrt(det)).
    const double rd = std::sqrt(det);
    const SymMat2 root = (1.0 / std::sqrt(sum.trace() + 2.0 * rd)) * (sum + rd * SymMat2::identity());

    // Discriminants at rounding level are treated as zero; otherwise the cube
    // root would turn noise into an isotropic term of relative size 1e-5.
    const auto& [a, b, c, d] = p.coeffs;
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                         (4.0 * (std::abs(a * c) + b * b) * (std::abs(b * d) + c * c) +
                          (std::abs(a * d) + std::abs(b * c)) * (std::abs(a * d) + std::abs(b * c)));
    const double neg = -disc(p);
    const double iso = neg > noise ? std::cbrt(neg / norm) : 0.0;
    return root + iso * SymMat2::identity();
}

template <int M>
SymMat2 optimal_metric(const HomPoly<M>& p) {
    if constexpr (M == 2) {
        return metric_p1(p);
    } else {
        static_assert(M == 3, "optimal metrics exist for degrees 2 and 3");
        return metric_p2(p);
    }
}

enum class MetricMode {
    anisotropic,
    /// M replaced by lambda_max(M) Id before scaling.
    isotropic,
};

struct MetricFieldParams {
    int degree = 2;
    double scale = 1.0;   ///< lambda
    double eps_reg = 1e-3;
    MetricMode mode = MetricMode::anisotropic;
};

/**
 * Turns a pointwise optimal metric M into the field value
 * lambda det(M')^(-1/(2m)) M', where M' = M + (eps lambda_max(M) + eps^2) Id
 * (after the optional isotropic replacement).
 */
inline SymMat2 scaled_metric(const SymMat2& optimal, const MetricFieldParams& params) {
    const Eigen2 e = eigen(optimal);
    const double top = std::max(e.lambda1, 0.0);
    SymMat2 m = params.mode == MetricMode::isotropic ? top * SymMat2::identity() : optimal;
    m = m + (params.eps_reg * top + params.eps_reg * params.eps_reg) * SymMat2::identity();
    const double det = m.det();
    return params.scale * std::pow(det, -1.0 / (2.0 * params.degree)) * m;
}

using JetProvider = std::function<TaylorJet(Vec2)>;

/// Evaluator z -> SPD matrix. Evaluation is const and safe to share across threads.
class MetricField {
public:
    using Evaluator = std::function<SymMat2(Vec2)>;

    MetricField() = default;
    MetricField(Evaluator eval, double scale = 1.0, double eps_reg = 0.0)
        : eval_(std::move(eval)), scale_(scale), eps_reg_(eps_reg) {}

    static MetricField constant(SymMat2 m) {
        return MetricField([m](Vec2) { return m; }, 1.0, 0.0);
    }

    SymMat2 operator()(Vec2 z) const { return eval_(z); }
    double scale() const { return scale_; }
    double eps_reg() const { return eps_reg_; }

    /// The same field multiplied by `factor`.
    MetricField scaled(double factor) const {
        return MetricField([e = eval_, factor](Vec2 z) { return factor * e(z); }, scale_ * factor, eps_reg_);
    }

private:
    Evaluator eval_ = [](Vec2) { return SymMat2::identity(); };
    double scale_ = 1.0;
    double eps_reg_ = 0.0;
};

/// Optimal metric of the degree-`degree` Taylor term of a jet; zero forms map to the zero matrix.
inline SymMat2 jet_optimal_metric(const TaylorJet& jet, int degree) {
    if (degree == 2) {
        const Quadratic p = taylor_hom<2>(jet);
        return p.is_zero() ? SymMat2{} : metric_p1(p);
    }
    if (degree == 3) {
        const Cubic p = taylor_hom<3>(jet);
        return p.is_zero() ? SymMat2{} : metric_p2(p);
    }
    throw std::invalid_argument("degree must be 2 or 3");
}

inline MetricField metric_field(JetProvider jets, const MetricFieldParams& params) {
    if (params.degree != 2 && params.degree != 3) throw std::invalid_argument("metric_field: degree must be 2 or 3");
    if (!(params.scale > 0.0)) throw std::invalid_argument("metric_field: lambda must be positive");
    if (!(params.eps_reg > 0.0 && params.eps_reg < 1.0))
        throw std::invalid_argument("metric_field: eps_reg must lie in (0, 1)");
    return MetricField(
        [jets = std::move(jets), params](Vec2 z) {
            return scaled_metric(jet_optimal_metric(jets(z), params.degree), params);
        },
        params.scale, params.eps_reg);
}

/**
 * f(x, y) = tanh(10 (sin(5y) - 2x)) + x^2 y + y^3, with closed-form derivatives
 * up to order 3.
 */
struct SyntheticFunction {
    double value(Vec2 p) const { return std::tanh(front(p)) + p.x * p.x * p.y + p.y * p.y * p.y; }

    Vec2 grad(Vec2 p) const {
        const double g1 = sech2(front(p));
        return {-20.0 * g1 + 2.0 * p.x * p.y, g1 * 50.0 * std::cos(5.0 * p.y) + p.x * p.x + 3.0 * p.y * p.y};
    }

    TaylorJet jet(Vec2 z, int order) const {
        if (order < 0 || order > 3) throw std::invalid_argument("synthetic jet order must be in [0, 3]");
        const double s = front(z);
        const double t = std::tanh(s);
        const double g1 = sech2(s);
        const double g2 = -2.0 * t * g1;
        const double g3 = (6.0 * t * t - 2.0) * g1;

        const double sx = -20.0;
        const double sy = 50.0 * std::cos(5.0 * z.y);
        const double syy = -250.0 * std::sin(5.0 * z.y);
        const double syyy = -1250.0 * std::cos(5.0 * z.y);
        const double x = z.x, y = z.y;

        // tanh part by the chain rule (s is affine in x, so only y-derivatives of s enter).
        const double all[4][4] = {
            {t, g1 * sy, g2 * sy * sy + g1 * syy, g3 * sy * sy * sy + 3.0 * g2 * sy * syy + g1 * syyy},
            {g1 * sx, g2 * sx * sy, g3 * sx * sy * sy + g2 * sx * syy, 0.0},
            {g2 * sx * sx, g3 * sx * sx * sy, 0.0, 0.0},
            {g3 * sx * sx * sx, 0.0, 0.0, 0.0},
        };
        // x^2 y + y^3.
        const double poly[4][4] = {
            {x * x * y + y * y * y, x * x + 3.0 * y * y, 6.0 * y, 6.0},
            {2.0 * x * y, 2.0 * x, 0.0, 0.0},
            {2.0 * y, 2.0, 0.0, 0.0},
            {0.0, 0.0, 0.0, 0.0},
        };
        TaylorJet jet(order, z);
        for (int k = 0; k <= order; ++k)
            for (int l = 0; k + l <= order; ++l) jet.d(k, l) = all[k][l] + poly[k][l];
        return jet;
    }

private:
    static double front(Vec2 p) { return 10.0 * (std::sin(5.0 * p.y) - 2.0 * p.x); }
    static double sech2(double s) {
        const double ch = std::cosh(s);
        return 1.0 / (ch * ch);
    }
};

inline TaylorJet synthetic_jet(Vec2 z, int order) { return SyntheticFunction{}.jet(z, order); }

/// Metric field of the synthetic function for P(degree-1) elements.
inline MetricField synthetic_metric_field(int degree, double scale, double eps_reg = 1e-3,
                                          MetricMode mode = MetricMode::anisotropic) {
    return metric_field([degree](Vec2 z) { return synthetic_jet(z, degree); },
                        MetricFieldParams{degree, scale, eps_reg, mode});
}

} // namespace aniso
