#pragma once

// Test-only reference computations. Nothing here calls into the library's
// optimizers, quadrature or interpolation code.

#include "aniso/vec2.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

namespace oracle {

using aniso::Vec2;

/// max over [0, 2 pi) of g, by dense sampling and ternary refinement of the best sample.
inline double dense_circle_max(const std::function<double(double)>& g, int samples = 100000) {
    const double h = 2.0 * std::numbers::pi / samples;
    int best = 0;
    double best_val = g(0.0);
    for (int i = 1; i < samples; ++i) {
        const double v = g(i * h);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    double lo = (best - 1) * h, hi = (best + 1) * h;
    for (int it = 0; it < 200; ++it) {
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (g(m1) < g(m2)) lo = m1;
        else hi = m2;
    }
    return std::max(best_val, g(0.5 * (lo + hi)));
}

/// sup over the unit circle of |f|.
inline double circle_sup(const std::function<double(Vec2)>& f) {
    return dense_circle_max([&](double t) { return std::abs(f({std::cos(t), std::sin(t)})); });
}

/// Fourth-order central difference of a one-variable function.
inline double diff4(const std::function<double(double)>& g, double x, double h) {
    return (-g(x + 2 * h) + 8 * g(x + h) - 8 * g(x - h) + g(x - 2 * h)) / (12 * h);
}

/// diff4 at steps h and h/2 combined by one Richardson step (sixth order).
inline double diff4_extrapolated(const std::function<double(double)>& g, double x, double h) {
    return (16.0 * diff4(g, x, 0.5 * h) - diff4(g, x, h)) / 15.0;
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

/// Integral of x^a y^b over the reference triangle (0,0), (1,0), (0,1): a! b! / (a+b+2)!.
inline double reference_monomial_integral(int a, int b) {
    return std::exp(std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(a + b + 3.0));
}

} // namespace oracle
