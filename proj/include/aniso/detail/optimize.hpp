#pragma once

// One-dimensional and two-dimensional derivative-free optimizers used by the
// sup-norm evaluations and the shape searches.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace aniso::detail {

struct ArgMax {
    double arg = 0.0;
    double value = 0.0;
};

/// Golden-section search for a maximum of a unimodal `f` on [lo, hi].
template <class F>
ArgMax golden_section_max(const F& f, double lo, double hi, int iterations = 60) {
    constexpr double inv_phi = 0.6180339887498948482;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < iterations && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    return f1 >= f2 ? ArgMax{x1, f1} : ArgMax{x2, f2};
}

/**
 * Maximum of a smooth `period`-periodic function given its values on a
 * uniform grid `samples[i] = f(i * period / n)`.
 *
 * Every discrete local maximum (the strongest `max_peaks` of them) is polished
 * by golden-section search within one grid step on each side. A constant
 * sample sequence has no strict peak; the first sample is polished instead.
 */
template <class F>
ArgMax refine_periodic_max(const F& f, std::span<const double> samples, double period,
                           std::size_t max_peaks = 8) {
    const std::size_t n = samples.size();
    const double h = period / static_cast<double>(n);

    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < n; ++i) {
        const double prev = samples[(i + n - 1) % n];
        const double next = samples[(i + 1) % n];
        if (samples[i] > prev && samples[i] >= next) peaks.push_back(i);
    }
    if (peaks.empty()) peaks.push_back(0);
    if (peaks.size() > max_peaks) {
        std::partial_sort(peaks.begin(), peaks.begin() + static_cast<std::ptrdiff_t>(max_peaks),
                          peaks.end(), [&](std::size_t l, std::size_t r) {
                              return samples[l] != samples[r] ? samples[l] > samples[r] : l < r;
                          });
        peaks.resize(max_peaks);
    }

    ArgMax best{0.0, samples[peaks.front()]};
    best.arg = static_cast<double>(peaks.front()) * h;
    for (std::size_t i : peaks) {
        const double t = static_cast<double>(i) * h;
        if (samples[i] > best.value) best = {t, samples[i]};
        const ArgMax local = golden_section_max(f, t - h, t + h);
        if (local.value > best.value) best = local;
    }
    return best;
}

/// Samples `f` on `n` uniform points over one period, then refines.
template <class F>
ArgMax maximize_periodic(const F& f, double period, std::size_t n) {
    std::vector<double> samples(n);
    for (std::size_t i = 0; i < n; ++i)
        samples[i] = f(static_cast<double>(i) * period / static_cast<double>(n));
    return refine_periodic_max(f, samples, period);
}

struct NelderMeadResult {
    std::array<double, 2> x{};
    double value = 0.0;
    int evaluations = 0;
};

/**
 * Nelder-Mead minimization in two variables. `project` maps trial points back
 * into the feasible box before evaluation.
 */
template <class F, class Project>
NelderMeadResult nelder_mead_2d(const F& f, std::array<double, 2> start, std::array<double, 2> step,
                                const Project& project, double ftol = 1e-10, int max_evals = 400) {
    using Pt = std::array<double, 2>;
    std::array<Pt, 3> p{start, start, start};
    p[1][0] += step[0];
    p[2][1] += step[1];
    std::array<double, 3> v{};
    int evals = 0;
    auto eval = [&](Pt& q) {
        q = project(q);
        ++evals;
        return f(q);
    };
    for (int i = 0; i < 3; ++i) v[i] = eval(p[i]);

    auto lerp = [](const Pt& a, const Pt& b, double t) {
        return Pt{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
    };

    while (evals < max_evals) {
        std::array<int, 3> idx{0, 1, 2};
        std::sort(idx.begin(), idx.end(), [&](int l, int r) { return v[l] < v[r]; });
        const int lo = idx[0], mid = idx[1], hi = idx[2];
        if (std::abs(v[hi] - v[lo]) <= ftol * (std::abs(v[lo]) + 1e-300)) break;

        const Pt centroid{(p[lo][0] + p[mid][0]) / 2.0, (p[lo][1] + p[mid][1]) / 2.0};
        Pt xr = lerp(centroid, p[hi], -1.0);
        const double fr = eval(xr);
        if (fr < v[lo]) {
            Pt xe = lerp(centroid, p[hi], -2.0);
            const double fe = eval(xe);
            if (fe < fr) { p[hi] = xe; v[hi] = fe; }
            else { p[hi] = xr; v[hi] = fr; }
        } else if (fr < v[mid]) {
            p[hi] = xr;
            v[hi] = fr;
        } else {
            Pt xc = fr < v[hi] ? lerp(centroid, xr, 0.5) : lerp(centroid, p[hi], 0.5);
            const double fc = eval(xc);
            if (fc < std::min(fr, v[hi])) {
                p[hi] = xc;
                v[hi] = fc;
            } else {
                for (int k : {mid, hi}) {
                    p[k] = lerp(p[lo], p[k], 0.5);
                    v[k] = eval(p[k]);
                }
            }
        }
    }
    int best = 0;
    for (int i = 1; i < 3; ++i)
        if (v[i] < v[best]) best = i;
    return {p[best], v[best], evals};
}

} // namespace aniso::detail
