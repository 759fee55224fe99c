#pragma once

/**
 * @file verify.hpp
 * @brief Numerical checks of the optimal-metric theory: the equivalence
 *        between e_M(pi)_m and ||M||^(1/2) ||grad(pi o M^(-1/2))||, and the
 *        near-minimizer property of M_m(pi) against a brute-force search.
 *
 * Shapes are parametrized as M = s U_theta^T diag(r, 1/r) U_theta with r >= 1,
 * so s = sqrt(det M) and r is the square root of the eigenvalue ratio.
 */

#include "aniso/detail/optimize.hpp"
#include "aniso/detail/format.hpp"
#include "aniso/detail/parallel.hpp"
#include "aniso/fem_error.hpp"
#include "aniso/optimal_metric.hpp"
#include "aniso/poly2d.hpp"
#include "aniso/spd2.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace aniso {

struct ShapeParam {
    double r = 1.0;
    double theta = 0.0;
    double s = 1.0;

    SymMat2 matrix() const { return from_eigen(Eigen2{r, 1.0 / r, theta}, s * r, s / r); }

    static ShapeParam from_matrix(const SymMat2& m) {
        require_spd(m, "ShapeParam");
        const Eigen2 e = eigen(m);
        double theta = std::fmod(e.angle, std::numbers::pi);
        if (theta < 0.0) theta += std::numbers::pi;
        return {std::sqrt(e.lambda1 / e.lambda2), theta, std::sqrt(e.lambda1 * e.lambda2)};
    }
};

/// ||M||^(1/2) ||grad(pi o M^(-1/2))||, the quantity equivalent to e_M(pi)_m.
template <int M>
double surrogate(const HomPoly<M>& p, const SymMat2& metric) {
    require_spd(metric, "surrogate");
    return std::sqrt(operator_norm(metric)) * grad_sup_norm(compose(p, power(metric, -0.5).full()));
}

/// Default search range for r: 1e3 for m = 2 and 1e2 for m = 3.
inline double default_r_max(int m) { return m == 2 ? 1e3 : 1e2; }

/// i.i.d. standard normal coefficients, normalized to unit sup-norm.
template <int M>
HomPoly<M> random_unit_poly(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    for (;;) {
        HomPoly<M> p;
        for (double& c : p.coeffs) c = n(rng);
        const double norm = sup_norm(p);
        if (norm > 1e-8) return (1.0 / norm) * p;
    }
}

struct VerifyRecord {
    int sample_id = 0;
    int m = 2;
    std::array<double, 4> coeffs{};  ///< d unused for m = 2
    double r = 1.0;
    double theta = 0.0;
    double e_M = 0.0;
    double surrogate = 0.0;
    double ratio = 0.0;
};

struct VerifyReport {
    std::string kind;  ///< "equivalence" or "near-minimizer"
    std::vector<VerifyRecord> records;
    double min_ratio = 0.0;
    double max_ratio = 0.0;

    double spread() const { return max_ratio / min_ratio; }

    void summarize() {
        if (records.empty()) return;
        min_ratio = std::numeric_limits<double>::infinity();
        max_ratio = 0.0;
        for (const VerifyRecord& rec : records) {
            min_ratio = std::min(min_ratio, rec.ratio);
            max_ratio = std::max(max_ratio, rec.ratio);
        }
    }
};

template <int M>
VerifyRecord make_record(int id, const HomPoly<M>& p) {
    VerifyRecord rec;
    rec.sample_id = id;
    rec.m = M;
    std::copy(p.coeffs.begin(), p.coeffs.end(), rec.coeffs.begin());
    return rec;
}

/**
 * Ratios e_M(pi)_m / surrogate(pi, M) over `count` random pairs: pi of unit
 * sup-norm, r log-uniform in [1, anisotropy_cap], theta uniform, s
 * log-uniform in [0.1, 10]. Samples are drawn up front, so the result does not
 * depend on the worker count.
 */
template <int M>
VerifyReport equivalence_constants(int count, std::uint64_t seed, double anisotropy_cap = default_r_max(M)) {
    if (count < 1) throw std::invalid_argument("equivalence_constants: count must be at least 1");
    if (!(anisotropy_cap >= 1.0)) throw std::invalid_argument("equivalence_constants: anisotropy cap below 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> log_r(0.0, std::log(anisotropy_cap)), angle(0.0, std::numbers::pi),
        log_s(std::log(0.1), std::log(10.0));
    std::vector<HomPoly<M>> polys;
    std::vector<ShapeParam> shapes;
    for (int i = 0; i < count; ++i) {
        polys.push_back(random_unit_poly<M>(rng));
        const double r = std::exp(log_r(rng));
        const double theta = angle(rng);
        shapes.push_back({r, theta, std::exp(log_s(rng))});
    }

    VerifyReport report;
    report.kind = "equivalence";
    report.records.resize(static_cast<std::size_t>(count));
    detail::parallel_for(report.records.size(), [&](std::size_t i) {
        const SymMat2 metric = shapes[i].matrix();
        VerifyRecord rec = make_record(static_cast<int>(i), polys[i]);
        rec.r = shapes[i].r;
        rec.theta = shapes[i].theta;
        rec.e_M = sup_error_over_shape(metric, polys[i]);
        rec.surrogate = surrogate(polys[i], metric);
        rec.ratio = rec.e_M / rec.surrogate;
        report.records[i] = rec;
    });
    report.summarize();
    return report;
}

struct OptimalShape {
    ShapeParam shape;   ///< minimizer, scaled so that e_M(pi)_m = 1
    double det = 0.0;   ///< its determinant
    int evaluations = 0;
};

struct GridSize {
    int r_count = 48;
    int theta_count = 64;
};

/**
 * inf { det M : e_M(pi)_m <= 1 } by search over unit-determinant shapes.
 * For a unit-det shape M0 with e0 = e_{M0}(pi)_m, the scaling law
 * e_{tM0} = t^((1-m)/2) e0 gives error 1 at t = e0^(2/(m-1)), so det = t^2.
 * A grid of log-spaced r in [1, r_max] times theta in [0, pi) is followed by
 * Nelder-Mead on (log r, theta) from the best grid point and from each of
 * `starts`.
 */
template <int M>
OptimalShape brute_force_optimal_det(const HomPoly<M>& p, double r_max = default_r_max(M), GridSize grid = {},
                                     const std::vector<ShapeParam>& starts = {}) {
    static_assert(M == 2 || M == 3);
    if (p.is_zero()) throw std::domain_error("brute_force_optimal_det: zero polynomial");
    if (!(r_max >= 1.0)) throw std::invalid_argument("brute_force_optimal_det: r_max below 1");
    if (grid.r_count < 2 || grid.theta_count < 1) throw std::invalid_argument("brute_force_optimal_det: grid too small");
    const double exponent = 4.0 / (M - 1);
    const double log_max = std::log(r_max);
    auto objective = [&](const std::array<double, 2>& q) {
        const SymMat2 shape = ShapeParam{std::exp(q[0]), q[1], 1.0}.matrix();
        return std::pow(sup_error_over_shape(shape, p), exponent);
    };
    // r < 1 is the same shape as 1/r turned by pi/2; beyond r_max, clamp.
    auto project = [&](std::array<double, 2> q) {
        if (q[0] < 0.0) {
            q[0] = -q[0];
            q[1] += 0.5 * std::numbers::pi;
        }
        q[0] = std::min(q[0], log_max);
        q[1] = std::fmod(q[1], std::numbers::pi);
        if (q[1] < 0.0) q[1] += std::numbers::pi;
        return q;
    };

    const std::size_t nr = static_cast<std::size_t>(grid.r_count), nt = static_cast<std::size_t>(grid.theta_count);
    const double dr = log_max / static_cast<double>(nr - 1), dt = std::numbers::pi / static_cast<double>(nt);
    std::vector<double> values(nr * nt);
    detail::parallel_for(values.size(), [&](std::size_t k) {
        values[k] = objective({dr * static_cast<double>(k / nt), dt * static_cast<double>(k % nt)});
    });
    const std::size_t best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());

    std::vector<std::array<double, 2>> seeds{{dr * static_cast<double>(best / nt), dt * static_cast<double>(best % nt)}};
    for (const ShapeParam& s : starts) seeds.push_back(project({std::log(std::max(s.r, 1.0)), s.theta}));
    std::vector<detail::NelderMeadResult> polished(seeds.size());
    const std::array<double, 2> step{std::max(dr, 1e-3), dt};
    detail::parallel_for(seeds.size(), [&](std::size_t i) {
        polished[i] = detail::nelder_mead_2d(objective, seeds[i], step, project, 1e-10, 400);
    });

    OptimalShape result;
    result.evaluations = static_cast<int>(values.size());
    std::array<double, 2> arg{dr * static_cast<double>(best / nt), dt * static_cast<double>(best % nt)};
    double value = values[best];
    for (const auto& nm : polished) {
        result.evaluations += nm.evaluations;
        if (nm.value < value) {
            value = nm.value;
            arg = nm.x;
        }
    }
    // det = t^2 with t = e0^(2/(m-1)); s = t for a unit-det shape.
    result.det = value;
    result.shape = ShapeParam{std::exp(arg[0]), arg[1], std::sqrt(value)};
    return result;
}

/// M_m(pi) scaled by the exact law so that its e_M error equals 1.
template <int M>
SymMat2 unit_error_metric(const HomPoly<M>& p, const SymMat2& metric) {
    const double e = sup_error_over_shape(metric, p);
    return std::pow(e, 2.0 / (M - 1)) * metric;
}

struct NearMinimizer {
    double ratio = 0.0;          ///< det(scaled M_m) / brute-force det
    double metric_det = 0.0;     ///< det of M_m(pi) scaled to unit error
    double e_metric = 0.0;       ///< e_{M_m(pi)}(pi)_m before scaling
    double surrogate = 0.0;      ///< surrogate(pi, M_m(pi))
    OptimalShape optimum;
};

/**
 * det of M_m(pi), scaled to unit error, over the brute-force infimum. The
 * search range is widened to 10 r(M_m(pi)) when M_m(pi) is itself more
 * anisotropic than r_max allows, and the search is also started from the
 * shape of M_m(pi).
 */
template <int M>
NearMinimizer near_minimizer_ratio(const HomPoly<M>& p, double r_max = default_r_max(M), GridSize grid = {}) {
    if (p.is_zero()) throw std::domain_error("near_minimizer_ratio: zero polynomial");
    const SymMat2 metric = optimal_metric(p);
    if (!is_spd(metric)) throw std::domain_error("near_minimizer_ratio: univariate polynomial has a degenerate metric");
    const ShapeParam own = ShapeParam::from_matrix(metric);
    NearMinimizer out;
    out.e_metric = sup_error_over_shape(metric, p);
    out.surrogate = surrogate(p, metric);
    out.metric_det = std::pow(out.e_metric, 4.0 / (M - 1)) * metric.det();
    out.optimum = brute_force_optimal_det(p, std::max(r_max, 10.0 * own.r), grid, {own});
    out.ratio = out.metric_det / out.optimum.det;
    return out;
}

/// near_minimizer_ratio over `count` random unit-norm polynomials.
template <int M>
VerifyReport near_minimizer_report(int count, std::uint64_t seed, double r_max = default_r_max(M),
                                   GridSize grid = {}) {
    if (count < 1) throw std::invalid_argument("near_minimizer_report: count must be at least 1");
    std::mt19937_64 rng(seed);
    std::vector<HomPoly<M>> polys;
    while (static_cast<int>(polys.size()) < count) {
        const HomPoly<M> p = random_unit_poly<M>(rng);
        if (is_spd(optimal_metric(p))) polys.push_back(p);
    }
    VerifyReport report;
    report.kind = "near-minimizer";
    for (int i = 0; i < count; ++i) {
        const NearMinimizer nm = near_minimizer_ratio(polys[static_cast<std::size_t>(i)], r_max, grid);
        VerifyRecord rec = make_record(i, polys[static_cast<std::size_t>(i)]);
        rec.r = nm.optimum.shape.r;
        rec.theta = nm.optimum.shape.theta;
        rec.e_M = nm.e_metric;
        rec.surrogate = nm.surrogate;
        rec.ratio = nm.ratio;
        report.records.push_back(rec);
    }
    report.summarize();
    return report;
}

/// CSV with columns sample_id,m,a,b,c,d,r,theta,e_M,surrogate,ratio; d is empty for m = 2.
inline void write_report_csv(const VerifyReport& report, std::ostream& out) {
    using detail::format_g17;
    out << "sample_id,m,a,b,c,d,r,theta,e_M,surrogate,ratio\n";
    for (const VerifyRecord& rec : report.records) {
        out << rec.sample_id << ',' << rec.m;
        for (int k = 0; k < 4; ++k) {
            out << ',';
            if (k <= rec.m) out << format_g17(rec.coeffs[static_cast<std::size_t>(k)]);
        }
        out << ',' << format_g17(rec.r) << ',' << format_g17(rec.theta) << ',' << format_g17(rec.e_M) << ','
            << format_g17(rec.surrogate) << ',' << format_g17(rec.ratio) << '\n';
    }
}

inline void write_report_summary(const VerifyReport& report, std::ostream& out) {
    using detail::format_g17;
    out << "kind: " << report.kind << '\n'
        << "samples: " << report.records.size() << '\n'
        << "min_ratio: " << format_g17(report.min_ratio) << '\n'
        << "max_ratio: " << format_g17(report.max_ratio) << '\n'
        << "spread: " << format_g17(report.spread()) << '\n';
}

} // namespace aniso
