#include "aniso/fem_error.hpp"
#include "aniso/optimal_metric.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace aniso;

namespace {

// Vertices uniform in [-1, 1]^2. Slivers whose shape matrix has condition
// number above 1e4 are redrawn: beyond that, rounding the three entries of
// H_T alone moves det H_T by more than 1e-12 relative.
Triangle random_triangle(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    for (;;) {
        Triangle t{{Vec2{u(rng), u(rng)}, Vec2{u(rng), u(rng)}, Vec2{u(rng), u(rng)}}};
        if (t.signed_area() < 0) std::swap(t.v[1], t.v[2]);
        if (is_degenerate(t)) continue;
        const Eigen2 e = eigen(shape_matrix(t));
        if (e.lambda1 <= 1e4 * e.lambda2) return t;
    }
}

SymMat2 random_spd(std::mt19937_64& rng, double max_log = 3.0) {
    std::uniform_real_distribution<double> logl(-max_log, max_log), angle(0, std::numbers::pi);
    Eigen2 e{std::exp(logl(rng)), std::exp(logl(rng)), angle(rng)};
    return from_eigen(e, e.lambda1, e.lambda2);
}

template <int M>
HomPoly<M> random_poly(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    HomPoly<M> p;
    for (double& c : p.coeffs) c = n(rng);
    return p;
}

/// Dense polynomial sum c_ij x^i y^j with i + j <= degree.
struct DensePoly {
    int degree = 0;
    std::vector<std::array<double, 3>> terms;  // (coef, i, j)

    double value(Vec2 p) const {
        double r = 0.0;
        for (const auto& [c, i, j] : terms) r += c * std::pow(p.x, i) * std::pow(p.y, j);
        return r;
    }
    Vec2 grad(Vec2 p) const {
        Vec2 g{};
        for (const auto& [c, i, j] : terms) {
            if (i > 0) g.x += c * i * std::pow(p.x, i - 1) * std::pow(p.y, j);
            if (j > 0) g.y += c * j * std::pow(p.x, i) * std::pow(p.y, j - 1);
        }
        return g;
    }
};

DensePoly random_dense(std::mt19937_64& rng, int degree) {
    std::normal_distribution<double> n;
    DensePoly p{degree, {}};
    for (int i = 0; i <= degree; ++i)
        for (int j = 0; i + j <= degree; ++j) p.terms.push_back({n(rng), double(i), double(j)});
    return p;
}

} // namespace

TEST(ShapeMatrix, Examples) {
    const SymMat2 eq = shape_matrix(equilateral_triangle());
    EXPECT_NEAR(eq.m11, 1.0, 1e-15);
    EXPECT_NEAR(eq.m12, 0.0, 1e-15);
    EXPECT_NEAR(eq.m22, 1.0, 1e-15);

    const SymMat2 right = shape_matrix(Triangle{{Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}}});
    EXPECT_NEAR(right.m11, 3.0, 1e-14);
    EXPECT_NEAR(right.m12, 1.5, 1e-14);
    EXPECT_NEAR(right.m22, 3.0, 1e-14);
}

TEST(ShapeMatrix, DegenerateThrows) {
    EXPECT_THROW(shape_matrix(Triangle{{Vec2{0, 0}, Vec2{1, 0}, Vec2{2, 0}}}), std::domain_error);
    EXPECT_THROW(shape_matrix(Triangle{{Vec2{0, 0}, Vec2{1, 0}, Vec2{0.5, 1e-16}}}), std::domain_error);
}

TEST(ShapeMatrix, AreaIdentityAndVertexEllipse) {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 1000; ++i) {
        const Triangle t = random_triangle(rng);
        const SymMat2 h = shape_matrix(t);
        EXPECT_LT(oracle::rel_err(t.area() * std::sqrt(h.det()), kEquilateralArea), 1e-12);
        const Vec2 z = t.barycenter();
        for (const Vec2& v : t.v) EXPECT_NEAR(h.quad(v - z), 1.0, 1e-10);
        EXPECT_LE(h.quad(z - z), 1.0);
        EXPECT_LE(h.quad(0.5 * (t.v[0] + t.v[1]) - z), 1.0);
    }
}

TEST(ShapeMatrix, TransformLaw) {
    // If T' is mapped onto T by z -> A z, then H_T' = A^T H_T A.
    std::mt19937_64 rng(32);
    std::normal_distribution<double> n;
    for (int i = 0; i < 1000; ++i) {
        const Triangle t = random_triangle(rng);
        Mat2 A{n(rng), n(rng), n(rng), n(rng)};
        if (std::abs(A.det()) < 0.05) continue;
        const Triangle tp = t.mapped(A.inverse());
        const SymMat2 lhs = shape_matrix(tp);
        const SymMat2 rhs = congruence(shape_matrix(t), A);
        const double s = operator_norm(rhs);
        EXPECT_NEAR(lhs.m11, rhs.m11, 1e-10 * s);
        EXPECT_NEAR(lhs.m12, rhs.m12, 1e-10 * s);
        EXPECT_NEAR(lhs.m22, rhs.m22, 1e-10 * s);
    }
}

TEST(TriangleFromShape, Examples) {
    const Triangle eq = equilateral_triangle();
    const Triangle t0 = triangle_from_shape(SymMat2::identity(), 0.0);
    for (int k = 0; k < 3; ++k) {
        EXPECT_NEAR(t0.v[k].x, eq.v[k].x, 1e-15);
        EXPECT_NEAR(t0.v[k].y, eq.v[k].y, 1e-15);
    }
    // Rotation by 2 pi / 3 permutes the vertices.
    const Triangle t1 = triangle_from_shape(SymMat2::identity(), 2 * std::numbers::pi / 3);
    for (const Vec2& p : t1.v) {
        double best = 1e9;
        for (const Vec2& q : eq.v) best = std::min(best, norm(p - q));
        EXPECT_LT(best, 1e-14);
    }
    EXPECT_THROW(triangle_from_shape(SymMat2::diag(1, -1), 0.0), std::domain_error);
}

TEST(TriangleFromShape, RoundTrip) {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> angle(0, 2 * std::numbers::pi), u(-5, 5);
    for (int i = 0; i < 1000; ++i) {
        const SymMat2 m = random_spd(rng);
        const Triangle t = triangle_from_shape(m, angle(rng), {u(rng), u(rng)});
        EXPECT_GT(t.signed_area(), 0.0);
        const SymMat2 h = shape_matrix(t);
        const double s = operator_norm(m);
        EXPECT_NEAR(h.m11, m.m11, 1e-10 * s);
        EXPECT_NEAR(h.m12, m.m12, 1e-10 * s);
        EXPECT_NEAR(h.m22, m.m22, 1e-10 * s);
    }
}

TEST(LagrangeNodes, Examples) {
    const Triangle t{{Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}}};
    const auto p1 = lagrange_nodes(t, 1);
    ASSERT_EQ(p1.size(), 3u);
    EXPECT_EQ(p1[1], (Vec2{1, 0}));
    const auto p2 = lagrange_nodes(t, 2);
    ASSERT_EQ(p2.size(), 6u);
    EXPECT_EQ(p2[3], (Vec2{0.5, 0}));
    EXPECT_EQ(p2[4], (Vec2{0, 0.5}));
    EXPECT_EQ(p2[5], (Vec2{0.5, 0.5}));
    for (int d : {1, 2}) EXPECT_EQ(lagrange_nodes(t, d).size(), std::size_t((d + 1) * (d + 2) / 2));
    EXPECT_THROW(lagrange_nodes(t, 3), std::invalid_argument);
}

TEST(Interpolate, Examples) {
    std::mt19937_64 rng(34);
    std::uniform_real_distribution<double> u(-1, 1);
    const Triangle t = random_triangle(rng);

    // 1 + x - 2y is reproduced by P2.
    DensePoly q{1, {{1, 0, 0}, {1, 1, 0}, {-2, 0, 1}}};
    const LagrangeInterpolant iq = interpolate(t, q, 2);
    for (int i = 0; i < 20; ++i) {
        const Vec2 p{u(rng), u(rng)};
        EXPECT_NEAR(iq.value(p), q.value(p), 1e-12);
    }

    const std::array<double, 6> zeros{};
    const LagrangeInterpolant iz = interpolate(t, zeros, 2);
    EXPECT_EQ(iz.value({0.3, 0.1}), 0.0);

    // x^2 on T_eq with P1: 1/2 + x/2.
    DensePoly x2{2, {{1, 2, 0}}};
    const LagrangeInterpolant ix = interpolate(equilateral_triangle(), x2, 1);
    for (int i = 0; i < 20; ++i) {
        const Vec2 p{u(rng), u(rng)};
        EXPECT_NEAR(ix.value(p), 0.5 + 0.5 * p.x, 1e-14);
    }

    const std::array<double, 4> wrong{};
    EXPECT_THROW(interpolate(t, std::span<const double>(wrong), 2), std::invalid_argument);
}

TEST(Interpolate, ReproducesPolynomialsOfItsDegree) {
    std::mt19937_64 rng(35);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int d : {1, 2}) {
        for (int i = 0; i < 100; ++i) {
            const Triangle t = random_triangle(rng);
            const DensePoly q = random_dense(rng, d);
            const LagrangeInterpolant iq = interpolate(t, q, d);
            const Vec2 p = t.from_barycentric({0.2, 0.3, 0.5});
            EXPECT_NEAR(iq.value(p), q.value(p), 1e-11);
            const Vec2 g = iq.grad(p), gq = q.grad(p);
            EXPECT_NEAR(g.x, gq.x, 1e-10);
            EXPECT_NEAR(g.y, gq.y, 1e-10);
        }
    }
}

TEST(InterpError, Examples) {
    std::mt19937_64 rng(36);
    for (int m : {2, 3}) {
        const Triangle t = random_triangle(rng);
        EXPECT_LE(interp_error_h1(t, random_dense(rng, m - 1), m), 1e-13 * 1e3);
    }
    const DensePoly x2{2, {{1, 2, 0}}};
    EXPECT_NEAR(interp_error_h1(equilateral_triangle(), x2, 2), std::numbers::sqrt3 / 2, 1e-12);
    EXPECT_NEAR(interp_error_h1(equilateral_triangle(), Quadratic{{1, 0, 0}}, 2, triangle_rule_deg4()),
                std::numbers::sqrt3 / 2, 1e-12);
}

TEST(InterpError, ScalesWithTriangleSize) {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> us(0.1, 10);
    for (int i = 0; i < 200; ++i) {
        const Triangle t = random_triangle(rng);
        const double s = us(rng);
        const Cubic c = random_poly<3>(rng);
        const Quadratic q = random_poly<2>(rng);
        const Triangle st = t.mapped(s * Mat2::identity());
        EXPECT_LT(oracle::rel_err(interp_error_h1(st, q, 2), s * interp_error_h1(t, q, 2)), 1e-10);
        EXPECT_LT(oracle::rel_err(interp_error_h1(st, c, 3), s * s * interp_error_h1(t, c, 3)), 1e-10);
    }
}

TEST(InterpError, TranslationInvariantForHomogeneous) {
    std::mt19937_64 rng(38);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 200; ++i) {
        const Triangle t = random_triangle(rng);
        const Vec2 shift{u(rng), u(rng)};
        const Cubic c = random_poly<3>(rng);
        const Quadratic q = random_poly<2>(rng);
        const Triangle tt = t.mapped(Mat2::identity(), shift);
        EXPECT_LT(oracle::rel_err(interp_error_h1(tt, c, 3), interp_error_h1(t, c, 3)), 1e-10);
        EXPECT_LT(oracle::rel_err(interp_error_h1(tt, q, 2), interp_error_h1(t, q, 2)), 1e-10);
    }
}

TEST(InterpError, BruteForceQuadratureOracle) {
    // Midpoint rule on a fine subdivision of the reference map.
    std::mt19937_64 rng(39);
    const Triangle t = random_triangle(rng);
    const Cubic c = random_poly<3>(rng);
    const LagrangeInterpolant ic = interpolate(t, c, 2);
    const int n = 400;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; i + j < n; ++j) {
            // Upward and downward sub-triangles, sampled at centroids.
            const std::array<double, 2> up{(i + 1.0 / 3) / n, (j + 1.0 / 3) / n};
            auto sample = [&](double a, double b) {
                const Vec2 p = t.v[0] + a * (t.v[1] - t.v[0]) + b * (t.v[2] - t.v[0]);
                const Vec2 d = c.grad(p) - ic.grad(p);
                return dot(d, d);
            };
            acc += sample(up[0], up[1]);
            if (i + j + 1 < n) acc += sample((i + 2.0 / 3) / n, (j + 2.0 / 3) / n);
        }
    }
    const double mean = acc / (double(n) * n);
    EXPECT_LT(oracle::rel_err(interp_error_h1(t, c, 3), std::sqrt(mean)), 1e-5);
}

TEST(ShapeError, IsotropicPolynomialIsConstantInTheta) {
    const Quadratic r2{{1, 0, 1}};
    const double eq = interp_error_h1(equilateral_triangle(), r2, 2);
    EXPECT_LT(oracle::rel_err(sup_error_over_shape(SymMat2::identity(), r2), eq), 1e-12);
}

TEST(ShapeError, ContainsThetaZeroMember) {
    const Quadratic x2{{1, 0, 0}};
    EXPECT_GE(sup_error_over_shape(SymMat2::identity(), x2), std::numbers::sqrt3 / 2 - 1e-12);
}

TEST(ShapeError, ScalingLaw) {
    std::mt19937_64 rng(40);
    std::uniform_real_distribution<double> logt(std::log(0.01), std::log(100.0));
    for (int i = 0; i < 30; ++i) {
        const SymMat2 m = random_spd(rng);
        const double t = std::exp(logt(rng));
        const Cubic c = random_poly<3>(rng);
        const Quadratic q = random_poly<2>(rng);
        const double e3 = sup_error_over_shape(m, c), e2 = sup_error_over_shape(m, q);
        EXPECT_LE(std::abs(sup_error_over_shape(t * m, c) - std::pow(t, -1.0) * e3), 1e-8 * e3);
        EXPECT_LE(std::abs(sup_error_over_shape(t * m, q) - std::pow(t, -0.5) * e2), 1e-8 * e2);
    }
}

TEST(ShapeError, RotationEquivariance) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> angle(0, 2 * std::numbers::pi);
    for (int i = 0; i < 30; ++i) {
        const Cubic c = random_poly<3>(rng);
        const Mat2 U = Mat2::rotation(angle(rng));
        const double a = sup_error_over_shape(SymMat2::identity(), c);
        const double b = sup_error_over_shape(SymMat2::identity(), compose(c, U));
        EXPECT_LT(oracle::rel_err(b, a), 1e-8);
    }
}

TEST(ShapeError, DoublingTheScanAgrees) {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 30; ++i) {
        const SymMat2 m = random_spd(rng, 5.0);
        const Cubic c = random_poly<3>(rng);
        const Quadratic q = random_poly<2>(rng);
        EXPECT_LT(oracle::rel_err(sup_error_over_shape(m, c, 256), sup_error_over_shape(m, c, 512)), 1e-8);
        EXPECT_LT(oracle::rel_err(sup_error_over_shape(m, q, 256), sup_error_over_shape(m, q, 512)), 1e-8);
    }
}

TEST(ShapeError, NonSpdThrows) {
    EXPECT_THROW(sup_error_over_shape(SymMat2::diag(1, 0), Quadratic{{1, 0, 0}}), std::domain_error);
}

TEST(MeshError, PolynomialsOfElementDegreeAreExact) {
    std::mt19937_64 rng(43);
    const Mesh mesh = uniform_mesh({-1, 1, -1, 1}, 5);
    for (int d : {1, 2}) EXPECT_LE(mesh_error(mesh, random_dense(rng, d), d), 1e-10);
}

TEST(MeshError, SelfConvergenceOrder) {
    struct Smooth {
        double value(Vec2 p) const { return std::sin(2 * p.x) * std::cos(3 * p.y); }
        Vec2 grad(Vec2 p) const {
            return {2 * std::cos(2 * p.x) * std::cos(3 * p.y), -3 * std::sin(2 * p.x) * std::sin(3 * p.y)};
        }
    };
    for (int d : {1, 2}) {
        const double coarse = mesh_error(uniform_mesh({-1, 1, -1, 1}, 16), Smooth{}, d);
        const double fine = mesh_error(uniform_mesh({-1, 1, -1, 1}, 32), Smooth{}, d);
        const double expected = std::pow(2.0, d);
        EXPECT_NEAR(coarse / fine, expected, 0.15 * expected);
    }
}

TEST(MeshError, InvertedElementIsNamed) {
    Mesh mesh = uniform_mesh({0, 1, 0, 1}, 2);
    std::swap(mesh.triangles[3][1], mesh.triangles[3][2]);
    try {
        mesh_error(mesh, Quadratic{{1, 0, 1}}, 1);
        FAIL() << "expected an exception";
    } catch (const std::domain_error& e) {
        EXPECT_NE(std::string(e.what()).find("triangle 3"), std::string::npos);
    }
}

TEST(MeshError, DeterministicAcrossThreadCounts) {
    const Mesh mesh = uniform_mesh({-1, 1, -1, 1}, 20);
    const SyntheticFunction f;
    setenv("ANISO_THREADS", "1", 1);
    const double one = mesh_error(mesh, f, 2);
    setenv("ANISO_THREADS", "7", 1);
    const double seven = mesh_error(mesh, f, 2);
    unsetenv("ANISO_THREADS");
    EXPECT_EQ(one, seven);
}
