#include "aniso/medit.hpp"
#include "aniso/optimal_metric.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

using namespace aniso;

namespace {

std::string mesh_text(const Mesh& m) {
    std::ostringstream out;
    write_mesh(m, out);
    return out.str();
}

Mesh parse(const std::string& text, std::vector<IoWarning>* warnings = nullptr) {
    std::istringstream in(text);
    return read_mesh(in, warnings);
}

/// Uniform mesh of a random rectangle with interior vertices jittered inside their cells.
Mesh random_mesh(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-3.0, 3.0), size(0.1, 5.0), jitter(-0.3, 0.3);
    std::uniform_int_distribution<int> n(1, 9);
    const double x0 = u(rng), y0 = u(rng);
    const Rect rect{x0, x0 + size(rng), y0, y0 + size(rng)};
    const int k = n(rng);
    Mesh m = uniform_mesh(rect, k);
    const double hx = rect.width() / k, hy = rect.height() / k;
    for (std::size_t v = 0; v < m.num_vertices(); ++v)
        if (m.tags[v].is_interior()) m.vertices[v] += Vec2{jitter(rng) * hx, jitter(rng) * hy};
    return m;
}

}  // namespace

TEST(MeshFile, UniformRoundTrip) {
    const Mesh m = uniform_mesh(Rect{}, 2);
    const Mesh back = parse(mesh_text(m));
    EXPECT_EQ(back.num_vertices(), 9u);
    EXPECT_EQ(back.num_triangles(), 8u);
    EXPECT_EQ(back.vertices, m.vertices);
    EXPECT_EQ(back.triangles, m.triangles);
    EXPECT_EQ(back.tags, m.tags);
}

TEST(MeshFile, Layout) {
    const std::string text = mesh_text(uniform_mesh(Rect{0, 1, 0, 1}, 1));
    EXPECT_EQ(text,
              "MeshVersionFormatted 2\n\nDimension 2\n\nVertices\n4\n"
              "0 0 11\n1 0 12\n0 1 14\n1 1 13\n\nTriangles\n2\n1 2 4 0\n1 4 3 0\n\nEnd\n");
}

TEST(MeshFile, RandomizedByteExactRoundTrip) {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 50; ++i) {
        const Mesh m = random_mesh(rng);
        ASSERT_NO_THROW(validate_mesh(m));
        const std::string text = mesh_text(m);
        const Mesh back = parse(text);
        EXPECT_EQ(back.vertices, m.vertices);
        EXPECT_EQ(back.triangles, m.triangles);
        EXPECT_EQ(back.tags, m.tags);
        EXPECT_EQ(mesh_text(back), text);
    }
}

TEST(MeshFile, CrlfParsesIdentically) {
    const std::string text = mesh_text(uniform_mesh(Rect{}, 3));
    std::string crlf;
    for (char c : text) {
        if (c == '\n') crlf += '\r';
        crlf += c;
    }
    const Mesh a = parse(text), b = parse(crlf);
    EXPECT_EQ(a.vertices, b.vertices);
    EXPECT_EQ(a.triangles, b.triangles);
    EXPECT_EQ(a.tags, b.tags);
}

TEST(MeshFile, ZeroIndexReportsLine) {
    const std::string text =
        "MeshVersionFormatted 2\nDimension 2\nVertices\n3\n0 0 0\n1 0 0\n0 1 0\nTriangles\n1\n0 2 3 0\nEnd\n";
    try {
        parse(text);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 10);
        EXPECT_EQ(e.message(), "1-based index expected");
    }
}

TEST(MeshFile, Errors) {
    const std::string head = "MeshVersionFormatted 2\nDimension 2\nVertices\n3\n0 0 0\n1 0 0\n0 1 0\n";
    auto line_of = [&](const std::string& text) {
        try {
            parse(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return -1;
    };
    EXPECT_EQ(line_of(head + "Triangles\n1\n1 2 4 0\nEnd\n"), 10);      // index out of range
    EXPECT_EQ(line_of(head + "Triangles\n1\n1 3 2 0\nEnd\n"), 10);      // clockwise
    EXPECT_EQ(line_of(head + "Triangles\n1\n1 2 2 0\nEnd\n"), 10);      // degenerate
    EXPECT_EQ(line_of("MeshVersionFormatted 2\nDimension 3\nEnd\n"), 2);
    EXPECT_EQ(line_of("Dimension 2\nVertices\n0\nEnd\n"), 2);            // no version
    EXPECT_EQ(line_of("MeshVersionFormatted 7\nDimension 2\nEnd\n"), 1);
    EXPECT_EQ(line_of("MeshVersionFormatted 2\nDimension 2\nVertices\n2\n0 0 0\n1 x 0\nEnd\n"), 6);
    EXPECT_EQ(line_of("MeshVersionFormatted 2\nDimension 2\nVertices\n2\n0 0 0\n"), 5);  // truncated
    EXPECT_EQ(line_of("MeshVersionFormatted 2\nDimension 2\nVertices\n1\n0 nan 0\nEnd\n"), 5);
    EXPECT_EQ(line_of(head + "Vertices\n0\nEnd\n"), 8);                  // duplicate section
}

TEST(MeshFile, UnknownSectionsSkippedWithWarning) {
    const std::string text =
        "# generated elsewhere\nMeshVersionFormatted 2\nDimension 2\nVertices\n3\n0 0 11\n1 0 12\n0 1 14\n"
        "Edges\n1\n1 2 1\nCorners\n1\n1\nTriangles\n1\n1 2 3 7\nEnd\n";
    std::vector<IoWarning> warnings;
    const Mesh m = parse(text, &warnings);
    EXPECT_EQ(m.num_triangles(), 1u);
    ASSERT_EQ(warnings.size(), 2u);
    EXPECT_EQ(warnings[0].line, 9);
    EXPECT_NE(warnings[0].message.find("Edges"), std::string::npos);
    EXPECT_EQ(warnings[1].line, 12);
}

TEST(MeshFile, KeywordsAnyCaseAndUnknownRefsWarn) {
    std::vector<IoWarning> warnings;
    const Mesh m = parse("meshversionformatted 1\nDIMENSION 2\nvertices 3\n0 0 0 1 0 5 0 1 0\ntriangles 1 1 2 3 0\n",
                         &warnings);
    EXPECT_EQ(m.num_triangles(), 1u);
    EXPECT_TRUE(m.tags[1].is_interior());
    ASSERT_EQ(warnings.size(), 2u);  // ref 5 and missing End
    EXPECT_EQ(warnings[1].message, "missing End");
}

TEST(MeshFile, FileRoundTripAndMissingFile) {
    const auto path = std::filesystem::temp_directory_path() / "aniso_test_roundtrip.mesh";
    const Mesh m = uniform_mesh(Rect{-1, 2, 0, 1}, 3);
    write_mesh(m, path);
    const Mesh back = read_mesh(path);
    EXPECT_EQ(back.vertices, m.vertices);
    EXPECT_EQ(back.triangles, m.triangles);
    std::filesystem::remove(path);
    EXPECT_THROW(read_mesh(path), FileError);
    EXPECT_THROW(write_mesh(m, std::filesystem::path("/nonexistent-dir/x.mesh")), FileError);
}

TEST(MetricFile, IdentityOnNineVertices) {
    const Mesh m = uniform_mesh(Rect{}, 2);
    std::ostringstream out;
    write_metric(sample_at_vertices(m, MetricField::constant(SymMat2::identity())), out);
    std::string expected = "MeshVersionFormatted 2\n\nDimension 2\n\nSolAtVertices\n9\n1 3\n";
    for (int i = 0; i < 9; ++i) expected += "1 0 1\n";
    expected += "\nEnd\n";
    EXPECT_EQ(out.str(), expected);
}

TEST(MetricFile, SyntheticFieldRoundTripIsExact) {
    const Mesh m = uniform_mesh(Rect{}, 6);
    const auto values = sample_at_vertices(m, synthetic_metric_field(3, 2.5));
    std::ostringstream out;
    write_metric(values, out);
    std::istringstream in(out.str());
    std::vector<IoWarning> warnings;
    const auto back = read_metric(in, m, &warnings);
    EXPECT_TRUE(warnings.empty());
    EXPECT_EQ(back, values);
}

TEST(MetricFile, RandomizedByteExactRoundTrip) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> logs(-20, 20), angle(0, 3.2), logr(0, 12);
    for (int i = 0; i < 50; ++i) {
        const Mesh m = random_mesh(rng);
        std::vector<SymMat2> values;
        for (std::size_t v = 0; v < m.num_vertices(); ++v) {
            const double s = std::exp(logs(rng)), r = std::exp(logr(rng));
            values.push_back(from_eigen(Eigen2{s * r, s, angle(rng)}, s * r, s));
        }
        std::ostringstream out;
        write_metric(values, out);
        std::istringstream in(out.str());
        const auto back = read_metric(in, m);
        EXPECT_EQ(back, values);
        std::ostringstream again;
        write_metric(back, again);
        EXPECT_EQ(again.str(), out.str());
    }
}

TEST(MetricFile, NegativeEigenvalueIsWarning) {
    const Mesh m = uniform_mesh(Rect{}, 1);
    const std::string text =
        "MeshVersionFormatted 2\nDimension 2\nSolAtVertices\n4\n1 3\n1 0 1\n1 2 1\n1 0 1\n1 0 0\nEnd\n";
    std::istringstream in(text);
    std::vector<IoWarning> warnings;
    const auto values = read_metric(in, m, &warnings);
    EXPECT_EQ(values.size(), 4u);
    ASSERT_EQ(warnings.size(), 2u);
    EXPECT_EQ(warnings[0].line, 7);
    EXPECT_EQ(warnings[1].line, 9);
}

TEST(MetricFile, CountMismatchAndBadType) {
    const Mesh m = uniform_mesh(Rect{}, 1);
    auto fails = [&](const std::string& text) {
        std::istringstream in(text);
        EXPECT_THROW(read_metric(in, m), ParseError) << text;
    };
    fails("MeshVersionFormatted 2\nDimension 2\nSolAtVertices\n3\n1 3\n1 0 1\n1 0 1\n1 0 1\nEnd\n");
    fails("MeshVersionFormatted 2\nDimension 2\nSolAtVertices\n4\n1 1\n1\n1\n1\n1\nEnd\n");
    fails("MeshVersionFormatted 2\nDimension 2\nEnd\n");
}
