#pragma once

/**
 * @file medit.hpp
 * @brief ASCII Medit mesh (.mesh) and solution (.sol) files.
 *
 * Only 2-D files are handled. Writers use LF endings and 17 significant
 * digits, so read(write(x)) == x and write(read(write(x))) == write(x) byte
 * for byte. Readers accept CRLF, '#' comments and keywords in any case, and
 * skip unknown sections with a warning.
 */

#include "aniso/detail/format.hpp"
#include "aniso/mesh.hpp"
#include "aniso/spd2.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aniso {

/// Malformed input; what() reads "<source>:<line>: <message>".
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, int line, const std::string& message)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line), message_(message) {}
    int line() const { return line_; }
    const std::string& message() const { return message_; }

private:
    int line_;
    std::string message_;
};

/// A file could not be opened or written.
class FileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct IoWarning {
    int line = 0;
    std::string message;
};

namespace detail {

struct Token {
    std::string text;
    int line = 0;
};

class TokenStream {
public:
    TokenStream(std::istream& in, std::string source) : source_(std::move(source)) {
        std::string line;
        int number = 0;
        while (std::getline(in, line)) {
            ++number;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            std::istringstream words(line);
            std::string w;
            while (words >> w) tokens_.push_back({w, number});
        }
        last_line_ = number;
    }

    bool done() const { return pos_ >= tokens_.size(); }
    const Token& peek() const { return tokens_[pos_]; }
    int line() const { return done() ? last_line_ : peek().line; }
    const std::string& source() const { return source_; }

    [[noreturn]] void fail(int line, const std::string& msg) const { throw ParseError(source_, line, msg); }

    Token next(const char* what) {
        if (done()) fail(last_line_, std::string("unexpected end of file, expected ") + what);
        return tokens_[pos_++];
    }

    double number() {
        const Token t = next("a number");
        double v = 0.0;
        const char* end = t.text.data() + t.text.size();
        auto [p, ec] = std::from_chars(t.text.data(), end, v);
        if (ec != std::errc() || p != end) fail(t.line, "expected a number, got '" + t.text + "'");
        if (!std::isfinite(v)) fail(t.line, "non-finite number '" + t.text + "'");
        return v;
    }

    long integer(const char* what) {
        const Token t = next(what);
        long v = 0;
        const char* end = t.text.data() + t.text.size();
        auto [p, ec] = std::from_chars(t.text.data(), end, v);
        if (ec != std::errc() || p != end) fail(t.line, std::string("expected ") + what + ", got '" + t.text + "'");
        return v;
    }

    long count(const char* section) {
        const int at = line();
        const long n = integer("an entry count");
        if (n < 0) fail(at, std::string("negative entry count in ") + section);
        return n;
    }

    /// Skips numeric tokens up to the next keyword.
    void skip_section() {
        while (!done() && !is_keyword(peek().text)) ++pos_;
    }

    static bool is_keyword(const std::string& s) { return !s.empty() && std::isalpha(static_cast<unsigned char>(s[0])); }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    int last_line_ = 0;
    std::string source_;
};

inline bool keyword_is(const std::string& token, std::string_view keyword) {
    if (token.size() != keyword.size()) return false;
    for (std::size_t i = 0; i < token.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(token[i])) != std::tolower(static_cast<unsigned char>(keyword[i])))
            return false;
    return true;
}

inline void read_header(TokenStream& ts, const Token& first, bool& have_version, bool& have_dim) {
    if (keyword_is(first.text, "MeshVersionFormatted")) {
        const int at = ts.line();
        const long v = ts.integer("a format version");
        if (v < 1 || v > 2) ts.fail(at, "unsupported MeshVersionFormatted " + std::to_string(v));
        have_version = true;
    } else {
        const int at = ts.line();
        const long d = ts.integer("a dimension");
        if (d != 2) ts.fail(at, "only Dimension 2 is supported, got " + std::to_string(d));
        have_dim = true;
    }
}

inline void expect_header(const TokenStream& ts, bool have_version, bool have_dim, int line) {
    if (!have_version) ts.fail(line, "malformed header: MeshVersionFormatted missing");
    if (!have_dim) ts.fail(line, "malformed header: Dimension missing");
}

template <class Fn>
void with_input_file(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open " + path.string() + " for reading");
    fn(in);
}

template <class Fn>
void with_output_file(const std::filesystem::path& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot open " + path.string() + " for writing");
    fn(out);
    out.flush();
    if (!out) throw FileError("error while writing " + path.string());
}

} // namespace detail

inline void write_mesh(const Mesh& mesh, std::ostream& out) {
    out << "MeshVersionFormatted 2\n\nDimension 2\n\nVertices\n" << mesh.num_vertices() << '\n';
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
        out << detail::format_g17(mesh.vertices[v].x) << ' ' << detail::format_g17(mesh.vertices[v].y) << ' '
            << mesh.tags[v].medit_ref() << '\n';
    out << "\nTriangles\n" << mesh.num_triangles() << '\n';
    for (const auto& t : mesh.triangles) out << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << " 0\n";
    out << "\nEnd\n";
}

/**
 * Reads a Medit mesh. Vertex references map to tags (0 interior, 1..4
 * segments, 11..14 corners); any other reference becomes interior with a
 * warning. Triangle references are ignored.
 */
inline Mesh read_mesh(std::istream& in, std::vector<IoWarning>* warnings = nullptr,
                      const std::string& source = "<input>") {
    detail::TokenStream ts(in, source);
    auto warn = [&](int line, std::string msg) {
        if (warnings) warnings->push_back({line, std::move(msg)});
    };
    Mesh mesh;
    std::vector<int> tri_lines;
    bool have_version = false, have_dim = false, have_vertices = false, have_triangles = false, ended = false;
    while (!ts.done()) {
        const detail::Token kw = ts.next("a keyword");
        if (!detail::TokenStream::is_keyword(kw.text)) ts.fail(kw.line, "expected a keyword, got '" + kw.text + "'");
        if (detail::keyword_is(kw.text, "MeshVersionFormatted") || detail::keyword_is(kw.text, "Dimension")) {
            detail::read_header(ts, kw, have_version, have_dim);
            continue;
        }
        detail::expect_header(ts, have_version, have_dim, kw.line);
        if (detail::keyword_is(kw.text, "End")) {
            ended = true;
            break;
        }
        if (detail::keyword_is(kw.text, "Vertices")) {
            if (have_vertices) ts.fail(kw.line, "duplicate Vertices section");
            have_vertices = true;
            const long n = ts.count("Vertices");
            for (long i = 0; i < n; ++i) {
                const double x = ts.number(), y = ts.number();
                const int at = ts.line();
                const long ref = ts.integer("a vertex reference");
                VertexTag tag = VertexTag::from_medit_ref(static_cast<int>(ref));
                if (ref != 0 && tag.is_interior()) warn(at, "vertex reference " + std::to_string(ref) + " read as interior");
                mesh.vertices.push_back({x, y});
                mesh.tags.push_back(tag);
            }
        } else if (detail::keyword_is(kw.text, "Triangles")) {
            if (have_triangles) ts.fail(kw.line, "duplicate Triangles section");
            have_triangles = true;
            const long n = ts.count("Triangles");
            for (long i = 0; i < n; ++i) {
                std::array<int, 3> tri{};
                const int at = ts.line();
                for (int& v : tri) {
                    const long idx = ts.integer("a vertex index");
                    if (idx == 0) ts.fail(at, "1-based index expected");
                    if (idx < 0 || idx > 2147483647L) ts.fail(at, "vertex index " + std::to_string(idx) + " out of range");
                    v = static_cast<int>(idx - 1);
                }
                ts.integer("a triangle reference");
                mesh.triangles.push_back(tri);
                tri_lines.push_back(at);
            }
        } else {
            warn(kw.line, "unknown section '" + kw.text + "' skipped");
            ts.skip_section();
        }
    }
    if (!have_version || !have_dim) detail::expect_header(ts, have_version, have_dim, ts.line());
    if (!ended) warn(ts.line(), "missing End");
    const auto nv = static_cast<int>(mesh.vertices.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        for (int v : mesh.triangles[t])
            if (v >= nv)
                ts.fail(tri_lines[t], "vertex index " + std::to_string(v + 1) + " out of range (" + std::to_string(nv) +
                                          " vertices)");
        if (!(mesh.signed_area(t) > 0.0)) ts.fail(tri_lines[t], "non-positive triangle area");
    }
    return mesh;
}

inline void write_mesh(const Mesh& mesh, const std::filesystem::path& path) {
    detail::with_output_file(path, [&](std::ostream& out) { write_mesh(mesh, out); });
}

inline Mesh read_mesh(const std::filesystem::path& path, std::vector<IoWarning>* warnings = nullptr) {
    Mesh mesh;
    detail::with_input_file(path, [&](std::istream& in) { mesh = read_mesh(in, warnings, path.string()); });
    return mesh;
}

/// One tensor per vertex, in (m11, m12, m22) order.
inline void write_metric(const std::vector<SymMat2>& values, std::ostream& out) {
    out << "MeshVersionFormatted 2\n\nDimension 2\n\nSolAtVertices\n" << values.size() << "\n1 3\n";
    for (const SymMat2& m : values)
        out << detail::format_g17(m.m11) << ' ' << detail::format_g17(m.m12) << ' '
            << detail::format_g17(m.m22) << '\n';
    out << "\nEnd\n";
}

/**
 * Reads a solution with one symmetric tensor per vertex of `mesh`. Tensors
 * that are not positive definite are kept and reported as warnings.
 */
inline std::vector<SymMat2> read_metric(std::istream& in, const Mesh& mesh, std::vector<IoWarning>* warnings = nullptr,
                                        const std::string& source = "<input>") {
    detail::TokenStream ts(in, source);
    auto warn = [&](int line, std::string msg) {
        if (warnings) warnings->push_back({line, std::move(msg)});
    };
    std::vector<SymMat2> values;
    bool have_version = false, have_dim = false, have_sol = false, ended = false;
    while (!ts.done()) {
        const detail::Token kw = ts.next("a keyword");
        if (!detail::TokenStream::is_keyword(kw.text)) ts.fail(kw.line, "expected a keyword, got '" + kw.text + "'");
        if (detail::keyword_is(kw.text, "MeshVersionFormatted") || detail::keyword_is(kw.text, "Dimension")) {
            detail::read_header(ts, kw, have_version, have_dim);
            continue;
        }
        detail::expect_header(ts, have_version, have_dim, kw.line);
        if (detail::keyword_is(kw.text, "End")) {
            ended = true;
            break;
        }
        if (detail::keyword_is(kw.text, "SolAtVertices")) {
            if (have_sol) ts.fail(kw.line, "duplicate SolAtVertices section");
            have_sol = true;
            const long n = ts.count("SolAtVertices");
            if (n != static_cast<long>(mesh.num_vertices()))
                ts.fail(kw.line, "solution has " + std::to_string(n) + " entries but the mesh has " +
                                     std::to_string(mesh.num_vertices()) + " vertices");
            const int at = ts.line();
            const long fields = ts.integer("a field count");
            const long type = ts.integer("a field type");
            if (fields != 1 || type != 3)
                ts.fail(at, "expected one symmetric tensor field ('1 3'), got '" + std::to_string(fields) + " " +
                                std::to_string(type) + "'");
            for (long i = 0; i < n; ++i) {
                const int line = ts.line();
                SymMat2 m;
                m.m11 = ts.number();
                m.m12 = ts.number();
                m.m22 = ts.number();
                if (!(m.m11 > 0.0 && m.det() > 0.0))
                    warn(line, "tensor " + std::to_string(i + 1) + " is not positive definite");
                values.push_back(m);
            }
        } else {
            warn(kw.line, "unknown section '" + kw.text + "' skipped");
            ts.skip_section();
        }
    }
    if (!have_version || !have_dim) detail::expect_header(ts, have_version, have_dim, ts.line());
    if (!have_sol) ts.fail(ts.line(), "SolAtVertices section missing");
    if (!ended) warn(ts.line(), "missing End");
    return values;
}

inline void write_metric(const std::vector<SymMat2>& values, const std::filesystem::path& path) {
    detail::with_output_file(path, [&](std::ostream& out) { write_metric(values, out); });
}

inline std::vector<SymMat2> read_metric(const std::filesystem::path& path, const Mesh& mesh,
                                        std::vector<IoWarning>* warnings = nullptr) {
    std::vector<SymMat2> values;
    detail::with_input_file(path, [&](std::istream& in) { values = read_metric(in, mesh, warnings, path.string()); });
    return values;
}

/// The field sampled at every vertex, in vertex order.
template <class Field>
std::vector<SymMat2> sample_at_vertices(const Mesh& mesh, const Field& field) {
    std::vector<SymMat2> out;
    out.reserve(mesh.num_vertices());
    for (Vec2 p : mesh.vertices) out.push_back(field(p));
    return out;
}

} // namespace aniso
