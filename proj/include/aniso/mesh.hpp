#pragma once

/**
 * @file mesh.hpp
 * @brief Triangle meshes of axis-aligned rectangles with boundary tags.
 *
 * Boundary segments of a rectangle are numbered counterclockwise from the
 * bottom side: 0 bottom (y = ymin), 1 right, 2 top, 3 left. Corner k is the
 * start point of segment k, so it lies on segments k and (k + 3) % 4.
 */

#include "aniso/vec2.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <utility>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace aniso {

struct Rect {
    double xmin = -1.0, xmax = 1.0;
    double ymin = -1.0, ymax = 1.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
    friend bool operator==(const Rect&, const Rect&) = default;

    Vec2 corner(int k) const {
        switch (k & 3) {
        case 0: return {xmin, ymin};
        case 1: return {xmax, ymin};
        case 2: return {xmax, ymax};
        default: return {xmin, ymax};
        }
    }
};

struct VertexTag {
    enum class Kind { interior, segment, corner };
    Kind kind = Kind::interior;
    int id = 0;  ///< segment or corner number

    static constexpr VertexTag interior() { return {}; }
    static constexpr VertexTag segment(int s) { return {Kind::segment, s}; }
    static constexpr VertexTag corner(int c) { return {Kind::corner, c}; }

    bool is_interior() const { return kind == Kind::interior; }
    bool is_corner() const { return kind == Kind::corner; }
    bool on_segment(int s) const {
        if (kind == Kind::segment) return id == s;
        if (kind == Kind::corner) return id == s || (id + 3) % 4 == s;
        return false;
    }

    /// Medit vertex reference: 0 interior, 1..4 segments, 11..14 corners.
    int medit_ref() const {
        switch (kind) {
        case Kind::segment: return id + 1;
        case Kind::corner: return id + 11;
        default: return 0;
        }
    }
    static VertexTag from_medit_ref(int ref) {
        if (ref >= 1 && ref <= 4) return segment(ref - 1);
        if (ref >= 11 && ref <= 14) return corner(ref - 11);
        return interior();
    }

    friend bool operator==(const VertexTag&, const VertexTag&) = default;
};

/// Segment shared by two boundary tags, or -1.
inline int common_segment(const VertexTag& a, const VertexTag& b) {
    for (int s = 0; s < 4; ++s)
        if (a.on_segment(s) && b.on_segment(s)) return s;
    return -1;
}

struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  ///< counterclockwise
    std::vector<VertexTag> tags;

    std::size_t num_vertices() const { return vertices.size(); }
    std::size_t num_triangles() const { return triangles.size(); }

    double signed_area(std::size_t t) const {
        const auto& [i, j, k] = triangles[t];
        return 0.5 * cross(vertices[j] - vertices[i], vertices[k] - vertices[i]);
    }

    friend bool operator==(const Mesh&, const Mesh&) = default;
};

/// Structured n x n grid of the rectangle, each cell split along its rising diagonal.
inline Mesh uniform_mesh(const Rect& rect, int n) {
    if (n < 1) throw std::invalid_argument("uniform_mesh: n must be at least 1");
    Mesh mesh;
    const int side = n + 1;
    mesh.vertices.reserve(static_cast<std::size_t>(side * side));
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            const double x = i == n ? rect.xmax : rect.xmin + rect.width() * i / n;
            const double y = j == n ? rect.ymax : rect.ymin + rect.height() * j / n;
            mesh.vertices.push_back({x, y});
            const bool left = i == 0, right = i == n, bottom = j == 0, top = j == n;
            VertexTag tag;
            if (bottom && left) tag = VertexTag::corner(0);
            else if (bottom && right) tag = VertexTag::corner(1);
            else if (top && right) tag = VertexTag::corner(2);
            else if (top && left) tag = VertexTag::corner(3);
            else if (bottom) tag = VertexTag::segment(0);
            else if (right) tag = VertexTag::segment(1);
            else if (top) tag = VertexTag::segment(2);
            else if (left) tag = VertexTag::segment(3);
            mesh.tags.push_back(tag);
        }
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = j * side + i, v10 = v00 + 1, v01 = v00 + side, v11 = v01 + 1;
            mesh.triangles.push_back({v00, v10, v11});
            mesh.triangles.push_back({v00, v11, v01});
        }
    }
    return mesh;
}

/// Bounding rectangle of the vertices.
inline Rect bounding_rect(const Mesh& mesh) {
    if (mesh.vertices.empty()) throw std::invalid_argument("bounding_rect: empty mesh");
    Rect r{mesh.vertices[0].x, mesh.vertices[0].x, mesh.vertices[0].y, mesh.vertices[0].y};
    for (const Vec2& p : mesh.vertices) {
        r.xmin = std::min(r.xmin, p.x);
        r.xmax = std::max(r.xmax, p.x);
        r.ymin = std::min(r.ymin, p.y);
        r.ymax = std::max(r.ymax, p.y);
    }
    return r;
}

inline bool on_rect_segment(const Rect& rect, Vec2 p, int s) {
    const double tol = 1e-12 * std::max(rect.width(), rect.height());
    switch (s) {
    case 0: return std::abs(p.y - rect.ymin) <= tol && p.x >= rect.xmin - tol && p.x <= rect.xmax + tol;
    case 1: return std::abs(p.x - rect.xmax) <= tol && p.y >= rect.ymin - tol && p.y <= rect.ymax + tol;
    case 2: return std::abs(p.y - rect.ymax) <= tol && p.x >= rect.xmin - tol && p.x <= rect.xmax + tol;
    default: return std::abs(p.x - rect.xmin) <= tol && p.y >= rect.ymin - tol && p.y <= rect.ymax + tol;
    }
}

/**
 * Checks index ranges, positive orientation and edge conformity (each
 * directed edge used once, each undirected edge by at most two triangles).
 * With a rectangle, also checks that tagged vertices sit on their side and
 * that boundary edges join vertices of a common side. Throws
 * std::invalid_argument naming the offending element.
 */
inline void validate_mesh(const Mesh& mesh, const Rect* rect = nullptr) {
    const auto nv = static_cast<int>(mesh.vertices.size());
    if (mesh.tags.size() != mesh.vertices.size())
        throw std::invalid_argument("mesh: tag count does not match vertex count");
    std::map<std::pair<int, int>, int> directed;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int v : tri)
            if (v < 0 || v >= nv)
                throw std::invalid_argument("mesh: triangle " + std::to_string(t) + " has vertex index out of range");
        if (!(mesh.signed_area(t) > 0.0))
            throw std::invalid_argument("mesh: triangle " + std::to_string(t) + " is inverted or degenerate");
        for (int e = 0; e < 3; ++e) {
            const std::pair key{tri[e], tri[(e + 1) % 3]};
            if (++directed[key] > 1)
                throw std::invalid_argument("mesh: triangle " + std::to_string(t) + " repeats a directed edge");
        }
    }
    if (!rect) return;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        const VertexTag& tag = mesh.tags[v];
        bool ok = true;
        if (tag.is_corner()) ok = mesh.vertices[v] == rect->corner(tag.id);
        else if (!tag.is_interior()) ok = on_rect_segment(*rect, mesh.vertices[v], tag.id);
        if (!ok) throw std::invalid_argument("mesh: vertex " + std::to_string(v) + " is off its tagged boundary");
    }
    for (const auto& [edge, count] : directed) {
        if (directed.count({edge.second, edge.first})) continue;
        if (common_segment(mesh.tags[edge.first], mesh.tags[edge.second]) < 0)
            throw std::invalid_argument("mesh: boundary edge (" + std::to_string(edge.first) + ", " +
                                        std::to_string(edge.second) + ") is not on a tagged side");
    }
}

} // namespace aniso
