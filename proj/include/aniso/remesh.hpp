#pragma once

/**
 * @file remesh.hpp
 * @brief Metric-driven local remeshing of rectangle meshes: edge split,
 *        collapse and flip plus Laplacian smoothing, and a search on the
 *        metric scale that hits a prescribed triangle count.
 *
 * Target: every edge has metric length close to 1. Edges longer than sqrt(2)
 * are split, edges shorter than 1/sqrt(2) are collapsed. Each sub-step works
 * in batches of non-interfering operations, and adjacency is rebuilt between
 * batches, so the result depends only on the input and the field.
 */

#include "aniso/detail/parallel.hpp"
#include "aniso/fem_error.hpp"
#include "aniso/mesh.hpp"
#include "aniso/optimal_metric.hpp"
#include "aniso/spd2.hpp"
#include "aniso/vec2.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace aniso {

inline constexpr double kSplitLength = std::numbers::sqrt2;
inline constexpr double kCollapseLength = 1.0 / std::numbers::sqrt2;

namespace detail {

inline std::array<Vec2, 2> edge_gauss_points(Vec2 p, Vec2 q) {
    constexpr double g = 0.5 / std::numbers::sqrt3;
    return {p + (0.5 - g) * (q - p), p + (0.5 + g) * (q - p)};
}

} // namespace detail

/// Length of [p, q] under H: mean of sqrt(e^T H(x) e) over the two Gauss points x of the segment.
template <class Field>
double metric_edge_length(Vec2 p, Vec2 q, const Field& field) {
    const Vec2 e = q - p;
    const auto g = detail::edge_gauss_points(p, q);
    return 0.5 * (std::sqrt(field(g[0]).quad(e)) + std::sqrt(field(g[1]).quad(e)));
}

/// Memoizes field values by exact coordinates. Not thread-safe; prefetch() fans out evaluation.
class FieldCache {
public:
    explicit FieldCache(const MetricField& field) : field_(field) {}

    SymMat2 operator()(Vec2 z) const {
        const Key k = key(z);
        auto it = values_.find(k);
        if (it != values_.end()) return it->second;
        const SymMat2 v = field_(z);
        values_.emplace(k, v);
        return v;
    }

    /// Evaluates the missing points concurrently, then stores them in order.
    void prefetch(const std::vector<Vec2>& points) const {
        std::vector<Vec2> missing;
        for (Vec2 p : points)
            if (!values_.count(key(p))) missing.push_back(p);
        std::vector<SymMat2> out(missing.size());
        detail::parallel_for(missing.size(), [&](std::size_t i) { out[i] = field_(missing[i]); });
        for (std::size_t i = 0; i < missing.size(); ++i) values_.emplace(key(missing[i]), out[i]);
    }

    /// Composite version of metric_edge_length over `pieces` equal sub-segments.
    double length(Vec2 p, Vec2 q, int pieces = 1) const {
        double sum = 0.0;
        for (int k = 0; k < pieces; ++k)
            sum += metric_edge_length(p + (double(k) / pieces) * (q - p), p + (double(k + 1) / pieces) * (q - p), *this);
        return sum;
    }

    static void append_points(Vec2 p, Vec2 q, int pieces, std::vector<Vec2>& out) {
        for (int k = 0; k < pieces; ++k) {
            const auto g = detail::edge_gauss_points(p + (double(k) / pieces) * (q - p),
                                                     p + (double(k + 1) / pieces) * (q - p));
            out.push_back(g[0]);
            out.push_back(g[1]);
        }
    }

private:
    using Key = std::pair<std::uint64_t, std::uint64_t>;
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return std::hash<std::uint64_t>{}(k.first * 0x9E3779B97F4A7C15ull ^ k.second);
        }
    };
    static Key key(Vec2 z) { return {std::bit_cast<std::uint64_t>(z.x), std::bit_cast<std::uint64_t>(z.y)}; }

    const MetricField& field_;
    mutable std::unordered_map<Key, SymMat2, KeyHash> values_;
};

struct AdaptOptions {
    int max_passes = 60;
    /// Split batches per pass; collapses and flips run in between.
    int split_batches = 2;
    int smoothing_sweeps = 2;
    double smoothing_step = 0.5;
    /// Minimum gain in |log L| for a flip, so that ties do not flip back and forth.
    double flip_hysteresis = 0.02;
    /// Collapses may not create triangles below this metric quality unless the
    /// removed vertex already had one.
    double min_quality = 0.3;
    /// Splits may not create triangles below this metric quality.
    double split_quality_floor = 1e-3;
    /// Sub-segments for the composite metric length used by the remesher.
    int length_pieces = 4;
    /// Smoothing skips moves shorter than this metric length.
    double min_move = 0.02;
    /// Run validate_mesh after every pass.
    bool check_each_pass = false;
};

struct AdaptStats {
    int passes = 0;
    int splits = 0;
    int collapses = 0;
    int flips = 0;
    int smoothing_moves = 0;
    bool converged = false;  ///< a pass ended with no split, collapse or flip
};

namespace detail {

struct Edge {
    int a = 0, b = 0;      ///< a < b
    int t0 = -1, t1 = -1;  ///< adjacent triangles; t1 < 0 on the boundary
};

class Remesher {
public:
    Remesher(Mesh mesh, const Rect& rect, const FieldCache& field, const AdaptOptions& opts)
        : m_(std::move(mesh)), rect_(rect), field_(field), opts_(opts) {}

    AdaptStats run() {
        AdaptStats stats;
        for (int pass = 0; pass < opts_.max_passes; ++pass) {
            const int s = split_phase(), c = collapse_phase(), f = flip_phase();
            stats.smoothing_moves += smooth_phase();
            stats.splits += s;
            stats.collapses += c;
            stats.flips += f;
            stats.passes = pass + 1;
            if (opts_.check_each_pass) validate_mesh(m_, &rect_);
            if (s + c + f == 0) {
                stats.converged = true;
                break;
            }
        }
        return stats;
    }

    Mesh take() { return std::move(m_); }

private:
    Mesh m_;
    Rect rect_;
    const FieldCache& field_;
    AdaptOptions opts_;

    std::vector<Edge> edges_;
    std::vector<std::vector<int>> vert_tris_;

    double length(Vec2 p, Vec2 q) const { return field_.length(p, q, opts_.length_pieces); }
    double length(int a, int b) const { return length(m_.vertices[a], m_.vertices[b]); }

    void build_adjacency() {
        struct Half {
            int lo, hi, tri;
        };
        std::vector<Half> halves;
        halves.reserve(m_.triangles.size() * 3);
        vert_tris_.assign(m_.vertices.size(), {});
        for (int t = 0; t < static_cast<int>(m_.triangles.size()); ++t) {
            const auto& tri = m_.triangles[t];
            for (int k = 0; k < 3; ++k) {
                const int u = tri[k], v = tri[(k + 1) % 3];
                halves.push_back({std::min(u, v), std::max(u, v), t});
                vert_tris_[u].push_back(t);
            }
        }
        std::sort(halves.begin(), halves.end(), [](const Half& l, const Half& r) {
            return std::tie(l.lo, l.hi, l.tri) < std::tie(r.lo, r.hi, r.tri);
        });
        edges_.clear();
        for (std::size_t i = 0; i < halves.size(); ++i) {
            if (i + 1 < halves.size() && halves[i + 1].lo == halves[i].lo && halves[i + 1].hi == halves[i].hi) {
                edges_.push_back({halves[i].lo, halves[i].hi, halves[i].tri, halves[i + 1].tri});
                ++i;
            } else {
                edges_.push_back({halves[i].lo, halves[i].hi, halves[i].tri, -1});
            }
        }
    }

    void prefetch_edges() {
        std::vector<Vec2> pts;
        pts.reserve(edges_.size() * 2);
        for (const Edge& e : edges_) FieldCache::append_points(m_.vertices[e.a], m_.vertices[e.b], opts_.length_pieces, pts);
        field_.prefetch(pts);
    }

    /// Vertex of triangle t that is neither u nor v.
    int opposite(int t, int u, int v) const {
        for (int w : m_.triangles[t])
            if (w != u && w != v) return w;
        return -1;
    }

    std::vector<int> ring(int v) const {
        std::vector<int> r;
        for (int t : vert_tris_[v])
            for (int w : m_.triangles[t])
                if (w != v) r.push_back(w);
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        return r;
    }

    static double tri_area(Vec2 p, Vec2 q, Vec2 r) { return 0.5 * cross(q - p, r - p); }

    /// Mean-ratio quality of (p, q, r) measured in the constant metric h: 1 for a
    /// metric-equilateral triangle, 0 when degenerate, negative when inverted.
    static double quality(Vec2 p, Vec2 q, Vec2 r, const SymMat2& h) {
        const double sum = h.quad(q - p) + h.quad(r - q) + h.quad(p - r);
        if (!(sum > 0.0)) return 0.0;
        return 4.0 * std::numbers::sqrt3 * tri_area(p, q, r) * std::sqrt(std::max(h.det(), 0.0)) / sum;
    }

    double min_quality(const std::vector<int>& tris, const SymMat2& h) const {
        double q = 1.0;
        for (int t : tris) {
            const auto& tri = m_.triangles[t];
            q = std::min(q, quality(m_.vertices[tri[0]], m_.vertices[tri[1]], m_.vertices[tri[2]], h));
        }
        return q;
    }

    static bool healthy(Vec2 p, Vec2 q, Vec2 r) {
        return !is_degenerate(Triangle{{p, q, r}}) && tri_area(p, q, r) > 0.0;
    }

    /// Fraction along p -> q where the metric length is split in half, with the
    /// length density interpolated geometrically between the endpoints.
    double metric_midpoint_fraction(Vec2 p, Vec2 q) const {
        const Vec2 e = q - p;
        const double lp = std::sqrt(field_(p).quad(e)), lq = std::sqrt(field_(q).quad(e));
        if (!(lp > 0.0) || !(lq > 0.0)) return 0.5;
        const double ratio = lq / lp;
        if (std::abs(ratio - 1.0) < 1e-9) return 0.5;
        const double t = std::log(0.5 * (1.0 + ratio)) / std::log(ratio);
        return std::clamp(t, 0.25, 0.75);
    }

    Vec2 snap(Vec2 p, int segment) const {
        switch (segment) {
        case 0: p.y = rect_.ymin; break;
        case 1: p.x = rect_.xmax; break;
        case 2: p.y = rect_.ymax; break;
        default: p.x = rect_.xmin; break;
        }
        return p;
    }

    int split_phase() {
        int total = 0;
        for (int batch = 0; batch < opts_.split_batches; ++batch) {
            build_adjacency();
            prefetch_edges();
            std::vector<std::pair<double, int>> cand;
            for (int i = 0; i < static_cast<int>(edges_.size()); ++i) {
                const double l = length(edges_[i].a, edges_[i].b);
                if (l > kSplitLength) cand.push_back({-l, i});
            }
            if (cand.empty()) break;
            std::sort(cand.begin(), cand.end());
            std::vector<char> used(m_.triangles.size(), 0);
            int done = 0;
            for (const auto& [neg, i] : cand) {
                const Edge e = edges_[i];
                if (used[e.t0] || (e.t1 >= 0 && used[e.t1])) continue;
                if (!split_is_healthy(e)) continue;
                used[e.t0] = 1;
                if (e.t1 >= 0) used[e.t1] = 1;
                apply_split(e);
                ++done;
            }
            total += done;
        }
        return total;
    }

    Vec2 split_point(const Edge& e) const {
        const Vec2 p = m_.vertices[e.a], q = m_.vertices[e.b];
        const Vec2 mid = p + metric_midpoint_fraction(p, q) * (q - p);
        return e.t1 < 0 ? snap(mid, common_segment(m_.tags[e.a], m_.tags[e.b])) : mid;
    }

    bool split_is_healthy(const Edge& e) const {
        const Vec2 m = split_point(e);
        const SymMat2 h = field_(m);
        const Vec2 p = m_.vertices[e.a], q = m_.vertices[e.b];
        for (int t : {e.t0, e.t1}) {
            if (t < 0) continue;
            Vec2 c = m_.vertices[opposite(t, e.a, e.b)];
            // Children are (p, m, c) and (m, q, c) when c lies left of p -> q.
            Vec2 pp = p, qq = q;
            if (tri_area(p, q, c) < 0.0) std::swap(pp, qq);
            if (!healthy(pp, m, c) || !healthy(m, qq, c)) return false;
            if (quality(pp, m, c, h) < opts_.split_quality_floor || quality(m, qq, c, h) < opts_.split_quality_floor)
                return false;
        }
        return true;
    }

    void apply_split(const Edge& e) {
        const Vec2 mid = split_point(e);
        const VertexTag tag =
            e.t1 < 0 ? VertexTag::segment(common_segment(m_.tags[e.a], m_.tags[e.b])) : VertexTag::interior();
        const int m = static_cast<int>(m_.vertices.size());
        m_.vertices.push_back(mid);
        m_.tags.push_back(tag);
        for (int t : {e.t0, e.t1}) {
            if (t < 0) continue;
            // Rotate so the split edge is (tri[0], tri[1]).
            auto tri = m_.triangles[t];
            while (!((tri[0] == e.a && tri[1] == e.b) || (tri[0] == e.b && tri[1] == e.a)))
                std::rotate(tri.begin(), tri.begin() + 1, tri.end());
            m_.triangles[t] = {tri[0], m, tri[2]};
            m_.triangles.push_back({m, tri[1], tri[2]});
        }
    }

    bool may_remove(int a, int b, const Edge& e) const {
        const VertexTag& ta = m_.tags[a];
        const VertexTag& tb = m_.tags[b];
        if (ta.is_corner()) return false;
        if (ta.is_interior()) return tb.is_interior();
        return e.t1 < 0 && tb.on_segment(ta.id);
    }

    /// Checks for collapsing a onto b; returns the longest new metric edge, or a negative value if rejected.
    double collapse_score(int a, int b, const Edge& e, const std::vector<int>& ring_a) const {
        if (!may_remove(a, b, e)) return -1.0;
        const std::vector<int> ring_b = ring(b);
        std::vector<int> common;
        std::set_intersection(ring_a.begin(), ring_a.end(), ring_b.begin(), ring_b.end(), std::back_inserter(common));
        if (common.size() != (e.t1 < 0 ? 1u : 2u)) return -1.0;
        const Vec2 pb = m_.vertices[b];
        const SymMat2 h = field_(pb);
        const double before = min_quality(vert_tris_[a], h);
        for (int t : vert_tris_[a]) {
            auto tri = m_.triangles[t];
            if (std::find(tri.begin(), tri.end(), b) != tri.end()) continue;
            for (int& v : tri)
                if (v == a) v = b;
            const Vec2 p0 = m_.vertices[tri[0]], p1 = m_.vertices[tri[1]], p2 = m_.vertices[tri[2]];
            if (!healthy(p0, p1, p2)) return -1.0;
            if (quality(p0, p1, p2, h) < std::min(opts_.min_quality, before)) return -1.0;
        }
        double worst = 0.0;
        for (int w : ring_a) {
            if (w == b) continue;
            const double l = length(pb, m_.vertices[w]);
            if (l > kSplitLength) return -1.0;
            worst = std::max(worst, l);
        }
        return worst;
    }

    int collapse_phase() {
        int total = 0;
        for (int batch = 0; batch < 64; ++batch) {
            build_adjacency();
            prefetch_edges();
            std::vector<std::pair<double, int>> cand;
            for (int i = 0; i < static_cast<int>(edges_.size()); ++i) {
                const double l = length(edges_[i].a, edges_[i].b);
                if (l < kCollapseLength) cand.push_back({l, i});
            }
            if (cand.empty()) break;
            std::sort(cand.begin(), cand.end());
            std::vector<char> locked(m_.vertices.size(), 0), dead_vertex(m_.vertices.size(), 0);
            std::vector<char> dead_tri(m_.triangles.size(), 0);
            int done = 0;
            for (const auto& [l, i] : cand) {
                const Edge e = edges_[i];
                if (locked[e.a] || locked[e.b]) continue;
                const std::vector<int> ring_a = ring(e.a), ring_b = ring(e.b);
                const bool a_free = std::none_of(ring_a.begin(), ring_a.end(), [&](int v) { return locked[v]; });
                const bool b_free = std::none_of(ring_b.begin(), ring_b.end(), [&](int v) { return locked[v]; });
                const double ab = a_free ? collapse_score(e.a, e.b, e, ring_a) : -1.0;
                const double ba = b_free ? collapse_score(e.b, e.a, e, ring_b) : -1.0;
                if (ab < 0.0 && ba < 0.0) continue;
                const bool remove_a = ab >= 0.0 && (ba < 0.0 || ab <= ba);
                const int from = remove_a ? e.a : e.b, to = remove_a ? e.b : e.a;
                const std::vector<int>& ring_from = remove_a ? ring_a : ring_b;
                locked[from] = 1;
                for (int v : ring_from) locked[v] = 1;
                for (int t : vert_tris_[from]) {
                    auto& tri = m_.triangles[t];
                    if (std::find(tri.begin(), tri.end(), to) != tri.end()) {
                        dead_tri[t] = 1;
                        continue;
                    }
                    for (int& v : tri)
                        if (v == from) v = to;
                }
                dead_vertex[from] = 1;
                ++done;
            }
            compact(dead_vertex, dead_tri);
            total += done;
            if (done == 0) break;
        }
        return total;
    }

    void compact(const std::vector<char>& dead_vertex, const std::vector<char>& dead_tri) {
        std::vector<int> remap(m_.vertices.size(), -1);
        Mesh out;
        for (std::size_t v = 0; v < m_.vertices.size(); ++v) {
            if (dead_vertex[v]) continue;
            remap[v] = static_cast<int>(out.vertices.size());
            out.vertices.push_back(m_.vertices[v]);
            out.tags.push_back(m_.tags[v]);
        }
        for (std::size_t t = 0; t < m_.triangles.size(); ++t) {
            if (dead_tri[t]) continue;
            const auto& tri = m_.triangles[t];
            out.triangles.push_back({remap[tri[0]], remap[tri[1]], remap[tri[2]]});
        }
        m_ = std::move(out);
    }

    int flip_phase() {
        int total = 0;
        for (int batch = 0; batch < 64; ++batch) {
            build_adjacency();
            prefetch_edges();
            struct Cand {
                double gain;
                int edge, c, d;
                double lcd;
            };
            std::vector<Cand> cand;
            std::vector<Vec2> pts;
            for (int i = 0; i < static_cast<int>(edges_.size()); ++i) {
                const Edge& e = edges_[i];
                if (e.t1 < 0) continue;
                const int c = opposite(e.t0, e.a, e.b), d = opposite(e.t1, e.a, e.b);
                const Vec2 pa = m_.vertices[e.a], pb = m_.vertices[e.b], pc = m_.vertices[c], pd = m_.vertices[d];
                // Both new triangles must be valid: the quadrilateral is convex.
                if (!healthy(pa, pd, pc) && !healthy(pa, pc, pd)) continue;
                if (!healthy(pb, pc, pd) && !healthy(pb, pd, pc)) continue;
                const double lab = length(e.a, e.b);
                const double dev_ab = std::abs(std::log(lab));
                const double lcd = length(pc, pd);
                // Never hand a new candidate to split or collapse; that would cycle.
                if ((lcd > kSplitLength && !(lab > kSplitLength)) || (lcd < kCollapseLength && !(lab < kCollapseLength)))
                    continue;
                const double gain = dev_ab - std::abs(std::log(lcd));
                if (gain > opts_.flip_hysteresis) cand.push_back({gain, i, c, d, lcd});
            }
            if (cand.empty()) break;
            std::stable_sort(cand.begin(), cand.end(), [](const Cand& l, const Cand& r) { return l.gain > r.gain; });
            std::vector<char> used(m_.triangles.size(), 0);
            std::vector<std::pair<int, int>> created;
            int done = 0;
            for (const Cand& cd : cand) {
                const Edge& e = edges_[cd.edge];
                if (used[e.t0] || used[e.t1]) continue;
                const std::pair key{std::min(cd.c, cd.d), std::max(cd.c, cd.d)};
                if (std::find(created.begin(), created.end(), key) != created.end()) continue;
                const std::vector<int> rc = ring(cd.c);
                if (std::binary_search(rc.begin(), rc.end(), cd.d)) continue;
                // Orient so that c lies to the left of a -> b.
                int a = e.a, b = e.b, c = cd.c, d = cd.d;
                if (tri_area(m_.vertices[a], m_.vertices[b], m_.vertices[c]) < 0.0) std::swap(c, d);
                if (!healthy(m_.vertices[a], m_.vertices[d], m_.vertices[c]) ||
                    !healthy(m_.vertices[d], m_.vertices[b], m_.vertices[c]))
                    continue;
                used[e.t0] = used[e.t1] = 1;
                created.push_back(key);
                m_.triangles[e.t0] = {a, d, c};
                m_.triangles[e.t1] = {d, b, c};
                ++done;
            }
            total += done;
            if (done == 0) break;
        }
        return total;
    }

    int smooth_phase() {
        int moves = 0;
        build_adjacency();
        for (int sweep = 0; sweep < opts_.smoothing_sweeps; ++sweep) {
            for (int v = 0; v < static_cast<int>(m_.vertices.size()); ++v) {
                if (!m_.tags[v].is_interior()) continue;
                const std::vector<int> r = ring(v);
                if (r.empty()) continue;
                const Vec2 p = m_.vertices[v];
                // Each neighbour w proposes the point at unit metric distance from w
                // along w -> v; the vertex moves part of the way to their mean.
                Vec2 target{};
                for (int w : r) {
                    const Vec2 pw = m_.vertices[w];
                    const double l = length(pw, p);
                    if (!(l > 0.0)) continue;
                    target += pw + (p - pw) / l;
                }
                target = target / static_cast<double>(r.size());
                const Vec2 moved = p + opts_.smoothing_step * (target - p);
                const SymMat2 h = field_(p);
                if (std::sqrt(h.quad(moved - p)) < opts_.min_move) continue;
                const double before = min_quality(vert_tris_[v], h);
                m_.vertices[v] = moved;
                bool ok = min_quality(vert_tris_[v], h) >= before;
                for (int t : vert_tris_[v]) {
                    const auto& tri = m_.triangles[t];
                    if (!ok) break;
                    ok = healthy(m_.vertices[tri[0]], m_.vertices[tri[1]], m_.vertices[tri[2]]);
                }
                if (!ok) m_.vertices[v] = p;
                else if (!(moved == p)) ++moves;
            }
        }
        return moves;
    }
};

} // namespace detail

/**
 * Adapts `mesh` (an axis-aligned rectangle mesh) to the field. Each pass runs
 * splits, collapses, flips and smoothing; adaptation stops after a pass in
 * which no split, collapse or flip fired, or after opts.max_passes.
 */
inline Mesh adapt(const Mesh& mesh, const MetricField& field, const AdaptOptions& opts = {},
                  AdaptStats* stats = nullptr) {
    const Rect rect = bounding_rect(mesh);
    validate_mesh(mesh, &rect);
    const FieldCache cache(field);
    detail::Remesher r(mesh, rect, cache, opts);
    const AdaptStats s = r.run();
    if (stats) *stats = s;
    return r.take();
}

inline Mesh adapt(const Mesh& mesh, const MetricField& field, int max_passes, AdaptStats* stats = nullptr) {
    AdaptOptions opts;
    opts.max_passes = max_passes;
    return adapt(mesh, field, opts, stats);
}

/// Unique undirected edges (i < j) in lexicographic order.
inline std::vector<std::array<int, 2>> mesh_edges(const Mesh& mesh) {
    std::vector<std::array<int, 2>> edges;
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) edges.push_back({std::min(t[k], t[(k + 1) % 3]), std::max(t[k], t[(k + 1) % 3])});
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

/// Integral of sqrt(det H) over the mesh (degree-4 rule on each triangle).
inline double metric_volume(const Mesh& mesh, const MetricField& field) {
    const QuadratureRule& rule = triangle_rule_deg4();
    std::vector<double> parts(mesh.num_triangles());
    detail::parallel_for(mesh.num_triangles(), [&](std::size_t t) {
        const Triangle tri = mesh_triangle(mesh, t);
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q)
            acc += rule.weights[q] * std::sqrt(std::max(field(tri.from_barycentric(rule.points[q])).det(), 0.0));
        parts[t] = acc * tri.area();
    });
    detail::CompensatedSum sum;
    for (double v : parts) sum.add(v);
    return sum.value();
}

struct CardinalityOptions {
    double tolerance = 0.10;   ///< relative band around the target
    int max_iterations = 20;
    int initial_subdivisions = 8;
    AdaptOptions adapt;
};

struct CardinalityResult {
    double lambda = 0.0;      ///< factor applied to the base field
    Mesh mesh;
    int iterations = 0;
    bool converged = false;   ///< triangle count within tolerance of the target
    AdaptStats stats;
};

/**
 * Finds a factor lambda such that adapting a coarse uniform mesh of `domain`
 * to lambda * base gives about `target` triangles. A unit mesh has about
 * (4 / sqrt 3) * integral of sqrt(det H) triangles, which is linear in lambda;
 * this gives the first guess, then a secant step in log-log space (bracketed
 * once the target is straddled) refines it. After max_iterations the closest
 * mesh is returned with converged = false.
 */
inline CardinalityResult cardinality_targeting(const MetricField& base, int target, const Rect& domain = {},
                                               const CardinalityOptions& opts = {}) {
    if (target < 50) throw std::invalid_argument("cardinality_targeting: target must be at least 50");
    const Mesh start = uniform_mesh(domain, opts.initial_subdivisions);
    const double volume = metric_volume(uniform_mesh(domain, 32), base);
    if (!(volume > 0.0)) throw std::domain_error("cardinality_targeting: metric has zero volume");

    // The field is linear in lambda, so one cache of base values serves every attempt.
    const FieldCache cache(base);
    auto run = [&](double lambda, AdaptStats& stats) {
        const MetricField scaled([&cache, lambda](Vec2 z) { return lambda * cache(z); }, base.scale() * lambda,
                                 base.eps_reg());
        return adapt(start, scaled, opts.adapt, &stats);
    };

    CardinalityResult best;
    double best_miss = std::numeric_limits<double>::infinity();
    double lambda = static_cast<double>(target) * (std::numbers::sqrt3 / 4.0) / volume;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double prev_lambda = 0.0, prev_count = 0.0;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        AdaptStats stats;
        Mesh mesh = run(lambda, stats);
        const double count = static_cast<double>(mesh.num_triangles());
        const double miss = std::abs(count - target) / target;
        if (miss < best_miss) {
            best_miss = miss;
            best.lambda = lambda;
            best.mesh = std::move(mesh);
            best.stats = stats;
        }
        best.iterations = it;
        if (miss <= opts.tolerance) {
            best.converged = true;
            break;
        }
        if (count < target) lo = std::max(lo, lambda);
        else hi = std::min(hi, lambda);
        // Exponent of count ~ lambda^k from the last two attempts, 1 by default.
        double k = 1.0;
        if (prev_lambda > 0.0 && prev_count > 0.0 && std::abs(std::log(lambda / prev_lambda)) > 1e-12) {
            const double est = std::log(count / prev_count) / std::log(lambda / prev_lambda);
            if (est > 0.25 && est < 4.0) k = est;
        }
        double next = lambda * std::pow(static_cast<double>(target) / count, 1.0 / k);
        if (std::isfinite(hi) && lo > 0.0 && !(next > lo && next < hi)) next = std::sqrt(lo * hi);
        prev_lambda = lambda;
        prev_count = count;
        lambda = next;
    }
    return best;
}

struct Conformance {
    double median_condition = 0.0;      ///< of H(z_T)^(-1/2) H_T H(z_T)^(-1/2)
    double edges_in_band = 0.0;         ///< fraction of edges with metric length in [1/2, 2]
    double median_length = 0.0;
    double min_length = 0.0;
    double max_length = 0.0;
};

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t n = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n), v.end());
    const double upper = v[n];
    if (v.size() % 2) return upper;
    return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n)));
}

/// Spectral condition number of H^(-1/2) H_T H^(-1/2), i.e. of the pencil (H_T, H).
inline double relative_condition(const SymMat2& shape, const SymMat2& h) {
    const SymMat2 root = power(h, -0.5);
    const SymMat2 rel = congruence(shape, root.full());
    const Eigen2 e = eigen(rel);
    return e.lambda1 / e.lambda2;
}

inline Conformance conformance(const Mesh& mesh, const MetricField& field) {
    Conformance c;
    std::vector<double> cond(mesh.num_triangles());
    detail::parallel_for(mesh.num_triangles(), [&](std::size_t t) {
        const Triangle tri = mesh_triangle(mesh, t);
        cond[t] = relative_condition(shape_matrix(tri), field(tri.barycenter()));
    });
    c.median_condition = median(cond);
    const auto edges = mesh_edges(mesh);
    std::vector<double> lengths(edges.size());
    detail::parallel_for(edges.size(), [&](std::size_t i) {
        lengths[i] = metric_edge_length(mesh.vertices[edges[i][0]], mesh.vertices[edges[i][1]], field);
    });
    const auto in_band = std::count_if(lengths.begin(), lengths.end(), [](double l) { return l >= 0.5 && l <= 2.0; });
    c.edges_in_band = lengths.empty() ? 0.0 : static_cast<double>(in_band) / static_cast<double>(lengths.size());
    c.median_length = median(lengths);
    if (!lengths.empty()) {
        c.min_length = *std::min_element(lengths.begin(), lengths.end());
        c.max_length = *std::max_element(lengths.begin(), lengths.end());
    }
    return c;
}

/**
 * Median angle in degrees between the major axes of H_T and H(z_T), over
 * triangles where H(z_T) has eigenvalue ratio at least `min_ratio`.
 */
inline double median_alignment_degrees(const Mesh& mesh, const MetricField& field, double min_ratio = 4.0) {
    std::vector<double> angles;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const Triangle tri = mesh_triangle(mesh, t);
        const Eigen2 h = eigen(field(tri.barycenter()));
        if (h.lambda1 < min_ratio * h.lambda2) continue;
        const Eigen2 s = eigen(shape_matrix(tri));
        const double d = std::abs(std::remainder(s.angle - h.angle, std::numbers::pi));
        angles.push_back(d * 180.0 / std::numbers::pi);
    }
    return median(angles);
}

} // namespace aniso
