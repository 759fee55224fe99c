#pragma once

/**
 * @file demo.hpp
 * @brief Error table for the synthetic function: uniform, isotropic and
 *        anisotropic meshes of about the same size, P1 and P2 elements.
 */

#include "aniso/fem_error.hpp"
#include "aniso/mesh.hpp"
#include "aniso/optimal_metric.hpp"
#include "aniso/remesh.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace aniso {

enum class MeshKind { uniform, isotropic, anisotropic };

inline const char* to_string(MeshKind k) {
    switch (k) {
    case MeshKind::uniform: return "uniform";
    case MeshKind::isotropic: return "isotropic";
    default: return "anisotropic";
    }
}

struct DemoOptions {
    int target = 500;
    double eps_reg = 1e-3;
    Rect domain{};
    CardinalityOptions cardinality{};
};

struct DemoEntry {
    int fe_degree = 1;
    MeshKind kind = MeshKind::uniform;
    Mesh mesh;
    double error = 0.0;       ///< ||grad(f - I f)||_L2
    double lambda = 0.0;      ///< 0 for the uniform mesh
    int iterations = 0;
    bool converged = true;
    Conformance conformance;  ///< against the field the mesh was adapted to
};

struct DemoTable {
    std::vector<DemoEntry> entries;  ///< P1 row then P2 row, columns in MeshKind order

    const DemoEntry& at(int fe_degree, MeshKind kind) const {
        for (const DemoEntry& e : entries)
            if (e.fe_degree == fe_degree && e.kind == kind) return e;
        throw std::out_of_range("demo table has no such entry");
    }
};

/// Subdivisions n for which the uniform mesh (2 n^2 triangles) is closest to `target`.
inline int uniform_subdivisions(int target) {
    return std::max(1, static_cast<int>(std::lround(std::sqrt(target / 2.0))));
}

inline MetricField demo_field(int fe_degree, MeshKind kind, double eps_reg) {
    return synthetic_metric_field(fe_degree + 1, 1.0, eps_reg,
                                  kind == MeshKind::isotropic ? MetricMode::isotropic : MetricMode::anisotropic);
}

inline DemoEntry run_demo_entry(int fe_degree, MeshKind kind, const DemoOptions& opts) {
    DemoEntry e;
    e.fe_degree = fe_degree;
    e.kind = kind;
    if (kind == MeshKind::uniform) {
        e.mesh = uniform_mesh(opts.domain, uniform_subdivisions(opts.target));
    } else {
        const MetricField base = demo_field(fe_degree, kind, opts.eps_reg);
        CardinalityResult r = cardinality_targeting(base, opts.target, opts.domain, opts.cardinality);
        e.mesh = std::move(r.mesh);
        e.lambda = r.lambda;
        e.iterations = r.iterations;
        e.converged = r.converged;
        e.conformance = conformance(e.mesh, base.scaled(r.lambda));
    }
    e.error = mesh_error(e.mesh, SyntheticFunction{}, fe_degree);
    return e;
}

inline DemoTable run_demo(const DemoOptions& opts = {}) {
    DemoTable table;
    for (int fe : {1, 2})
        for (MeshKind k : {MeshKind::uniform, MeshKind::isotropic, MeshKind::anisotropic})
            table.entries.push_back(run_demo_entry(fe, k, opts));
    return table;
}

/// One row per (mesh type, fe degree).
inline void write_demo_csv(const DemoTable& table, std::ostream& out) {
    out << "fe_degree,mesh,triangles,error,lambda\n";
    char buf[128];
    for (const DemoEntry& e : table.entries) {
        std::snprintf(buf, sizeof buf, "%d,%s,%zu,%.17g,%.17g\n", e.fe_degree, to_string(e.kind), e.mesh.num_triangles(),
                      e.error, e.lambda);
        out << buf;
    }
}

/// The 2 x 3 table as aligned text.
inline void write_demo_table(const DemoTable& table, std::ostream& out) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-4s %14s %14s %14s\n", "", "Uniform", "Isotropic", "Anisotropic");
    out << buf;
    for (int fe : {1, 2}) {
        std::snprintf(buf, sizeof buf, "P%-3d %14.6g %14.6g %14.6g\n", fe, table.at(fe, MeshKind::uniform).error,
                      table.at(fe, MeshKind::isotropic).error, table.at(fe, MeshKind::anisotropic).error);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "#T   %14zu %14zu %14zu  (P1)\n", table.at(1, MeshKind::uniform).mesh.num_triangles(),
                  table.at(1, MeshKind::isotropic).mesh.num_triangles(),
                  table.at(1, MeshKind::anisotropic).mesh.num_triangles());
    out << buf;
    std::snprintf(buf, sizeof buf, "#T   %14zu %14zu %14zu  (P2)\n", table.at(2, MeshKind::uniform).mesh.num_triangles(),
                  table.at(2, MeshKind::isotropic).mesh.num_triangles(),
                  table.at(2, MeshKind::anisotropic).mesh.num_triangles());
    out << buf;
}

} // namespace aniso
