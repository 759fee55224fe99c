// Command-line front end: formulas, verification reports, metric files,
// adaptation and the error-table demo.
//
// Exit codes: 0 success, 1 usage, 2 input file, 3 numerical failure. Failures
// print one line "error:<code>:<kind>:<message>" on stderr.

#include "aniso/demo.hpp"
#include "aniso/fem_error.hpp"
#include "aniso/medit.hpp"
#include "aniso/optimal_metric.hpp"
#include "aniso/remesh.hpp"
#include "aniso/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace aniso;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum Exit { ok = 0, usage = 1, input = 2, numerical = 3 };

int fail(Exit code, const char* kind, const std::string& message) {
    std::string flat = message;
    for (char& c : flat)
        if (c == '\n' || c == '\r') c = ' ';
    std::fprintf(stderr, "error:%d:%s:%s\n", static_cast<int>(code), kind, flat.c_str());
    return code;
}

std::string g9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);
    return buf;
}

/// Entries below half a unit in the 9th digit of the largest one print as 0.
std::string matrix_line(const SymMat2& m) {
    const double scale = std::max({std::abs(m.m11), std::abs(m.m12), std::abs(m.m22)});
    auto clean = [&](double v) { return std::abs(v) < 5e-10 * scale ? 0.0 : v; };
    return g9(clean(m.m11)) + " " + g9(clean(m.m12)) + " " + g9(clean(m.m22));
}

template <int M>
HomPoly<M> poly_from(const std::vector<double>& coeffs) {
    if (coeffs.size() != static_cast<std::size_t>(M + 1))
        throw UsageError("--coeffs needs " + std::to_string(M + 1) + " values for degree " + std::to_string(M));
    HomPoly<M> p;
    for (int k = 0; k <= M; ++k) p.coeffs[static_cast<std::size_t>(k)] = coeffs[static_cast<std::size_t>(k)];
    return p;
}

/// Calls fn(HomPoly<m>) for the runtime degree m.
template <class Fn>
void with_poly(int degree, const std::vector<double>& coeffs, Fn&& fn) {
    if (degree == 2) fn(poly_from<2>(coeffs));
    else if (degree == 3) fn(poly_from<3>(coeffs));
    else throw UsageError("--degree must be 2 or 3");
}

void log_warnings(const std::vector<IoWarning>& warnings, const std::string& source) {
    for (const IoWarning& w : warnings) std::fprintf(stderr, "warning:%s:%d:%s\n", source.c_str(), w.line, w.message.c_str());
}

Mesh load_mesh(const std::string& path) {
    std::vector<IoWarning> warnings;
    Mesh mesh = read_mesh(fs::path(path), &warnings);
    log_warnings(warnings, path);
    try {
        validate_mesh(mesh);
    } catch (const std::invalid_argument& e) {
        throw InputError(path + ": " + e.what());
    }
    return mesh;
}

MetricMode parse_mode(const std::string& s) {
    if (s == "anisotropic") return MetricMode::anisotropic;
    if (s == "isotropic") return MetricMode::isotropic;
    throw UsageError("--mode must be anisotropic or isotropic");
}

void require_synthetic(const std::string& name, const char* option) {
    if (name != "synthetic") throw UsageError(std::string(option) + " supports only 'synthetic'");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anisotropic interpolation error and metric adaptation tools"};
    app.require_subcommand(1);

    // metric
    int metric_degree = 2;
    std::vector<double> metric_coeffs;
    auto* metric = app.add_subcommand("metric", "Print the optimal metric M_m(pi) and its determinant");
    metric->add_option("--degree", metric_degree, "Degree m of pi (2 or 3)")->required();
    metric->add_option("--coeffs", metric_coeffs, "Coefficients a,b,c[,d] of pi")->required()->delimiter(',');

    // triangle-error
    int tri_degree = 2;
    std::vector<double> tri_vertices, tri_coeffs;
    auto* tri = app.add_subcommand("triangle-error", "Print e_T(pi)_m for one triangle");
    tri->add_option("--vertices", tri_vertices, "x1,y1,x2,y2,x3,y3")->required()->delimiter(',');
    tri->add_option("--degree", tri_degree, "Degree m of pi (2 or 3)")->required();
    tri->add_option("--coeffs", tri_coeffs, "Coefficients of pi")->required()->delimiter(',');

    // shape-error
    int shape_degree = 2;
    std::vector<double> shape_metric, shape_coeffs;
    auto* shape = app.add_subcommand("shape-error", "Print e_M(pi)_m, the worst error over triangles with H_T = M");
    shape->add_option("--metric", shape_metric, "m11,m12,m22")->required()->delimiter(',');
    shape->add_option("--degree", shape_degree, "Degree m of pi (2 or 3)")->required();
    shape->add_option("--coeffs", shape_coeffs, "Coefficients of pi")->required()->delimiter(',');

    // verify
    std::string verify_kind, verify_out;
    int verify_samples = 200, verify_degree = 0;
    std::uint64_t verify_seed = 1;
    double verify_cap = 0.0;
    auto* verify = app.add_subcommand("verify", "Sampled checks of the error/surrogate equivalence");
    verify->add_option("kind", verify_kind, "equivalence or near-minimizer")
        ->required()
        ->check(CLI::IsMember({"equivalence", "near-minimizer"}));
    verify->add_option("--samples", verify_samples, "Samples per degree")->check(CLI::PositiveNumber);
    verify->add_option("--seed", verify_seed, "Random seed");
    verify->add_option("--degree", verify_degree, "2 or 3; both when omitted");
    verify->add_option("--cap", verify_cap, "Anisotropy cap (default 1e3 for m = 2, 1e2 for m = 3)");
    verify->add_option("--out", verify_out, "CSV report path")->required();

    // field
    std::string field_function = "synthetic", field_mesh, field_out, field_mode = "anisotropic";
    int field_degree = 2;
    double field_lambda = 1.0, field_eps = 1e-3;
    auto* field = app.add_subcommand("field", "Sample the metric field at mesh vertices into a .sol file");
    field->add_option("--function", field_function, "Function (synthetic)");
    field->add_option("--degree", field_degree, "Taylor degree m (2 or 3)")->required();
    field->add_option("--lambda", field_lambda, "Scale factor lambda")->required();
    field->add_option("--mode", field_mode, "anisotropic or isotropic");
    field->add_option("--eps", field_eps, "Regularization eps");
    field->add_option("--mesh", field_mesh, "Input .mesh")->required();
    field->add_option("--out", field_out, "Output .sol")->required();

    // adapt
    std::string adapt_field = "synthetic", adapt_out, adapt_mode = "anisotropic";
    int adapt_degree = 2, adapt_target = 500, adapt_passes = AdaptOptions{}.max_passes;
    double adapt_eps = 1e-3;
    auto* adapt_cmd = app.add_subcommand("adapt", "Adapt a mesh of [-1,1]^2 to the field with a target size");
    adapt_cmd->add_option("--field", adapt_field, "Field (synthetic)");
    adapt_cmd->add_option("--degree", adapt_degree, "Taylor degree m (2 or 3)")->required();
    adapt_cmd->add_option("--target", adapt_target, "Target triangle count");
    adapt_cmd->add_option("--mode", adapt_mode, "anisotropic or isotropic");
    adapt_cmd->add_option("--eps", adapt_eps, "Regularization eps");
    adapt_cmd->add_option("--max-passes", adapt_passes, "Remeshing passes per attempt")->check(CLI::PositiveNumber);
    adapt_cmd->add_option("--out", adapt_out, "Output .mesh")->required();

    // interp-error
    std::string ie_mesh, ie_function = "synthetic";
    int ie_fe = 1;
    auto* ie = app.add_subcommand("interp-error", "Print ||grad(f - I f)||_L2 over a mesh");
    ie->add_option("--mesh", ie_mesh, "Input .mesh")->required();
    ie->add_option("--function", ie_function, "Function (synthetic)");
    ie->add_option("--fe-degree", ie_fe, "Element degree (1 or 2)")->required()->check(CLI::IsMember({1, 2}));

    // demo
    int demo_target = 500;
    std::string demo_dir = ".";
    auto* demo = app.add_subcommand("demo", "Uniform/isotropic/anisotropic x P1/P2 error table");
    demo->add_option("--target", demo_target, "Target triangle count");
    demo->add_option("--out-dir", demo_dir, "Directory for error_table.csv and the meshes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(usage, "usage", e.what());
    }

    try {
        if (metric->parsed()) {
            with_poly(metric_degree, metric_coeffs, [](const auto& p) {
                SymMat2 m;
                if constexpr (std::decay_t<decltype(p)>::degree == 2) m = metric_p1(p);
                else m = metric_p2(p);
                std::cout << matrix_line(m) << "\ndet " << g9(m.det()) << '\n';
            });
        } else if (tri->parsed()) {
            if (tri_vertices.size() != 6) throw UsageError("--vertices needs 6 values");
            const Triangle t{{Vec2{tri_vertices[0], tri_vertices[1]}, Vec2{tri_vertices[2], tri_vertices[3]},
                              Vec2{tri_vertices[4], tri_vertices[5]}}};
            if (is_degenerate(t)) throw std::domain_error("degenerate triangle");
            with_poly(tri_degree, tri_coeffs, [&](const auto& p) {
                std::cout << g9(interp_error_h1(t, p, std::decay_t<decltype(p)>::degree)) << '\n';
            });
        } else if (shape->parsed()) {
            if (shape_metric.size() != 3) throw UsageError("--metric needs 3 values m11,m12,m22");
            const SymMat2 m{shape_metric[0], shape_metric[1], shape_metric[2]};
            with_poly(shape_degree, shape_coeffs,
                      [&](const auto& p) { std::cout << g9(sup_error_over_shape(m, p)) << '\n'; });
        } else if (verify->parsed()) {
            if (verify_degree != 0 && verify_degree != 2 && verify_degree != 3)
                throw UsageError("--degree must be 2 or 3");
            const auto t0 = std::chrono::steady_clock::now();
            const bool eq = verify_kind == "equivalence";
            auto run = [&]<int M>() {
                const double cap = verify_cap > 0.0 ? verify_cap : default_r_max(M);
                return eq ? equivalence_constants<M>(verify_samples, verify_seed, cap)
                          : near_minimizer_report<M>(verify_samples, verify_seed, cap);
            };
            std::vector<VerifyReport> reports;
            if (verify_degree != 3) reports.push_back(run.template operator()<2>());
            if (verify_degree != 2) reports.push_back(run.template operator()<3>());
            VerifyReport all;
            all.kind = reports.front().kind;
            for (const VerifyReport& r : reports) all.records.insert(all.records.end(), r.records.begin(), r.records.end());
            std::ofstream out(verify_out, std::ios::binary);
            if (!out) throw FileError("cannot open " + verify_out + " for writing");
            write_report_csv(all, out);
            for (const VerifyReport& r : reports) {
                std::cout << "m: " << r.records.front().m << '\n';
                write_report_summary(r, std::cout);
            }
            std::fprintf(stderr, "verify: %.1f s\n", seconds_since(t0));
        } else if (field->parsed()) {
            require_synthetic(field_function, "--function");
            if (field_degree != 2 && field_degree != 3) throw UsageError("--degree must be 2 or 3");
            const Mesh mesh = load_mesh(field_mesh);
            const MetricField h = synthetic_metric_field(field_degree, field_lambda, field_eps, parse_mode(field_mode));
            write_metric(sample_at_vertices(mesh, h), fs::path(field_out));
        } else if (adapt_cmd->parsed()) {
            require_synthetic(adapt_field, "--field");
            if (adapt_degree != 2 && adapt_degree != 3) throw UsageError("--degree must be 2 or 3");
            const auto t0 = std::chrono::steady_clock::now();
            CardinalityOptions opts;
            opts.adapt.max_passes = adapt_passes;
            const MetricField base = synthetic_metric_field(adapt_degree, 1.0, adapt_eps, parse_mode(adapt_mode));
            const CardinalityResult r = cardinality_targeting(base, adapt_target, Rect{}, opts);
            write_mesh(r.mesh, fs::path(adapt_out));
            std::cout << "triangles " << r.mesh.num_triangles() << "\nlambda " << g9(r.lambda) << '\n';
            if (!r.converged)
                std::fprintf(stderr, "warning:adapt:target %d not reached within %d attempts; kept the nearest mesh\n",
                             adapt_target, r.iterations);
            std::fprintf(stderr, "adapt: %d attempts, %.1f s\n", r.iterations, seconds_since(t0));
        } else if (ie->parsed()) {
            require_synthetic(ie_function, "--function");
            const Mesh mesh = load_mesh(ie_mesh);
            std::cout << g9(mesh_error(mesh, SyntheticFunction{}, ie_fe)) << '\n';
        } else if (demo->parsed()) {
            const auto t0 = std::chrono::steady_clock::now();
            fs::create_directories(demo_dir);
            DemoOptions opts;
            opts.target = demo_target;
            const DemoTable table = run_demo(opts);
            {
                std::ofstream csv(fs::path(demo_dir) / "error_table.csv", std::ios::binary);
                if (!csv) throw FileError("cannot write " + (fs::path(demo_dir) / "error_table.csv").string());
                write_demo_csv(table, csv);
            }
            for (const DemoEntry& e : table.entries)
                write_mesh(e.mesh, fs::path(demo_dir) / ("P" + std::to_string(e.fe_degree) + "_" + to_string(e.kind) + ".mesh"));
            write_demo_table(table, std::cout);
            std::fprintf(stderr, "demo: %.1f s\n", seconds_since(t0));
        }
    } catch (const UsageError& e) {
        return fail(usage, "usage", e.what());
    } catch (const FileError& e) {
        return fail(input, "input", e.what());
    } catch (const aniso::ParseError& e) {
        return fail(input, "input", e.what());
    } catch (const InputError& e) {
        return fail(input, "input", e.what());
    } catch (const fs::filesystem_error& e) {
        return fail(input, "input", e.what());
    } catch (const std::invalid_argument& e) {
        return fail(usage, "usage", e.what());
    } catch (const std::exception& e) {
        return fail(numerical, "numerical", e.what());
    }
    return ok;
}
