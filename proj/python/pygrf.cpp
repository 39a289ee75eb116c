// SPDX-License-Identifier: MIT
//
// Python bindings for the sampling core: meshes as numpy arrays, FEM
// matrices as scipy sparse, and the operator/series/sampler pipeline.
// Batch sampling releases the GIL; the worker threads never touch Python.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <utility>

#include "grf/chebyshev.hpp"
#include "grf/experiments.hpp"
#include "grf/fem.hpp"
#include "grf/mesh.hpp"
#include "grf/operators.hpp"
#include "grf/psd.hpp"
#include "grf/sampler.hpp"
#include "grf/sphere_spectral.hpp"

namespace py = pybind11;

namespace {

py::array_t<double> vertices_array(const grf::TriangleMesh& mesh) {
    py::array_t<double> out({mesh.n_vertices(), 3});
    auto view = out.mutable_unchecked<2>();
    for (int i = 0; i < mesh.n_vertices(); ++i)
        for (int c = 0; c < 3; ++c) view(i, c) = mesh.vertices[i][c];
    return out;
}

py::array_t<int> triangles_array(const grf::TriangleMesh& mesh) {
    py::array_t<int> out({mesh.n_triangles(), 3});
    auto view = out.mutable_unchecked<2>();
    for (int t = 0; t < mesh.n_triangles(); ++t)
        for (int c = 0; c < 3; ++c) view(t, c) = mesh.triangles[t][c];
    return out;
}

grf::TriangleMesh mesh_from_arrays(const py::array_t<double>& vertices,
                                   const py::array_t<int>& triangles) {
    if (vertices.ndim() != 2 || vertices.shape(1) != 3)
        throw py::value_error("vertices must have shape (n, 3)");
    if (triangles.ndim() != 2 || triangles.shape(1) != 3)
        throw py::value_error("triangles must have shape (m, 3)");
    grf::TriangleMesh mesh;
    const auto v = vertices.unchecked<2>();
    const auto t = triangles.unchecked<2>();
    mesh.vertices.resize(static_cast<std::size_t>(v.shape(0)));
    for (py::ssize_t i = 0; i < v.shape(0); ++i)
        mesh.vertices[static_cast<std::size_t>(i)] = {v(i, 0), v(i, 1), v(i, 2)};
    mesh.triangles.resize(static_cast<std::size_t>(t.shape(0)));
    for (py::ssize_t i = 0; i < t.shape(0); ++i)
        mesh.triangles[static_cast<std::size_t>(i)] = {t(i, 0), t(i, 1), t(i, 2)};
    return mesh;
}

py::dict report_dict(const grf::ConvergenceReport& report) {
    py::dict out;
    out["study"] = report.study;
    py::list points;
    for (const grf::ConvergencePoint& p : report.points)
        points.append(py::make_tuple(p.resolution, p.error));
    out["points"] = points;
    out["slope"] = report.slope;
    out["slope_stderr"] = report.slope_stderr;
    out["r_squared"] = report.r_squared;
    out["expected_slope"] = report.expected_slope;
    out["tolerance"] = report.tolerance;
    out["pass"] = report.pass;
    out["degenerate"] = report.degenerate;
    out["extras"] = report.extras;
    return out;
}

grf::ConvergenceReport dispatch_study(const grf::TruncationStudyConfig& c) {
    return grf::run_truncation_study(c);
}
grf::ConvergenceReport dispatch_study(const grf::ChebErrorStudyConfig& c) {
    return grf::run_cheb_error_study(c);
}
grf::ConvergenceReport dispatch_study(const grf::SphereCovarianceStudyConfig& c) {
    return grf::run_sphere_covariance_study(c);
}
grf::ConvergenceReport dispatch_study(const grf::HyperboloidCovarianceStudyConfig& c) {
    return grf::run_hyperboloid_covariance_study(c);
}

// Runs a study with the GIL released and returns the report as a dict.
template <typename Config>
py::dict study_binding(const Config& config) {
    grf::ConvergenceReport report;
    {
        py::gil_scoped_release release;
        report = dispatch_study(config);
    }
    return report_dict(report);
}

}  // namespace

PYBIND11_MODULE(pygrf, m) {
    m.doc() = "Gaussian random fields on triangulated surfaces via the "
              "Galerkin-Chebyshev method";

    py::class_<grf::TriangleMesh>(m, "TriangleMesh")
        .def(py::init(&mesh_from_arrays), py::arg("vertices"), py::arg("triangles"))
        .def_property_readonly("vertices", &vertices_array)
        .def_property_readonly("triangles", &triangles_array)
        .def_property_readonly("n_vertices", &grf::TriangleMesh::n_vertices)
        .def_property_readonly("n_triangles", &grf::TriangleMesh::n_triangles)
        .def("__repr__", [](const grf::TriangleMesh& mesh) {
            return "TriangleMesh(" + std::to_string(mesh.n_vertices()) + " vertices, " +
                   std::to_string(mesh.n_triangles()) + " triangles)";
        });

    m.def("icosphere", &grf::icosphere, py::arg("level"),
          "Subdivided icosahedron projected onto the unit sphere");
    m.def("hyperboloid", &grf::hyperboloid, py::arg("level"),
          "One-sheet hyperboloid x^2+y^2-z^2=1 with |z| <= 2 (open boundary)");
    m.def("load_off", &grf::load_off, py::arg("path"));
    m.def("load_obj", &grf::load_obj, py::arg("path"));
    m.def("save_off", &grf::save_off, py::arg("mesh"), py::arg("path"),
          "ASCII OFF with full double round-trip precision");
    m.def("surface_area", &grf::surface_area, py::arg("mesh"));
    m.def("content_hash", &grf::content_hash, py::arg("mesh"));
    m.def(
        "validate",
        [](const grf::TriangleMesh& mesh) {
            const grf::MeshReport r = grf::validate(mesh);
            py::dict out;
            out["n_vertices"] = r.n_vertices;
            out["n_triangles"] = r.n_triangles;
            out["n_edges"] = r.n_edges;
            out["boundary_edges"] = r.boundary_edges;
            out["nonmanifold_edges"] = r.nonmanifold_edges;
            out["orientation_conflicts"] = r.orientation_conflicts;
            out["invalid_indices"] = r.invalid_indices;
            out["degenerate_triangles"] = r.degenerate_triangles;
            out["is_closed"] = r.is_closed();
            out["ok_with_boundary"] = r.ok_with_boundary();
            out["ok"] = r.ok();
            return out;
        },
        py::arg("mesh"), "Structural report: edge manifoldness, orientation, degeneracy");

    m.def(
        "assemble_mass", [](const grf::TriangleMesh& mesh) { return grf::assemble_mass(mesh).m; },
        py::arg("mesh"), "P1 mass matrix as scipy sparse");
    m.def(
        "assemble_stiffness",
        [](const grf::TriangleMesh& mesh) { return grf::assemble_stiffness(mesh).m; },
        py::arg("mesh"), "Cotangent stiffness matrix as scipy sparse");
    m.def(
        "lumped_mass", [](const grf::TriangleMesh& mesh) { return grf::lumped_mass(mesh).m; },
        py::arg("mesh"), "Row-sum lumped mass matrix as scipy sparse");

    py::class_<grf::PowerSpectralDensity>(m, "PowerSpectralDensity")
        .def_static("matern", &grf::PowerSpectralDensity::matern, py::arg("kappa2"),
                    py::arg("beta"), "gamma(x) = (kappa2 + x)^(-beta)")
        .def_static("matern_from_range", &grf::PowerSpectralDensity::matern_from_range,
                    py::arg("nu"), py::arg("a"),
                    "Matern density with kappa = 3.6527 nu^0.4874 / a")
        .def("__call__", &grf::PowerSpectralDensity::eval, py::arg("lam"))
        .def_property_readonly("kappa2", &grf::PowerSpectralDensity::kappa2)
        .def_property_readonly("beta", &grf::PowerSpectralDensity::beta)
        .def_property_readonly("nu", &grf::PowerSpectralDensity::nu)
        .def_property_readonly("practical_range", &grf::PowerSpectralDensity::practical_range)
        .def("__repr__", &grf::PowerSpectralDensity::describe);

    py::class_<grf::ChebyshevSeries>(m, "ChebyshevSeries")
        .def_readonly("coeffs", &grf::ChebyshevSeries::coeffs)
        .def_readonly("lambda_max", &grf::ChebyshevSeries::lambda_max)
        .def_property_readonly("order", &grf::ChebyshevSeries::order)
        .def("__call__", &grf::ChebyshevSeries::eval_scalar, py::arg("lam"));

    m.def(
        "select_order",
        [](const grf::PowerSpectralDensity& psd, double lambda_max, double ratio_tol, int cap) {
            const grf::OrderSelection sel = grf::select_order(psd, lambda_max, ratio_tol, cap);
            return py::make_tuple(sel.order, sel.hit_cap);
        },
        py::arg("psd"), py::arg("lambda_max"), py::arg("ratio_tol") = 1e-12,
        py::arg("cap") = 1 << 16,
        "Smallest order whose trailing coefficient ratio drops below ratio_tol; "
        "returns (order, hit_cap)");
    m.def("fit_chebyshev",
          py::overload_cast<const grf::PowerSpectralDensity&, double, int>(&grf::fit_chebyshev),
          py::arg("psd"), py::arg("lambda_max"), py::arg("order"));
    m.def("uniform_error_bound", &grf::uniform_error_bound, py::arg("psd"), py::arg("series"),
          "Certified sup-norm bound for the truncated series on [0, lambda_max]");

    py::enum_<grf::MassMode>(m, "MassMode")
        .value("cholesky", grf::MassMode::Cholesky)
        .value("lumped", grf::MassMode::Lumped);

    py::class_<grf::GalerkinOperator>(m, "GalerkinOperator")
        .def_static(
            "from_mesh",
            [](const grf::TriangleMesh& mesh, bool lumped, bool fill_reducing) {
                grf::FactorizeOptions options;
                options.mode = lumped ? grf::MassMode::Lumped : grf::MassMode::Cholesky;
                options.fill_reducing = fill_reducing;
                const grf::SparseSymMatrix mass =
                    lumped ? grf::lumped_mass(mesh) : grf::assemble_mass(mesh);
                return grf::GalerkinOperator::factorize(mass, grf::assemble_stiffness(mesh),
                                                        options);
            },
            py::arg("mesh"), py::arg("lumped") = false, py::arg("fill_reducing") = false,
            "Assemble and factorize the mass/stiffness pair of a mesh")
        .def_property_readonly("n", &grf::GalerkinOperator::n)
        .def_property_readonly("lambda_max", &grf::GalerkinOperator::lambda_max)
        .def_property_readonly("mode", &grf::GalerkinOperator::mode)
        .def("apply_S", &grf::GalerkinOperator::apply_S, py::arg("x"))
        .def("solve_mass", &grf::GalerkinOperator::solve_mass, py::arg("x"))
        .def("dense_S", &grf::GalerkinOperator::dense_S, py::arg("cap") = 3000)
        .def("dense_eigs", &grf::GalerkinOperator::dense_eigs, py::arg("cap") = 3000,
             "(eigenvalues ascending, orthonormal eigenvectors) of S");

    m.def(
        "sample_batch",
        [](const grf::GalerkinOperator& op, const grf::ChebyshevSeries& series, long count,
           std::uint64_t seed, int workers) {
            std::vector<grf::FieldSample> samples;
            {
                py::gil_scoped_release release;
                samples = grf::sample_batch(op, series, count, seed, workers);
            }
            py::array_t<double> out({count, static_cast<long>(op.n())});
            auto view = out.mutable_unchecked<2>();
            for (long i = 0; i < count; ++i)
                std::memcpy(view.mutable_data(i, 0), samples[static_cast<std::size_t>(i)].weights.data(),
                            sizeof(double) * static_cast<std::size_t>(op.n()));
            return out;
        },
        py::arg("op"), py::arg("series"), py::arg("count"), py::arg("seed"),
        py::arg("workers") = 1,
        "count x n array of field weights; a pure function of seed for any worker count");

    m.def("exact_weight_covariance", &grf::exact_weight_covariance, py::arg("op"), py::arg("psd"),
          py::arg("dense_cap") = 3000,
          "Dense-eigendecomposition oracle for the weight covariance");
    m.def("galerkin_covariance_at", &grf::galerkin_covariance_at, py::arg("op"), py::arg("psd"),
          py::arg("pairs"), py::arg("dense_cap") = 3000,
          "Exact covariance entries at vertex index pairs");
    m.def("chebyshev_covariance_against", &grf::chebyshev_covariance_against, py::arg("op"),
          py::arg("series"), py::arg("phi0"), py::arg("targets"),
          "Covariance of the sampled field between phi0 and each targets column, "
          "without eigendecomposition");

    m.def("sphere_covariance_exact", &grf::covariance_exact_batch, py::arg("thetas"),
          py::arg("psd"), py::arg("rel_tol") = 1e-12,
          "Exact sphere covariance at angular distances, by the Legendre series");
    m.def("sphere_truncation_error_exact", &grf::truncation_error_exact, py::arg("n_modes"),
          py::arg("psd"), "Exact L2 truncation error of the n_modes-term expansion");

    py::class_<grf::TruncationStudyConfig>(m, "TruncationStudyConfig")
        .def(py::init<>())
        .def_readwrite("nu", &grf::TruncationStudyConfig::nu)
        .def_readwrite("a", &grf::TruncationStudyConfig::a)
        .def_readwrite("orders", &grf::TruncationStudyConfig::orders)
        .def_readwrite("tolerance", &grf::TruncationStudyConfig::tolerance)
        .def_readwrite("drop_first", &grf::TruncationStudyConfig::drop_first);
    py::class_<grf::ChebErrorStudyConfig>(m, "ChebErrorStudyConfig")
        .def(py::init<>())
        .def_readwrite("nu", &grf::ChebErrorStudyConfig::nu)
        .def_readwrite("a", &grf::ChebErrorStudyConfig::a)
        .def_readwrite("n_modes", &grf::ChebErrorStudyConfig::n_modes)
        .def_readwrite("orders_K", &grf::ChebErrorStudyConfig::orders_K);
    py::class_<grf::SphereCovarianceStudyConfig>(m, "SphereCovarianceStudyConfig")
        .def(py::init<>())
        .def_readwrite("nu", &grf::SphereCovarianceStudyConfig::nu)
        .def_readwrite("a", &grf::SphereCovarianceStudyConfig::a)
        .def_readwrite("levels", &grf::SphereCovarianceStudyConfig::levels)
        .def_readwrite("mode", &grf::SphereCovarianceStudyConfig::mode)
        .def_readwrite("mc_samples", &grf::SphereCovarianceStudyConfig::mc_samples)
        .def_readwrite("mass_mode", &grf::SphereCovarianceStudyConfig::mass_mode)
        .def_readwrite("n_angles", &grf::SphereCovarianceStudyConfig::n_angles)
        .def_readwrite("tolerance", &grf::SphereCovarianceStudyConfig::tolerance)
        .def_readwrite("seed", &grf::SphereCovarianceStudyConfig::seed)
        .def_readwrite("workers", &grf::SphereCovarianceStudyConfig::workers);
    py::class_<grf::HyperboloidCovarianceStudyConfig>(m, "HyperboloidCovarianceStudyConfig")
        .def(py::init<>())
        .def_readwrite("nu", &grf::HyperboloidCovarianceStudyConfig::nu)
        .def_readwrite("a", &grf::HyperboloidCovarianceStudyConfig::a)
        .def_readwrite("levels", &grf::HyperboloidCovarianceStudyConfig::levels)
        .def_readwrite("n_points", &grf::HyperboloidCovarianceStudyConfig::n_points)
        .def_readwrite("tolerance", &grf::HyperboloidCovarianceStudyConfig::tolerance);

    m.def("run_truncation_study", &study_binding<grf::TruncationStudyConfig>, py::arg("config"));
    m.def("run_cheb_error_study", &study_binding<grf::ChebErrorStudyConfig>, py::arg("config"));
    m.def("run_sphere_covariance_study", &study_binding<grf::SphereCovarianceStudyConfig>,
          py::arg("config"));
    m.def("run_hyperboloid_covariance_study", &study_binding<grf::HyperboloidCovarianceStudyConfig>,
          py::arg("config"));
}
