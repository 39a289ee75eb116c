// SPDX-License-Identifier: MIT
#include "grf/fem.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace grf {

namespace {

using Triplet = Eigen::Triplet<double>;
using Vec3 = std::array<double, 3>;

inline Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

struct TriangleGeometry {
    double area;
    Vec3 edge[3];  // edge[i] runs opposite vertex i: (v_{i+1} -> v_{i+2})
};

TriangleGeometry geometry(const TriangleMesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    TriangleGeometry g;
    for (int i = 0; i < 3; ++i)
        g.edge[i] = sub(mesh.vertices[tri[(i + 2) % 3]], mesh.vertices[tri[(i + 1) % 3]]);
    const Vec3 n = cross(g.edge[1], g.edge[2]);
    g.area = 0.5 * std::sqrt(dot(n, n));
    return g;
}

double mean_area(const TriangleMesh& mesh) {
    if (mesh.n_triangles() == 0) throw std::invalid_argument("assembly: mesh has no triangles");
    double total = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) total += geometry(mesh, t).area;
    return total / mesh.n_triangles();
}

void check_degenerate(double area, double mean, int t) {
    if (area < 1e-12 * mean)
        throw std::invalid_argument("assembly: degenerate triangle " + std::to_string(t));
}

SparseSymMatrix from_triplets(int n, const std::vector<Triplet>& triplets) {
    SparseSymMatrix matrix;
    matrix.m.resize(n, n);
    matrix.m.setFromTriplets(triplets.begin(), triplets.end());
    matrix.m.makeCompressed();
    return matrix;
}

}  // namespace

double SparseSymMatrix::norm_max() const {
    double best = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
            best = std::max(best, std::fabs(it.value()));
    return best;
}

SparseSymMatrix assemble_mass(const TriangleMesh& mesh) {
    const double mean = mean_area(mesh);
    std::vector<Triplet> triplets;
    triplets.reserve(9 * mesh.triangles.size());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto g = geometry(mesh, t);
        check_degenerate(g.area, mean, t);
        const auto& tri = mesh.triangles[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                triplets.emplace_back(tri[i], tri[j], (i == j) ? g.area / 6.0 : g.area / 12.0);
    }
    return from_triplets(mesh.n_vertices(), triplets);
}

SparseSymMatrix assemble_stiffness(const TriangleMesh& mesh) {
    const double mean = mean_area(mesh);
    std::vector<Triplet> triplets;
    triplets.reserve(9 * mesh.triangles.size());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto g = geometry(mesh, t);
        check_degenerate(g.area, mean, t);
        const auto& tri = mesh.triangles[t];
        const double scale = 1.0 / (4.0 * g.area);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                triplets.emplace_back(tri[i], tri[j], scale * dot(g.edge[i], g.edge[j]));
    }
    return from_triplets(mesh.n_vertices(), triplets);
}

SparseSymMatrix lumped_mass(const TriangleMesh& mesh) {
    const double mean = mean_area(mesh);
    std::vector<Triplet> triplets;
    triplets.reserve(3 * mesh.triangles.size());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto g = geometry(mesh, t);
        check_degenerate(g.area, mean, t);
        for (int c = 0; c < 3; ++c)
            triplets.emplace_back(mesh.triangles[t][c], mesh.triangles[t][c], g.area / 3.0);
    }
    return from_triplets(mesh.n_vertices(), triplets);
}

void save_matrix_market(const SparseSymMatrix& matrix, const std::string& path) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw std::runtime_error("save_matrix_market: cannot open " + path);
    long nnz_lower = 0;
    for (int k = 0; k < matrix.m.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(matrix.m, k); it; ++it)
            if (it.row() >= it.col()) ++nnz_lower;
    std::fprintf(out, "%%%%MatrixMarket matrix coordinate real symmetric\n");
    std::fprintf(out, "%d %d %ld\n", matrix.n(), matrix.n(), nnz_lower);
    for (int k = 0; k < matrix.m.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(matrix.m, k); it; ++it)
            if (it.row() >= it.col())
                std::fprintf(out, "%ld %ld %.17g\n", static_cast<long>(it.row()) + 1,
                             static_cast<long>(it.col()) + 1, it.value());
    if (std::fclose(out) != 0) throw std::runtime_error("save_matrix_market: write failed");
}

}  // namespace grf
