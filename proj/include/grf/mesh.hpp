// SPDX-License-Identifier: MIT
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace grf {

// Oriented triangulated surface embedded in 3-space. Triangles are
// counter-clockwise with respect to the outward orientation. Meshes are
// treated as immutable once constructed or loaded; validate() checks the
// structural invariants (closedness, orientation, index ranges, degenerate
// triangles) and generators/IO produce meshes that pass it.
struct TriangleMesh {
    std::vector<std::array<double, 3>> vertices;
    std::vector<std::array<int, 3>> triangles;

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_triangles() const { return static_cast<int>(triangles.size()); }
};

// Structural report from validate(). A closed, consistently oriented mesh
// with sane indices and no degenerate triangles satisfies ok(). Meshes with
// boundary (the hyperboloid) are legitimate: ok_with_boundary() ignores
// closedness but still rejects non-manifold edges, orientation conflicts,
// bad indices and degenerate triangles.
struct MeshReport {
    int n_vertices = 0;
    int n_triangles = 0;
    long n_edges = 0;
    long boundary_edges = 0;        // edges on exactly 1 triangle
    long nonmanifold_edges = 0;     // edges on 3+ triangles
    long orientation_conflicts = 0; // directed edge seen twice
    long invalid_indices = 0;       // out of range or repeated within a triangle
    std::vector<int> degenerate_triangles;  // area < 1e-12 * mean area

    bool is_closed() const { return boundary_edges == 0 && nonmanifold_edges == 0; }
    bool ok_with_boundary() const {
        return nonmanifold_edges == 0 && orientation_conflicts == 0 && invalid_indices == 0 &&
               degenerate_triangles.empty() && n_triangles > 0;
    }
    bool ok() const { return ok_with_boundary() && is_closed(); }
};

MeshReport validate(const TriangleMesh& mesh);

// Sum of triangle areas.
double surface_area(const TriangleMesh& mesh);

// Regular icosahedron subdivided `level` times (each triangle into 4, new
// vertices de-duplicated per edge), every vertex projected radially onto
// the unit sphere. V = 10*4^level + 2, F = 20*4^level. level <= 8.
TriangleMesh icosphere(int level);

// One-sheet hyperboloid x^2 + y^2 - z^2 = 1 with z in [-2,2], meshed as a
// structured grid of 2^(level+4) angular by 2^(level+3)+1 axial vertices
// (base resolution 16 x 9, doubled per level), each quad split into two
// triangles. The two rings at z = +-2 are open boundary; downstream
// assembly imposes no condition there (natural boundary). level <= 8.
TriangleMesh hyperboloid(int level);

// ASCII OFF I/O. save_off prints coordinates at 17 significant digits so a
// save/load round trip is bit-identical. Malformed headers, non-triangle
// faces and out-of-range indices raise distinct errors naming the face.
TriangleMesh load_off(const std::string& path);
void save_off(const TriangleMesh& mesh, const std::string& path);

// OBJ subset import: `v x y z` and `f i j k` lines (1-based indices,
// optional /texture/normal suffixes ignored). Triangles only.
TriangleMesh load_obj(const std::string& path);

// FNV-1a hash over the canonical 17-digit text form of vertices and
// triangles; identifies a mesh in sample metadata sidecars.
std::uint64_t content_hash(const TriangleMesh& mesh);

// Barycentric hat-function weights at the point where the ray from the
// origin through `direction` pierces the mesh (both generated geometries
// are star-shaped around the origin). Returns the triangle index and the
// three (vertex index, weight) pairs; throws if no triangle is hit.
struct SurfacePoint {
    int triangle = -1;
    std::array<int, 3> vertex = {-1, -1, -1};
    std::array<double, 3> weight = {0.0, 0.0, 0.0};
};
SurfacePoint locate_along_ray(const TriangleMesh& mesh, const std::array<double, 3>& direction);

}  // namespace grf
