// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/SparseCore>
#include <string>

#include "grf/mesh.hpp"

namespace grf {

// Symmetric sparse matrix in the L2 pairing of the linear (hat) element
// space: one row/column per mesh vertex. Both triangles of the pattern are
// stored and equal, so Eigen operations see the full matrix. Immutable
// after assembly.
struct SparseSymMatrix {
    Eigen::SparseMatrix<double> m;

    int n() const { return static_cast<int>(m.rows()); }
    double norm_max() const;  // largest absolute entry
};

// Mass matrix C = [(psi_k, psi_l)] for hat functions: each triangle of
// area A contributes A/6 on the diagonal and A/12 off-diagonal for its
// three vertices. Degenerate triangles (area < 1e-12 * mean) abort with
// the triangle index: skipping them silently would corrupt the spectrum.
SparseSymMatrix assemble_mass(const TriangleMesh& mesh);

// Stiffness matrix R = [(grad psi_k, grad psi_l)] from the in-plane hat
// gradients of each embedded triangle: with e_i the edge opposite vertex i
// (counter-clockwise), the local block is (e_i . e_j) / (4 A). Constants
// lie in the kernel (rows sum to zero).
SparseSymMatrix assemble_stiffness(const TriangleMesh& mesh);

// Lumped mass: diagonal with entries (psi_i, 1) = one third of the total
// area of the triangles around vertex i; equals the row sums of C, and its
// trace is the surface area.
SparseSymMatrix lumped_mass(const TriangleMesh& mesh);

// MatrixMarket coordinate output (symmetric, lower triangle) for external
// verification.
void save_matrix_market(const SparseSymMatrix& matrix, const std::string& path);

}  // namespace grf
