// SPDX-License-Identifier: MIT
#include "grf/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "doctest.h"

using grf::MeshReport;
using grf::TriangleMesh;
using grf::validate;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

TriangleMesh two_triangle_square() {
    TriangleMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    m.triangles = {{0, 1, 2}, {0, 2, 3}};
    return m;
}

}  // namespace

TEST_CASE("icosphere counts, closedness and unit radius") {
    for (int level = 0; level <= 3; ++level) {
        const TriangleMesh m = grf::icosphere(level);
        const int expected_v = 10 * (1 << (2 * level)) + 2;
        CHECK(m.n_vertices() == expected_v);
        CHECK(m.n_triangles() == 20 * (1 << (2 * level)));
        const MeshReport r = validate(m);
        CHECK(r.ok());
        // Euler characteristic of the sphere: V - E + F = 2
        CHECK(m.n_vertices() - r.n_edges + m.n_triangles() == 2);
        for (const auto& v : m.vertices) {
            const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
            CHECK(norm == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
    CHECK_THROWS_AS(grf::icosphere(-1), std::invalid_argument);
    CHECK_THROWS_AS(grf::icosphere(9), std::invalid_argument);
}

TEST_CASE("icosphere area converges to the sphere area from below") {
    double prev = 0.0;
    for (int level = 0; level <= 4; ++level) {
        const double area = grf::surface_area(grf::icosphere(level));
        CHECK(area > prev);
        CHECK(area < 4.0 * M_PI);
        prev = area;
    }
    CHECK(prev == doctest::Approx(4.0 * M_PI).epsilon(2e-3));
}

TEST_CASE("icosphere orientation is outward") {
    const TriangleMesh m = grf::icosphere(1);
    for (const auto& t : m.triangles) {
        const auto& a = m.vertices[t[0]];
        const auto& b = m.vertices[t[1]];
        const auto& c = m.vertices[t[2]];
        const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
        const double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
        const double nx = uy * vz - uz * vy;
        const double ny = uz * vx - ux * vz;
        const double nz = ux * vy - uy * vx;
        // outward normal has positive dot with the centroid direction
        CHECK(nx * (a[0] + b[0] + c[0]) + ny * (a[1] + b[1] + c[1]) +
                  nz * (a[2] + b[2] + c[2]) >
              0.0);
    }
}

TEST_CASE("hyperboloid counts, boundary and surface equation") {
    for (int level = 0; level <= 2; ++level) {
        const TriangleMesh m = grf::hyperboloid(level);
        const int nphi = 16 << level;
        const int nz = (8 << level) + 1;
        CHECK(m.n_vertices() == nphi * nz);
        CHECK(m.n_triangles() == 2 * nphi * (nz - 1));
        const MeshReport r = validate(m);
        CHECK(r.ok_with_boundary());
        CHECK_FALSE(r.is_closed());
        CHECK(r.boundary_edges == 2 * nphi);  // the two rings at z = +-2
        for (const auto& v : m.vertices) {
            CHECK(v[0] * v[0] + v[1] * v[1] - v[2] * v[2] == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(std::abs(v[2]) <= 2.0 + 1e-15);
        }
    }
    CHECK_THROWS_AS(grf::hyperboloid(-1), std::invalid_argument);
    CHECK_THROWS_AS(grf::hyperboloid(9), std::invalid_argument);
}

TEST_CASE("validate flags structural defects") {
    // open square: boundary but consistent orientation
    const MeshReport open_ok = validate(two_triangle_square());
    CHECK(open_ok.ok_with_boundary());
    CHECK_FALSE(open_ok.is_closed());
    CHECK(open_ok.boundary_edges == 4);
    CHECK(open_ok.n_edges == 5);

    // flipped second triangle: the shared edge is traversed twice the same way
    TriangleMesh flipped = two_triangle_square();
    flipped.triangles[1] = {0, 3, 2};
    CHECK(validate(flipped).orientation_conflicts > 0);
    CHECK_FALSE(validate(flipped).ok_with_boundary());

    // non-manifold: three triangles share one edge
    TriangleMesh fan = two_triangle_square();
    fan.vertices.push_back({0.5, 0.5, 1.0});
    fan.triangles = {{0, 1, 2}, {2, 1, 0}, {0, 1, 4}};
    CHECK(validate(fan).nonmanifold_edges > 0);

    // degenerate: repeated vertex coordinates give zero area
    TriangleMesh degen = two_triangle_square();
    degen.vertices[3] = degen.vertices[0];
    CHECK_FALSE(validate(degen).degenerate_triangles.empty());

    // invalid index
    TriangleMesh bad = two_triangle_square();
    bad.triangles[0] = {0, 1, 9};
    CHECK(validate(bad).invalid_indices > 0);
    TriangleMesh repeated = two_triangle_square();
    repeated.triangles[0] = {0, 1, 1};
    CHECK(validate(repeated).invalid_indices > 0);
}

TEST_CASE("off round trip is bit identical") {
    const TriangleMesh m = grf::icosphere(1);
    const std::string path = temp_path("grf_test_roundtrip.off");
    grf::save_off(m, path);
    const TriangleMesh back = grf::load_off(path);
    REQUIRE(back.n_vertices() == m.n_vertices());
    REQUIRE(back.n_triangles() == m.n_triangles());
    CHECK(back.vertices == m.vertices);
    CHECK(back.triangles == m.triangles);
    CHECK(grf::content_hash(back) == grf::content_hash(m));
    std::remove(path.c_str());
}

TEST_CASE("off loader errors name the defect") {
    auto write_file = [](const std::string& path, const std::string& text) {
        std::ofstream out(path);
        out << text;
    };
    const std::string path = temp_path("grf_test_bad.off");

    write_file(path, "NOTOFF\n3 1 0\n");
    CHECK_THROWS_WITH_AS(grf::load_off(path), doctest::Contains("header"),
                         std::runtime_error);

    write_file(path, "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2 3\n");
    CHECK_THROWS_WITH_AS(grf::load_off(path), doctest::Contains("not a triangle"),
                         std::runtime_error);

    write_file(path, "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n");
    CHECK_THROWS_WITH_AS(grf::load_off(path), doctest::Contains("missing vertex"),
                         std::runtime_error);

    write_file(path, "OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
    CHECK_THROWS_AS(grf::load_off(path), std::runtime_error);  // truncated vertex list

    CHECK_THROWS_AS(grf::load_off(temp_path("grf_does_not_exist.off")), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("obj subset loads vertices and faces") {
    const std::string path = temp_path("grf_test_subset.obj");
    {
        std::ofstream out(path);
        out << "# comment\n"
               "v 0 0 0\n"
               "v 1 0 0\n"
               "v 0 1 0\n"
               "vn 0 0 1\n"
               "f 1/1/1 2/2/1 3/3/1\n";
    }
    const TriangleMesh m = grf::load_obj(path);
    CHECK(m.n_vertices() == 3);
    REQUIRE(m.n_triangles() == 1);
    CHECK(m.triangles[0] == std::array<int, 3>{0, 1, 2});
    std::remove(path.c_str());
}

TEST_CASE("content hash separates meshes and sticks to content") {
    const TriangleMesh a = grf::icosphere(0);
    const TriangleMesh b = grf::icosphere(1);
    CHECK(grf::content_hash(a) != grf::content_hash(b));
    TriangleMesh c = a;
    CHECK(grf::content_hash(c) == grf::content_hash(a));
    c.vertices[0][0] += 1e-12;
    CHECK(grf::content_hash(c) != grf::content_hash(a));
}

TEST_CASE("ray location reproduces vertices and interpolates linearly") {
    const TriangleMesh m = grf::icosphere(2);
    // through a vertex: that vertex carries all the weight
    const auto& v0 = m.vertices[17];
    const grf::SurfacePoint at_vertex = grf::locate_along_ray(m, v0);
    double w_at = 0.0;
    for (int k = 0; k < 3; ++k)
        if (at_vertex.vertex[k] == 17) w_at += at_vertex.weight[k];
    CHECK(w_at == doctest::Approx(1.0).epsilon(1e-9));

    // generic directions: weights are a partition of unity inside the
    // triangle and reproduce linear functions of the pierce point
    for (const auto dir : {std::array<double, 3>{0.3, -0.2, 0.93},
                           std::array<double, 3>{-0.7, 0.1, -0.4},
                           std::array<double, 3>{0.0, 0.0, 1.0}}) {
        const grf::SurfacePoint p = grf::locate_along_ray(m, dir);
        REQUIRE(p.triangle >= 0);
        double sum = 0.0;
        std::array<double, 3> point = {0, 0, 0};
        for (int k = 0; k < 3; ++k) {
            CHECK(p.weight[k] >= 0.0);
            sum += p.weight[k];
            for (int d = 0; d < 3; ++d) point[d] += p.weight[k] * m.vertices[p.vertex[k]][d];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        // the interpolated point lies on the ray
        const double pn = std::sqrt(point[0] * point[0] + point[1] * point[1] +
                                    point[2] * point[2]);
        const double dn = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
        const double dot = (point[0] * dir[0] + point[1] * dir[1] + point[2] * dir[2]) / (pn * dn);
        CHECK(dot == doctest::Approx(1.0).epsilon(1e-9));
    }

    CHECK_THROWS_AS(grf::locate_along_ray(two_triangle_square(), {0.0, 0.0, 1.0}),
                    std::runtime_error);
}
