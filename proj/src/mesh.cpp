// SPDX-License-Identifier: MIT
#include "grf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace grf {

namespace {

using Vec3 = std::array<double, 3>;

inline Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

double triangle_area(const TriangleMesh& mesh, const std::array<int, 3>& tri) {
    const Vec3 e1 = sub(mesh.vertices[tri[1]], mesh.vertices[tri[0]]);
    const Vec3 e2 = sub(mesh.vertices[tri[2]], mesh.vertices[tri[0]]);
    return 0.5 * norm(cross(e1, e2));
}

void check_level(int level) {
    if (level < 0) throw std::invalid_argument("mesh generator: level must be nonnegative");
    if (level > 8) throw std::invalid_argument("mesh generator: level cap 8 exceeded");
}

}  // namespace

MeshReport validate(const TriangleMesh& mesh) {
    MeshReport report;
    report.n_vertices = mesh.n_vertices();
    report.n_triangles = mesh.n_triangles();

    const int nv = mesh.n_vertices();
    std::map<std::pair<int, int>, int> undirected;
    std::map<std::pair<int, int>, int> directed;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        bool ok = true;
        for (int c = 0; c < 3; ++c)
            if (tri[c] < 0 || tri[c] >= nv) ok = false;
        if (ok && (tri[0] == tri[1] || tri[1] == tri[2] || tri[2] == tri[0])) ok = false;
        if (!ok) {
            ++report.invalid_indices;
            continue;
        }
        for (int c = 0; c < 3; ++c) {
            const int a = tri[c], b = tri[(c + 1) % 3];
            ++directed[{a, b}];
            ++undirected[{std::min(a, b), std::max(a, b)}];
        }
    }
    report.n_edges = static_cast<long>(undirected.size());
    for (const auto& [edge, count] : undirected) {
        if (count == 1) ++report.boundary_edges;
        if (count > 2) ++report.nonmanifold_edges;
    }
    for (const auto& [edge, count] : directed)
        if (count > 1) report.orientation_conflicts += count - 1;

    if (report.invalid_indices == 0 && mesh.n_triangles() > 0) {
        std::vector<double> areas(mesh.n_triangles());
        double mean = 0.0;
        for (int t = 0; t < mesh.n_triangles(); ++t) {
            areas[t] = triangle_area(mesh, mesh.triangles[t]);
            mean += areas[t];
        }
        mean /= mesh.n_triangles();
        for (int t = 0; t < mesh.n_triangles(); ++t)
            if (areas[t] < 1e-12 * mean) report.degenerate_triangles.push_back(t);
    }
    return report;
}

double surface_area(const TriangleMesh& mesh) {
    double area = 0.0;
    for (const auto& tri : mesh.triangles) area += triangle_area(mesh, tri);
    return area;
}

TriangleMesh icosphere(int level) {
    check_level(level);

    // Unit icosahedron: three orthogonal golden rectangles; faces listed
    // counter-clockwise seen from outside.
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    TriangleMesh mesh;
    mesh.vertices = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                     {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    mesh.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

    for (int pass = 0; pass < level; ++pass) {
        std::map<std::pair<int, int>, int> midpoint;
        auto midpoint_index = [&](int a, int b) {
            const auto key = std::make_pair(std::min(a, b), std::max(a, b));
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const Vec3& pa = mesh.vertices[a];
            const Vec3& pb = mesh.vertices[b];
            mesh.vertices.push_back(
                {0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1]), 0.5 * (pa[2] + pb[2])});
            const int idx = mesh.n_vertices() - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> refined;
        refined.reserve(4 * mesh.triangles.size());
        for (const auto& tri : mesh.triangles) {
            const int m01 = midpoint_index(tri[0], tri[1]);
            const int m12 = midpoint_index(tri[1], tri[2]);
            const int m02 = midpoint_index(tri[0], tri[2]);
            refined.push_back({tri[0], m01, m02});
            refined.push_back({tri[1], m12, m01});
            refined.push_back({tri[2], m02, m12});
            refined.push_back({m01, m12, m02});
        }
        mesh.triangles = std::move(refined);
    }

    for (auto& v : mesh.vertices) {
        const double r = norm(v);
        v = {v[0] / r, v[1] / r, v[2] / r};
    }
    return mesh;
}

TriangleMesh hyperboloid(int level) {
    check_level(level);
    const int nphi = 16 << level;
    const int nz = (8 << level) + 1;

    TriangleMesh mesh;
    mesh.vertices.reserve(static_cast<std::size_t>(nphi) * nz);
    for (int iz = 0; iz < nz; ++iz) {
        const double z = -2.0 + 4.0 * iz / (nz - 1);
        const double r = std::sqrt(1.0 + z * z);
        for (int iphi = 0; iphi < nphi; ++iphi) {
            const double phi = 2.0 * M_PI * iphi / nphi;
            mesh.vertices.push_back({r * std::cos(phi), r * std::sin(phi), z});
        }
    }
    // Quad (iphi, iz)-(iphi+1, iz)-(iphi+1, iz+1)-(iphi, iz+1) split into two
    // triangles; counter-clockwise in (phi, z) is outward for this surface.
    mesh.triangles.reserve(static_cast<std::size_t>(nphi) * (nz - 1) * 2);
    auto vid = [nphi](int iz, int iphi) { return iz * nphi + (iphi % nphi); };
    for (int iz = 0; iz + 1 < nz; ++iz) {
        for (int iphi = 0; iphi < nphi; ++iphi) {
            const int a = vid(iz, iphi), b = vid(iz, iphi + 1);
            const int c = vid(iz + 1, iphi + 1), d = vid(iz + 1, iphi);
            mesh.triangles.push_back({a, b, c});
            mesh.triangles.push_back({a, c, d});
        }
    }
    return mesh;
}

TriangleMesh load_off(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_off: cannot open " + path);
    auto next_content_line = [&in](std::string& line) {
        while (std::getline(in, line)) {
            const auto pos = line.find_first_not_of(" \t\r\n");
            if (pos == std::string::npos || line[pos] == '#') continue;
            return true;
        }
        return false;
    };
    std::string line;
    if (!next_content_line(line)) throw std::runtime_error("load_off: empty file " + path);
    {
        std::istringstream ls(line);
        std::string magic;
        ls >> magic;
        if (magic != "OFF") throw std::runtime_error("load_off: malformed header (expected OFF)");
    }
    if (!next_content_line(line)) throw std::runtime_error("load_off: missing counts line");
    long nv = -1, nf = -1, ne = 0;
    {
        std::istringstream ls(line);
        if (!(ls >> nv >> nf >> ne) || nv < 0 || nf < 0)
            throw std::runtime_error("load_off: malformed counts line");
    }
    TriangleMesh mesh;
    mesh.vertices.resize(nv);
    for (long i = 0; i < nv; ++i) {
        if (!next_content_line(line)) throw std::runtime_error("load_off: truncated vertex list");
        std::istringstream ls(line);
        if (!(ls >> mesh.vertices[i][0] >> mesh.vertices[i][1] >> mesh.vertices[i][2]))
            throw std::runtime_error("load_off: malformed vertex line " + std::to_string(i));
    }
    mesh.triangles.resize(nf);
    for (long f = 0; f < nf; ++f) {
        if (!next_content_line(line)) throw std::runtime_error("load_off: truncated face list");
        std::istringstream ls(line);
        long arity = -1;
        if (!(ls >> arity)) throw std::runtime_error("load_off: malformed face line " + std::to_string(f));
        if (arity != 3)
            throw std::runtime_error("load_off: face " + std::to_string(f) + " is not a triangle");
        for (int c = 0; c < 3; ++c) {
            long idx;
            if (!(ls >> idx))
                throw std::runtime_error("load_off: malformed face line " + std::to_string(f));
            if (idx < 0 || idx >= nv)
                throw std::runtime_error("load_off: face " + std::to_string(f) +
                                         " references missing vertex " + std::to_string(idx));
            mesh.triangles[f][c] = static_cast<int>(idx);
        }
    }
    return mesh;
}

void save_off(const TriangleMesh& mesh, const std::string& path) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw std::runtime_error("save_off: cannot open " + path);
    std::fprintf(out, "OFF\n%d %d 0\n", mesh.n_vertices(), mesh.n_triangles());
    for (const auto& v : mesh.vertices)
        std::fprintf(out, "%.17g %.17g %.17g\n", v[0], v[1], v[2]);
    for (const auto& t : mesh.triangles) std::fprintf(out, "3 %d %d %d\n", t[0], t[1], t[2]);
    if (std::fclose(out) != 0) throw std::runtime_error("save_off: write failed for " + path);
}

TriangleMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_obj: cannot open " + path);
    TriangleMesh mesh;
    std::string line;
    long face = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            Vec3 v;
            if (!(ls >> v[0] >> v[1] >> v[2]))
                throw std::runtime_error("load_obj: malformed vertex line");
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<long> idx;
            std::string token;
            while (ls >> token) {
                // "i", "i/t", "i/t/n", "i//n" all start with the vertex index
                idx.push_back(std::stol(token.substr(0, token.find('/'))));
            }
            if (idx.size() != 3)
                throw std::runtime_error("load_obj: face " + std::to_string(face) +
                                         " is not a triangle");
            std::array<int, 3> tri;
            for (int c = 0; c < 3; ++c) {
                if (idx[c] < 1 || idx[c] > mesh.n_vertices())
                    throw std::runtime_error("load_obj: face " + std::to_string(face) +
                                             " references missing vertex " + std::to_string(idx[c]));
                tri[c] = static_cast<int>(idx[c] - 1);
            }
            mesh.triangles.push_back(tri);
            ++face;
        }
    }
    return mesh;
}

std::uint64_t content_hash(const TriangleMesh& mesh) {
    std::uint64_t hash = 14695981039346656037ull;
    auto mix = [&hash](const char* data, std::size_t size) {
        for (std::size_t i = 0; i < size; ++i) {
            hash ^= static_cast<unsigned char>(data[i]);
            hash *= 1099511628211ull;
        }
    };
    char buf[128];
    for (const auto& v : mesh.vertices) {
        const int len = std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v[0], v[1], v[2]);
        mix(buf, static_cast<std::size_t>(len));
    }
    for (const auto& t : mesh.triangles) {
        const int len = std::snprintf(buf, sizeof buf, "t %d %d %d\n", t[0], t[1], t[2]);
        mix(buf, static_cast<std::size_t>(len));
    }
    return hash;
}

SurfacePoint locate_along_ray(const TriangleMesh& mesh, const Vec3& direction) {
    const double dn = norm(direction);
    if (!(dn > 0.0)) throw std::invalid_argument("locate_along_ray: zero direction");
    const Vec3 d = {direction[0] / dn, direction[1] / dn, direction[2] / dn};

    constexpr double kEps = 1e-12;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec3& p0 = mesh.vertices[tri[0]];
        const Vec3 e1 = sub(mesh.vertices[tri[1]], p0);
        const Vec3 e2 = sub(mesh.vertices[tri[2]], p0);
        const Vec3 h = cross(d, e2);
        const double det = dot(e1, h);
        if (std::fabs(det) < 1e-14) continue;
        const double inv = 1.0 / det;
        const Vec3 s = {-p0[0], -p0[1], -p0[2]};  // ray origin is (0,0,0)
        const double u = inv * dot(s, h);
        if (u < -kEps || u > 1.0 + kEps) continue;
        const Vec3 q = cross(s, e1);
        const double v = inv * dot(d, q);
        if (v < -kEps || u + v > 1.0 + kEps) continue;
        const double dist = inv * dot(e2, q);
        if (dist <= kEps) continue;

        SurfacePoint point;
        point.triangle = t;
        point.vertex = tri;
        point.weight = {1.0 - u - v, u, v};
        // tiny negative barycentrics from edge hits are clamped; hat values
        // are nonnegative by definition
        double sum = 0.0;
        for (double& w : point.weight) {
            if (w < 0.0) w = 0.0;
            sum += w;
        }
        for (double& w : point.weight) w /= sum;
        return point;
    }
    throw std::runtime_error("locate_along_ray: ray misses the mesh");
}

}  // namespace grf
