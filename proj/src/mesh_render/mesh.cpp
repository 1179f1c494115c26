#include "splatgen/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "splatgen/errors.hpp"

namespace splatgen {

void TriMesh::validate() const {
    if (instance_id == 0) {
        throw ArgumentError("mesh instance id must be positive");
    }
    for (const Vec3& v : vertices) {
        if (!v.allFinite()) {
            throw DataError("mesh has a non-finite vertex");
        }
    }
    const auto n = static_cast<std::uint32_t>(vertices.size());
    for (const auto& t : triangles) {
        if (t[0] >= n || t[1] >= n || t[2] >= n) {
            throw ArgumentError("mesh triangle index out of range");
        }
    }
}

Vec3 TriMesh::centroid() const {
    Vec3 c = Vec3::Zero();
    if (vertices.empty()) {
        return c;
    }
    for (const Vec3& v : vertices) {
        c += v;
    }
    return c / static_cast<double>(vertices.size());
}

Vec3 TriMesh::bounds_min() const {
    Vec3 m = Vec3::Constant(std::numeric_limits<double>::infinity());
    for (const Vec3& v : vertices) {
        m = m.cwiseMin(v);
    }
    return m;
}

Vec3 TriMesh::bounds_max() const {
    Vec3 m = Vec3::Constant(-std::numeric_limits<double>::infinity());
    for (const Vec3& v : vertices) {
        m = m.cwiseMax(v);
    }
    return m;
}

PosedMesh PosedMesh::of(std::shared_ptr<const TriMesh> mesh, const RigidPose& pose) {
    PosedMesh p;
    p.instance = mesh->instance_id;
    p.class_id = mesh->class_id;
    p.mesh = std::move(mesh);
    p.pose = pose;
    return p;
}

TriMesh transformed(const TriMesh& mesh, const RigidPose& pose) {
    TriMesh out = mesh;
    for (Vec3& v : out.vertices) {
        v = pose.apply(v);
    }
    return out;
}

TriMesh load_obj(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    TriMesh mesh;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag) || tag[0] == '#') {
            continue;
        }
        if (tag == "v") {
            Vec3 v;
            if (!(ss >> v.x() >> v.y() >> v.z())) {
                throw FormatError(path.string() + ":" + std::to_string(line_no) +
                                  ": malformed vertex record");
            }
            if (!v.allFinite()) {
                throw DataError(path.string() + ":" + std::to_string(line_no) +
                                ": non-finite vertex");
            }
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<std::uint32_t> poly;
            std::string tok;
            while (ss >> tok) {
                // v, v/vt, v//vn, v/vt/vn
                const long idx = std::stol(tok.substr(0, tok.find('/')));
                const long n = static_cast<long>(mesh.vertices.size());
                const long resolved = idx > 0 ? idx - 1 : n + idx;
                if (idx == 0 || resolved < 0 || resolved >= n) {
                    throw FormatError(path.string() + ":" + std::to_string(line_no) +
                                      ": face index out of range");
                }
                poly.push_back(static_cast<std::uint32_t>(resolved));
            }
            if (poly.size() < 3) {
                throw FormatError(path.string() + ":" + std::to_string(line_no) +
                                  ": face with fewer than 3 vertices");
            }
            for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
                mesh.triangles.push_back({poly[0], poly[i], poly[i + 1]});
            }
        }
    }
    return mesh;
}

void save_obj(const TriMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open " + path.string());
    }
    char buf[128];
    for (const Vec3& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        out << buf;
    }
    for (const auto& t : mesh.triangles) {
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    }
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

TriMesh make_box(const Vec3& h) {
    TriMesh m;
    for (int i = 0; i < 8; ++i) {
        m.vertices.emplace_back((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(),
                                (i & 4) ? h.z() : -h.z());
    }
    // outward-facing, counter-clockwise seen from outside
    m.triangles = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}, {0, 1, 5}, {0, 5, 4},
                   {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
    return m;
}

TriMesh make_uv_sphere(double radius, int stacks, int slices) {
    TriMesh m;
    m.vertices.emplace_back(0.0, 0.0, radius);
    for (int i = 1; i < stacks; ++i) {
        const double theta = std::numbers::pi * i / stacks;
        for (int j = 0; j < slices; ++j) {
            const double phi = 2.0 * std::numbers::pi * j / slices;
            m.vertices.emplace_back(radius * std::sin(theta) * std::cos(phi),
                                    radius * std::sin(theta) * std::sin(phi),
                                    radius * std::cos(theta));
        }
    }
    m.vertices.emplace_back(0.0, 0.0, -radius);
    const auto bottom = static_cast<std::uint32_t>(m.vertices.size() - 1);
    auto ring = [&](int i, int j) {
        return static_cast<std::uint32_t>(1 + (i - 1) * slices + ((j % slices) + slices) % slices);
    };
    for (int j = 0; j < slices; ++j) {
        m.triangles.push_back({0, ring(1, j), ring(1, j + 1)});
    }
    for (int i = 1; i + 1 < stacks; ++i) {
        for (int j = 0; j < slices; ++j) {
            m.triangles.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
            m.triangles.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
        }
    }
    for (int j = 0; j < slices; ++j) {
        m.triangles.push_back({bottom, ring(stacks - 1, j + 1), ring(stacks - 1, j)});
    }
    return m;
}

TriMesh make_quad(double half_size) {
    TriMesh m;
    m.vertices = {Vec3(-half_size, -half_size, 0.0), Vec3(half_size, -half_size, 0.0),
                  Vec3(half_size, half_size, 0.0), Vec3(-half_size, half_size, 0.0)};
    m.triangles = {{0, 1, 2}, {0, 2, 3}};
    return m;
}

} // namespace splatgen
