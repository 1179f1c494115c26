#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "splatgen/math.hpp"

namespace splatgen {

/// Proxy triangle mesh used for physics, shadows and instance ids.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;
    std::uint32_t instance_id = 1;
    std::uint32_t class_id = 0;

    /// Throws ArgumentError on out-of-range indices, non-finite vertices, or zero instance id.
    void validate() const;

    Vec3 centroid() const;
    Vec3 bounds_min() const;
    Vec3 bounds_max() const;
};

/// Mesh placed in the world by a rigid pose. The mesh itself is shared, not copied, so the
/// same asset can appear several times under different instance ids.
struct PosedMesh {
    std::shared_ptr<const TriMesh> mesh;
    RigidPose pose;
    std::uint32_t instance = 1;
    std::uint32_t class_id = 0;

    std::uint32_t instance_id() const { return instance; }

    /// Places `mesh` with its own instance and class ids.
    static PosedMesh of(std::shared_ptr<const TriMesh> mesh, const RigidPose& pose = {});
};

TriMesh transformed(const TriMesh& mesh, const RigidPose& pose);

/// ASCII OBJ: v and f records, 1-based (or negative relative) indices, polygons fan-triangulated.
TriMesh load_obj(const std::filesystem::path& path);
/// Writes vertices with 17 significant digits so a reload reproduces them exactly.
void save_obj(const TriMesh& mesh, const std::filesystem::path& path);

// Procedural shapes, all centred on the origin.
TriMesh make_box(const Vec3& half_extents);
TriMesh make_uv_sphere(double radius, int stacks, int slices);
/// Square in the z = 0 plane, normal +z.
TriMesh make_quad(double half_size);

} // namespace splatgen
