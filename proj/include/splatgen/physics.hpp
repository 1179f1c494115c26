#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "splatgen/math.hpp"
#include "splatgen/mesh.hpp"
#include "splatgen/splat.hpp"

namespace splatgen {

/// A dropped object. The body frame is centred on the mesh centroid; collisions use the
/// bounding sphere against walls and other bodies, and mesh vertices against support planes.
struct RigidBody {
    std::shared_ptr<const TriMesh> mesh;
    std::size_t asset = 0;
    std::uint32_t instance_id = 1;
    std::uint32_t class_id = 0;
    RigidPose pose;  // centroid position and orientation
    Vec3 linear_velocity = Vec3::Zero();
    Vec3 angular_velocity = Vec3::Zero();
    double mass = 1.0;
    double collision_radius = 1.0;
    Vec3 mesh_centroid = Vec3::Zero();

    /// Builds a body from a mesh placed so that its centroid sits at `pose.position`.
    static RigidBody from_mesh(std::shared_ptr<const TriMesh> mesh, const RigidPose& pose,
                               double mass = 1.0);

    /// Pose mapping mesh coordinates to the world.
    RigidPose mesh_pose() const;
    double inverse_inertia() const;
    double kinetic_energy() const;
    PosedMesh posed() const;
};

enum class ColliderKind { plane, box };

struct StaticCollider {
    ColliderKind kind = ColliderKind::plane;
    Vec3 point = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();
    Vec3 box_min = Vec3::Zero();
    Vec3 box_max = Vec3::Zero();
    bool visible_in_shadow_pass = false;
    /// Mesh vertices rest on this plane (the table); other planes see bounding spheres.
    bool supports_vertices = false;

    double signed_distance(const Vec3& p) const { return normal.dot(p - point); }
};

struct PhysicsParams {
    Vec3 gravity = Vec3(0.0, 0.0, -9.81);
    double restitution = 0.1;
    double friction = 0.6;
    double dt = 1.0 / 120.0;
    int solver_iterations = 20;
    /// Allowed resting penetration left after positional correction.
    double slop = 5e-4;
    /// Approach speed below which contacts do not bounce.
    double bounce_threshold = 0.2;
    /// Exponential decay rates per second.
    double linear_damping = 0.0;
    double angular_damping = 0.5;
};

struct WorldState {
    std::vector<RigidBody> bodies;
    std::vector<StaticCollider> colliders;
    PhysicsParams params;
    double time = 0.0;

    double kinetic_energy() const;
};

/// Table plane at the workspace floor plus four inward-facing invisible walls.
std::vector<StaticCollider> build_enclosure(const Vec3& workspace_min, const Vec3& workspace_max);

struct SpawnAsset {
    std::shared_ptr<const TriMesh> mesh;
    std::uint32_t class_id = 0;
    double mass = 1.0;
};

struct CountRange {
    int min = 1;
    int max = 1;
};

/// Drops a seeded random number of objects over the table with uniform random yaw/pitch/roll
/// and non-overlapping bounding spheres. Instance ids are 1..n in spawn order.
/// Throws PlacementError when a body cannot be placed in 1000 attempts.
WorldState spawn_objects(std::span<const SpawnAsset> assets, CountRange count,
                         const Vec3& workspace_min, const Vec3& workspace_max, std::uint64_t seed,
                         const PhysicsParams& params = {});

/// One semi-implicit Euler step with sequential-impulse contacts.
WorldState step(const WorldState& world, double dt);
void step_in_place(WorldState& world, double dt);

inline constexpr int kDefaultMaxSettleSteps = 2400;
inline constexpr double kDefaultKeThreshold = 1e-5;
inline constexpr int kSettleQuietSteps = 30;

struct SettleResult {
    WorldState world;
    bool converged = false;
    int steps = 0;
};

/// Steps at params.dt until the kinetic energy stays below `ke_threshold` for 30
/// consecutive steps or `max_steps` is reached.
SettleResult settle(WorldState world, int max_steps = kDefaultMaxSettleSteps,
                    double ke_threshold = kDefaultKeThreshold);

/// Moves an object's splat (in its mesh frame) to the mesh's settled pose.
SplatCloud sync_splat_to_mesh(const SplatCloud& asset_splat, const RigidPose& mesh_pose,
                              ShRotation mode = ShRotation::full);

} // namespace splatgen
