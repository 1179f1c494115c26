#pragma once

#include <optional>
#include <vector>

#include "splatgen/math.hpp"

namespace splatgen {

/// Pinhole intrinsics. Camera frame is right-handed, looks down +z, v grows downward.
struct PinholeCamera {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 1;
    int height = 1;
    double near = 0.01;
    double far = 100.0;

    /// Throws ArgumentError when an invariant is violated.
    void validate() const;

    /// Camera with a horizontal field of view (degrees) and the principal point at the centre.
    static PinholeCamera from_fov(int width, int height, double hfov_deg, double near = 0.01,
                                  double far = 100.0);
};

/// World-to-camera transform: x_cam = rotation * x_world + translation.
struct Pose {
    Quat rotation = Quat::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }
    Vec3 to_world(const Vec3& cam) const { return rotation.conjugate() * (cam - translation); }
    Vec3 camera_center() const { return -(rotation.conjugate() * translation); }

    /// Pose of a camera at `eye` looking at `target` with `up` roughly upward in the image.
    static Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3::UnitZ());
    static Pose from_center(const Quat& world_to_cam, const Vec3& center);
};

struct Projection {
    double u = 0.0;
    double v = 0.0;
    double depth = 0.0;
};

/// Projects a world point. Returns nullopt when the point is at or behind the near plane.
std::optional<Projection> project_point(const PinholeCamera& cam, const Pose& pose, const Vec3& p);

} // namespace splatgen
