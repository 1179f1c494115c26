#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace splatgen {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

struct Rgb {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Rigid pose of an object in the world: x_world = rotation * x_local + position.
struct RigidPose {
    Vec3 position = Vec3::Zero();
    Quat rotation = Quat::Identity();

    Vec3 apply(const Vec3& p) const { return rotation * p + position; }
};

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

} // namespace splatgen
