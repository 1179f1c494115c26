#include "splatgen/camera.hpp"

#include <cmath>
#include <numbers>

#include "splatgen/errors.hpp"

namespace splatgen {

void PinholeCamera::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) {
        throw ArgumentError("camera focal lengths must be positive");
    }
    if (!(near > 0.0) || !(near < far)) {
        throw ArgumentError("camera clip range must satisfy 0 < near < far");
    }
    if (width < 1 || height < 1) {
        throw ArgumentError("camera image size must be at least 1x1");
    }
}

PinholeCamera PinholeCamera::from_fov(int width, int height, double hfov_deg, double near,
                                      double far) {
    PinholeCamera cam;
    const double f = 0.5 * width / std::tan(0.5 * hfov_deg * std::numbers::pi / 180.0);
    cam.fx = f;
    cam.fy = f;
    cam.cx = 0.5 * width;
    cam.cy = 0.5 * height;
    cam.width = width;
    cam.height = height;
    cam.near = near;
    cam.far = far;
    cam.validate();
    return cam;
}

Pose Pose::look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
    const Vec3 forward = (target - eye).normalized();
    Vec3 right = forward.cross(up);
    if (right.norm() < 1e-12) {
        // looking along `up`; pick any perpendicular axis
        right = forward.cross(std::abs(forward.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY());
    }
    right.normalize();
    const Vec3 down = forward.cross(right);
    Mat3 r;
    r.row(0) = right.transpose();
    r.row(1) = down.transpose();
    r.row(2) = forward.transpose();
    return from_center(Quat(r).normalized(), eye);
}

Pose Pose::from_center(const Quat& world_to_cam, const Vec3& center) {
    Pose pose;
    pose.rotation = world_to_cam.normalized();
    pose.translation = -(pose.rotation * center);
    return pose;
}

std::optional<Projection> project_point(const PinholeCamera& cam, const Pose& pose, const Vec3& p) {
    const Vec3 c = pose.to_camera(p);
    if (c.z() <= cam.near) {
        return std::nullopt;
    }
    return Projection{cam.fx * c.x() / c.z() + cam.cx, cam.fy * c.y() / c.z() + cam.cy, c.z()};
}

} // namespace splatgen
