#include "splatgen/light.hpp"

#include <cmath>

#include "splatgen/errors.hpp"

namespace splatgen {

void LightRig::validate() const {
    if (kind == LightKind::directional && std::abs(direction.norm() - 1.0) > 1e-9) {
        throw ArgumentError("directional light direction must be unit length");
    }
    if (!(intensity >= 0.0)) {
        throw ArgumentError("light intensity must be non-negative");
    }
    if (!(ambient >= 0.0 && ambient <= 1.0)) {
        throw ArgumentError("light ambient term must lie in [0,1]");
    }
    for (double c : {color.r, color.g, color.b}) {
        if (!(c >= 0.0 && c <= 1.0)) {
            throw ArgumentError("light colour channels must lie in [0,1]");
        }
    }
}

Vec3 LightRig::to_light(const Vec3& p) const {
    if (kind == LightKind::directional) {
        return -direction;
    }
    const Vec3 d = position - p;
    const double n = d.norm();
    return n > 0.0 ? Vec3(d / n) : Vec3(Vec3::UnitZ());
}

LightRig LightRig::directional_light(const Vec3& dir, double ambient) {
    LightRig l;
    l.kind = LightKind::directional;
    l.direction = dir.normalized();
    l.ambient = ambient;
    return l;
}

LightRig LightRig::point_light(const Vec3& pos, double ambient) {
    LightRig l;
    l.kind = LightKind::point;
    l.position = pos;
    l.ambient = ambient;
    return l;
}

} // namespace splatgen
