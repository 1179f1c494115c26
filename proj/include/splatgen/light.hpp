#pragma once

#include "splatgen/math.hpp"

namespace splatgen {

enum class LightKind { directional, point };

/// Scene light. For directional lights `direction` is the direction light travels
/// (from the light into the scene) and `position` is ignored.
struct LightRig {
    LightKind kind = LightKind::directional;
    Vec3 direction = Vec3(0.0, 0.0, -1.0);
    Vec3 position = Vec3(0.0, 0.0, 5.0);
    Rgb color{1.0, 1.0, 1.0};
    double intensity = 1.0;
    double ambient = 0.3;

    void validate() const;

    /// Unit vector from `p` toward the light.
    Vec3 to_light(const Vec3& p) const;

    static LightRig directional_light(const Vec3& dir, double ambient = 0.3);
    static LightRig point_light(const Vec3& pos, double ambient = 0.3);
};

} // namespace splatgen
