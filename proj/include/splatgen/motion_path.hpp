#pragma once

#include <vector>

#include "splatgen/math.hpp"

namespace splatgen {

enum class Interpolation { linear, catmull_rom };

/// A keyframed state. For cameras `position` is the eye and `rotation` the
/// world-to-camera rotation; for lights `position` holds the light position or
/// direction and `rotation` is unused.
struct PathState {
    Vec3 position = Vec3::Zero();
    Quat rotation = Quat::Identity();
};

struct Keyframe {
    double time = 0.0;
    PathState state;
};

class MotionPath {
public:
    MotionPath(std::vector<Keyframe> keys, Interpolation interp = Interpolation::linear);

    const std::vector<Keyframe>& keyframes() const { return keys_; }
    Interpolation interpolation() const { return interp_; }

    /// Exact keyframe values at knots, clamped outside the keyframe span.
    PathState sample(double t) const;

private:
    std::vector<Keyframe> keys_;
    Interpolation interp_;
};

/// Time parameter for frame i of n: i/(n-1), or 0 for a single frame.
double frame_time(int index, int count);

} // namespace splatgen
