#include "splatgen/motion_path.hpp"

#include <algorithm>

#include "splatgen/errors.hpp"

namespace splatgen {

MotionPath::MotionPath(std::vector<Keyframe> keys, Interpolation interp)
    : keys_(std::move(keys)), interp_(interp) {
    if (keys_.empty()) {
        throw ArgumentError("motion path needs at least one keyframe");
    }
    for (std::size_t i = 1; i < keys_.size(); ++i) {
        if (!(keys_[i].time > keys_[i - 1].time)) {
            throw ArgumentError("keyframe times must be strictly increasing");
        }
    }
    for (Keyframe& k : keys_) {
        k.state.rotation.normalize();
    }
}

PathState MotionPath::sample(double t) const {
    if (keys_.size() == 1 || t <= keys_.front().time) {
        return keys_.front().state;
    }
    if (t >= keys_.back().time) {
        return keys_.back().state;
    }
    // segment [i, i+1] containing t
    const auto it = std::upper_bound(keys_.begin(), keys_.end(), t,
                                     [](double v, const Keyframe& k) { return v < k.time; });
    const std::size_t i1 = static_cast<std::size_t>(it - keys_.begin());
    const std::size_t i0 = i1 - 1;
    const Keyframe& k0 = keys_[i0];
    const Keyframe& k1 = keys_[i1];
    if (t == k0.time) {
        return k0.state;
    }
    const double span = k1.time - k0.time;
    const double s = (t - k0.time) / span;

    PathState out;
    if (interp_ == Interpolation::linear) {
        out.position = (1.0 - s) * k0.state.position + s * k1.state.position;
    } else {
        // Non-uniform Catmull-Rom through Hermite form. Ends use a phantom knot that
        // repeats the end point one span further out.
        auto knot = [&](std::ptrdiff_t j, Vec3& p, double& time) {
            const auto n = static_cast<std::ptrdiff_t>(keys_.size());
            if (j < 0) {
                p = keys_.front().state.position;
                time = keys_[0].time - (keys_[1].time - keys_[0].time);
            } else if (j >= n) {
                p = keys_.back().state.position;
                time = keys_[n - 1].time + (keys_[n - 1].time - keys_[n - 2].time);
            } else {
                p = keys_[static_cast<std::size_t>(j)].state.position;
                time = keys_[static_cast<std::size_t>(j)].time;
            }
        };
        Vec3 pm;
        Vec3 pp;
        double tm = 0.0;
        double tp = 0.0;
        const auto j0 = static_cast<std::ptrdiff_t>(i0);
        knot(j0 - 1, pm, tm);
        knot(j0 + 2, pp, tp);
        const Vec3 m0 = (k1.state.position - pm) / (k1.time - tm) * span;
        const Vec3 m1 = (pp - k0.state.position) / (tp - k0.time) * span;
        const double s2 = s * s;
        const double s3 = s2 * s;
        out.position = (2 * s3 - 3 * s2 + 1) * k0.state.position + (s3 - 2 * s2 + s) * m0 +
                       (-2 * s3 + 3 * s2) * k1.state.position + (s3 - s2) * m1;
    }
    out.rotation = k0.state.rotation.slerp(s, k1.state.rotation).normalized();
    return out;
}

double frame_time(int index, int count) {
    if (count <= 1) {
        return 0.0;
    }
    return static_cast<double>(index) / static_cast<double>(count - 1);
}

} // namespace splatgen
