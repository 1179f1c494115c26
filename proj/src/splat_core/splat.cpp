#include "splatgen/splat.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "splatgen/errors.hpp"
#include "splatgen/sh.hpp"

namespace splatgen {

void Gaussian3D::set_flat_color(const Rgb& c) {
    sh.fill(0.0);
    sh_at(0, 0) = (c.r - 0.5) / kShC0;
    sh_at(1, 0) = (c.g - 0.5) / kShC0;
    sh_at(2, 0) = (c.b - 0.5) / kShC0;
}

SplatCloud::SplatCloud(std::vector<Gaussian3D> gaussians) : gaussians_(std::move(gaussians)) {}

void SplatCloud::validate() const {
    for (std::size_t i = 0; i < gaussians_.size(); ++i) {
        const Gaussian3D& g = gaussians_[i];
        const std::string where = "gaussian " + std::to_string(i);
        if (!g.mean.allFinite() || !g.scale.allFinite() || !g.rotation.coeffs().allFinite() ||
            !std::isfinite(g.opacity)) {
            throw DataError(where + ": non-finite value");
        }
        for (double s : g.sh) {
            if (!std::isfinite(s)) {
                throw DataError(where + ": non-finite SH coefficient");
            }
        }
        if ((g.scale.array() <= 0.0).any()) {
            throw DataError(where + ": scale must be positive");
        }
        if (g.opacity < 0.0 || g.opacity > 1.0) {
            throw DataError(where + ": opacity outside [0,1]");
        }
        if (std::abs(g.rotation.norm() - 1.0) > 1e-6) {
            throw DataError(where + ": rotation is not a unit quaternion");
        }
    }
}

bool SimilarityTransform::is_identity() const {
    return scale == 1.0 && rotation.w() == 1.0 && rotation.x() == 0.0 && rotation.y() == 0.0 &&
           rotation.z() == 0.0 && translation.isZero(0.0);
}

SimilarityTransform SimilarityTransform::from_rigid(const RigidPose& pose) {
    return {1.0, pose.rotation.normalized(), pose.position};
}

SimilarityTransform invert_similarity(const SimilarityTransform& t) {
    SimilarityTransform inv;
    inv.scale = 1.0 / t.scale;
    inv.rotation = t.rotation.conjugate();
    inv.translation = -inv.scale * (inv.rotation * t.translation);
    return inv;
}

SimilarityTransform compose(const SimilarityTransform& a, const SimilarityTransform& b) {
    SimilarityTransform out;
    out.scale = a.scale * b.scale;
    out.rotation = (a.rotation * b.rotation).normalized();
    out.translation = a.apply(b.translation);
    return out;
}

SplatCloud transform_cloud(const SplatCloud& cloud, const SimilarityTransform& t,
                           ShRotation mode) {
    if (t.is_identity()) {
        return cloud;
    }
    const Quat rot = t.rotation.normalized();
    const bool rotates = !(rot.w() == 1.0 && rot.vec().isZero(0.0));
    std::optional<ShRotator> rotator;
    if (rotates && mode == ShRotation::full) {
        rotator.emplace(rot);
    }
    std::vector<Gaussian3D> out;
    out.reserve(cloud.count());
    for (const Gaussian3D& g : cloud.gaussians()) {
        Gaussian3D h = g;
        h.mean = t.apply(g.mean);
        h.scale = g.scale * t.scale;
        if (rotates) {
            h.rotation = (rot * g.rotation).normalized();
            if (rotator) {
                rotator->apply(h.sh);
            } else {
                for (int c = 0; c < 3; ++c) {
                    for (int k = 1; k < kShCoeffsPerChannel; ++k) {
                        h.sh_at(c, k) = 0.0;
                    }
                }
            }
        }
        out.push_back(h);
    }
    return SplatCloud(std::move(out));
}

TriMesh align_mesh_to_splat(const TriMesh& mesh, const SimilarityTransform& t_recon) {
    if (t_recon.is_identity()) {
        return mesh;
    }
    const SimilarityTransform inv = invert_similarity(t_recon);
    TriMesh out = mesh;
    for (Vec3& v : out.vertices) {
        v = inv.apply(v);
    }
    return out;
}

SplatCloud strip_background(const SplatCloud& cloud, std::span<const MaskedView> views,
                            double keep_frac) {
    if (views.empty()) {
        throw ArgumentError("strip_background needs at least one masked view");
    }
    if (!(keep_frac >= 0.0 && keep_frac <= 1.0)) {
        throw ArgumentError("keep_frac must lie in [0,1]");
    }
    for (const MaskedView& v : views) {
        if (!v.mask.same_shape(v.camera.width, v.camera.height)) {
            throw ArgumentError("mask dimensions do not match the view camera");
        }
    }
    std::vector<Gaussian3D> kept;
    for (const Gaussian3D& g : cloud.gaussians()) {
        int countable = 0;
        int inside = 0;
        for (const MaskedView& v : views) {
            const auto p = project_point(v.camera, v.pose, g.mean);
            if (!p) {
                continue;
            }
            const double px = std::floor(p->u);
            const double py = std::floor(p->v);
            if (px < 0.0 || py < 0.0 || px >= v.camera.width || py >= v.camera.height) {
                continue;
            }
            ++countable;
            if (v.mask.at(static_cast<int>(px), static_cast<int>(py)) != 0) {
                ++inside;
            }
        }
        if (countable > 0 && inside >= keep_frac * countable) {
            kept.push_back(g);
        }
    }
    return SplatCloud(std::move(kept));
}

} // namespace splatgen
