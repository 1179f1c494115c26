#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "splatgen/camera.hpp"
#include "splatgen/image.hpp"
#include "splatgen/math.hpp"
#include "splatgen/mesh.hpp"

namespace splatgen {

inline constexpr int kShCoeffsPerChannel = 16;
inline constexpr int kShCoeffs = 3 * kShCoeffsPerChannel;

/// SH coefficients, channel-major: index = channel * 16 + basis.
using ShCoeffs = std::array<double, kShCoeffs>;

/// One splat primitive. Values are stored activated: linear scale, opacity in [0,1].
struct Gaussian3D {
    Vec3 mean = Vec3::Zero();
    Vec3 scale = Vec3::Ones();
    Quat rotation = Quat::Identity();
    double opacity = 1.0;
    ShCoeffs sh{};

    double& sh_at(int channel, int basis) { return sh[channel * kShCoeffsPerChannel + basis]; }
    double sh_at(int channel, int basis) const { return sh[channel * kShCoeffsPerChannel + basis]; }

    /// Sets a view-independent colour through the degree-0 terms (higher orders zeroed).
    void set_flat_color(const Rgb& c);
};

class SplatCloud {
public:
    SplatCloud() = default;
    explicit SplatCloud(std::vector<Gaussian3D> gaussians);

    std::size_t count() const { return gaussians_.size(); }
    bool empty() const { return gaussians_.empty(); }
    std::span<const Gaussian3D> gaussians() const { return gaussians_; }
    const Gaussian3D& operator[](std::size_t i) const { return gaussians_[i]; }

    void push_back(const Gaussian3D& g) { gaussians_.push_back(g); }

    /// Throws DataError naming the first offending element.
    void validate() const;

private:
    std::vector<Gaussian3D> gaussians_;
};

/// Uniform scale, rotation, then translation: p -> scale * (rotation * p) + translation.
struct SimilarityTransform {
    double scale = 1.0;
    Quat rotation = Quat::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
    bool is_identity() const;

    static SimilarityTransform from_rigid(const RigidPose& pose);
};

SimilarityTransform invert_similarity(const SimilarityTransform& t);
/// (a ∘ b)(p) = a(b(p)).
SimilarityTransform compose(const SimilarityTransform& a, const SimilarityTransform& b);

enum class ShRotation { full, dc_only };

/// Maps means, scales and orientations by `t` and rotates the view-dependent colour
/// terms with it. The identity transform returns the input unchanged.
SplatCloud transform_cloud(const SplatCloud& cloud, const SimilarityTransform& t,
                           ShRotation mode = ShRotation::full);

/// Maps a reconstructed mesh back into the splat frame by inverting the reconstruction transform.
TriMesh align_mesh_to_splat(const TriMesh& mesh, const SimilarityTransform& t_recon);

struct MaskedView {
    PinholeCamera camera;
    Pose pose;
    BinaryMask mask;
};

inline constexpr double kDefaultKeepFrac = 0.8;

/// Keeps Gaussians whose mean lands on the object mask in at least `keep_frac` of the
/// views where it is in front of the camera and inside the image.
SplatCloud strip_background(const SplatCloud& cloud, std::span<const MaskedView> views,
                            double keep_frac = kDefaultKeepFrac);

// Binary little-endian PLY in the common 3DGS vertex layout.
SplatCloud load_splat_ply(const std::filesystem::path& path);
void save_splat_ply(const SplatCloud& cloud, const std::filesystem::path& path);

} // namespace splatgen
