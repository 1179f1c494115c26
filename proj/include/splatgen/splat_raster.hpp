#pragma once

#include <optional>
#include <span>
#include <vector>

#include "splatgen/camera.hpp"
#include "splatgen/image.hpp"
#include "splatgen/splat.hpp"

namespace splatgen {

/// A Gaussian projected to the image plane.
struct Splat2D {
    Vec2 mean = Vec2::Zero();
    Mat2 cov = Mat2::Identity();
    double depth = 0.0;
    Rgb color;
    double opacity = 0.0;
};

inline constexpr double kLowPassDilation = 0.3;
inline constexpr double kMaxAlpha = 0.99;
inline constexpr double kMinTransmittance = 1e-4;
/// Gaussian support is truncated at three standard deviations (Mahalanobis² ≤ 9).
inline constexpr double kSupportSigma = 3.0;
/// Jacobian evaluation point is clamped to this multiple of the half field of view.
inline constexpr double kJacobianFovClamp = 1.3;

struct RasterSettings {
    double dilation = kLowPassDilation;
    int tile_size = 16;
    int threads = 1;
};

/// Σ = R diag(scale²) Rᵀ.
Mat3 covariance_3d(const Vec3& scale, const Quat& rotation);

/// EWA projection of one Gaussian. Returns nullopt when the Gaussian is at or behind the
/// near plane or when its 3σ ellipse misses the image. Colour is evaluated along the ray
/// from the camera centre to the mean.
std::optional<Splat2D> project_gaussian(const PinholeCamera& cam, const Pose& pose,
                                        const Gaussian3D& g, double dilation = kLowPassDilation);

/// Opacity-weighted falloff of `s` at pixel centre `p`, or 0 outside the 3σ support.
/// Clamped to kMaxAlpha.
double splat_alpha(const Splat2D& s, const Vec2& p);

/// Projected splats of every cloud, sorted front to back by depth. Depth ties keep the
/// order of the concatenated input.
std::vector<Splat2D> project_and_sort(std::span<const SplatCloud* const> clouds,
                                      const PinholeCamera& cam, const Pose& pose,
                                      double dilation = kLowPassDilation);

struct AppearanceRender {
    ImageRgb color;
    /// Transmittance left after compositing; 1 - transmittance is the splat coverage.
    GrayImage transmittance;
};

/// Tile-based front-to-back compositing of the splat clouds over `background`.
AppearanceRender render_appearance_full(std::span<const SplatCloud* const> clouds,
                                        const PinholeCamera& cam, const Pose& pose,
                                        const Rgb& background,
                                        const RasterSettings& settings = {});

ImageRgb render_appearance(std::span<const SplatCloud* const> clouds, const PinholeCamera& cam,
                           const Pose& pose, const Rgb& background,
                           const RasterSettings& settings = {});

} // namespace splatgen
