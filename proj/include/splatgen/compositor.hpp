#pragma once

#include <cstdint>

#include "splatgen/image.hpp"

namespace splatgen {

/// Knobs of the shadow-processing chain.
struct CompositeParams {
    double blur_sigma = 5.0;
    double sigmoid_k = 10.0;
    double sigmoid_c = 0.5;
    double shadow_floor = 0.4;
    double highlight_threshold = 0.8;
    double highlight_strength = 0.15;
    Rgb light_color{1.0, 1.0, 1.0};

    void validate() const;
};

struct AugmentParams {
    double hue_shift_max = 10.0;       // degrees
    double exposure_stops_max = 0.5;   // stops
    double noise_sigma_max = 0.02;
    std::uint64_t seed = 0;

    void validate() const;
};

/// The concrete random draws for one frame.
struct AugmentDraws {
    double hue_shift_deg = 0.0;
    double exposure_stops = 0.0;
    double noise_sigma = 0.0;
    std::uint64_t noise_seed = 0;
};

/// Affine map of [min, max] onto [0, 1]; an (almost) constant map becomes all ones.
ShadowMapPass normalize_map(const ShadowMapPass& s);

/// Separable Gaussian blur, radius ceil(3σ), clamp-to-edge. σ = 0 returns the input.
ShadowMapPass gaussian_blur(const ShadowMapPass& s, double sigma);

/// Logistic curve σ(k(x - c)) rescaled so that 0 -> 0 and 1 -> 1.
double sigmoid_value(double x, double k, double c);
ShadowMapPass sigmoid_remap(const ShadowMapPass& s, double k, double c);

/// rgb * (s_min + (1 - s_min) * s), clamped.
ImageRgb apply_shadows(const ImageRgb& rgb, const ShadowMapPass& s, double s_min);

/// rgb + strength * max(0, s - h_t) / (1 - h_t) * light_color, clamped.
ImageRgb apply_highlights(const ImageRgb& rgb, const ShadowMapPass& s, double threshold,
                          double strength, const Rgb& light_color);

/// Draws hue, exposure and noise parameters for a frame. Each effect uses its own
/// stream derived from (seed, frame_index), so disabling one does not shift the others.
AugmentDraws draw_augment(const AugmentParams& params, std::uint64_t frame_index);

/// Applies fixed draws: HSV hue rotation, exposure gain 2^stops, additive Gaussian noise.
ImageRgb apply_augment(const ImageRgb& rgb, const AugmentDraws& draws);

ImageRgb augment(const ImageRgb& rgb, const AugmentParams& params, std::uint64_t frame_index);

/// normalize -> blur -> sigmoid, the camera-space shadow processing.
ShadowMapPass process_shadow(const ShadowMapPass& raw, const CompositeParams& cp);

/// Full hybrid composite: processed shadows, highlights, then augmentation.
ImageRgb composite_frame(const ImageRgb& appearance, const ShadowMapPass& shadow_raw,
                         const CompositeParams& cp, const AugmentParams& ap,
                         std::uint64_t frame_index);

// HSV helpers, hue in degrees [0, 360).
void rgb_to_hsv(const Rgb& c, double& h, double& s, double& v);
Rgb hsv_to_rgb(double h, double s, double v);

} // namespace splatgen
