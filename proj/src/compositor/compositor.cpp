#include "splatgen/compositor.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "splatgen/errors.hpp"
#include "splatgen/random.hpp"

namespace splatgen {

void CompositeParams::validate() const {
    if (!(blur_sigma >= 0.0)) {
        throw ArgumentError("blur_sigma must be non-negative");
    }
    if (!(sigmoid_k > 0.0)) {
        throw ArgumentError("sigmoid_k must be positive");
    }
    if (!(shadow_floor >= 0.0 && shadow_floor <= 1.0)) {
        throw ArgumentError("shadow_floor must lie in [0,1]");
    }
    if (!(highlight_threshold >= 0.0 && highlight_threshold < 1.0)) {
        throw ArgumentError("highlight_threshold must lie in [0,1)");
    }
    if (!(highlight_strength >= 0.0 && highlight_strength <= 1.0)) {
        throw ArgumentError("highlight_strength must lie in [0,1]");
    }
}

void AugmentParams::validate() const {
    if (!(hue_shift_max >= 0.0) || !(exposure_stops_max >= 0.0) || !(noise_sigma_max >= 0.0)) {
        throw ArgumentError("augmentation maxima must be non-negative");
    }
}

ShadowMapPass normalize_map(const ShadowMapPass& s) {
    ShadowMapPass out(s.width(), s.height(), 1.0F);
    if (s.size() == 0) {
        return out;
    }
    const auto [lo_it, hi_it] = std::minmax_element(s.pixels().begin(), s.pixels().end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (hi - lo < 1e-9) {
        return out;
    }
    const double inv = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < s.size(); ++i) {
        out.pixels()[i] = static_cast<float>(clamp01((s.pixels()[i] - lo) * inv));
    }
    return out;
}

ShadowMapPass gaussian_blur(const ShadowMapPass& s, double sigma) {
    if (!(sigma >= 0.0)) {
        throw ArgumentError("blur sigma must be non-negative");
    }
    if (sigma == 0.0 || s.size() == 0) {
        return s;
    }
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double w = std::exp(-(i * i) / (2.0 * sigma * sigma));
        kernel[static_cast<std::size_t>(i + radius)] = w;
        sum += w;
    }
    for (double& w : kernel) {
        w /= sum;
    }
    const int w = s.width();
    const int h = s.height();
    std::vector<double> tmp(s.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int xx = std::clamp(x + i, 0, w - 1);
                acc += kernel[static_cast<std::size_t>(i + radius)] * s.at(xx, y);
            }
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    ShadowMapPass out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int yy = std::clamp(y + i, 0, h - 1);
                acc += kernel[static_cast<std::size_t>(i + radius)] *
                       tmp[static_cast<std::size_t>(yy) * w + x];
            }
            out.at(x, y) = static_cast<float>(acc);
        }
    }
    return out;
}

namespace {
double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
} // namespace

double sigmoid_value(double x, double k, double c) {
    const double lo = logistic(-k * c);
    const double hi = logistic(k * (1.0 - c));
    return (logistic(k * (x - c)) - lo) / (hi - lo);
}

ShadowMapPass sigmoid_remap(const ShadowMapPass& s, double k, double c) {
    if (!(k > 0.0)) {
        throw ArgumentError("sigmoid slope must be positive");
    }
    ShadowMapPass out(s.width(), s.height());
    for (std::size_t i = 0; i < s.size(); ++i) {
        out.pixels()[i] = static_cast<float>(clamp01(sigmoid_value(s.pixels()[i], k, c)));
    }
    return out;
}

ImageRgb apply_shadows(const ImageRgb& rgb, const ShadowMapPass& s, double s_min) {
    if (!rgb.same_shape(s)) {
        throw ArgumentError("apply_shadows: image and shadow map sizes differ");
    }
    ImageRgb out(rgb.width(), rgb.height());
    for (std::size_t i = 0; i < rgb.size(); ++i) {
        const double f = s_min + (1.0 - s_min) * static_cast<double>(s.pixels()[i]);
        const Rgb& p = rgb.pixels()[i];
        out.pixels()[i] = {clamp01(p.r * f), clamp01(p.g * f), clamp01(p.b * f)};
    }
    return out;
}

ImageRgb apply_highlights(const ImageRgb& rgb, const ShadowMapPass& s, double threshold,
                          double strength, const Rgb& light_color) {
    if (!rgb.same_shape(s)) {
        throw ArgumentError("apply_highlights: image and shadow map sizes differ");
    }
    if (!(threshold < 1.0)) {
        throw ArgumentError("highlight threshold must be below 1");
    }
    ImageRgb out(rgb.width(), rgb.height());
    for (std::size_t i = 0; i < rgb.size(); ++i) {
        const double mask = std::max(0.0, s.pixels()[i] - threshold) / (1.0 - threshold);
        const double a = strength * mask;
        const Rgb& p = rgb.pixels()[i];
        out.pixels()[i] = {clamp01(p.r + a * light_color.r), clamp01(p.g + a * light_color.g),
                           clamp01(p.b + a * light_color.b)};
    }
    return out;
}

void rgb_to_hsv(const Rgb& c, double& h, double& s, double& v) {
    const double mx = std::max({c.r, c.g, c.b});
    const double mn = std::min({c.r, c.g, c.b});
    const double d = mx - mn;
    v = mx;
    s = mx > 0.0 ? d / mx : 0.0;
    if (d <= 0.0) {
        h = 0.0;
        return;
    }
    if (mx == c.r) {
        h = 60.0 * std::fmod((c.g - c.b) / d, 6.0);
    } else if (mx == c.g) {
        h = 60.0 * ((c.b - c.r) / d + 2.0);
    } else {
        h = 60.0 * ((c.r - c.g) / d + 4.0);
    }
    if (h < 0.0) {
        h += 360.0;
    }
}

Rgb hsv_to_rgb(double h, double s, double v) {
    h = std::fmod(h, 360.0);
    if (h < 0.0) {
        h += 360.0;
    }
    const double c = v * s;
    const double hp = h / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;
    switch (static_cast<int>(hp)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
    }
    const double m = v - c;
    return {r + m, g + m, b + m};
}

namespace {
enum Stream : std::uint64_t { kHueStream = 1, kExposureStream = 2, kNoiseStream = 3 };

Rng stream_rng(std::uint64_t seed, std::uint64_t frame, Stream stream) {
    return Rng(hash_combine(hash_combine(seed, frame), stream));
}
} // namespace

AugmentDraws draw_augment(const AugmentParams& params, std::uint64_t frame_index) {
    params.validate();
    AugmentDraws d;
    Rng hue = stream_rng(params.seed, frame_index, kHueStream);
    d.hue_shift_deg = hue.uniform(-params.hue_shift_max, params.hue_shift_max);
    Rng exposure = stream_rng(params.seed, frame_index, kExposureStream);
    d.exposure_stops = exposure.uniform(-params.exposure_stops_max, params.exposure_stops_max);
    Rng noise = stream_rng(params.seed, frame_index, kNoiseStream);
    d.noise_sigma = noise.uniform(0.0, params.noise_sigma_max);
    d.noise_seed = noise.next();
    return d;
}

ImageRgb apply_augment(const ImageRgb& rgb, const AugmentDraws& draws) {
    ImageRgb out = rgb;
    const double gain = std::exp2(draws.exposure_stops);
    Rng noise(draws.noise_seed);
    for (Rgb& p : out.pixels()) {
        if (draws.hue_shift_deg != 0.0) {
            double h = 0.0;
            double s = 0.0;
            double v = 0.0;
            rgb_to_hsv(p, h, s, v);
            p = hsv_to_rgb(h + draws.hue_shift_deg, s, v);
        }
        if (draws.exposure_stops != 0.0) {
            p = {p.r * gain, p.g * gain, p.b * gain};
        }
        if (draws.noise_sigma > 0.0) {
            p.r += draws.noise_sigma * noise.normal();
            p.g += draws.noise_sigma * noise.normal();
            p.b += draws.noise_sigma * noise.normal();
        }
        p = {clamp01(p.r), clamp01(p.g), clamp01(p.b)};
    }
    return out;
}

ImageRgb augment(const ImageRgb& rgb, const AugmentParams& params, std::uint64_t frame_index) {
    return apply_augment(rgb, draw_augment(params, frame_index));
}

ShadowMapPass process_shadow(const ShadowMapPass& raw, const CompositeParams& cp) {
    cp.validate();
    return sigmoid_remap(gaussian_blur(normalize_map(raw), cp.blur_sigma), cp.sigmoid_k,
                         cp.sigmoid_c);
}

ImageRgb composite_frame(const ImageRgb& appearance, const ShadowMapPass& shadow_raw,
                         const CompositeParams& cp, const AugmentParams& ap,
                         std::uint64_t frame_index) {
    if (!appearance.same_shape(shadow_raw)) {
        throw ArgumentError("composite_frame: appearance and shadow pass sizes differ");
    }
    const ShadowMapPass s = process_shadow(shadow_raw, cp);
    const ImageRgb shadowed = apply_shadows(appearance, s, cp.shadow_floor);
    const ImageRgb lit = apply_highlights(shadowed, s, cp.highlight_threshold,
                                          cp.highlight_strength, cp.light_color);
    return augment(lit, ap, frame_index);
}

} // namespace splatgen
