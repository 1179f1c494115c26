#include "splatgen/splat_raster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "splatgen/parallel.hpp"
#include "splatgen/sh.hpp"

namespace splatgen {

Mat3 covariance_3d(const Vec3& scale, const Quat& rotation) {
    const Mat3 r = rotation.normalized().toRotationMatrix();
    const Mat3 d = scale.cwiseProduct(scale).asDiagonal();
    Mat3 sigma = r * d * r.transpose();
    // exact symmetry
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
    return sigma;
}

std::optional<Splat2D> project_gaussian(const PinholeCamera& cam, const Pose& pose,
                                        const Gaussian3D& g, double dilation) {
    const Vec3 t = pose.to_camera(g.mean);
    if (t.z() <= cam.near) {
        return std::nullopt;
    }
    const Mat3 w = pose.rotation.normalized().toRotationMatrix();
    const Mat3 sigma_cam = w * covariance_3d(g.scale, g.rotation) * w.transpose();
    const double iz = 1.0 / t.z();
    // The Jacobian is taken at the mean pulled back to 1.3x the field of view; far off-axis
    // Gaussians near the camera plane would otherwise linearize to image-filling ellipses.
    const double lim_x = kJacobianFovClamp * 0.5 * cam.width / cam.fx;
    const double lim_y = kJacobianFovClamp * 0.5 * cam.height / cam.fy;
    const double jx = std::clamp(t.x() * iz, -lim_x, lim_x) * t.z();
    const double jy = std::clamp(t.y() * iz, -lim_y, lim_y) * t.z();
    Eigen::Matrix<double, 2, 3> j;
    j << cam.fx * iz, 0.0, -cam.fx * jx * iz * iz,
         0.0, cam.fy * iz, -cam.fy * jy * iz * iz;
    Mat2 cov = j * sigma_cam * j.transpose();
    cov(0, 1) = cov(1, 0) = 0.5 * (cov(0, 1) + cov(1, 0));
    cov(0, 0) += dilation;
    cov(1, 1) += dilation;

    Splat2D s;
    s.mean = Vec2(cam.fx * t.x() * iz + cam.cx, cam.fy * t.y() * iz + cam.cy);
    s.cov = cov;
    s.depth = t.z();
    s.opacity = g.opacity;

    const double rx = kSupportSigma * std::sqrt(cov(0, 0));
    const double ry = kSupportSigma * std::sqrt(cov(1, 1));
    if (s.mean.x() + rx < 0.0 || s.mean.x() - rx > cam.width || s.mean.y() + ry < 0.0 ||
        s.mean.y() - ry > cam.height) {
        return std::nullopt;
    }
    if (!(cov.determinant() > 0.0)) {
        return std::nullopt;
    }
    const Vec3 dir = (g.mean - pose.camera_center()).normalized();
    s.color = eval_sh(g.sh, dir);
    return s;
}

namespace {

// Precomputed per-splat terms shared by every pixel it touches.
struct Prepared {
    Vec2 mean;
    double conic_a;
    double conic_b;
    double conic_c;
    double opacity;
    Rgb color;
    int x0;
    int x1;
    int y0;
    int y1;
};

Prepared prepare(const Splat2D& s) {
    const double det = s.cov.determinant();
    Prepared p{};
    p.mean = s.mean;
    p.conic_a = s.cov(1, 1) / det;
    p.conic_b = -s.cov(0, 1) / det;
    p.conic_c = s.cov(0, 0) / det;
    p.opacity = s.opacity;
    p.color = s.color;
    // Pixel centres x + 0.5 inside the 3σ box, widened by one pixel so rounding in the
    // box never drops a pixel the per-pixel support test would accept.
    const double rx = kSupportSigma * std::sqrt(s.cov(0, 0));
    const double ry = kSupportSigma * std::sqrt(s.cov(1, 1));
    p.x0 = static_cast<int>(std::floor(s.mean.x() - rx - 0.5)) - 1;
    p.x1 = static_cast<int>(std::ceil(s.mean.x() + rx - 0.5)) + 1;
    p.y0 = static_cast<int>(std::floor(s.mean.y() - ry - 0.5)) - 1;
    p.y1 = static_cast<int>(std::ceil(s.mean.y() + ry - 0.5)) + 1;
    return p;
}

inline double alpha_at(const Prepared& p, double px, double py) {
    const double dx = px - p.mean.x();
    const double dy = py - p.mean.y();
    const double power = 0.5 * (p.conic_a * dx * dx + 2.0 * p.conic_b * dx * dy + p.conic_c * dy * dy);
    if (!(power <= 0.5 * kSupportSigma * kSupportSigma)) {
        return 0.0;
    }
    return std::min(kMaxAlpha, p.opacity * std::exp(-power));
}

} // namespace

double splat_alpha(const Splat2D& s, const Vec2& p) {
    return alpha_at(prepare(s), p.x(), p.y());
}

std::vector<Splat2D> project_and_sort(std::span<const SplatCloud* const> clouds,
                                      const PinholeCamera& cam, const Pose& pose,
                                      double dilation) {
    std::vector<Splat2D> splats;
    for (const SplatCloud* cloud : clouds) {
        for (const Gaussian3D& g : cloud->gaussians()) {
            if (auto s = project_gaussian(cam, pose, g, dilation)) {
                splats.push_back(*s);
            }
        }
    }
    std::stable_sort(splats.begin(), splats.end(),
                     [](const Splat2D& a, const Splat2D& b) { return a.depth < b.depth; });
    return splats;
}

AppearanceRender render_appearance_full(std::span<const SplatCloud* const> clouds,
                                        const PinholeCamera& cam, const Pose& pose,
                                        const Rgb& background, const RasterSettings& settings) {
    cam.validate();
    const std::vector<Splat2D> splats = project_and_sort(clouds, cam, pose, settings.dilation);
    std::vector<Prepared> prepared;
    prepared.reserve(splats.size());
    for (const Splat2D& s : splats) {
        prepared.push_back(prepare(s));
    }

    const int ts = std::max(1, settings.tile_size);
    const int tiles_x = (cam.width + ts - 1) / ts;
    const int tiles_y = (cam.height + ts - 1) / ts;
    // Splat indices per tile, in global depth order.
    std::vector<std::vector<std::uint32_t>> bins(static_cast<std::size_t>(tiles_x) * tiles_y);
    for (std::size_t i = 0; i < prepared.size(); ++i) {
        const Prepared& p = prepared[i];
        const int tx0 = std::max(0, p.x0) / ts;
        const int tx1 = std::min(cam.width - 1, p.x1) / ts;
        const int ty0 = std::max(0, p.y0) / ts;
        const int ty1 = std::min(cam.height - 1, p.y1) / ts;
        if (p.x1 < 0 || p.y1 < 0 || p.x0 >= cam.width || p.y0 >= cam.height) {
            continue;
        }
        for (int ty = ty0; ty <= ty1; ++ty) {
            for (int tx = tx0; tx <= tx1; ++tx) {
                bins[static_cast<std::size_t>(ty) * tiles_x + tx].push_back(
                    static_cast<std::uint32_t>(i));
            }
        }
    }

    AppearanceRender out{ImageRgb(cam.width, cam.height), GrayImage(cam.width, cam.height, 1.0F)};
    parallel_for(bins.size(), settings.threads, [&](std::size_t tile) {
        const int tx = static_cast<int>(tile % tiles_x);
        const int ty = static_cast<int>(tile / tiles_x);
        const auto& list = bins[tile];
        for (int y = ty * ts; y < std::min(cam.height, (ty + 1) * ts); ++y) {
            for (int x = tx * ts; x < std::min(cam.width, (tx + 1) * ts); ++x) {
                const double px = x + 0.5;
                const double py = y + 0.5;
                double t = 1.0;
                double r = 0.0;
                double g = 0.0;
                double b = 0.0;
                for (std::uint32_t idx : list) {
                    const Prepared& p = prepared[idx];
                    if (x < p.x0 || x > p.x1 || y < p.y0 || y > p.y1) {
                        continue;
                    }
                    const double a = alpha_at(p, px, py);
                    if (a <= 0.0) {
                        continue;
                    }
                    const double w = a * t;
                    r += p.color.r * w;
                    g += p.color.g * w;
                    b += p.color.b * w;
                    t *= 1.0 - a;
                    if (t < kMinTransmittance) {
                        break;
                    }
                }
                r += t * background.r;
                g += t * background.g;
                b += t * background.b;
                out.color.at(x, y) = Rgb{clamp01(r), clamp01(g), clamp01(b)};
                out.transmittance.at(x, y) = static_cast<float>(t);
            }
        }
    });
    return out;
}

ImageRgb render_appearance(std::span<const SplatCloud* const> clouds, const PinholeCamera& cam,
                           const Pose& pose, const Rgb& background,
                           const RasterSettings& settings) {
    return render_appearance_full(clouds, cam, pose, background, settings).color;
}

} // namespace splatgen
