#include <cmath>
#include <fstream>
#include <numbers>

#include "splatgen/errors.hpp"
#include "splatgen/pipeline.hpp"

namespace splatgen {

namespace fs = std::filesystem;

namespace {

// Flat Gaussian lying in the plane with normal `n`.
Gaussian3D surfel(const Vec3& p, const Vec3& n, double tangent, double normal, const Rgb& c,
                  double opacity) {
    Gaussian3D g;
    g.mean = p;
    g.scale = Vec3(tangent, tangent, normal);
    g.rotation = Quat::FromTwoVectors(Vec3::UnitZ(), n).normalized();
    g.opacity = opacity;
    g.set_flat_color(c);
    return g;
}

SplatCloud sphere_splat(double radius, int count, const Rgb& color) {
    SplatCloud cloud;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    const double spacing = std::sqrt(4.0 * std::numbers::pi * radius * radius / count);
    for (int i = 0; i < count; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / count;
        const double r = std::sqrt(1.0 - z * z);
        const double phi = golden * i;
        const Vec3 n(r * std::cos(phi), r * std::sin(phi), z);
        cloud.push_back(surfel(radius * n, n, 0.6 * spacing, 0.1 * 0.6 * spacing, color, 0.95));
    }
    return cloud;
}

SplatCloud box_splat(const Vec3& half, double spacing, const Rgb& color) {
    SplatCloud cloud;
    for (int axis = 0; axis < 3; ++axis) {
        const int u = (axis + 1) % 3;
        const int v = (axis + 2) % 3;
        const int nu = std::max(1, static_cast<int>(std::ceil(2.0 * half[u] / spacing)));
        const int nv = std::max(1, static_cast<int>(std::ceil(2.0 * half[v] / spacing)));
        for (int side = -1; side <= 1; side += 2) {
            Vec3 n = Vec3::Zero();
            n[axis] = side;
            for (int i = 0; i < nu; ++i) {
                for (int j = 0; j < nv; ++j) {
                    Vec3 p;
                    p[axis] = side * half[axis];
                    p[u] = -half[u] + (i + 0.5) * 2.0 * half[u] / nu;
                    p[v] = -half[v] + (j + 0.5) * 2.0 * half[v] / nv;
                    cloud.push_back(surfel(p, n, 0.6 * spacing, 0.06 * spacing, color, 0.95));
                }
            }
        }
    }
    return cloud;
}

// Checkered ground slightly below z = 0 so resting objects are not covered by it.
SplatCloud ground_splat(double half_size, double spacing) {
    SplatCloud cloud;
    const int n = static_cast<int>(std::round(2.0 * half_size / spacing));
    const Rgb light{0.72, 0.62, 0.48};
    const Rgb dark{0.52, 0.42, 0.30};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double x = -half_size + (i + 0.5) * spacing;
            const double y = -half_size + (j + 0.5) * spacing;
            const bool odd = (static_cast<int>(std::floor(x / 0.15)) +
                              static_cast<int>(std::floor(y / 0.15))) % 2 != 0;
            cloud.push_back(surfel(Vec3(x, y, -0.003), Vec3::UnitZ(), 0.7 * spacing,
                                   0.002, odd ? dark : light, 0.98));
        }
    }
    return cloud;
}

constexpr const char* kToyConfig = R"(# Toy scene: procedurally generated assets, self-contained.
seed = 1
frame_count = 20
width = 640
height = 480
train_fraction = 0.75
val_fraction = 0.25
background = [0.62, 0.66, 0.72]
environment = "ground.ply"
cache_dir = "cache"
output_dir = "dataset"
table_extent = 4.0

[workspace]
min = [-0.3, -0.3, 0.0]
max = [0.3, 0.3, 0.45]

[objects]
min = 2
max = 6

[camera]
hfov_deg = 55.0
target = [0.0, 0.0, 0.03]
orbit_radius = 0.95
orbit_height = 0.75
orbit_start_deg = -30.0
orbit_end_deg = 90.0

[light]
kind = "directional"
start = [-0.5, -0.3, -1.0]
end = [0.4, -0.5, -1.0]
ambient = 0.3

[[asset]]
name = "sphere"
splat = "sphere.ply"
mesh = "sphere.obj"
class_id = 0
mass = 0.5

[[asset]]
name = "box"
splat = "box.ply"
mesh = "box.obj"
class_id = 1
mass = 0.8
)";

} // namespace

void cmd_make_toy_assets(const fs::path& out_dir) {
    fs::create_directories(out_dir);
    constexpr double kSphereRadius = 0.06;
    const Vec3 box_half(0.06, 0.045, 0.035);

    save_splat_ply(sphere_splat(kSphereRadius, 700, Rgb{0.82, 0.22, 0.16}), out_dir / "sphere.ply");
    save_obj(make_uv_sphere(kSphereRadius, 12, 24), out_dir / "sphere.obj");
    save_splat_ply(box_splat(box_half, 0.01, Rgb{0.18, 0.34, 0.78}), out_dir / "box.ply");
    save_obj(make_box(box_half), out_dir / "box.obj");
    save_splat_ply(ground_splat(1.2, 0.03), out_dir / "ground.ply");

    std::ofstream cfg(out_dir / "toy.toml", std::ios::binary);
    cfg << kToyConfig;
    if (!cfg) {
        throw IoError("write failed: " + (out_dir / "toy.toml").string());
    }
}

} // namespace splatgen
