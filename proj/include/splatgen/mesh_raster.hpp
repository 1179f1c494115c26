#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "splatgen/camera.hpp"
#include "splatgen/image.hpp"
#include "splatgen/light.hpp"
#include "splatgen/mesh.hpp"

namespace splatgen {

/// Triangle projected to the screen. x, y in pixels; z is the value interpolated for the
/// depth test (camera depth, or normalized light depth for orthographic views).
struct ScreenTriangle {
    std::array<Vec3, 3> v;
    std::int32_t mesh = -1;
    std::int32_t triangle = -1;
};

enum class DepthInterpolation { perspective, linear };

/// Per-pixel nearest surface with the mesh and triangle it came from (-1 where empty).
struct SurfaceBuffer {
    DepthBuffer depth;
    Image<std::int32_t> mesh;
    Image<std::int32_t> triangle;
};

/// Z-buffers screen triangles. Pixel centres sit at (x + 0.5, y + 0.5); coverage uses
/// 8-bit sub-pixel fixed point with a top-left fill rule, so shared edges are filled
/// exactly once. Work is split into scanline bands; the result does not depend on
/// `threads`. Depth ties keep the earlier triangle.
SurfaceBuffer rasterize_triangles(std::span<const ScreenTriangle> tris, int width, int height,
                                  DepthInterpolation interp, int threads = 1);

/// Projects posed meshes through a pinhole camera, clipping against the near plane and a
/// guard band around the image.
std::vector<ScreenTriangle> project_meshes(std::span<const PosedMesh> meshes,
                                           const PinholeCamera& cam, const Pose& pose);

SurfaceBuffer rasterize_surfaces(std::span<const PosedMesh> meshes, const PinholeCamera& cam,
                                 const Pose& pose, int threads = 1);

/// Nearest camera depth per pixel; +infinity where no mesh covers the pixel centre.
DepthBuffer rasterize_depth(std::span<const PosedMesh> meshes, const PinholeCamera& cam,
                            const Pose& pose, int threads = 1);

/// Instance id of the nearest surface per pixel, 0 for background.
/// Throws ConfigError when two meshes share an instance id.
IdBuffer render_id_map(std::span<const PosedMesh> meshes, const PinholeCamera& cam,
                       const Pose& pose, int threads = 1);

struct ShadowSettings {
    int resolution = 2048;
    /// Constant bias in normalized light depth.
    double bias = 2e-3;
    int threads = 1;
};

/// Camera-space illumination: ambient + (1 - ambient) * max(0, n·l) * visibility on mesh
/// pixels, 1 on background. Visibility comes from a light-space depth map: orthographic and
/// fitted to the scene for directional lights, a 90° perspective map aimed at the scene
/// centre for point lights. Throws ConfigError when the scene has zero extent.
ShadowMapPass render_shadow_pass(std::span<const PosedMesh> meshes, const PinholeCamera& cam,
                                 const Pose& pose, const LightRig& light,
                                 const ShadowSettings& settings = {});

} // namespace splatgen
