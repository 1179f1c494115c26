#include "splatgen/mesh_raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "splatgen/errors.hpp"
#include "splatgen/parallel.hpp"

namespace splatgen {

namespace {

constexpr int kSubpixelBits = 8;
constexpr std::int64_t kSubpixel = std::int64_t{1} << kSubpixelBits;
constexpr double kGuardBand = 4096.0;
constexpr int kBandRows = 16;

struct FixedPoint {
    std::int64_t x;
    std::int64_t y;
};

std::int64_t edge(const FixedPoint& a, const FixedPoint& b, std::int64_t px, std::int64_t py) {
    return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

bool top_left(const FixedPoint& from, const FixedPoint& to) {
    const std::int64_t dx = to.x - from.x;
    const std::int64_t dy = to.y - from.y;
    return (dy == 0 && dx > 0) || dy < 0;
}

struct Setup {
    std::array<FixedPoint, 3> p;
    std::array<double, 3> z;
    std::array<std::int64_t, 3> bias;  // for edges bc, ca, ab
    double inv_area;
    int x0, x1, y0, y1;
    std::int32_t mesh;
    std::int32_t triangle;
};

bool make_setup(const ScreenTriangle& t, int width, int height, Setup& s) {
    for (int i = 0; i < 3; ++i) {
        s.p[i] = {std::llround(t.v[i].x() * kSubpixel), std::llround(t.v[i].y() * kSubpixel)};
        s.z[i] = t.v[i].z();
    }
    std::int64_t area = edge(s.p[0], s.p[1], s.p[2].x, s.p[2].y);
    if (area == 0) {
        return false;
    }
    if (area < 0) {
        std::swap(s.p[1], s.p[2]);
        std::swap(s.z[1], s.z[2]);
        area = -area;
    }
    s.inv_area = 1.0 / static_cast<double>(area);
    s.bias[0] = top_left(s.p[1], s.p[2]) ? 0 : -1;
    s.bias[1] = top_left(s.p[2], s.p[0]) ? 0 : -1;
    s.bias[2] = top_left(s.p[0], s.p[1]) ? 0 : -1;

    const std::int64_t min_x = std::min({s.p[0].x, s.p[1].x, s.p[2].x});
    const std::int64_t max_x = std::max({s.p[0].x, s.p[1].x, s.p[2].x});
    const std::int64_t min_y = std::min({s.p[0].y, s.p[1].y, s.p[2].y});
    const std::int64_t max_y = std::max({s.p[0].y, s.p[1].y, s.p[2].y});
    const std::int64_t half = kSubpixel / 2;
    // pixel x covers sample x*256+128
    auto ceil_div = [](std::int64_t a, std::int64_t b) {
        return a >= 0 ? (a + b - 1) / b : -((-a) / b);
    };
    auto floor_div = [](std::int64_t a, std::int64_t b) {
        return a >= 0 ? a / b : -((-a + b - 1) / b);
    };
    s.x0 = static_cast<int>(std::max<std::int64_t>(0, ceil_div(min_x - half, kSubpixel)));
    s.x1 = static_cast<int>(std::min<std::int64_t>(width - 1, floor_div(max_x - half, kSubpixel)));
    s.y0 = static_cast<int>(std::max<std::int64_t>(0, ceil_div(min_y - half, kSubpixel)));
    s.y1 = static_cast<int>(std::min<std::int64_t>(height - 1, floor_div(max_y - half, kSubpixel)));
    s.mesh = t.mesh;
    s.triangle = t.triangle;
    return s.x0 <= s.x1 && s.y0 <= s.y1;
}

// Signed distances to the clip planes in camera space; inside when >= 0.
struct ClipPlanes {
    std::array<Eigen::Vector4d, 5> planes;

    explicit ClipPlanes(const PinholeCamera& cam) {
        const double g = kGuardBand;
        planes[0] = {0.0, 0.0, 1.0, -cam.near};
        planes[1] = {cam.fx, 0.0, cam.cx + g, 0.0};
        planes[2] = {-cam.fx, 0.0, cam.width + g - cam.cx, 0.0};
        planes[3] = {0.0, cam.fy, cam.cy + g, 0.0};
        planes[4] = {0.0, -cam.fy, cam.height + g - cam.cy, 0.0};
    }

    static double dist(const Eigen::Vector4d& pl, const Vec3& p) {
        return pl.x() * p.x() + pl.y() * p.y() + pl.z() * p.z() + pl.w();
    }
};

bool lex_less(const Vec3& a, const Vec3& b) {
    if (a.x() != b.x()) {
        return a.x() < b.x();
    }
    if (a.y() != b.y()) {
        return a.y() < b.y();
    }
    return a.z() < b.z();
}

// Intersection computed from lexicographically ordered endpoints so that a shared edge
// clipped from either triangle yields the same point.
Vec3 intersect(const Eigen::Vector4d& pl, const Vec3& p, const Vec3& q) {
    const Vec3& a = lex_less(p, q) ? p : q;
    const Vec3& b = lex_less(p, q) ? q : p;
    const double da = ClipPlanes::dist(pl, a);
    const double db = ClipPlanes::dist(pl, b);
    const double t = da / (da - db);
    return a + t * (b - a);
}

std::vector<Vec3> clip_polygon(std::vector<Vec3> poly, const ClipPlanes& clip) {
    for (const Eigen::Vector4d& pl : clip.planes) {
        if (poly.empty()) {
            break;
        }
        std::vector<Vec3> out;
        out.reserve(poly.size() + 2);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const Vec3& cur = poly[i];
            const Vec3& nxt = poly[(i + 1) % poly.size()];
            const double dc = ClipPlanes::dist(pl, cur);
            const double dn = ClipPlanes::dist(pl, nxt);
            if (dc >= 0.0) {
                out.push_back(cur);
            }
            if ((dc >= 0.0) != (dn >= 0.0)) {
                out.push_back(intersect(pl, cur, nxt));
            }
        }
        poly = std::move(out);
    }
    return poly;
}

} // namespace

SurfaceBuffer rasterize_triangles(std::span<const ScreenTriangle> tris, int width, int height,
                                  DepthInterpolation interp, int threads) {
    SurfaceBuffer out{DepthBuffer(width, height, std::numeric_limits<float>::infinity()),
                      Image<std::int32_t>(width, height, -1),
                      Image<std::int32_t>(width, height, -1)};
    std::vector<Setup> setups;
    setups.reserve(tris.size());
    for (const ScreenTriangle& t : tris) {
        Setup s{};
        if (make_setup(t, width, height, s)) {
            setups.push_back(s);
        }
    }
    const int bands = (height + kBandRows - 1) / kBandRows;
    parallel_for(static_cast<std::size_t>(bands), threads, [&](std::size_t band) {
        const int row0 = static_cast<int>(band) * kBandRows;
        const int row1 = std::min(height - 1, row0 + kBandRows - 1);
        for (const Setup& s : setups) {
            const int y0 = std::max(s.y0, row0);
            const int y1 = std::min(s.y1, row1);
            for (int y = y0; y <= y1; ++y) {
                const std::int64_t py = y * kSubpixel + kSubpixel / 2;
                for (int x = s.x0; x <= s.x1; ++x) {
                    const std::int64_t px = x * kSubpixel + kSubpixel / 2;
                    const std::int64_t e0 = edge(s.p[1], s.p[2], px, py);
                    const std::int64_t e1 = edge(s.p[2], s.p[0], px, py);
                    const std::int64_t e2 = edge(s.p[0], s.p[1], px, py);
                    if (e0 + s.bias[0] < 0 || e1 + s.bias[1] < 0 || e2 + s.bias[2] < 0) {
                        continue;
                    }
                    const double w0 = static_cast<double>(e0) * s.inv_area;
                    const double w1 = static_cast<double>(e1) * s.inv_area;
                    const double w2 = static_cast<double>(e2) * s.inv_area;
                    double z = 0.0;
                    if (interp == DepthInterpolation::perspective) {
                        z = 1.0 / (w0 / s.z[0] + w1 / s.z[1] + w2 / s.z[2]);
                    } else {
                        z = w0 * s.z[0] + w1 * s.z[1] + w2 * s.z[2];
                    }
                    const auto zf = static_cast<float>(z);
                    float& d = out.depth.at(x, y);
                    if (zf < d) {
                        d = zf;
                        out.mesh.at(x, y) = s.mesh;
                        out.triangle.at(x, y) = s.triangle;
                    }
                }
            }
        }
    });
    return out;
}

std::vector<ScreenTriangle> project_meshes(std::span<const PosedMesh> meshes,
                                           const PinholeCamera& cam, const Pose& pose) {
    cam.validate();
    const ClipPlanes clip(cam);
    std::vector<ScreenTriangle> out;
    std::vector<Vec3> cam_verts;
    for (std::size_t mi = 0; mi < meshes.size(); ++mi) {
        const TriMesh& mesh = *meshes[mi].mesh;
        cam_verts.clear();
        cam_verts.reserve(mesh.vertices.size());
        for (const Vec3& v : mesh.vertices) {
            cam_verts.push_back(pose.to_camera(meshes[mi].pose.apply(v)));
        }
        for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
            const auto& tri = mesh.triangles[ti];
            std::vector<Vec3> poly = {cam_verts[tri[0]], cam_verts[tri[1]], cam_verts[tri[2]]};
            bool inside_all = true;
            bool rejected = false;
            for (const Eigen::Vector4d& pl : clip.planes) {
                int outside = 0;
                for (const Vec3& p : poly) {
                    outside += ClipPlanes::dist(pl, p) < 0.0 ? 1 : 0;
                }
                inside_all = inside_all && outside == 0;
                rejected = rejected || outside == 3;
            }
            if (rejected) {
                continue;
            }
            if (!inside_all) {
                poly = clip_polygon(std::move(poly), clip);
                if (poly.size() < 3) {
                    continue;
                }
            }
            std::vector<Vec3> screen;
            screen.reserve(poly.size());
            for (const Vec3& c : poly) {
                screen.emplace_back(cam.fx * c.x() / c.z() + cam.cx, cam.fy * c.y() / c.z() + cam.cy,
                                    c.z());
            }
            for (std::size_t k = 1; k + 1 < screen.size(); ++k) {
                out.push_back({{screen[0], screen[k], screen[k + 1]},
                               static_cast<std::int32_t>(mi),
                               static_cast<std::int32_t>(ti)});
            }
        }
    }
    return out;
}

SurfaceBuffer rasterize_surfaces(std::span<const PosedMesh> meshes, const PinholeCamera& cam,
                                 const Pose& pose, int threads) {
    const std::vector<ScreenTriangle> tris = project_meshes(meshes, cam, pose);
    return rasterize_triangles(tris, cam.width, cam.height, DepthInterpolation::perspective,
                               threads);
}

DepthBuffer rasterize_depth(std::span<const PosedMesh> meshes, const PinholeCamera& cam,
                            const Pose& pose, int threads) {
    return rasterize_surfaces(meshes, cam, pose, threads).depth;
}

IdBuffer render_id_map(std::span<const PosedMesh> meshes, const PinholeCamera& cam,
                       const Pose& pose, int threads) {
    std::set<std::uint32_t> seen;
    for (const PosedMesh& m : meshes) {
        if (m.instance_id() == 0) {
            throw ConfigError("instance id 0 is reserved for background");
        }
        if (!seen.insert(m.instance_id()).second) {
            throw ConfigError("duplicate instance id " + std::to_string(m.instance_id()));
        }
    }
    const SurfaceBuffer surf = rasterize_surfaces(meshes, cam, pose, threads);
    IdBuffer ids(cam.width, cam.height, 0);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::int32_t m = surf.mesh.pixels()[i];
        if (m >= 0) {
            ids.pixels()[i] = meshes[static_cast<std::size_t>(m)].instance_id();
        }
    }
    return ids;
}

namespace {

// Light-space depth map and the mapping from world points into it.
class LightDepthMap {
public:
    LightDepthMap(std::span<const PosedMesh> meshes, const LightRig& light,
                  const ShadowSettings& settings)
        : light_(light), res_(settings.resolution) {
        if (res_ < 1) {
            throw ConfigError("shadow map resolution must be positive");
        }
        std::vector<Vec3> world;
        for (const PosedMesh& m : meshes) {
            for (const Vec3& v : m.mesh->vertices) {
                world.push_back(m.pose.apply(v));
            }
        }
        if (world.empty()) {
            throw ConfigError("shadow pass needs at least one mesh vertex");
        }
        Vec3 lo = world.front();
        Vec3 hi = world.front();
        for (const Vec3& w : world) {
            lo = lo.cwiseMin(w);
            hi = hi.cwiseMax(w);
        }
        const double diag = (hi - lo).norm();
        if (!(diag > 1e-12)) {
            throw ConfigError("scene bounds have zero extent");
        }
        center_ = 0.5 * (lo + hi);

        if (light.kind == LightKind::directional) {
            view_ = Pose::look_at(center_ - light.direction, center_, Vec3::UnitZ());
            Vec3 qlo = Vec3::Constant(std::numeric_limits<double>::infinity());
            Vec3 qhi = -qlo;
            for (const Vec3& w : world) {
                const Vec3 q = view_.to_camera(w);
                qlo = qlo.cwiseMin(q);
                qhi = qhi.cwiseMax(q);
            }
            if (!(qhi.x() - qlo.x() > 1e-12) || !(qhi.y() - qlo.y() > 1e-12)) {
                throw ConfigError("scene has zero extent as seen from the light");
            }
            const double pad = 0.01 * diag;
            lo_ = qlo - Vec3::Constant(pad);
            hi_ = qhi + Vec3::Constant(pad);
        } else {
            view_ = Pose::look_at(light.position, center_, Vec3::UnitZ());
            cam_ = PinholeCamera::from_fov(res_, res_, 90.0, 1e-4, 1e6);
            double zmin = std::numeric_limits<double>::infinity();
            double zmax = -zmin;
            for (const Vec3& w : world) {
                const double z = view_.to_camera(w).z();
                zmin = std::min(zmin, z);
                zmax = std::max(zmax, z);
            }
            const double pad = 0.01 * diag;
            lo_ = Vec3(0, 0, std::max(1e-4, zmin - pad));
            hi_ = Vec3(0, 0, std::max(lo_.z() + 1e-6, zmax + pad));
            cam_.near = lo_.z() * 0.5;
        }

        std::vector<ScreenTriangle> tris;
        if (light.kind == LightKind::directional) {
            for (std::size_t mi = 0; mi < meshes.size(); ++mi) {
                const TriMesh& mesh = *meshes[mi].mesh;
                std::vector<Vec3> sv;
                sv.reserve(mesh.vertices.size());
                for (const Vec3& v : mesh.vertices) {
                    sv.push_back(to_map(meshes[mi].pose.apply(v)));
                }
                for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
                    const auto& t = mesh.triangles[ti];
                    tris.push_back({{sv[t[0]], sv[t[1]], sv[t[2]]}, static_cast<std::int32_t>(mi),
                                    static_cast<std::int32_t>(ti)});
                }
            }
            depth_ = rasterize_triangles(tris, res_, res_, DepthInterpolation::linear,
                                         settings.threads)
                         .depth;
        } else {
            tris = project_meshes(meshes, cam_, view_);
            depth_ = rasterize_triangles(tris, res_, res_, DepthInterpolation::perspective,
                                         settings.threads)
                         .depth;
            // camera depth -> normalized depth
            for (float& d : depth_.pixels()) {
                if (std::isfinite(d)) {
                    d = static_cast<float>(normalize_depth(d));
                }
            }
        }
    }

    /// True when `p` is not occluded from the light (within `bias`).
    bool lit(const Vec3& p, double bias) const {
        double u = 0.0;
        double v = 0.0;
        double d = 0.0;
        if (light_.kind == LightKind::directional) {
            const Vec3 s = to_map(p);
            u = s.x();
            v = s.y();
            d = s.z();
        } else {
            const Vec3 c = view_.to_camera(p);
            if (c.z() <= 0.0) {
                return true;
            }
            u = cam_.fx * c.x() / c.z() + cam_.cx;
            v = cam_.fy * c.y() / c.z() + cam_.cy;
            d = normalize_depth(c.z());
        }
        const int x = static_cast<int>(std::floor(u));
        const int y = static_cast<int>(std::floor(v));
        if (x < 0 || y < 0 || x >= res_ || y >= res_) {
            return true;
        }
        return d - bias <= depth_.at(x, y);
    }

private:
    Vec3 to_map(const Vec3& world) const {
        const Vec3 q = view_.to_camera(world);
        return {(q.x() - lo_.x()) / (hi_.x() - lo_.x()) * res_,
                (q.y() - lo_.y()) / (hi_.y() - lo_.y()) * res_,
                (q.z() - lo_.z()) / (hi_.z() - lo_.z())};
    }

    double normalize_depth(double z) const { return (z - lo_.z()) / (hi_.z() - lo_.z()); }

    LightRig light_;
    int res_;
    Vec3 center_ = Vec3::Zero();
    Pose view_;
    PinholeCamera cam_;
    Vec3 lo_ = Vec3::Zero();
    Vec3 hi_ = Vec3::Ones();
    DepthBuffer depth_;
};

} // namespace

ShadowMapPass render_shadow_pass(std::span<const PosedMesh> meshes, const PinholeCamera& cam,
                                 const Pose& pose, const LightRig& light,
                                 const ShadowSettings& settings) {
    light.validate();
    const SurfaceBuffer surf = rasterize_surfaces(meshes, cam, pose, settings.threads);
    ShadowMapPass out(cam.width, cam.height, 1.0F);
    bool any_surface = false;
    for (std::int32_t m : surf.mesh.pixels()) {
        any_surface = any_surface || m >= 0;
    }
    if (meshes.empty()) {
        return out;
    }
    // Built before the visibility early-out so degenerate scenes are always rejected.
    const LightDepthMap map(meshes, light, settings);
    if (!any_surface) {
        return out;
    }
    const Vec3 eye = pose.camera_center();
    parallel_for(static_cast<std::size_t>(cam.height), settings.threads, [&](std::size_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < cam.width; ++x) {
            const std::int32_t mi = surf.mesh.at(x, y);
            if (mi < 0) {
                continue;
            }
            const PosedMesh& pm = meshes[static_cast<std::size_t>(mi)];
            const auto& tri = pm.mesh->triangles[static_cast<std::size_t>(surf.triangle.at(x, y))];
            const Vec3 a = pm.pose.apply(pm.mesh->vertices[tri[0]]);
            const Vec3 b = pm.pose.apply(pm.mesh->vertices[tri[1]]);
            const Vec3 c = pm.pose.apply(pm.mesh->vertices[tri[2]]);
            Vec3 n = (b - a).cross(c - a);
            const double len = n.norm();
            if (!(len > 0.0)) {
                continue;
            }
            n /= len;
            const double z = surf.depth.at(x, y);
            const Vec3 pc(((x + 0.5) - cam.cx) / cam.fx * z, ((y + 0.5) - cam.cy) / cam.fy * z, z);
            const Vec3 p = pose.to_world(pc);
            if (n.dot(eye - p) < 0.0) {
                n = -n;
            }
            const double ndotl = std::max(0.0, n.dot(light.to_light(p)));
            double lit = 0.0;
            if (ndotl > 0.0 && map.lit(p, settings.bias)) {
                lit = ndotl;
            }
            out.at(x, y) =
                static_cast<float>(clamp01(light.ambient + (1.0 - light.ambient) * lit));
        }
    });
    return out;
}

} // namespace splatgen
