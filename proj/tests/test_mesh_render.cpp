#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>

#include "oracles.hpp"
#include "splatgen/errors.hpp"
#include "splatgen/mesh.hpp"
#include "splatgen/mesh_raster.hpp"
#include "splatgen/random.hpp"

using namespace splatgen;

namespace {

PinholeCamera cam100() {
    PinholeCamera c;
    c.fx = c.fy = 100;
    c.cx = c.cy = 50;
    c.width = c.height = 100;
    return c;
}

PosedMesh placed(const TriMesh& m, const Vec3& pos, std::uint32_t id, const Quat& q = Quat::Identity()) {
    auto mesh = std::make_shared<TriMesh>(m);
    mesh->instance_id = id;
    return PosedMesh::of(mesh, RigidPose{pos, q});
}

// Where the ray through pixel (x, y) meets the plane z = 0.
Vec3 ground_hit(const PinholeCamera& cam, const Pose& pose, int x, int y) {
    const Vec3 dir_cam(((x + 0.5) - cam.cx) / cam.fx, ((y + 0.5) - cam.cy) / cam.fy, 1.0);
    const Vec3 o = pose.camera_center();
    const Vec3 d = pose.rotation.conjugate() * dir_cam;
    return o + (-o.z() / d.z()) * d;
}

} // namespace

TEST_CASE("rasterize_depth examples") {
    const PinholeCamera cam = cam100();
    SUBCASE("no meshes") {
        const DepthBuffer d = rasterize_depth({}, cam, Pose{});
        for (float v : d.pixels()) {
            CHECK(std::isinf(v));
        }
    }
    SUBCASE("full-frame quad at depth 2") {
        const std::vector<PosedMesh> m = {placed(make_quad(10), Vec3(0, 0, 2), 1)};
        const DepthBuffer d = rasterize_depth(m, cam, Pose{});
        for (float v : d.pixels()) {
            CHECK(std::abs(v - 2.0) < 1e-5);
        }
    }
    SUBCASE("overlapping quads at 1 and 2") {
        const std::vector<PosedMesh> m = {placed(make_quad(0.3), Vec3(0.4, 0, 2), 1),
                                          placed(make_quad(0.2), Vec3(0, 0, 1), 2)};
        const DepthBuffer d = rasterize_depth(m, cam, Pose{});
        CHECK(d.at(50, 50) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(d.at(75, 50) == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(std::isinf(d.at(2, 2)));
    }
    SUBCASE("tilted plane uses perspective-correct depth") {
        // plane z = 2 + 0.5 x in camera frame
        TriMesh plane = make_quad(3);
        const Quat tilt(Eigen::AngleAxisd(-std::atan(0.5), Vec3::UnitY()));
        const std::vector<PosedMesh> m = {placed(plane, Vec3(0, 0, 2), 1, tilt)};
        const DepthBuffer d = rasterize_depth(m, cam, Pose{});
        for (int x = 5; x < 95; x += 7) {
            // ray (u, 1) * z hits z = 2 + 0.5 u z
            const double u = (x + 0.5 - 50) / 100.0;
            const double z = 2.0 / (1 - 0.5 * u);
            CHECK(d.at(x, 50) == doctest::Approx(z).epsilon(1e-5));
        }
    }
}

TEST_CASE("near-plane clipping keeps the visible part") {
    const PinholeCamera cam = cam100();
    // quad spanning depths from behind the camera to well in front
    const Quat tilt(Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitX()));
    const std::vector<PosedMesh> m = {placed(make_quad(3), Vec3(0, 0.3, 1.5), 1, tilt)};
    const DepthBuffer d = rasterize_depth(m, cam, Pose{});
    int covered = 0;
    for (int y = 0; y < 100; ++y) {
        for (int x = 0; x < 100; ++x) {
            if (std::isfinite(d.at(x, y))) {
                ++covered;
                CHECK(d.at(x, y) >= cam.near);
            }
        }
    }
    CHECK(covered > 0);
}

TEST_CASE("shared edges are filled exactly once") {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        // jittered grid triangulation with a fixed rectangular border; every triangle is
        // rasterized on its own and coverage is summed
        const int n = 5;
        const double x0 = rng.uniform(2, 10);
        const double y0 = rng.uniform(2, 10);
        const double cell = rng.uniform(6, 10);
        std::vector<Vec2> grid;
        for (int j = 0; j <= n; ++j) {
            for (int i = 0; i <= n; ++i) {
                Vec2 p(x0 + i * cell, y0 + j * cell);
                if (i > 0 && i < n && j > 0 && j < n) {
                    p += Vec2(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)) * cell;
                }
                // on the rasterizer's 1/256 sub-pixel grid so the border test is exact
                grid.push_back((p * 256.0).array().round().matrix() / 256.0);
            }
        }
        std::vector<ScreenTriangle> tris;
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const Vec2 a = grid[j * (n + 1) + i];
                const Vec2 b = grid[j * (n + 1) + i + 1];
                const Vec2 c = grid[(j + 1) * (n + 1) + i + 1];
                const Vec2 d = grid[(j + 1) * (n + 1) + i];
                for (const auto& t : {std::array<Vec2, 3>{a, b, c}, std::array<Vec2, 3>{a, c, d}}) {
                    ScreenTriangle st;
                    const bool flip = rng.uniform() < 0.5;  // both windings
                    st.v = {Vec3(t[0].x(), t[0].y(), 1), Vec3(t[flip ? 2 : 1].x(), t[flip ? 2 : 1].y(), 1),
                            Vec3(t[flip ? 1 : 2].x(), t[flip ? 1 : 2].y(), 1)};
                    st.mesh = 0;
                    st.triangle = 0;
                    tris.push_back(st);
                }
            }
        }
        Image<int> count(64, 64, 0);
        for (const ScreenTriangle& t : tris) {
            const std::vector<ScreenTriangle> one = {t};
            const SurfaceBuffer s = rasterize_triangles(one, 64, 64, DepthInterpolation::linear);
            for (int y = 0; y < 64; ++y) {
                for (int x = 0; x < 64; ++x) {
                    count.at(x, y) += s.mesh.at(x, y) >= 0 ? 1 : 0;
                }
            }
        }
        const Polygon border = {grid[0], grid[n], grid[(n + 1) * (n + 1) - 1], grid[n * (n + 1)]};
        const BinaryMask inside = oracle::point_in_polygon_mask({border}, 64, 64);
        for (int y = 0; y < 64; ++y) {
            for (int x = 0; x < 64; ++x) {
                CHECK(count.at(x, y) == (inside.at(x, y) ? 1 : 0));
            }
        }
    }
}

TEST_CASE("thread count does not change the surfaces") {
    const auto cam = PinholeCamera::from_fov(160, 120, 60);
    const Pose pose = Pose::look_at(Vec3(1.5, -1.2, 1.0), Vec3::Zero());
    std::vector<PosedMesh> m;
    Rng rng(6);
    for (std::uint32_t i = 1; i <= 8; ++i) {
        m.push_back(placed(make_uv_sphere(0.15, 8, 12), Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 0.1), i));
    }
    m.push_back(placed(make_quad(2), Vec3::Zero(), 99));
    const SurfaceBuffer a = rasterize_surfaces(m, cam, pose, 1);
    const SurfaceBuffer b = rasterize_surfaces(m, cam, pose, 5);
    CHECK(a.depth == b.depth);
    CHECK(a.mesh == b.mesh);
    CHECK(a.triangle == b.triangle);
    const LightRig light = LightRig::directional_light(Vec3(0.3, 0.4, -1));
    ShadowSettings s1;
    s1.resolution = 512;
    ShadowSettings s4 = s1;
    s4.threads = 4;
    CHECK(render_shadow_pass(m, cam, pose, light, s1) == render_shadow_pass(m, cam, pose, light, s4));
}

TEST_CASE("render_id_map examples") {
    const PinholeCamera cam = cam100();
    SUBCASE("empty scene") {
        for (auto v : render_id_map({}, cam, Pose{}).pixels()) {
            CHECK(v == 0);
        }
    }
    SUBCASE("one cube covers its projected square") {
        const std::vector<PosedMesh> m = {placed(make_box(Vec3::Constant(0.5)), Vec3(0, 0, 3), 7)};
        const IdBuffer ids = render_id_map(m, cam, Pose{});
        for (int y = 0; y < 100; ++y) {
            for (int x = 0; x < 100; ++x) {
                const bool in_r = x >= 30 && x < 70 && y >= 30 && y < 70;
                CHECK(ids.at(x, y) == (in_r ? 7U : 0U));
            }
        }
    }
    SUBCASE("front cube wins the overlap") {
        const std::vector<PosedMesh> m = {placed(make_box(Vec3::Constant(0.5)), Vec3(0.4, 0, 4), 2),
                                          placed(make_box(Vec3::Constant(0.3)), Vec3(0, 0, 2.5), 1)};
        const IdBuffer ids = render_id_map(m, cam, Pose{});
        CHECK(ids.at(50, 50) == 1);
        CHECK(ids.at(70, 50) == 2);
        std::vector<PosedMesh> swapped = {m[1], m[0]};
        CHECK(render_id_map(swapped, cam, Pose{}) == ids);
    }
    SUBCASE("duplicate instance ids") {
        const std::vector<PosedMesh> m = {placed(make_quad(1), Vec3(0, 0, 2), 3), placed(make_quad(1), Vec3(0, 0, 3), 3)};
        CHECK_THROWS_AS(render_id_map(m, cam, Pose{}), ConfigError);
    }
}

TEST_CASE("id pixel counts agree with the depth pass") {
    const auto cam = PinholeCamera::from_fov(200, 150, 60);
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        const Pose pose = Pose::look_at(Vec3(rng.uniform(-2, 2), rng.uniform(-2, -1), rng.uniform(0.5, 2)), Vec3::Zero());
        std::vector<PosedMesh> m;
        for (std::uint32_t i = 1; i <= 6; ++i) {
            const TriMesh shape = i % 2 ? make_box(Vec3(0.1, 0.15, 0.08)) : make_uv_sphere(0.12, 10, 16);
            m.push_back(placed(shape, Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(0, 0.3)), i,
                               Quat(rng.normal(), rng.normal(), rng.normal(), rng.normal()).normalized()));
        }
        const IdBuffer ids = render_id_map(m, cam, pose);
        const SurfaceBuffer s = rasterize_surfaces(m, cam, pose);
        for (std::size_t k = 0; k < m.size(); ++k) {
            long a = 0;
            long b = 0;
            for (std::size_t p = 0; p < ids.size(); ++p) {
                a += ids.pixels()[p] == m[k].instance_id() ? 1 : 0;
                b += s.mesh.pixels()[p] == static_cast<std::int32_t>(k) ? 1 : 0;
            }
            CHECK(a == b);
        }
    }
}

TEST_CASE("shadow pass: unoccluded plane gets ambient + (1 - ambient) n.l") {
    const auto cam = PinholeCamera::from_fov(120, 90, 60);
    const Pose pose = Pose::look_at(Vec3(0, -1.5, 1.2), Vec3::Zero());
    const std::vector<PosedMesh> m = {placed(make_quad(5), Vec3::Zero(), 1)};
    const Vec3 dir = Vec3(0.3, 0.2, -1).normalized();
    const LightRig light = LightRig::directional_light(dir, 0.25);
    const ShadowMapPass s = render_shadow_pass(m, cam, pose, light);
    const auto expect = static_cast<float>(0.25 + 0.75 * (-dir.z()));
    const IdBuffer ids = render_id_map(m, cam, pose);
    for (int y = 0; y < 90; ++y) {
        for (int x = 0; x < 120; ++x) {
            if (ids.at(x, y)) {
                CHECK(std::abs(s.at(x, y) - expect) < 1e-6);
            } else {
                CHECK(s.at(x, y) == 1.0F);
            }
        }
    }
}

TEST_CASE("shadow pass: umbra under an opaque slab is exactly ambient") {
    const auto cam = PinholeCamera::from_fov(160, 120, 60);
    const Pose pose = Pose::look_at(Vec3(2.0, 0.3, 1.5), Vec3::Zero());
    const std::vector<PosedMesh> m = {placed(make_quad(3), Vec3::Zero(), 1),
                                      placed(make_box(Vec3(0.4, 0.4, 0.02)), Vec3(0, 0, 0.5), 2)};
    const LightRig light = LightRig::directional_light(Vec3(0, 0, -1), 0.3);
    const ShadowMapPass s = render_shadow_pass(m, cam, pose, light);
    const IdBuffer ids = render_id_map(m, cam, pose);
    int umbra = 0;
    int lit = 0;
    for (int y = 0; y < 120; ++y) {
        for (int x = 0; x < 160; ++x) {
            if (ids.at(x, y) != 1) {
                continue;
            }
            const Vec3 p = ground_hit(cam, pose, x, y);
            if (std::abs(p.x()) < 0.35 && std::abs(p.y()) < 0.35) {
                CHECK(s.at(x, y) == static_cast<float>(0.3));
                ++umbra;
            } else if (std::abs(p.x()) > 0.45 || std::abs(p.y()) > 0.45) {
                CHECK(s.at(x, y) == 1.0F);
                ++lit;
            }
            CHECK(s.at(x, y) >= static_cast<float>(0.3));
            CHECK(s.at(x, y) <= 1.0F);
        }
    }
    CHECK(umbra > 50);
    CHECK(lit > 50);
}

TEST_CASE("shadow pass: sphere shadow centroid matches the analytic ray cast") {
    const PinholeCamera cam = PinholeCamera::from_fov(512, 512, 60);
    const Vec3 centre(0, 0, 0.5);
    const double r = 0.15;
    const Vec3 dir = Vec3(1, 0, -1).normalized();
    const Pose pose = Pose::look_at(Vec3(0.25, 0, 1.5), Vec3(0.25, 0, 0), Vec3::UnitY());
    const std::vector<PosedMesh> m = {placed(make_quad(3), Vec3::Zero(), 1),
                                      placed(make_uv_sphere(r, 32, 64), centre, 2)};
    const LightRig light = LightRig::directional_light(dir, 0.3);
    const ShadowMapPass s = render_shadow_pass(m, cam, pose, light);
    const IdBuffer ids = render_id_map(m, cam, pose);
    double sx = 0;
    double sy = 0;
    int n = 0;
    for (int y = 0; y < 512; ++y) {
        for (int x = 0; x < 512; ++x) {
            if (ids.at(x, y) == 1 && s.at(x, y) == static_cast<float>(0.3)) {
                sx += x + 0.5;
                sy += y + 0.5;
                ++n;
            }
        }
    }
    REQUIRE(n > 100);
    // ray from the centre along the light direction meets z = 0 at centre + 0.5 / cos45 * dir
    const Vec3 hit = centre + (centre.z() / -dir.z()) * dir;
    const auto proj = project_point(cam, pose, hit);
    REQUIRE(proj);
    CHECK(std::abs(sx / n - proj->u) < 2.0);
    CHECK(std::abs(sy / n - proj->v) < 2.0);
}

TEST_CASE("directional shadow depends only on the direction") {
    const auto cam = PinholeCamera::from_fov(120, 90, 60);
    const Pose pose = Pose::look_at(Vec3(1.5, -1.5, 1.2), Vec3::Zero());
    const std::vector<PosedMesh> m = {placed(make_quad(2), Vec3::Zero(), 1),
                                      placed(make_box(Vec3::Constant(0.2)), Vec3(0, 0, 0.3), 2)};
    ShadowSettings st;
    st.resolution = 512;
    LightRig a = LightRig::directional_light(Vec3(0.2, 0.5, -1));
    LightRig b = a;
    b.position = Vec3(40, -7, 3);
    CHECK(render_shadow_pass(m, cam, pose, a, st) == render_shadow_pass(m, cam, pose, b, st));
}

TEST_CASE("shadow pass: point light and degenerate scenes") {
    const auto cam = PinholeCamera::from_fov(120, 90, 60);
    const Pose pose = Pose::look_at(Vec3(1.5, -1.5, 1.2), Vec3::Zero());
    const std::vector<PosedMesh> m = {placed(make_quad(2), Vec3::Zero(), 1),
                                      placed(make_box(Vec3::Constant(0.2)), Vec3(0, 0, 0.3), 2)};
    ShadowSettings st;
    st.resolution = 512;
    const ShadowMapPass s = render_shadow_pass(m, cam, pose, LightRig::point_light(Vec3(0, 0, 2), 0.3), st);
    int shadowed = 0;
    for (float v : s.pixels()) {
        CHECK(v >= static_cast<float>(0.3));
        CHECK(v <= 1.0F);
        shadowed += v == static_cast<float>(0.3) ? 1 : 0;
    }
    CHECK(shadowed > 0);

    // a single point has no extent
    TriMesh point;
    point.vertices = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    point.triangles = {{0, 1, 2}};
    const std::vector<PosedMesh> degenerate = {placed(point, Vec3(0, 0, 0), 1)};
    CHECK_THROWS_AS(render_shadow_pass(degenerate, cam, pose, LightRig::directional_light(Vec3(0, 0, -1))), ConfigError);
}

TEST_CASE("OBJ round trip and procedural meshes") {
    const auto dir = std::filesystem::temp_directory_path() / "splatgen_test_mesh";
    std::filesystem::create_directories(dir);
    const TriMesh s = make_uv_sphere(0.3, 7, 11);
    CHECK_NOTHROW(s.validate());
    save_obj(s, dir / "s.obj");
    const TriMesh back = load_obj(dir / "s.obj");
    CHECK(back.vertices == s.vertices);
    CHECK(back.triangles == s.triangles);

    std::ofstream(dir / "quad.obj") << "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\nf -4 -2 -1\n";
    const TriMesh q = load_obj(dir / "quad.obj");
    CHECK(q.triangles.size() == 3);
    std::ofstream(dir / "bad.obj") << "v 0 0 0\nf 1 2 3\n";
    CHECK_THROWS(load_obj(dir / "bad.obj"));

    const TriMesh box = make_box(Vec3(1, 2, 3));
    CHECK(box.bounds_min().isApprox(Vec3(-1, -2, -3)));
    CHECK(box.bounds_max().isApprox(Vec3(1, 2, 3)));
    CHECK(box.triangles.size() == 12);
}
