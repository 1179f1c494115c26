// Acceptance suite: one PASS/FAIL line per primary criterion, non-zero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "splatgen/compositor.hpp"
#include "splatgen/labeler.hpp"
#include "splatgen/mesh_raster.hpp"
#include "splatgen/physics.hpp"
#include "splatgen/pipeline.hpp"
#include "splatgen/random.hpp"
#include "splatgen/splat_raster.hpp"

using namespace splatgen;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            detail = what;
        }
        pass = pass && ok;
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

// ---------------------------------------------------------------- rasterizer

SplatCloud random_splats(std::uint64_t seed) {
    Rng rng(seed);
    SplatCloud c;
    const int n = static_cast<int>(rng.integer(1, 5));
    for (int i = 0; i < n; ++i) {
        Gaussian3D g;
        g.mean = Vec3(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(1.0, 3.0));
        g.scale = Vec3(rng.uniform(0.02, 0.3), rng.uniform(0.02, 0.3), rng.uniform(0.02, 0.3));
        g.rotation = Quat(rng.normal(), rng.normal(), rng.normal(), rng.normal()).normalized();
        g.opacity = rng.uniform(0.1, 1.0);
        for (double& s : g.sh) {
            s = rng.uniform(-0.6, 0.6);
        }
        c.push_back(g);
    }
    return c;
}

Outcome rasterizer_oracle() {
    Outcome o;
    PinholeCamera cam;
    cam.fx = cam.fy = 40;
    cam.cx = cam.cy = 16;
    cam.width = cam.height = 32;
    const Rgb bg{0.1, 0.2, 0.3};
    constexpr int kSeeds = 200;
    double worst = 0.0;
    const auto t0 = Clock::now();
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
        const SplatCloud c = random_splats(seed);
        const SplatCloud* clouds[] = {&c};
        const ImageRgb tiled = render_appearance(clouds, cam, Pose{}, bg);
        const ImageRgb naive = oracle::naive_render({c}, cam, Pose{}, bg);
        for (std::size_t i = 0; i < tiled.size(); ++i) {
            const Rgb& a = tiled.pixels()[i];
            const Rgb& b = naive.pixels()[i];
            worst = std::max({worst, std::abs(a.r - b.r), std::abs(a.g - b.g), std::abs(a.b - b.b)});
        }
    }
    const double elapsed = seconds_since(t0);
    o.require(worst <= 1e-5, "max channel error " + fmt("%.3g", worst));
    o.require(elapsed < 60.0, "took " + fmt("%.1f s", elapsed));
    if (o.pass) {
        o.detail = std::to_string(kSeeds) + " scenes, max error " + fmt("%.2g", worst) + ", " +
                   fmt("%.2f s", elapsed);
    }
    return o;
}

// ---------------------------------------------------------------- compositing

ImageRgb random_rgb(std::uint64_t seed, int w, int h) {
    Rng rng(seed);
    ImageRgb img(w, h);
    for (Rgb& p : img.pixels()) {
        p = Rgb{rng.uniform(), rng.uniform(), rng.uniform()};
    }
    return img;
}

ShadowMapPass random_map(std::uint64_t seed, int w, int h) {
    Rng rng(seed);
    ShadowMapPass s(w, h);
    for (float& v : s.pixels()) {
        v = static_cast<float>(rng.uniform());
    }
    return s;
}

double max_diff(const ImageRgb& a, const ImageRgb& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max({d, std::abs(a.pixels()[i].r - b.pixels()[i].r),
                      std::abs(a.pixels()[i].g - b.pixels()[i].g),
                      std::abs(a.pixels()[i].b - b.pixels()[i].b)});
    }
    return d;
}

Outcome compositing_suite() {
    Outcome o;
    using oracle::logistic;
    AugmentParams none;
    none.hue_shift_max = 0;
    none.exposure_stops_max = 0;
    none.noise_sigma_max = 0;

    // normalize
    o.require(normalize_map(ShadowMapPass(4, 3, 0.7F)) == ShadowMapPass(4, 3, 1.0F), "normalize constant");
    ShadowMapPass two(2, 1);
    two.at(0, 0) = 0.2F;
    two.at(1, 0) = 0.6F;
    const ShadowMapPass n2 = normalize_map(two);
    o.require(n2.at(0, 0) == 0.0F && n2.at(1, 0) == 1.0F, "normalize endpoints");
    ShadowMapPass three(3, 1);
    three.at(0, 0) = 0.2F;
    three.at(1, 0) = 0.4F;
    three.at(2, 0) = 0.6F;
    const ShadowMapPass n3 = normalize_map(three);
    const double mid = (static_cast<double>(0.4F) - 0.2F) / (static_cast<double>(0.6F) - 0.2F);
    o.require(std::abs(n3.at(1, 0) - mid) < 1e-6 && std::abs(n3.at(1, 0) - 0.5) < 1e-6, "normalize midpoint");

    // blur
    const ShadowMapPass flat(20, 20, 0.37F);
    const ShadowMapPass fb = gaussian_blur(flat, 3.0);
    for (float v : fb.pixels()) {
        if (std::abs(v - 0.37F) > 1e-6) {
            o.require(false, "blur of uniform image");
            break;
        }
    }
    const ShadowMapPass rnd = random_map(1, 30, 20);
    o.require(gaussian_blur(rnd, 0.0) == rnd, "blur sigma 0 identity");
    ShadowMapPass impulse(33, 33, 0.0F);
    impulse.at(16, 16) = 1.0F;
    double ksum = 0.0;
    for (int i = -6; i <= 6; ++i) {
        ksum += std::exp(-i * i / 8.0);
    }
    const double peak = 1.0 / (ksum * ksum);
    o.require(std::abs(gaussian_blur(impulse, 2.0).at(16, 16) - peak) < 1e-6, "blur impulse peak");

    // sigmoid
    for (double k : {1.0, 10.0, 25.0}) {
        for (double c : {0.2, 0.5, 0.8}) {
            o.require(std::abs(sigmoid_value(0.0, k, c)) <= 1e-9, "sigmoid(0)");
            o.require(std::abs(sigmoid_value(1.0, k, c) - 1.0) <= 1e-9, "sigmoid(1)");
        }
    }
    o.require(std::abs(sigmoid_value(0.5, 10, 0.5) - 0.5) <= 1e-9, "sigmoid midpoint");
    const double closed = (logistic(2.5) - logistic(-5)) / (logistic(5) - logistic(-5));
    o.require(std::abs(sigmoid_value(0.75, 10, 0.5) - closed) <= 1e-9, "sigmoid closed form at 0.75");

    // shadows
    const ImageRgb rgb = random_rgb(2, 30, 20);
    o.require(apply_shadows(rgb, ShadowMapPass(30, 20, 1.0F), 0.4) == rgb, "shadows s=1");
    const ImageRgb floor = apply_shadows(rgb, ShadowMapPass(30, 20, 0.0F), 0.4);
    for (std::size_t i = 0; i < rgb.size(); ++i) {
        const Rgb& a = floor.pixels()[i];
        const Rgb& b = rgb.pixels()[i];
        if (a.r != b.r * 0.4 || a.g != b.g * 0.4 || a.b != b.b * 0.4) {
            o.require(false, "shadows s=0 floor");
            break;
        }
    }
    ImageRgb px(1, 1);
    px.at(0, 0) = Rgb{0.8, 0.6, 0.4};
    const Rgb sh = apply_shadows(px, ShadowMapPass(1, 1, 0.5F), 0.4).at(0, 0);
    o.require(std::abs(sh.r - 0.56) < 1e-12 && std::abs(sh.g - 0.42) < 1e-12 && std::abs(sh.b - 0.28) < 1e-12,
              "shadows factor 0.7");

    // highlights
    o.require(apply_highlights(rgb, ShadowMapPass(30, 20, 0.75F), 0.8, 0.15, Rgb{1, 1, 1}) == rgb,
              "highlights below threshold");
    px.at(0, 0) = Rgb{0.2, 0.5, 0.7};
    const Rgb hi = apply_highlights(px, ShadowMapPass(1, 1, 1.0F), 0.8, 0.15, Rgb{1, 1, 1}).at(0, 0);
    o.require(std::abs(hi.r - 0.35) < 1e-12 && std::abs(hi.g - 0.65) < 1e-12 && std::abs(hi.b - 0.85) < 1e-12,
              "highlights H=1");
    const Rgb hp = apply_highlights(px, ShadowMapPass(1, 1, 0.9F), 0.8, 0.15, Rgb{1, 1, 1}).at(0, 0);
    o.require(std::abs(hp.r - 0.2 - 0.075) < 1e-6, "highlights +0.075");

    // augment
    const ImageRgb same = augment(rgb, none, 3);
    o.require(max_diff(same, rgb) < 1e-6, "augment maxima 0");
    AugmentParams ap;
    ap.seed = 42;
    o.require(augment(rgb, ap, 7) == augment(rgb, ap, 7), "augment determinism");
    ImageRgb red(1, 1);
    red.at(0, 0) = Rgb{1, 0, 0};
    AugmentDraws d;
    d.hue_shift_deg = 120;
    const Rgb g = apply_augment(red, d).at(0, 0);
    o.require(std::abs(g.r) < 1e-3 && std::abs(g.g - 1) < 1e-3 && std::abs(g.b) < 1e-3, "hue +120");

    // composite chain
    const CompositeParams cp;
    const ImageRgb cst = composite_frame(rgb, ShadowMapPass(30, 20, 0.42F), cp, none, 0);
    const ImageRgb cst_expect =
        apply_highlights(rgb, ShadowMapPass(30, 20, 1.0F), cp.highlight_threshold, cp.highlight_strength, cp.light_color);
    o.require(max_diff(cst, cst_expect) < 1e-6, "composite constant shadow");
    CompositeParams ident;
    ident.shadow_floor = 1.0;
    ident.highlight_strength = 0.0;
    o.require(max_diff(composite_frame(rgb, random_map(5, 30, 20), ident, none, 1), rgb) < 1e-6,
              "composite identity chain");

    // sphere-over-plane fixture, chained by hand
    auto sphere = std::make_shared<TriMesh>(make_uv_sphere(0.1, 16, 32));
    auto plane = std::make_shared<TriMesh>(make_quad(1.0));
    plane->instance_id = 2;
    const std::vector<PosedMesh> meshes = {PosedMesh::of(sphere, RigidPose{Vec3(0, 0, 0.15), Quat::Identity()}),
                                           PosedMesh::of(plane)};
    const auto cam = PinholeCamera::from_fov(64, 48, 60);
    const Pose pose = Pose::look_at(Vec3(0.6, -0.6, 0.6), Vec3::Zero());
    const LightRig light = LightRig::directional_light(Vec3(0.3, 0.2, -1).normalized(), 0.3);
    ShadowSettings ss;
    ss.resolution = 512;
    const ShadowMapPass raw = render_shadow_pass(meshes, cam, pose, light, ss);
    const ImageRgb app = random_rgb(9, 64, 48);
    CompositeParams fcp;
    AugmentParams fap;
    fap.seed = 3;
    const ShadowMapPass s = sigmoid_remap(gaussian_blur(normalize_map(raw), fcp.blur_sigma), fcp.sigmoid_k, fcp.sigmoid_c);
    const ImageRgb manual = augment(apply_highlights(apply_shadows(app, s, fcp.shadow_floor), s, fcp.highlight_threshold,
                                                     fcp.highlight_strength, fcp.light_color),
                                    fap, 2);
    o.require(composite_frame(app, raw, fcp, fap, 2) == manual, "composite fixture vs manual chain");
    if (o.pass) {
        o.detail = "all examples hold";
    }
    return o;
}

// ---------------------------------------------------------------- labels

Outcome label_fidelity_suite() {
    Outcome o;
    constexpr int kScenes = 60;
    constexpr int kW = 320;
    constexpr int kH = 240;
    double worst = 1.0;
    int instances = 0;
    int lines_total = 0;
    int with_dropped = 0;
    for (std::uint64_t seed = 0; seed < kScenes; ++seed) {
        Rng rng(seed * 7919 + 11);
        std::vector<PosedMesh> meshes;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> class_of;
        const int n = static_cast<int>(rng.integer(2, 6));
        for (int k = 0; k < n; ++k) {
            std::shared_ptr<TriMesh> m;
            const std::uint32_t cls = static_cast<std::uint32_t>(rng.integer(0, 2));
            if (cls == 0) {
                m = std::make_shared<TriMesh>(make_uv_sphere(rng.uniform(0.04, 0.1), 12, 24));
            } else if (cls == 1) {
                m = std::make_shared<TriMesh>(
                    make_box(Vec3(rng.uniform(0.02, 0.1), rng.uniform(0.02, 0.1), rng.uniform(0.02, 0.1))));
            } else {
                m = std::make_shared<TriMesh>(make_quad(rng.uniform(0.03, 0.1)));
            }
            m->instance_id = static_cast<std::uint32_t>(k + 1);
            m->class_id = cls;
            const Quat q = Quat(rng.normal(), rng.normal(), rng.normal(), rng.normal()).normalized();
            const Vec3 p(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(0.0, 0.3));
            meshes.push_back(PosedMesh::of(m, RigidPose{p, q}));
            class_of.emplace_back(m->instance_id, cls);
        }
        const double yaw = rng.uniform(0, 6.283185307179586);
        const Vec3 eye(1.1 * std::cos(yaw), 1.1 * std::sin(yaw), rng.uniform(0.4, 1.0));
        const auto cam = PinholeCamera::from_fov(kW, kH, rng.uniform(45, 70));
        const Pose pose = Pose::look_at(eye, Vec3(0, 0, 0.1));
        const IdBuffer ids = render_id_map(meshes, cam, pose);
        const auto labels = label_id_map(ids, class_of);

        // parse the emitted text, not the in-memory polygons
        const std::string text = serialize_yolo(to_yolo_lines(labels, kW, kH));
        std::map<std::uint32_t, std::vector<Polygon>> parsed;  // by label order
        std::istringstream in(text);
        std::string line;
        std::size_t li = 0;
        std::vector<std::uint32_t> owner;
        for (const InstanceLabel& l : labels) {
            for (std::size_t k = 0; k < l.polygons.size(); ++k) {
                owner.push_back(l.instance_id);
            }
        }
        while (std::getline(in, line)) {
            ++lines_total;
            std::istringstream tok(line);
            long cls = -1;
            std::vector<double> v;
            if (!(tok >> cls) || cls < 0) {
                o.require(false, "unparseable class in scene " + std::to_string(seed));
                continue;
            }
            for (double x; tok >> x;) {
                v.push_back(x);
            }
            if (!tok.eof() || v.size() < 6 || v.size() % 2 != 0) {
                o.require(false, "malformed line in scene " + std::to_string(seed));
                continue;
            }
            Polygon p;
            for (std::size_t i = 0; i < v.size(); i += 2) {
                if (v[i] < 0 || v[i] > 1 || v[i + 1] < 0 || v[i + 1] > 1) {
                    o.require(false, "coordinate outside [0,1] in scene " + std::to_string(seed));
                }
                p.emplace_back(v[i] * kW, v[i + 1] * kH);
            }
            if (li < owner.size()) {
                parsed[owner[li]].push_back(p);
            }
            ++li;
        }
        o.require(li == owner.size(), "line count mismatch in scene " + std::to_string(seed));
        const double min_area = kDefaultMinAreaFrac * kW * kH;
        for (const auto& [id, polys] : parsed) {
            // Reference: the instance's ID-map mask, less the components the fragment filter
            // discards as noise (only small instances ever lose any).
            BinaryMask truth(kW, kH, 0);
            bool lost_fragment = false;
            for (const PixelRegion& r : extract_components(ids, id)) {
                if (r.area() < min_area) {
                    lost_fragment = true;
                    continue;
                }
                for (const PixelPoint& p : r.pixels) {
                    truth.at(p.x, p.y) = 1;
                }
            }
            const double iou = mask_iou(oracle::point_in_polygon_mask(polys, kW, kH), truth);
            worst = std::min(worst, iou);
            ++instances;
            if (lost_fragment) {
                ++with_dropped;
            }
            o.require(iou >= 0.95, "instance " + std::to_string(id) + " in scene " + std::to_string(seed) +
                                       " has IoU " + fmt("%.4f", iou));
        }
    }
    o.require(instances > 0, "no instances labeled");
    if (o.pass) {
        o.detail = std::to_string(kScenes) + " scenes, " + std::to_string(instances) + " instances, " +
                   std::to_string(lines_total) + " lines, min IoU " + fmt("%.4f", worst) + " (" +
                   std::to_string(with_dropped) + " instances lost sub-threshold fragments)";
    }
    return o;
}

// ---------------------------------------------------------------- evaluator

Outcome evaluator_oracle() {
    Outcome o;
    constexpr int kSeeds = 1200;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
        const oracle::EvalCase c = oracle::random_eval_case(seed * 31 + 7, 50, 20, 3);
        const EvalReport r = evaluate(c.dets, c.gts, c.sizes);
        const oracle::Metrics m = oracle::brute_evaluate(c.dets, c.gts, c.sizes);
        const double d = std::max({std::abs(r.box_map50() - m.box_map50), std::abs(r.box_map50_95() - m.box_map50_95),
                                   std::abs(r.mask_map50() - m.mask_map50),
                                   std::abs(r.mask_map50_95() - m.mask_map50_95)});
        worst = std::max(worst, d);
        o.require(d <= 1e-9, "seed " + std::to_string(seed) + " differs by " + fmt("%.3g", d));
    }
    if (o.pass) {
        o.detail = std::to_string(kSeeds) + " seeds, max difference " + fmt("%.2g", worst);
    }
    return o;
}

// ---------------------------------------------------------------- physics

Outcome physics_suite() {
    Outcome o;
    auto cube = std::make_shared<const TriMesh>(make_box(Vec3::Constant(0.05)));

    // cube drop lands on a face
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        WorldState w;
        w.colliders = build_enclosure(Vec3(-1, -1, 0), Vec3(1, 1, 1));
        const Quat q = Quat(rng.normal(), rng.normal(), rng.normal(), rng.normal()).normalized();
        w.bodies.push_back(RigidBody::from_mesh(cube, RigidPose{Vec3(0, 0, 0.5), q}));
        const SettleResult r = settle(w);
        const RigidBody& b = r.world.bodies[0];
        const RigidPose mp = b.mesh_pose();
        double zmin = 1e300;
        int low = 0;
        for (const Vec3& v : b.mesh->vertices) {
            const double z = mp.apply(v).z();
            zmin = std::min(zmin, z);
            low += std::abs(z) <= 1e-3 ? 1 : 0;
        }
        o.require(r.converged, "cube drop did not settle (seed " + std::to_string(seed) + ")");
        o.require(std::abs(zmin) <= 1e-3 && low >= 4,
                  "cube drop seed " + std::to_string(seed) + ": min z " + fmt("%.2e", zmin) + ", " +
                      std::to_string(low) + " vertices on the table");
    }

    // free fall
    WorldState fall;
    fall.bodies.push_back(RigidBody::from_mesh(cube, RigidPose{Vec3(0, 0, 100), Quat::Identity()}));
    for (int i = 0; i < 100; ++i) {
        step_in_place(fall, 0.01);
    }
    const double fallen = 100 - fall.bodies[0].pose.position.z();
    const double expect = 0.5 * 9.81 * 1.0;
    const double rel = std::abs(fallen - expect) / expect;
    o.require(rel < 0.02, "free fall off by " + fmt("%.2f%%", 100 * rel));

    // containment
    const std::vector<SpawnAsset> assets = {{cube, 0, 1.0},
                                            {std::make_shared<const TriMesh>(make_uv_sphere(0.05, 8, 16)), 1, 0.5},
                                            {std::make_shared<const TriMesh>(make_box(Vec3(0.07, 0.03, 0.02))), 2, 0.7}};
    const Vec3 lo(-0.3, -0.3, 0.0);
    const Vec3 hi(0.3, 0.3, 0.45);
    constexpr double kTol = 1e-3;
    int bodies = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const SettleResult r = settle(spawn_objects(assets, {2, 6}, lo, hi, seed));
        for (const RigidBody& b : r.world.bodies) {
            ++bodies;
            const RigidPose mp = b.mesh_pose();
            for (const Vec3& v : b.mesh->vertices) {
                const Vec3 p = mp.apply(v);
                const bool inside = p.x() >= lo.x() - kTol && p.x() <= hi.x() + kTol && p.y() >= lo.y() - kTol &&
                                    p.y() <= hi.y() + kTol && p.z() >= lo.z() - kTol && p.z() <= hi.z() + kTol;
                if (!inside) {
                    o.require(false, "body escaped the enclosure in scene " + std::to_string(seed));
                    break;
                }
            }
        }
    }
    if (o.pass) {
        o.detail = "face contact on 10 drops, free fall error " + fmt("%.3f%%", 100 * rel) + ", " +
                   std::to_string(bodies) + " bodies contained over 100 scenes";
    }
    return o;
}

// ---------------------------------------------------------------- end to end

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            std::ifstream in(e.path(), std::ios::binary);
            std::ostringstream s;
            s << in.rdbuf();
            out[fs::relative(e.path(), root).string()] = s.str();
        }
    }
    return out;
}

Outcome end_to_end() {
    Outcome o;
    const fs::path dir = fs::temp_directory_path() / "splatgen_acceptance_e2e";
    fs::remove_all(dir);
    try {
        cmd_make_toy_assets(dir);
        const ProjectConfig base = load_config(dir / "toy.toml");
        o.require(base.frame_count == 20 && base.width == 640 && base.height == 480, "toy config is not 20 x 640x480");
        cmd_prepare(base);
        ProjectConfig a = base;
        a.output_dir = "run_a";
        ProjectConfig b = base;
        b.output_dir = "run_b";
        GenerateStats stats;
        const auto t0 = Clock::now();
        const int code = cmd_generate(a, 1, &stats);
        const double elapsed = seconds_since(t0);
        o.require(code == kExitOk, "generate exit code " + std::to_string(code));
        o.require(stats.emitted == 20, std::to_string(stats.emitted) + " of 20 frames emitted");
        o.require(cmd_generate(b, 1) == kExitOk, "second generate failed");
        o.require(tree_bytes(dir / "run_a") == tree_bytes(dir / "run_b"), "runs differ");
        o.require(validate_dataset(dir / "run_a").empty(), "dataset fails validation");
        o.require(elapsed < 300.0, "single-threaded run took " + fmt("%.1f s", elapsed));
        if (o.pass) {
            o.detail = "20 frames 640x480, byte-identical, single-threaded " + fmt("%.1f s", elapsed) +
                       ", min label IoU " + fmt("%.4f", stats.min_label_iou);
        }
    } catch (const std::exception& e) {
        o.require(false, std::string("exception: ") + e.what());
    }
    fs::remove_all(dir);
    return o;
}

// ---------------------------------------------------------------- split

Outcome split_convention() {
    Outcome o;
    const ProjectConfig defaults;
    o.require(defaults.train_fraction == 0.75 && defaults.val_fraction == 0.25, "default fractions");
    const auto s = split_assignment(1200, defaults.train_fraction, 0);
    const auto train = std::count(s.begin(), s.end(), true);
    o.require(s.size() == 1200 && train == 900, std::to_string(train) + " train frames of 1200");
    if (o.pass) {
        o.detail = "1200 frames -> 900 train / 300 val";
    }
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"Rasterizer oracle equivalence", rasterizer_oracle},
        {"Compositing analytic suite", compositing_suite},
        {"Label fidelity", label_fidelity_suite},
        {"Evaluator oracle equivalence", evaluator_oracle},
        {"Physics plausibility", physics_suite},
        {"End-to-end determinism and throughput", end_to_end},
        {"Dataset split convention", split_convention},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
