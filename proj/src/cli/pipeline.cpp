#include "splatgen/pipeline.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "splatgen/errors.hpp"
#include "splatgen/mesh_raster.hpp"
#include "splatgen/parallel.hpp"
#include "splatgen/random.hpp"
#include "splatgen/splat_raster.hpp"

namespace splatgen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + p.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) {
        throw IoError("write failed: " + p.string());
    }
}

// 64-bit FNV-1a over a sequence of byte strings (each length-prefixed).
class Fnv {
public:
    void add(std::string_view bytes) {
        const std::uint64_t n = bytes.size();
        for (int i = 0; i < 8; ++i) {
            byte(static_cast<unsigned char>(n >> (8 * i)));
        }
        for (char c : bytes) {
            byte(static_cast<unsigned char>(c));
        }
    }
    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016" PRIx64, h_);
        return buf;
    }

private:
    void byte(unsigned char c) {
        h_ ^= c;
        h_ *= 0x100000001b3ULL;
    }
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct ViewsFile {
    double keep_frac = kDefaultKeepFrac;
    std::vector<MaskedView> views;
    std::vector<fs::path> mask_paths;
};

Vec3 json_vec3(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3) {
        throw FormatError(what + " must be an array of 3 numbers");
    }
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

ViewsFile read_views(const fs::path& path) {
    ViewsFile vf;
    json j;
    try {
        j = json::parse(read_bytes(path));
        vf.keep_frac = j.value("keep_frac", kDefaultKeepFrac);
        for (const json& v : j.at("views")) {
            MaskedView mv;
            mv.camera.width = v.at("width").get<int>();
            mv.camera.height = v.at("height").get<int>();
            mv.camera.fx = v.at("fx").get<double>();
            mv.camera.fy = v.at("fy").get<double>();
            mv.camera.cx = v.at("cx").get<double>();
            mv.camera.cy = v.at("cy").get<double>();
            mv.camera.validate();
            const Vec3 up = v.contains("up") ? json_vec3(v["up"], "up") : Vec3::UnitZ();
            mv.pose = Pose::look_at(json_vec3(v.at("eye"), "eye"),
                                    json_vec3(v.at("target"), "target"), up);
            const fs::path mask = path.parent_path() / v.at("mask").get<std::string>();
            mv.mask = read_mask_png(mask);
            vf.mask_paths.push_back(mask);
            vf.views.push_back(std::move(mv));
        }
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return vf;
}

std::string asset_key(const ProjectConfig& cfg, const AssetEntry& a) {
    Fnv h;
    h.add(kPipelineVersion);
    h.add(read_bytes(cfg.resolve(a.splat)));
    h.add(read_bytes(cfg.resolve(a.mesh)));
    const SimilarityTransform& t = a.reconstruction;
    for (double v : {t.scale, t.rotation.w(), t.rotation.x(), t.rotation.y(), t.rotation.z(),
                     t.translation.x(), t.translation.y(), t.translation.z()}) {
        h.add(fmt17(v));
    }
    if (a.views) {
        const fs::path vp = cfg.resolve(*a.views);
        h.add(read_bytes(vp));
        for (const fs::path& m : read_views(vp).mask_paths) {
            h.add(read_bytes(m));
        }
    }
    return h.hex();
}

fs::path cache_root(const ProjectConfig& cfg) { return cfg.resolve(cfg.cache_dir); }

PathState orbit_state(const CameraConfig& c, double t) {
    const double deg = c.orbit_start_deg + t * (c.orbit_end_deg - c.orbit_start_deg);
    const double a = deg * std::numbers::pi / 180.0;
    PathState s;
    s.position = c.target + Vec3(c.orbit_radius * std::cos(a), c.orbit_radius * std::sin(a),
                                 c.orbit_height);
    return s;
}

MotionPath camera_path(const CameraConfig& c) {
    std::vector<Keyframe> keys = c.keys;
    if (keys.empty()) {
        constexpr int kOrbitKeys = 9;
        for (int k = 0; k < kOrbitKeys; ++k) {
            const double t = static_cast<double>(k) / (kOrbitKeys - 1);
            keys.push_back({t, orbit_state(c, t)});
        }
    }
    return MotionPath(std::move(keys), c.interpolation);
}

LightRig light_at(const LightConfig& l, double t) {
    const MotionPath path({{0.0, {l.start, Quat::Identity()}}, {1.0, {l.end, Quat::Identity()}}},
                          Interpolation::linear);
    const Vec3 v = path.sample(t).position;
    LightRig rig;
    if (l.kind == LightKind::directional) {
        if (!(v.norm() > 1e-12)) {
            throw ConfigError("light direction degenerates to zero");
        }
        rig = LightRig::directional_light(v.normalized(), l.ambient);
    } else {
        rig = LightRig::point_light(v, l.ambient);
    }
    rig.validate();
    return rig;
}

std::array<std::uint8_t, 3> id_color(std::uint32_t id) {
    if (id == 0) {
        return {0, 0, 0};
    }
    const std::uint64_t h = mix64(id);
    // keep colours away from black
    return {static_cast<std::uint8_t>(64 + (h & 0xbf)), static_cast<std::uint8_t>(64 + ((h >> 8) & 0xbf)),
            static_cast<std::uint8_t>(64 + ((h >> 16) & 0xbf))};
}

void write_id_png(const fs::path& p, const IdBuffer& ids) {
    std::vector<std::uint8_t> rgb;
    rgb.reserve(ids.size() * 3);
    for (std::uint32_t id : ids.pixels()) {
        const auto c = id_color(id);
        rgb.insert(rgb.end(), c.begin(), c.end());
    }
    write_png_rgb8(p, ids.width(), ids.height(), rgb);
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json quat_json(const Quat& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

std::string frame_stem(int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06d", i);
    return buf;
}

} // namespace

int workers_from_env(int fallback) {
    const char* env = std::getenv("SPLATGEN_WORKERS");
    if (env == nullptr || *env == '\0') {
        return fallback;
    }
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1 || n > 1024) {
        throw ArgumentError("SPLATGEN_WORKERS must be an integer in [1, 1024]");
    }
    return static_cast<int>(n);
}

PrepareStats cmd_prepare(const ProjectConfig& cfg) {
    PrepareStats stats;
    std::vector<std::string> errors;
    for (const AssetEntry& a : cfg.assets) {
        try {
            const fs::path dir = cache_root(cfg) / a.name;
            const std::string key = asset_key(cfg, a);
            if (fs::exists(dir / "key.txt") && read_bytes(dir / "key.txt") == key + "\n" &&
                fs::exists(dir / "splat.ply") && fs::exists(dir / "mesh.obj")) {
                ++stats.cached;
                continue;
            }
            fs::create_directories(dir);
            fs::remove(dir / "key.txt");
            // validate inputs before caching
            const SplatCloud splat = load_splat_ply(cfg.resolve(a.splat));
            const TriMesh mesh = load_obj(cfg.resolve(a.mesh));
            mesh.validate();
            if (a.views) {
                const ViewsFile vf = read_views(cfg.resolve(*a.views));
                save_splat_ply(strip_background(splat, vf.views, vf.keep_frac), dir / "splat.ply");
            } else {
                fs::copy_file(cfg.resolve(a.splat), dir / "splat.ply",
                              fs::copy_options::overwrite_existing);
            }
            if (a.reconstruction.is_identity()) {
                fs::copy_file(cfg.resolve(a.mesh), dir / "mesh.obj",
                              fs::copy_options::overwrite_existing);
            } else {
                save_obj(align_mesh_to_splat(mesh, a.reconstruction), dir / "mesh.obj");
            }
            write_text(dir / "key.txt", key + "\n");
            ++stats.processed;
        } catch (const std::exception& e) {
            errors.push_back("asset '" + a.name + "': " + e.what());
        }
    }
    if (!errors.empty()) {
        std::string msg = "asset preparation failed:";
        for (const std::string& e : errors) {
            msg += "\n  " + e;
        }
        throw DataError(msg);
    }
    return stats;
}

PreparedScene load_prepared(const ProjectConfig& cfg) {
    PreparedScene scene;
    if (cfg.assets.empty()) {
        throw ConfigError("the config declares no assets");
    }
    for (const AssetEntry& a : cfg.assets) {
        const fs::path dir = cache_root(cfg) / a.name;
        if (!fs::exists(dir / "key.txt") || read_bytes(dir / "key.txt") != asset_key(cfg, a) + "\n") {
            throw DataError("asset '" + a.name + "' is not prepared or is stale; run prepare");
        }
        auto mesh = std::make_shared<TriMesh>(load_obj(dir / "mesh.obj"));
        mesh->class_id = a.class_id;
        mesh->validate();
        scene.spawn.push_back({mesh, a.class_id, a.mass});
        scene.splats.push_back(load_splat_ply(dir / "splat.ply"));
    }
    if (cfg.environment) {
        scene.environment = load_splat_ply(cfg.resolve(*cfg.environment));
    }
    return scene;
}

double label_fidelity(const IdBuffer& ids, const std::vector<InstanceLabel>& labels) {
    double worst = 1.0;
    for (const InstanceLabel& label : labels) {
        BinaryMask truth(ids.width(), ids.height(), 0);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            truth.pixels()[i] = ids.pixels()[i] == label.instance_id ? 1 : 0;
        }
        std::vector<Polygon> polys;
        for (const LabelPolygon& p : label.polygons) {
            polys.push_back(p.vertices);
        }
        worst = std::min(worst, mask_iou(rasterize_polygons(polys, ids.width(), ids.height()), truth));
    }
    return worst;
}

FrameRender render_frame(const ProjectConfig& cfg, const PreparedScene& scene, int frame_index) {
    if (frame_index < 0 || frame_index >= cfg.frame_count) {
        throw ArgumentError("frame index " + std::to_string(frame_index) + " outside [0, " +
                            std::to_string(cfg.frame_count) + ")");
    }
    FrameRender f;
    f.seed = hash_combine(cfg.seed, static_cast<std::uint64_t>(frame_index));
    WorldState world = spawn_objects(scene.spawn, cfg.object_count, cfg.workspace_min,
                                     cfg.workspace_max, f.seed, cfg.physics);
    SettleResult settled = settle(std::move(world), cfg.max_settle_steps, cfg.ke_threshold);
    f.converged = settled.converged;
    f.settle_steps = settled.steps;
    f.world = std::move(settled.world);

    const double t = frame_time(frame_index, cfg.frame_count);
    f.camera = PinholeCamera::from_fov(cfg.width, cfg.height, cfg.camera.hfov_deg, cfg.camera.near,
                                       cfg.camera.far);
    f.pose = Pose::look_at(camera_path(cfg.camera).sample(t).position, cfg.camera.target);
    f.light = light_at(cfg.light, t);

    std::vector<SplatCloud> object_splats;
    object_splats.reserve(f.world.bodies.size());
    std::vector<PosedMesh> objects;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> class_of;
    for (const RigidBody& b : f.world.bodies) {
        object_splats.push_back(sync_splat_to_mesh(scene.splats[b.asset], b.mesh_pose()));
        objects.push_back(b.posed());
        class_of.emplace_back(b.instance_id, b.class_id);
    }
    std::vector<const SplatCloud*> clouds;
    if (!scene.environment.empty()) {
        clouds.push_back(&scene.environment);
    }
    for (const SplatCloud& c : object_splats) {
        clouds.push_back(&c);
    }
    f.appearance = render_appearance(clouds, f.camera, f.pose, cfg.background);

    // Shadow pass sees the objects plus the table proxy.
    std::vector<PosedMesh> shadow_meshes = objects;
    const Vec3 half = 0.5 * (cfg.workspace_max - cfg.workspace_min);
    const Vec3 centre = 0.5 * (cfg.workspace_max + cfg.workspace_min);
    auto table = std::make_shared<TriMesh>(make_quad(cfg.table_extent * std::max(half.x(), half.y())));
    RigidPose table_pose;
    table_pose.position = Vec3(centre.x(), centre.y(), cfg.workspace_min.z());
    PosedMesh table_mesh = PosedMesh::of(table, table_pose);
    table_mesh.instance = 0xffffffffu;
    shadow_meshes.push_back(table_mesh);
    ShadowSettings ss;
    ss.resolution = cfg.light.shadow_resolution;
    ss.bias = cfg.light.shadow_bias;
    f.shadow_raw = render_shadow_pass(shadow_meshes, f.camera, f.pose, f.light, ss);
    f.shadow_processed = process_shadow(f.shadow_raw, cfg.composite);
    f.composite = composite_frame(f.appearance, f.shadow_raw, cfg.composite, cfg.augment,
                                  static_cast<std::uint64_t>(frame_index));

    f.ids = render_id_map(objects, f.camera, f.pose);
    f.labels = label_id_map(f.ids, class_of, cfg.labels);
    f.min_label_iou = label_fidelity(f.ids, f.labels);
    return f;
}

int cmd_generate(const ProjectConfig& cfg, int workers, GenerateStats* stats_out) {
    const PreparedScene scene = load_prepared(cfg);
    const fs::path out = cfg.resolve(cfg.output_dir);
    for (const char* sub : {"images/train", "images/val", "labels/train", "labels/val"}) {
        fs::remove_all(out / sub);
        fs::create_directories(out / sub);
    }
    fs::remove(out / "manifest.json");
    const std::vector<bool> train = split_assignment(cfg.frame_count, cfg.train_fraction, cfg.seed);

    struct Record {
        bool ok = false;
        std::string error;
        json entry;
    };
    std::vector<Record> records(static_cast<std::size_t>(cfg.frame_count));
    std::mutex log_mutex;
    parallel_for(records.size(), workers, [&](std::size_t i) {
        const int index = static_cast<int>(i);
        const std::string split = train[i] ? "train" : "val";
        const std::string stem = frame_stem(index);
        const std::string image = "images/" + split + "/" + stem + ".png";
        const std::string label = "labels/" + split + "/" + stem + ".txt";
        Record& rec = records[i];
        try {
            const FrameRender f = render_frame(cfg, scene, index);
            write_png_rgb(out / image, f.composite);
            write_text(out / label,
                       serialize_yolo(to_yolo_lines(f.labels, cfg.width, cfg.height)));
            json objects = json::array();
            for (const RigidBody& b : f.world.bodies) {
                const RigidPose mp = b.mesh_pose();
                objects.push_back({{"instance_id", b.instance_id},
                                   {"class_id", b.class_id},
                                   {"asset", cfg.assets[b.asset].name},
                                   {"position", vec_json(mp.position)},
                                   {"rotation", quat_json(mp.rotation)}});
            }
            rec.entry = {{"frame_index", index},
                         {"split", split},
                         {"image", image},
                         {"label", label},
                         {"seed", f.seed},
                         {"camera",
                          {{"rotation", quat_json(f.pose.rotation)},
                           {"translation", vec_json(f.pose.translation)},
                           {"center", vec_json(f.pose.camera_center())}}},
                         {"settle", {{"converged", f.converged}, {"steps", f.settle_steps}}},
                         {"label_min_iou", f.min_label_iou},
                         {"objects", objects}};
            rec.ok = true;
        } catch (const std::exception& e) {
            rec.error = e.what();
            std::lock_guard lock(log_mutex);
            std::cerr << "frame " << index << " failed: " << e.what() << "\n";
        }
    });

    GenerateStats stats;
    json frames = json::array();
    json failures = json::array();
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].ok) {
            frames.push_back(records[i].entry);
            ++stats.emitted;
            ++(train[i] ? stats.train : stats.val);
            stats.min_label_iou = std::min(stats.min_label_iou,
                                           records[i].entry["label_min_iou"].get<double>());
        } else {
            failures.push_back({{"frame_index", i}, {"error", records[i].error}});
            ++stats.failed;
        }
    }
    const auto names = cfg.class_names();
    std::string yaml = "path: .\ntrain: images/train\nval: images/val\nnc: " +
                       std::to_string(names.size()) + "\nnames:\n";
    for (std::size_t c = 0; c < names.size(); ++c) {
        yaml += "  " + std::to_string(c) + ": " + names[c] + "\n";
    }
    write_text(out / "dataset.yaml", yaml);
    const json manifest = {{"version", kPipelineVersion},
                           {"master_seed", cfg.seed},
                           {"frame_count", cfg.frame_count},
                           {"width", cfg.width},
                           {"height", cfg.height},
                           {"classes", names},
                           {"frames", frames},
                           {"failures", failures}};
    write_text(out / "manifest.json", manifest.dump(2) + "\n");
    if (stats_out != nullptr) {
        *stats_out = stats;
    }
    return stats.failed * 10 > cfg.frame_count ? kExitPartial : kExitOk;
}

void cmd_preview(const ProjectConfig& cfg, int frame_index, const fs::path& out_dir) {
    if (frame_index < 0 || frame_index >= cfg.frame_count) {
        throw ArgumentError("frame index " + std::to_string(frame_index) + " outside [0, " +
                            std::to_string(cfg.frame_count) + ")");
    }
    const PreparedScene scene = load_prepared(cfg);
    const FrameRender f = render_frame(cfg, scene, frame_index);
    fs::create_directories(out_dir);
    write_png_rgb(out_dir / "appearance.png", f.appearance);
    write_png_gray(out_dir / "shadow_raw.png", f.shadow_raw);
    write_png_gray(out_dir / "shadow_processed.png", f.shadow_processed);
    write_id_png(out_dir / "id_map.png", f.ids);
    write_png_rgb(out_dir / "composite.png", f.composite);
}

EvalReport cmd_eval(const fs::path& gt_dir, const fs::path& pred_dir, const fs::path& out_dir,
                    const EvalOptions& options) {
    std::map<std::string, ImageSize> table;
    if (options.sizes) {
        try {
            const json j = json::parse(read_bytes(*options.sizes));
            for (const auto& [stem, wh] : j.items()) {
                table[stem] = {wh.at(0).get<int>(), wh.at(1).get<int>()};
            }
        } catch (const json::exception& e) {
            throw FormatError(options.sizes->string() + ": " + e.what());
        }
    }
    const LabelSet set = read_label_dirs(gt_dir, pred_dir, [&](const std::string& stem) {
        if (options.sizes) {
            const auto it = table.find(stem);
            if (it == table.end()) {
                throw DataError("no image size for '" + stem + "'");
            }
            return it->second;
        }
        return ImageSize{options.width, options.height};
    });
    std::map<std::uint32_t, ImageSize> sizes;
    for (std::size_t i = 0; i < set.image_names.size(); ++i) {
        sizes[static_cast<std::uint32_t>(i)] =
            options.sizes ? table.at(set.image_names[i]) : ImageSize{options.width, options.height};
    }
    const EvalReport report = evaluate(set.detections, set.truths, sizes);
    fs::create_directories(out_dir);
    write_text(out_dir / "report.txt", format_report_text(report));
    write_text(out_dir / "report.json", format_report_json(report));
    return report;
}

std::vector<std::string> validate_dataset(const fs::path& dir) {
    std::vector<std::string> problems;
    std::size_t classes = 0;
    if (!fs::exists(dir / "dataset.yaml")) {
        problems.push_back("missing dataset.yaml");
    } else {
        std::istringstream in(read_bytes(dir / "dataset.yaml"));
        bool found = false;
        for (std::string line; std::getline(in, line);) {
            if (line.rfind("nc: ", 0) == 0) {
                classes = std::stoul(line.substr(4));
                found = true;
            }
        }
        if (!found) {
            problems.push_back("dataset.yaml has no class count");
        }
    }
    std::size_t images = 0;
    for (const char* split : {"train", "val"}) {
        const fs::path img_dir = dir / "images" / split;
        const fs::path lbl_dir = dir / "labels" / split;
        if (!fs::is_directory(img_dir) || !fs::is_directory(lbl_dir)) {
            problems.push_back(std::string("missing images/labels directory for ") + split);
            continue;
        }
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(img_dir)) {
            files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const fs::path& img : files) {
            if (img.extension() != ".png") {
                continue;
            }
            ++images;
            const fs::path lbl = lbl_dir / (img.stem().string() + ".txt");
            if (!fs::exists(lbl)) {
                problems.push_back("no label file for " + img.string());
                continue;
            }
            std::vector<GroundTruth> truths;
            try {
                read_yolo_file(lbl, 0, {1, 1}, false, &truths, nullptr);
            } catch (const Error& e) {
                problems.push_back(e.what());
                continue;
            }
            for (const GroundTruth& g : truths) {
                if (g.class_id >= classes) {
                    problems.push_back(lbl.string() + ": class index " + std::to_string(g.class_id) +
                                       " not in the class list");
                }
            }
        }
        for (const auto& e : fs::directory_iterator(lbl_dir)) {
            if (!fs::exists(img_dir / (e.path().stem().string() + ".png"))) {
                problems.push_back("label without image: " + e.path().string());
            }
        }
    }
    if (!fs::exists(dir / "manifest.json")) {
        problems.push_back("missing manifest.json");
    } else {
        try {
            const json m = json::parse(read_bytes(dir / "manifest.json"));
            const auto& frames = m.at("frames");
            if (frames.size() != images) {
                problems.push_back("manifest lists " + std::to_string(frames.size()) +
                                   " images, found " + std::to_string(images));
            }
            for (const json& f : frames) {
                for (const char* key : {"image", "label"}) {
                    if (!fs::exists(dir / f.at(key).get<std::string>())) {
                        problems.push_back("manifest entry missing on disk: " +
                                           f.at(key).get<std::string>());
                    }
                }
            }
        } catch (const json::exception& e) {
            problems.push_back(std::string("manifest.json: ") + e.what());
        }
    }
    return problems;
}

} // namespace splatgen
