#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "splatgen/camera.hpp"
#include "splatgen/compositor.hpp"
#include "splatgen/evaluator.hpp"
#include "splatgen/labeler.hpp"
#include "splatgen/light.hpp"
#include "splatgen/motion_path.hpp"
#include "splatgen/physics.hpp"
#include "splatgen/splat.hpp"

namespace splatgen {

inline constexpr const char* kPipelineVersion = "splatgen-1.0";

struct AssetEntry {
    std::string name;
    std::filesystem::path splat;
    std::filesystem::path mesh;
    std::uint32_t class_id = 0;
    /// Name written to the dataset class list; defaults to the asset name.
    std::string class_name;
    double mass = 1.0;
    /// Transform the mesh reconstruction applied on top of the splat frame.
    SimilarityTransform reconstruction;
    /// Optional JSON list of masked views used to strip the splat background.
    std::optional<std::filesystem::path> views;
};

struct CameraConfig {
    double hfov_deg = 60.0;
    double near = 0.01;
    double far = 100.0;
    Vec3 target = Vec3::Zero();
    /// Eye keyframes (time in [0,1], position). Empty means an orbit around `target`.
    std::vector<Keyframe> keys;
    Interpolation interpolation = Interpolation::catmull_rom;
    double orbit_radius = 1.2;
    double orbit_height = 0.9;
    double orbit_start_deg = 0.0;
    double orbit_end_deg = 120.0;
};

struct LightConfig {
    LightKind kind = LightKind::directional;
    /// Directional: travel direction at t = 0 and t = 1. Point: position at t = 0 and t = 1.
    Vec3 start = Vec3(-0.4, -0.3, -1.0);
    Vec3 end = Vec3(0.4, -0.2, -1.0);
    double ambient = 0.3;
    int shadow_resolution = 2048;
    double shadow_bias = 2e-3;
};

struct ProjectConfig {
    std::filesystem::path base_dir;  // relative paths resolve against this
    std::vector<AssetEntry> assets;
    std::optional<std::filesystem::path> environment;
    Vec3 workspace_min = Vec3(-0.5, -0.5, 0.0);
    Vec3 workspace_max = Vec3(0.5, 0.5, 0.6);
    /// Half-size of the table proxy used by the shadow pass, as a multiple of the workspace.
    double table_extent = 2.0;
    CountRange object_count{2, 6};
    CameraConfig camera;
    LightConfig light;
    int frame_count = 20;
    double train_fraction = 0.75;
    double val_fraction = 0.25;
    int width = 640;
    int height = 480;
    Rgb background{0.5, 0.5, 0.5};
    CompositeParams composite;
    AugmentParams augment;
    PhysicsParams physics;
    int max_settle_steps = kDefaultMaxSettleSteps;
    double ke_threshold = kDefaultKeThreshold;
    LabelSettings labels;
    std::uint64_t seed = 0;
    std::filesystem::path cache_dir = "cache";
    std::filesystem::path output_dir = "dataset";

    /// Throws ConfigError on a violated invariant.
    void validate() const;
    std::vector<std::string> class_names() const;
    std::filesystem::path resolve(const std::filesystem::path& p) const;
};

/// Dotted-key override such as {"composite.blur_sigma", "3.0"}; the value is TOML syntax.
struct ConfigOverride {
    std::string key;
    std::string value;
};

/// Parses a TOML scene configuration, applying overrides on top. Relative paths resolve
/// against the file's directory. Unknown keys raise ConfigError.
ProjectConfig load_config(const std::filesystem::path& path,
                          const std::vector<ConfigOverride>& overrides = {});
ProjectConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                           const std::vector<ConfigOverride>& overrides = {});

/// Frame indices assigned to training, by a seeded shuffle; round(train_fraction * n) of them.
std::vector<bool> split_assignment(int frame_count, double train_fraction, std::uint64_t seed);

/// Everything rendered for one frame.
struct FrameRender {
    std::uint64_t seed = 0;
    bool converged = false;
    int settle_steps = 0;
    WorldState world;
    PinholeCamera camera;
    Pose pose;
    LightRig light;
    ImageRgb appearance;
    ShadowMapPass shadow_raw;
    ShadowMapPass shadow_processed;
    IdBuffer ids;
    ImageRgb composite;
    std::vector<InstanceLabel> labels;
    /// Lowest per-instance IoU between emitted polygons and the ID map (1 with no labels).
    double min_label_iou = 1.0;
};

/// Assets loaded from the prepared cache.
struct PreparedScene {
    std::vector<SpawnAsset> spawn;
    std::vector<SplatCloud> splats;
    SplatCloud environment;
};

PreparedScene load_prepared(const ProjectConfig& cfg);

FrameRender render_frame(const ProjectConfig& cfg, const PreparedScene& scene, int frame_index);

/// Per-instance IoU of emitted polygons against the ID-map mask, lowest value.
double label_fidelity(const IdBuffer& ids, const std::vector<InstanceLabel>& labels);

// Subcommands. Each returns a process exit code.

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitPartial = 3;

struct PrepareStats {
    int processed = 0;
    int cached = 0;
};

PrepareStats cmd_prepare(const ProjectConfig& cfg);

struct GenerateStats {
    int emitted = 0;
    int train = 0;
    int val = 0;
    int failed = 0;
    double min_label_iou = 1.0;
};

/// Renders the dataset; returns kExitPartial when more than 10% of the frames fail.
int cmd_generate(const ProjectConfig& cfg, int workers, GenerateStats* stats = nullptr);
void cmd_preview(const ProjectConfig& cfg, int frame_index, const std::filesystem::path& out_dir);

struct EvalOptions {
    int width = 640;
    int height = 480;
    /// JSON object mapping label stems to [width, height]; overrides the fixed size.
    std::optional<std::filesystem::path> sizes;
};

EvalReport cmd_eval(const std::filesystem::path& gt_dir, const std::filesystem::path& pred_dir,
                    const std::filesystem::path& out_dir, const EvalOptions& options);

/// Writes toy assets (sphere, box, flat ground environment) and a matching toy.toml.
void cmd_make_toy_assets(const std::filesystem::path& out_dir);

/// Structural dataset check; returns human-readable problems (empty when valid).
std::vector<std::string> validate_dataset(const std::filesystem::path& dataset_dir);

/// Worker count from SPLATGEN_WORKERS, else `fallback`.
int workers_from_env(int fallback);

} // namespace splatgen
