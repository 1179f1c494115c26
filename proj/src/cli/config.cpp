#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "splatgen/errors.hpp"
#include "splatgen/pipeline.hpp"
#include "splatgen/random.hpp"

namespace splatgen {

namespace {

// Reads typed keys from one TOML table and rejects keys nobody asked for.
class TableReader {
public:
    TableReader(const toml::table* table, std::string prefix)
        : table_(table), prefix_(std::move(prefix)) {}

    template <typename T>
    void get(const char* key, T& out) {
        const toml::node* n = find(key);
        if (n == nullptr) {
            return;
        }
        if constexpr (std::is_same_v<T, bool>) {
            const auto v = n->value<bool>();
            if (!v) {
                fail(key, "a boolean");
            }
            out = *v;
        } else if constexpr (std::is_integral_v<T>) {
            const auto v = n->as_integer();
            if (v == nullptr) {
                fail(key, "an integer");
            }
            const std::int64_t raw = v->get();
            if constexpr (std::is_unsigned_v<T>) {
                out = static_cast<T>(raw);  // seeds wrap into the unsigned range
            } else {
                if (raw < std::numeric_limits<T>::min() || raw > std::numeric_limits<T>::max()) {
                    throw ConfigError(path(key) + ": value out of range");
                }
                out = static_cast<T>(raw);
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            const auto v = n->value<double>();
            if (!v || n->is_boolean()) {
                fail(key, "a number");
            }
            out = *v;
        } else if constexpr (std::is_same_v<T, std::string>) {
            const auto v = n->value<std::string>();
            if (!v || !n->is_string()) {
                fail(key, "a string");
            }
            out = *v;
        } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
            std::string s;
            get(key, s);
            out = s;
        } else {
            static_assert(sizeof(T) == 0, "unsupported config type");
        }
    }

    std::vector<double> numbers(const char* key, std::size_t expected) {
        const toml::node* n = find(key);
        std::vector<double> out;
        if (n == nullptr) {
            return out;
        }
        const toml::array* arr = n->as_array();
        if (arr == nullptr || (expected != 0 && arr->size() != expected)) {
            fail(key, expected != 0 ? "an array of " + std::to_string(expected) + " numbers"
                                    : std::string("an array of numbers"));
        }
        for (const toml::node& e : *arr) {
            const auto v = e.value<double>();
            if (!v || e.is_boolean()) {
                fail(key, "an array of numbers");
            }
            out.push_back(*v);
        }
        return out;
    }

    void vec3(const char* key, Vec3& out) {
        const auto v = numbers(key, 3);
        if (!v.empty()) {
            out = Vec3(v[0], v[1], v[2]);
        }
    }

    void rgb(const char* key, Rgb& out) {
        const auto v = numbers(key, 3);
        if (!v.empty()) {
            out = Rgb{v[0], v[1], v[2]};
        }
    }

    const toml::table* table(const char* key) {
        const toml::node* n = find(key);
        if (n == nullptr) {
            return nullptr;
        }
        if (!n->is_table()) {
            fail(key, "a table");
        }
        return n->as_table();
    }

    const toml::array* array(const char* key) {
        const toml::node* n = find(key);
        if (n == nullptr) {
            return nullptr;
        }
        if (!n->is_array()) {
            fail(key, "an array");
        }
        return n->as_array();
    }

    void finish() const {
        if (table_ == nullptr) {
            return;
        }
        for (const auto& [k, v] : *table_) {
            (void)v;
            if (used_.count(std::string(k.str())) == 0) {
                throw ConfigError("unknown config key '" + path(std::string(k.str()).c_str()) + "'");
            }
        }
    }

private:
    const toml::node* find(const char* key) {
        used_.insert(key);
        return table_ == nullptr ? nullptr : table_->get(key);
    }

    std::string path(const char* key) const {
        return prefix_.empty() ? std::string(key) : prefix_ + "." + key;
    }

    [[noreturn]] void fail(const char* key, const std::string& what) const {
        throw ConfigError(path(key) + " must be " + what);
    }

    const toml::table* table_;
    std::string prefix_;
    std::set<std::string> used_;
};

void apply_override(toml::table& root, const ConfigOverride& o) {
    toml::table parsed;
    try {
        parsed = toml::parse("v = " + o.value);
    } catch (const toml::parse_error& e) {
        throw ConfigError("bad value for " + o.key + ": " + std::string(e.description()));
    }
    toml::table* t = &root;
    std::string rest = o.key;
    for (std::size_t dot; (dot = rest.find('.')) != std::string::npos;) {
        const std::string part = rest.substr(0, dot);
        rest = rest.substr(dot + 1);
        toml::node* n = t->get(part);
        if (n == nullptr) {
            t->insert(part, toml::table{});
            n = t->get(part);
        }
        if (!n->is_table()) {
            throw ConfigError("cannot override " + o.key + ": '" + part + "' is not a table");
        }
        t = n->as_table();
    }
    t->insert_or_assign(rest, std::move(*parsed.get("v")));
}

Interpolation parse_interp(const std::string& s) {
    if (s == "linear") {
        return Interpolation::linear;
    }
    if (s == "catmull_rom") {
        return Interpolation::catmull_rom;
    }
    throw ConfigError("camera.interpolation must be 'linear' or 'catmull_rom'");
}

Quat quat_from(const std::vector<double>& v, const std::string& what) {
    Quat q(v[0], v[1], v[2], v[3]);
    if (!(q.norm() > 1e-12)) {
        throw ConfigError(what + " must be a non-zero quaternion [w, x, y, z]");
    }
    return q.normalized();
}

} // namespace

ProjectConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                           const std::vector<ConfigOverride>& overrides) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "config line " << e.source().begin.line << ": " << e.description();
        throw ConfigError(msg.str());
    }
    for (const ConfigOverride& o : overrides) {
        apply_override(root, o);
    }

    ProjectConfig cfg;
    cfg.base_dir = base_dir;
    TableReader top(&root, "");
    top.get("seed", cfg.seed);
    top.get("frame_count", cfg.frame_count);
    top.get("width", cfg.width);
    top.get("height", cfg.height);
    top.get("train_fraction", cfg.train_fraction);
    top.get("val_fraction", cfg.val_fraction);
    top.rgb("background", cfg.background);
    top.get("cache_dir", cfg.cache_dir);
    top.get("output_dir", cfg.output_dir);
    top.get("table_extent", cfg.table_extent);
    std::filesystem::path env;
    top.get("environment", env);
    if (!env.empty()) {
        cfg.environment = env;
    }

    {
        TableReader r(top.table("workspace"), "workspace");
        r.vec3("min", cfg.workspace_min);
        r.vec3("max", cfg.workspace_max);
        r.finish();
    }
    {
        TableReader r(top.table("objects"), "objects");
        r.get("min", cfg.object_count.min);
        r.get("max", cfg.object_count.max);
        r.finish();
    }
    {
        CameraConfig& c = cfg.camera;
        TableReader r(top.table("camera"), "camera");
        r.get("hfov_deg", c.hfov_deg);
        r.get("near", c.near);
        r.get("far", c.far);
        r.vec3("target", c.target);
        std::string interp;
        r.get("interpolation", interp);
        if (!interp.empty()) {
            c.interpolation = parse_interp(interp);
        }
        r.get("orbit_radius", c.orbit_radius);
        r.get("orbit_height", c.orbit_height);
        r.get("orbit_start_deg", c.orbit_start_deg);
        r.get("orbit_end_deg", c.orbit_end_deg);
        if (const toml::array* keys = r.array("keys")) {
            for (const toml::node& k : *keys) {
                const toml::array* a = k.as_array();
                if (a == nullptr || a->size() != 4) {
                    throw ConfigError("camera.keys entries must be [t, x, y, z]");
                }
                std::array<double, 4> v{};
                for (std::size_t i = 0; i < 4; ++i) {
                    const auto x = (*a)[i].value<double>();
                    if (!x) {
                        throw ConfigError("camera.keys entries must be [t, x, y, z]");
                    }
                    v[i] = *x;
                }
                Keyframe kf;
                kf.time = v[0];
                kf.state.position = Vec3(v[1], v[2], v[3]);
                c.keys.push_back(kf);
            }
        }
        r.finish();
    }
    {
        LightConfig& l = cfg.light;
        TableReader r(top.table("light"), "light");
        std::string kind;
        r.get("kind", kind);
        if (kind == "point") {
            l.kind = LightKind::point;
        } else if (!kind.empty() && kind != "directional") {
            throw ConfigError("light.kind must be 'directional' or 'point'");
        }
        r.vec3("start", l.start);
        r.vec3("end", l.end);
        r.get("ambient", l.ambient);
        r.get("shadow_resolution", l.shadow_resolution);
        r.get("shadow_bias", l.shadow_bias);
        r.finish();
    }
    {
        CompositeParams& p = cfg.composite;
        TableReader r(top.table("composite"), "composite");
        r.get("blur_sigma", p.blur_sigma);
        r.get("sigmoid_k", p.sigmoid_k);
        r.get("sigmoid_c", p.sigmoid_c);
        r.get("shadow_floor", p.shadow_floor);
        r.get("highlight_threshold", p.highlight_threshold);
        r.get("highlight_strength", p.highlight_strength);
        r.rgb("light_color", p.light_color);
        r.finish();
    }
    {
        AugmentParams& p = cfg.augment;
        TableReader r(top.table("augment"), "augment");
        r.get("hue_shift_max", p.hue_shift_max);
        r.get("exposure_stops_max", p.exposure_stops_max);
        r.get("noise_sigma_max", p.noise_sigma_max);
        p.seed = hash_combine(cfg.seed, 0xa11);  // default: derived from the master seed
        r.get("seed", p.seed);
        r.finish();
    }
    {
        PhysicsParams& p = cfg.physics;
        TableReader r(top.table("physics"), "physics");
        r.vec3("gravity", p.gravity);
        r.get("restitution", p.restitution);
        r.get("friction", p.friction);
        r.get("dt", p.dt);
        r.get("solver_iterations", p.solver_iterations);
        r.get("slop", p.slop);
        r.get("bounce_threshold", p.bounce_threshold);
        r.get("linear_damping", p.linear_damping);
        r.get("angular_damping", p.angular_damping);
        r.get("max_settle_steps", cfg.max_settle_steps);
        r.get("ke_threshold", cfg.ke_threshold);
        r.finish();
    }
    {
        TableReader r(top.table("labels"), "labels");
        r.get("epsilon", cfg.labels.epsilon);
        r.get("min_area_frac", cfg.labels.min_area_frac);
        r.get("fidelity_iou", cfg.labels.fidelity_iou);
        r.finish();
    }
    if (const toml::array* assets = top.array("asset")) {
        std::size_t index = 0;
        for (const toml::node& n : *assets) {
            const std::string prefix = "asset[" + std::to_string(index++) + "]";
            if (!n.is_table()) {
                throw ConfigError(prefix + " must be a table");
            }
            AssetEntry a;
            TableReader r(n.as_table(), prefix);
            r.get("name", a.name);
            r.get("splat", a.splat);
            r.get("mesh", a.mesh);
            r.get("class_id", a.class_id);
            r.get("class_name", a.class_name);
            r.get("mass", a.mass);
            std::filesystem::path views;
            r.get("views", views);
            if (!views.empty()) {
                a.views = views;
            }
            {
                TableReader t(r.table("reconstruction"), prefix + ".reconstruction");
                t.get("scale", a.reconstruction.scale);
                const auto q = t.numbers("rotation", 4);
                if (!q.empty()) {
                    a.reconstruction.rotation = quat_from(q, prefix + ".reconstruction.rotation");
                }
                t.vec3("translation", a.reconstruction.translation);
                t.finish();
            }
            r.finish();
            if (a.name.empty() || a.splat.empty() || a.mesh.empty()) {
                throw ConfigError(prefix + " needs name, splat and mesh");
            }
            cfg.assets.push_back(std::move(a));
        }
    }
    top.finish();
    cfg.validate();
    return cfg;
}

ProjectConfig load_config(const std::filesystem::path& path,
                          const std::vector<ConfigOverride>& overrides) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str(), path.parent_path(), overrides);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void ProjectConfig::validate() const {
    if (frame_count < 1) {
        throw ConfigError("frame_count must be at least 1");
    }
    if (!(train_fraction >= 0.0 && val_fraction >= 0.0) ||
        std::abs(train_fraction + val_fraction - 1.0) > 1e-9) {
        throw ConfigError("train_fraction and val_fraction must be non-negative and sum to 1");
    }
    if (width < 1 || height < 1) {
        throw ConfigError("image size must be at least 1x1");
    }
    if (!(workspace_min.array() < workspace_max.array()).all()) {
        throw ConfigError("workspace min must be below max on every axis");
    }
    if (object_count.min < 0 || object_count.max < object_count.min) {
        throw ConfigError("objects.min/max must satisfy 0 <= min <= max");
    }
    if (!(table_extent >= 1.0)) {
        throw ConfigError("table_extent must be at least 1");
    }
    if (light.shadow_resolution < 16) {
        throw ConfigError("light.shadow_resolution must be at least 16");
    }
    if (!(camera.hfov_deg > 0.0 && camera.hfov_deg < 180.0)) {
        throw ConfigError("camera.hfov_deg must lie in (0, 180)");
    }
    if (!(physics.dt > 0.0) || physics.solver_iterations < 1 || max_settle_steps < 1) {
        throw ConfigError("physics dt, solver_iterations and max_settle_steps must be positive");
    }
    try {
        composite.validate();
        augment.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
    }
    std::vector<bool> seen;
    std::set<std::string> names;
    for (const AssetEntry& a : assets) {
        if (!(a.mass > 0.0)) {
            throw ConfigError("asset '" + a.name + "' needs positive mass");
        }
        if (!(a.reconstruction.scale > 0.0)) {
            throw ConfigError("asset '" + a.name + "' needs a positive reconstruction scale");
        }
        if (!names.insert(a.name).second) {
            throw ConfigError("duplicate asset name '" + a.name + "'");
        }
        if (a.class_id >= seen.size()) {
            seen.resize(a.class_id + 1, false);
        }
        seen[a.class_id] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw ConfigError("class ids must be dense from 0");
    }
}

std::vector<std::string> ProjectConfig::class_names() const {
    std::vector<std::string> names;
    for (const AssetEntry& a : assets) {
        if (a.class_id >= names.size()) {
            names.resize(a.class_id + 1);
        }
        // several assets may share a class; the first name wins
        if (names[a.class_id].empty()) {
            names[a.class_id] = a.class_name.empty() ? a.name : a.class_name;
        }
    }
    return names;
}

std::filesystem::path ProjectConfig::resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : base_dir / p;
}

std::vector<bool> split_assignment(int frame_count, double train_fraction, std::uint64_t seed) {
    std::vector<int> order(static_cast<std::size_t>(frame_count));
    for (int i = 0; i < frame_count; ++i) {
        order[i] = i;
    }
    Rng rng(hash_combine(seed, 0x5b1171));
    for (int i = frame_count - 1; i > 0; --i) {
        std::swap(order[i], order[rng.integer(0, i)]);
    }
    const auto n_train = static_cast<int>(std::llround(train_fraction * frame_count));
    std::vector<bool> train(static_cast<std::size_t>(frame_count), false);
    for (int i = 0; i < n_train; ++i) {
        train[order[i]] = true;
    }
    return train;
}

} // namespace splatgen
