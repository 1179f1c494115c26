// Command-line front end: prepare, generate, preview, eval, make-toy-assets, validate.
#include <cstdio>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "splatgen/errors.hpp"
#include "splatgen/pipeline.hpp"

namespace {

using splatgen::ConfigOverride;

// Flags that mirror config fields; set ones are applied on top of the config file.
struct OverrideFlags {
    std::vector<std::pair<std::string, std::optional<double>>> numbers;
    std::optional<long long> seed;
    std::optional<int> frames;
    std::optional<int> width;
    std::optional<int> height;
    std::optional<std::string> output_dir;
    std::vector<std::string> raw;

    void attach(CLI::App* cmd) {
        static const char* kFields[][2] = {
            {"--blur-sigma", "composite.blur_sigma"},
            {"--sigmoid-k", "composite.sigmoid_k"},
            {"--sigmoid-c", "composite.sigmoid_c"},
            {"--shadow-floor", "composite.shadow_floor"},
            {"--highlight-threshold", "composite.highlight_threshold"},
            {"--highlight-strength", "composite.highlight_strength"},
            {"--hue-shift-max", "augment.hue_shift_max"},
            {"--exposure-stops-max", "augment.exposure_stops_max"},
            {"--noise-sigma-max", "augment.noise_sigma_max"},
        };
        numbers.reserve(std::size(kFields));
        for (const auto& f : kFields) {
            numbers.emplace_back(f[1], std::nullopt);
            cmd->add_option(f[0], numbers.back().second, std::string("Override ") + f[1]);
        }
        cmd->add_option("--seed", seed, "Master seed");
        cmd->add_option("--frames", frames, "Frame count");
        cmd->add_option("--width", width, "Image width");
        cmd->add_option("--height", height, "Image height");
        cmd->add_option("--output-dir", output_dir, "Dataset output directory");
        cmd->add_option("--set", raw, "Generic override key=value (TOML value syntax)");
    }

    std::vector<ConfigOverride> collect() const {
        std::vector<ConfigOverride> out;
        char buf[64];
        for (const auto& [key, value] : numbers) {
            if (value) {
                std::snprintf(buf, sizeof(buf), "%.17g", *value);
                std::string v = buf;
                if (v.find_first_of(".eEn") == std::string::npos) {
                    v += ".0";
                }
                out.push_back({key, v});
            }
        }
        if (seed) out.push_back({"seed", std::to_string(*seed)});
        if (frames) out.push_back({"frame_count", std::to_string(*frames)});
        if (width) out.push_back({"width", std::to_string(*width)});
        if (height) out.push_back({"height", std::to_string(*height)});
        if (output_dir) {
            // TOML literal string, no escapes
            out.push_back({"output_dir", "'" + *output_dir + "'"});
        }
        for (const std::string& r : raw) {
            const auto eq = r.find('=');
            if (eq == std::string::npos) {
                throw splatgen::ArgumentError("--set expects key=value, got '" + r + "'");
            }
            out.push_back({r.substr(0, eq), r.substr(eq + 1)});
        }
        return out;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"splatgen: synthetic labeled datasets from Gaussian splats and proxy meshes"};
    app.require_subcommand(1);

    std::string config;
    OverrideFlags flags;
    int workers = 0;
    int frame = 0;
    std::string out_dir;
    std::string gt_dir;
    std::string pred_dir;
    std::string sizes;
    int eval_width = 640;
    int eval_height = 480;
    std::string dataset;

    auto* prepare = app.add_subcommand("prepare", "Strip, align and cache the configured assets");
    prepare->add_option("config", config, "Scene config (TOML)")->required();
    flags.attach(prepare);

    OverrideFlags gen_flags;
    auto* generate = app.add_subcommand("generate", "Render and label the dataset");
    generate->add_option("config", config, "Scene config (TOML)")->required();
    generate->add_option("-j,--workers", workers,
                         "Worker threads (default: SPLATGEN_WORKERS or hardware concurrency)");
    gen_flags.attach(generate);

    OverrideFlags prev_flags;
    auto* preview = app.add_subcommand("preview", "Write the intermediate passes of one frame");
    preview->add_option("config", config, "Scene config (TOML)")->required();
    preview->add_option("--frame", frame, "Frame index")->required();
    preview->add_option("--out", out_dir, "Output directory")->required();
    prev_flags.attach(preview);

    auto* eval = app.add_subcommand("eval", "Box and mask mAP of predictions against labels");
    eval->add_option("--gt", gt_dir, "Ground-truth label directory")->required();
    eval->add_option("--pred", pred_dir, "Prediction label directory")->required();
    eval->add_option("--out", out_dir, "Report directory")->required();
    eval->add_option("--width", eval_width, "Image width for all labels");
    eval->add_option("--height", eval_height, "Image height for all labels");
    eval->add_option("--sizes", sizes, "JSON map from label stem to [width, height]");

    auto* toy = app.add_subcommand("make-toy-assets", "Write procedural toy assets and toy.toml");
    toy->add_option("out", out_dir, "Output directory")->required();

    auto* validate = app.add_subcommand("validate", "Structural check of a generated dataset");
    validate->add_option("dataset", dataset, "Dataset directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? splatgen::kExitOk : splatgen::kExitUsage;
    }

    try {
        if (*prepare) {
            const auto cfg = splatgen::load_config(config, flags.collect());
            const auto stats = splatgen::cmd_prepare(cfg);
            std::cout << "prepared " << stats.processed << " asset(s), " << stats.cached
                      << " cached\n";
        } else if (*generate) {
            const auto cfg = splatgen::load_config(config, gen_flags.collect());
            const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
            const int n = workers > 0 ? workers : splatgen::workers_from_env(hw);
            splatgen::GenerateStats stats;
            const int code = splatgen::cmd_generate(cfg, n, &stats);
            std::cout << "emitted " << stats.emitted << " frame(s) (" << stats.train << " train, "
                      << stats.val << " val), " << stats.failed << " failed, lowest label IoU "
                      << stats.min_label_iou << "\n";
            if (code != splatgen::kExitOk) {
                std::cerr << "more than 10% of the frames failed\n";
            }
            return code;
        } else if (*preview) {
            const auto cfg = splatgen::load_config(config, prev_flags.collect());
            splatgen::cmd_preview(cfg, frame, out_dir);
            std::cout << "wrote preview passes to " << out_dir << "\n";
        } else if (*eval) {
            splatgen::EvalOptions options;
            options.width = eval_width;
            options.height = eval_height;
            if (!sizes.empty()) {
                options.sizes = sizes;
            }
            const auto report = splatgen::cmd_eval(gt_dir, pred_dir, out_dir, options);
            std::cout << splatgen::format_report_text(report);
        } else if (*toy) {
            splatgen::cmd_make_toy_assets(out_dir);
            std::cout << "wrote toy assets and toy.toml to " << out_dir << "\n";
        } else if (*validate) {
            const auto problems = splatgen::validate_dataset(dataset);
            for (const auto& p : problems) {
                std::cerr << p << "\n";
            }
            if (!problems.empty()) {
                return splatgen::kExitData;
            }
            std::cout << "dataset OK\n";
        }
    } catch (const splatgen::ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return splatgen::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return splatgen::kExitData;
    }
    return splatgen::kExitOk;
}
