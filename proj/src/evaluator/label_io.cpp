#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "splatgen/errors.hpp"
#include "splatgen/evaluator.hpp"

namespace splatgen {

namespace {

[[noreturn]] void bad_line(const std::filesystem::path& path, std::size_t line_no,
                           const std::string& what) {
    throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

double parse_number(const std::string& tok, const std::filesystem::path& path,
                    std::size_t line_no) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        bad_line(path, line_no, "not a number: '" + tok + "'");
    }
    if (used != tok.size() || !std::isfinite(v)) {
        bad_line(path, line_no, "not a number: '" + tok + "'");
    }
    return v;
}

} // namespace

void read_yolo_file(const std::filesystem::path& path, std::uint32_t image_id, ImageSize size,
                    bool with_confidence, std::vector<GroundTruth>* truths,
                    std::vector<Detection>* detections) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::vector<std::string> toks;
        for (std::string t; ss >> t;) {
            toks.push_back(t);
        }
        if (toks.empty()) {
            continue;
        }
        const std::size_t extra = with_confidence ? 1 : 0;
        if (toks.size() < 7 + extra || (toks.size() - 1 - extra) % 2 != 0) {
            bad_line(path, line_no, "expected class, at least 3 x/y pairs" +
                                        std::string(with_confidence ? " and a confidence" : ""));
        }
        const double cls = parse_number(toks[0], path, line_no);
        if (cls < 0.0 || cls != std::floor(cls) || cls > 4294967295.0) {
            bad_line(path, line_no, "class index must be a non-negative integer");
        }
        Polygon poly;
        for (std::size_t i = 1; i < toks.size() - extra; i += 2) {
            const double x = parse_number(toks[i], path, line_no);
            const double y = parse_number(toks[i + 1], path, line_no);
            if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) {
                bad_line(path, line_no, "coordinate outside [0,1]");
            }
            poly.emplace_back(x * size.width, y * size.height);
        }
        const BoxPx box = bbox_of({poly});
        if (with_confidence) {
            const double conf = parse_number(toks.back(), path, line_no);
            if (conf < 0.0 || conf > 1.0) {
                bad_line(path, line_no, "confidence outside [0,1]");
            }
            detections->push_back(
                {image_id, static_cast<std::uint32_t>(cls), conf, box, {std::move(poly)}});
        } else {
            truths->push_back({image_id, static_cast<std::uint32_t>(cls), box, {std::move(poly)}});
        }
    }
}

LabelSet read_label_dirs(const std::filesystem::path& gt_dir,
                         const std::filesystem::path& pred_dir,
                         const std::function<ImageSize(const std::string&)>& size_of) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(gt_dir)) {
        throw IoError("not a directory: " + gt_dir.string());
    }
    if (!fs::is_directory(pred_dir)) {
        throw IoError("not a directory: " + pred_dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(gt_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    LabelSet set;
    for (const fs::path& file : files) {
        const auto id = static_cast<std::uint32_t>(set.image_names.size());
        const std::string stem = file.stem().string();
        set.image_names.push_back(stem);
        const ImageSize size = size_of(stem);
        read_yolo_file(file, id, size, false, &set.truths, nullptr);
        const fs::path pred = pred_dir / file.filename();
        if (fs::exists(pred)) {
            read_yolo_file(pred, id, size, true, nullptr, &set.detections);
        }
    }
    for (const auto& entry : fs::directory_iterator(pred_dir)) {
        if (entry.path().extension() == ".txt" && !fs::exists(gt_dir / entry.path().filename())) {
            throw DataError("prediction file without ground truth: " + entry.path().string());
        }
    }
    return set;
}

namespace {

nlohmann::json metric_json(const MetricReport& m) {
    nlohmann::json j;
    j["map50"] = m.map50;
    j["map50_95"] = m.map50_95;
    const auto thresholds = iou_thresholds();
    nlohmann::json classes = nlohmann::json::object();
    for (const auto& [cls, aps] : m.class_ap) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& ap : aps) {
            row.push_back(ap.has_value() ? nlohmann::json(*ap) : nlohmann::json(nullptr));
        }
        classes[std::to_string(cls)] = row;
    }
    j["class_ap"] = classes;
    nlohmann::json counts = nlohmann::json::array();
    for (int t = 0; t < kNumThresholds; ++t) {
        counts.push_back({{"iou", thresholds[t]},
                          {"tp", m.counts[t].tp},
                          {"fp", m.counts[t].fp},
                          {"fn", m.counts[t].fn}});
    }
    j["counts"] = counts;
    return j;
}

void append_metric_text(std::string& out, const char* name, const MetricReport& m) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s  mAP50 %.6f  mAP50-95 %.6f\n", name, m.map50, m.map50_95);
    out += buf;
    out += "  class  AP50      AP50-95\n";
    for (const auto& [cls, aps] : m.class_ap) {
        if (!aps[0].has_value()) {
            std::snprintf(buf, sizeof(buf), "  %-5u  -         -\n", cls);
        } else {
            double mean = 0.0;
            for (const auto& ap : aps) {
                mean += *ap;
            }
            std::snprintf(buf, sizeof(buf), "  %-5u  %.6f  %.6f\n", cls, *aps[0],
                          mean / kNumThresholds);
        }
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "  IoU 0.50: TP %d  FP %d  FN %d\n", m.counts[0].tp,
                  m.counts[0].fp, m.counts[0].fn);
    out += buf;
}

} // namespace

std::string format_report_text(const EvalReport& report) {
    std::string out;
    append_metric_text(out, "box ", report.box);
    append_metric_text(out, "mask", report.mask);
    return out;
}

std::string format_report_json(const EvalReport& report) {
    nlohmann::json j;
    j["box_map50"] = report.box.map50;
    j["box_map50_95"] = report.box.map50_95;
    j["mask_map50"] = report.mask.map50;
    j["mask_map50_95"] = report.mask.map50_95;
    j["box"] = metric_json(report.box);
    j["mask"] = metric_json(report.mask);
    return j.dump(2) + "\n";
}

} // namespace splatgen
