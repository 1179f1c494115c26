#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "splatgen/labeler.hpp"

namespace splatgen {

struct Detection {
    std::uint32_t image_id = 0;
    std::uint32_t class_id = 0;
    double confidence = 1.0;
    BoxPx box;
    std::vector<Polygon> mask;  // empty when the detector gives boxes only
};

struct GroundTruth {
    std::uint32_t image_id = 0;
    std::uint32_t class_id = 0;
    BoxPx box;
    std::vector<Polygon> mask;
};

struct ImageSize {
    int width = 0;
    int height = 0;
};

double iou_box(const BoxPx& a, const BoxPx& b);
/// IoU of the pixel-centre rasterizations of two polygon sets.
double iou_mask(const std::vector<Polygon>& a, const std::vector<Polygon>& b, int width,
                int height);

struct MatchResult {
    std::vector<bool> true_positive;  // per detection, input order
    std::vector<double> confidence;   // per detection, input order
    int false_negatives = 0;
    int num_gt = 0;

    int tp_count() const;
    int fp_count() const;
};

using IouFn = std::function<double(std::size_t det, std::size_t gt)>;

/// Greedy matching within each (image, class): detections by confidence descending, ties by
/// input order, each takes the unmatched ground truth with highest IoU >= threshold.
MatchResult match_predictions(const std::vector<Detection>& dets,
                              const std::vector<GroundTruth>& gts, const IouFn& iou,
                              double threshold);

struct PRCurve {
    std::vector<double> recall;
    std::vector<double> precision;  // after the monotone envelope
};

PRCurve pr_curve(const std::vector<bool>& flags, int num_gt);

/// 101-point interpolated AP over flags already ordered by confidence.
/// Empty when there is nothing to score (no ground truths and no detections).
std::optional<double> average_precision(const std::vector<bool>& flags, int num_gt);

inline constexpr int kNumThresholds = 10;
std::array<double, kNumThresholds> iou_thresholds();

struct ThresholdCounts {
    int tp = 0;
    int fp = 0;
    int fn = 0;
};

struct MetricReport {
    /// AP per class per threshold; unset entries are excluded from averaging.
    std::map<std::uint32_t, std::array<std::optional<double>, kNumThresholds>> class_ap;
    std::array<ThresholdCounts, kNumThresholds> counts{};
    double map50 = 0.0;
    double map50_95 = 0.0;
};

struct EvalReport {
    MetricReport box;
    MetricReport mask;

    double box_map50() const { return box.map50; }
    double box_map50_95() const { return box.map50_95; }
    double mask_map50() const { return mask.map50; }
    double mask_map50_95() const { return mask.map50_95; }
};

/// Box and mask metrics. `sizes` gives the raster size per image id for mask IoU.
/// Throws DataError when there are no ground truths.
EvalReport evaluate(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                    const std::map<std::uint32_t, ImageSize>& sizes);

// Label-set I/O.

struct LabelSet {
    std::vector<std::string> image_names;  // index = image id
    std::vector<GroundTruth> truths;
    std::vector<Detection> detections;
};

/// Parses one YOLO segmentation file. With `with_confidence` every line carries a trailing
/// confidence token. Malformed lines raise FormatError naming file and line.
void read_yolo_file(const std::filesystem::path& path, std::uint32_t image_id, ImageSize size,
                    bool with_confidence, std::vector<GroundTruth>* truths,
                    std::vector<Detection>* detections);

/// Reads every .txt label under `gt_dir` and the same-named file under `pred_dir` (missing
/// prediction files mean no detections). `size_of` maps a label stem to its image size.
LabelSet read_label_dirs(const std::filesystem::path& gt_dir,
                         const std::filesystem::path& pred_dir,
                         const std::function<ImageSize(const std::string&)>& size_of);

std::string format_report_text(const EvalReport& report);
std::string format_report_json(const EvalReport& report);

} // namespace splatgen
