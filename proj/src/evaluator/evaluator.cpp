#include "splatgen/evaluator.hpp"

#include <algorithm>
#include <numeric>

#include "splatgen/errors.hpp"

namespace splatgen {

double iou_box(const BoxPx& a, const BoxPx& b) {
    const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (iw <= 0.0 || ih <= 0.0) {
        return 0.0;
    }
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

double iou_mask(const std::vector<Polygon>& a, const std::vector<Polygon>& b, int width,
                int height) {
    return mask_iou(rasterize_polygons(a, width, height), rasterize_polygons(b, width, height));
}

int MatchResult::tp_count() const {
    return static_cast<int>(std::count(true_positive.begin(), true_positive.end(), true));
}

int MatchResult::fp_count() const {
    return static_cast<int>(true_positive.size()) - tp_count();
}

namespace {

// Detection indices by confidence descending, ties by input order.
std::vector<std::size_t> confidence_order(const std::vector<Detection>& dets) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].confidence > dets[b].confidence;
    });
    return order;
}

} // namespace

MatchResult match_predictions(const std::vector<Detection>& dets,
                              const std::vector<GroundTruth>& gts, const IouFn& iou,
                              double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw ArgumentError("IoU threshold must lie in (0,1]");
    }
    MatchResult result;
    result.true_positive.assign(dets.size(), false);
    result.confidence.resize(dets.size());
    result.num_gt = static_cast<int>(gts.size());
    std::vector<bool> taken(gts.size(), false);
    for (std::size_t d : confidence_order(dets)) {
        result.confidence[d] = dets[d].confidence;
        double best = -1.0;
        std::size_t best_gt = gts.size();
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (taken[g] || gts[g].class_id != dets[d].class_id ||
                gts[g].image_id != dets[d].image_id) {
                continue;
            }
            const double v = iou(d, g);
            if (v >= threshold && v > best) {
                best = v;
                best_gt = g;
            }
        }
        if (best_gt < gts.size()) {
            taken[best_gt] = true;
            result.true_positive[d] = true;
        }
    }
    result.false_negatives = static_cast<int>(std::count(taken.begin(), taken.end(), false));
    return result;
}

PRCurve pr_curve(const std::vector<bool>& flags, int num_gt) {
    PRCurve curve;
    int tp = 0;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        tp += flags[i] ? 1 : 0;
        curve.recall.push_back(num_gt > 0 ? static_cast<double>(tp) / num_gt : 0.0);
        curve.precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
    }
    for (std::size_t i = curve.precision.size(); i-- > 1;) {
        curve.precision[i - 1] = std::max(curve.precision[i - 1], curve.precision[i]);
    }
    return curve;
}

std::optional<double> average_precision(const std::vector<bool>& flags, int num_gt) {
    if (num_gt < 0) {
        throw ArgumentError("num_gt must be non-negative");
    }
    if (num_gt == 0) {
        if (flags.empty()) {
            return std::nullopt;
        }
        return 0.0;
    }
    const PRCurve curve = pr_curve(flags, num_gt);
    double sum = 0.0;
    std::size_t k = 0;
    for (int i = 0; i <= 100; ++i) {
        const double r = i / 100.0;
        while (k < curve.recall.size() && curve.recall[k] < r) {
            ++k;
        }
        // envelope is non-increasing, so the first point reaching r carries the max
        sum += k < curve.recall.size() ? curve.precision[k] : 0.0;
    }
    return sum / 101.0;
}

std::array<double, kNumThresholds> iou_thresholds() {
    std::array<double, kNumThresholds> t{};
    for (int i = 0; i < kNumThresholds; ++i) {
        t[i] = (50 + 5 * i) / 100.0;
    }
    return t;
}

namespace {

// IoU for every same-image same-class (det, gt) pair; 0 elsewhere.
using IouTable = std::vector<std::vector<double>>;

IouTable box_table(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts) {
    IouTable t(dets.size(), std::vector<double>(gts.size(), 0.0));
    for (std::size_t d = 0; d < dets.size(); ++d) {
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (dets[d].image_id == gts[g].image_id && dets[d].class_id == gts[g].class_id) {
                t[d][g] = iou_box(dets[d].box, gts[g].box);
            }
        }
    }
    return t;
}

IouTable mask_table(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                    const std::map<std::uint32_t, ImageSize>& sizes) {
    IouTable t(dets.size(), std::vector<double>(gts.size(), 0.0));
    std::map<std::uint32_t, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> by_image;
    for (std::size_t d = 0; d < dets.size(); ++d) {
        by_image[dets[d].image_id].first.push_back(d);
    }
    for (std::size_t g = 0; g < gts.size(); ++g) {
        by_image[gts[g].image_id].second.push_back(g);
    }
    for (const auto& [image, members] : by_image) {
        const auto& [ds, gs] = members;
        if (ds.empty() || gs.empty()) {
            continue;
        }
        const auto size = sizes.find(image);
        if (size == sizes.end()) {
            throw DataError("no image size for image " + std::to_string(image));
        }
        const int w = size->second.width;
        const int h = size->second.height;
        std::vector<BinaryMask> gmasks;
        gmasks.reserve(gs.size());
        for (std::size_t g : gs) {
            gmasks.push_back(rasterize_polygons(gts[g].mask, w, h));
        }
        for (std::size_t d : ds) {
            const BinaryMask dm = rasterize_polygons(dets[d].mask, w, h);
            for (std::size_t j = 0; j < gs.size(); ++j) {
                if (dets[d].class_id == gts[gs[j]].class_id) {
                    t[d][gs[j]] = mask_iou(dm, gmasks[j]);
                }
            }
        }
    }
    return t;
}

MetricReport score(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                   const IouTable& table) {
    MetricReport report;
    std::map<std::uint32_t, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> by_class;
    for (std::size_t d = 0; d < dets.size(); ++d) {
        by_class[dets[d].class_id].first.push_back(d);
    }
    for (std::size_t g = 0; g < gts.size(); ++g) {
        by_class[gts[g].class_id].second.push_back(g);
    }
    const auto thresholds = iou_thresholds();
    for (const auto& [cls, members] : by_class) {
        const auto& [ds, gs] = members;
        std::vector<Detection> cdets;
        std::vector<GroundTruth> cgts;
        for (std::size_t d : ds) {
            cdets.push_back(dets[d]);
        }
        for (std::size_t g : gs) {
            cgts.push_back(gts[g]);
        }
        const IouFn iou = [&](std::size_t d, std::size_t g) { return table[ds[d]][gs[g]]; };
        const std::vector<std::size_t> order = confidence_order(cdets);
        auto& aps = report.class_ap[cls];
        for (int t = 0; t < kNumThresholds; ++t) {
            const MatchResult m = match_predictions(cdets, cgts, iou, thresholds[t]);
            std::vector<bool> flags;
            flags.reserve(order.size());
            for (std::size_t d : order) {
                flags.push_back(m.true_positive[d]);
            }
            aps[t] = average_precision(flags, m.num_gt);
            report.counts[t].tp += m.tp_count();
            report.counts[t].fp += m.fp_count();
            report.counts[t].fn += m.false_negatives;
        }
    }
    double sum50 = 0.0;
    double sum50_95 = 0.0;
    int classes = 0;
    for (const auto& [cls, aps] : report.class_ap) {
        if (!aps[0].has_value()) {
            continue;  // undefined: neither ground truths nor detections
        }
        double mean = 0.0;
        for (const auto& ap : aps) {
            mean += *ap;
        }
        sum50 += *aps[0];
        sum50_95 += mean / kNumThresholds;
        ++classes;
    }
    if (classes > 0) {
        report.map50 = sum50 / classes;
        report.map50_95 = sum50_95 / classes;
    }
    return report;
}

} // namespace

EvalReport evaluate(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                    const std::map<std::uint32_t, ImageSize>& sizes) {
    if (gts.empty()) {
        throw DataError("evaluation needs at least one ground-truth instance");
    }
    EvalReport report;
    report.box = score(dets, gts, box_table(dets, gts));
    report.mask = score(dets, gts, mask_table(dets, gts, sizes));
    return report;
}

} // namespace splatgen
