#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "splatgen/image.hpp"
#include "splatgen/math.hpp"

namespace splatgen {

struct PixelPoint {
    int x = 0;
    int y = 0;

    friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

/// 8-connected set of pixels sharing one instance id.
struct PixelRegion {
    std::vector<PixelPoint> pixels;  // row-major order
    int area() const { return static_cast<int>(pixels.size()); }
};

/// Closed polygon, vertices in pixel coordinates (pixel (x, y) spans [x, x+1) x [y, y+1)).
using Polygon = std::vector<Vec2>;

struct LabelPolygon {
    Polygon vertices;
    /// Pixels of the region the polygon was traced from.
    int pixel_area = 0;
};

struct InstanceLabel {
    std::uint32_t class_id = 0;
    std::uint32_t instance_id = 0;
    std::vector<LabelPolygon> polygons;

    int pixel_area() const;
};

struct YoloLine {
    std::uint32_t class_index = 0;
    std::vector<double> coords;  // normalized x, y pairs
};

struct BoxPx {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double area() const { return (x_max - x_min) * (y_max - y_min); }
    friend bool operator==(const BoxPx&, const BoxPx&) = default;
};

inline constexpr double kDefaultSimplifyEpsilon = 1.5;
inline constexpr double kDefaultMinAreaFrac = 1e-4;

/// 8-connected components of the pixels equal to `instance_id`, in order of their first
/// pixel in row-major scan.
std::vector<PixelRegion> extract_components(const IdBuffer& ids, std::uint32_t instance_id);

/// Outer border of an 8-connected region on the pixel-corner lattice. Starts at the top-left
/// corner of the topmost-then-leftmost pixel and runs with positive shoelace area in image
/// coordinates (clockwise on screen). Only direction changes are kept as vertices. Holes
/// are ignored.
Polygon trace_contour(const PixelRegion& region);

/// Closed-loop Ramer-Douglas-Peucker. ε = 0 returns the input; results keep ≥ 3 vertices.
Polygon simplify_polygon(const Polygon& poly, double epsilon);

/// Removes polygons smaller than min_area_frac of the image and instances left empty.
std::vector<InstanceLabel> filter_fragments(const std::vector<InstanceLabel>& labels,
                                            double min_area_frac, int width, int height);

std::vector<YoloLine> to_yolo_lines(const std::vector<InstanceLabel>& labels, int width,
                                    int height);
/// "<class> x1 y1 x2 y2 ..." with six decimals, one line per polygon, newline-terminated.
std::string serialize_yolo(const std::vector<YoloLine>& lines);

/// Tight bounds over all vertices. Throws ArgumentError for a label without polygons.
BoxPx bbox_from_polygons(const InstanceLabel& label);
BoxPx bbox_of(const std::vector<Polygon>& polys);

/// Pixel-centre even-odd rasterization of polygons (pixel coordinates).
BinaryMask rasterize_polygons(const std::vector<Polygon>& polys, int width, int height);

/// Intersection over union of two binary masks of equal size; 0 when both are empty.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

struct LabelSettings {
    double epsilon = kDefaultSimplifyEpsilon;
    double min_area_frac = kDefaultMinAreaFrac;
    /// Each part's simplified polygon, and each instance as a whole, must reproduce its
    /// hole-filled region at least this well; otherwise the tolerance is halved until it does
    /// (ε = 0 is exact).
    double fidelity_iou = 0.95;
};

/// Full labeling of one id map: components, contours, simplification and fragment filter.
/// `class_of` maps instance ids to class ids; instances missing from it are skipped.
/// Vertices are returned as they read back from the six-decimal label text.
std::vector<InstanceLabel> label_id_map(const IdBuffer& ids,
                                        const std::vector<std::pair<std::uint32_t, std::uint32_t>>& class_of,
                                        const LabelSettings& settings = {});

} // namespace splatgen
