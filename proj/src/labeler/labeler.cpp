#include "splatgen/labeler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "splatgen/errors.hpp"

namespace splatgen {

int InstanceLabel::pixel_area() const {
    int a = 0;
    for (const LabelPolygon& p : polygons) {
        a += p.pixel_area;
    }
    return a;
}

std::vector<PixelRegion> extract_components(const IdBuffer& ids, std::uint32_t instance_id) {
    std::vector<PixelRegion> regions;
    if (instance_id == 0) {
        return regions;
    }
    const int w = ids.width();
    const int h = ids.height();
    std::vector<std::uint8_t> visited(ids.size(), 0);
    std::vector<PixelPoint> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            if (visited[idx] != 0 || ids.at(x, y) != instance_id) {
                continue;
            }
            PixelRegion region;
            visited[idx] = 1;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const PixelPoint p = stack.back();
                stack.pop_back();
                region.pixels.push_back(p);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = p.x + dx;
                        const int ny = p.y + dy;
                        if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h) {
                            continue;
                        }
                        const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
                        if (visited[nidx] == 0 && ids.at(nx, ny) == instance_id) {
                            visited[nidx] = 1;
                            stack.push_back({nx, ny});
                        }
                    }
                }
            }
            std::sort(region.pixels.begin(), region.pixels.end(),
                      [](const PixelPoint& a, const PixelPoint& b) {
                          return a.y != b.y ? a.y < b.y : a.x < b.x;
                      });
            regions.push_back(std::move(region));
        }
    }
    return regions;
}

namespace {

// Membership bitmap over the region's bounding box with a one-pixel empty border.
class RegionBitmap {
public:
    explicit RegionBitmap(const PixelRegion& region) {
        min_x_ = max_x_ = region.pixels.front().x;
        min_y_ = max_y_ = region.pixels.front().y;
        for (const PixelPoint& p : region.pixels) {
            min_x_ = std::min(min_x_, p.x);
            max_x_ = std::max(max_x_, p.x);
            min_y_ = std::min(min_y_, p.y);
            max_y_ = std::max(max_y_, p.y);
        }
        w_ = max_x_ - min_x_ + 3;
        h_ = max_y_ - min_y_ + 3;
        bits_.assign(static_cast<std::size_t>(w_) * h_, 0);
        for (const PixelPoint& p : region.pixels) {
            bits_[index(p.x, p.y)] = 1;
        }
    }

    bool has(int x, int y) const {
        if (x < min_x_ - 1 || y < min_y_ - 1 || x > max_x_ + 1 || y > max_y_ + 1) {
            return false;
        }
        return bits_[index(x, y)] != 0;
    }

    int min_x() const { return min_x_; }
    int min_y() const { return min_y_; }
    int max_x() const { return max_x_; }
    int max_y() const { return max_y_; }

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y - min_y_ + 1) * w_ + (x - min_x_ + 1);
    }

    int min_x_ = 0, max_x_ = 0, min_y_ = 0, max_y_ = 0, w_ = 0, h_ = 0;
    std::vector<std::uint8_t> bits_;
};

struct Dir {
    int dx;
    int dy;
    friend bool operator==(const Dir&, const Dir&) = default;
};

Dir turn_left(Dir d) { return {d.dy, -d.dx}; }
Dir turn_right(Dir d) { return {-d.dy, d.dx}; }

// A lattice edge leaving corner (vx, vy) along d is on the border when the pixel on its
// right (screen orientation, y down) belongs to the region and the pixel on its left does not.
bool border_edge(const RegionBitmap& bm, int vx, int vy, Dir d) {
    int rx = 0, ry = 0, lx = 0, ly = 0;
    if (d.dx == 1) {
        rx = vx; ry = vy; lx = vx; ly = vy - 1;
    } else if (d.dy == 1) {
        rx = vx - 1; ry = vy; lx = vx; ly = vy;
    } else if (d.dx == -1) {
        rx = vx - 1; ry = vy - 1; lx = vx - 1; ly = vy;
    } else {
        rx = vx; ry = vy - 1; lx = vx - 1; ly = vy - 1;
    }
    return bm.has(rx, ry) && !bm.has(lx, ly);
}

double seg_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) {
        return (p - a).norm();
    }
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

void rdp(const std::vector<Vec2>& pts, std::size_t first, std::size_t last, double eps,
         std::vector<char>& keep) {
    if (last <= first + 1) {
        return;
    }
    double best = -1.0;
    std::size_t index = first;
    for (std::size_t i = first + 1; i < last; ++i) {
        const double d = seg_distance(pts[i], pts[first], pts[last]);
        if (d > best) {
            best = d;
            index = i;
        }
    }
    if (best > eps) {
        keep[index] = 1;
        rdp(pts, first, index, eps, keep);
        rdp(pts, index, last, eps, keep);
    }
}

// Even-odd fill of one polygon into `mask` whose pixel (0, 0) is image pixel (ox, oy).
void fill_polygon(const Polygon& poly, BinaryMask& mask, int ox, int oy) {
    if (poly.size() < 3) {
        return;
    }
    std::vector<double> xs;
    for (int y = 0; y < mask.height(); ++y) {
        const double yc = oy + y + 0.5;
        xs.clear();
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const Vec2& p = poly[i];
            const Vec2& q = poly[(i + 1) % poly.size()];
            if ((p.y() <= yc && yc < q.y()) || (q.y() <= yc && yc < p.y())) {
                xs.push_back(p.x() + (yc - p.y()) / (q.y() - p.y()) * (q.x() - p.x()));
            }
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            // pixel centres x + 0.5 in [xs[k], xs[k+1])
            const int x0 = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5 - ox)));
            const int x1 = std::min(mask.width() - 1,
                                    static_cast<int>(std::ceil(xs[k + 1] - 0.5 - ox)) - 1);
            for (int x = x0; x <= x1; ++x) {
                mask.at(x, y) = 1;
            }
        }
    }
}

} // namespace

Polygon trace_contour(const PixelRegion& region) {
    if (region.pixels.empty()) {
        throw ArgumentError("trace_contour needs a non-empty region");
    }
    const RegionBitmap bm(region);
    // topmost, then leftmost pixel: first in row-major order
    PixelPoint start = region.pixels.front();
    for (const PixelPoint& p : region.pixels) {
        if (p.y < start.y || (p.y == start.y && p.x < start.x)) {
            start = p;
        }
    }
    Polygon poly;
    const Dir east{1, 0};
    int vx = start.x;
    int vy = start.y;
    Dir dir = east;
    poly.emplace_back(vx, vy);
    const std::size_t cap = 4 * region.pixels.size() + 8;
    for (std::size_t steps = 0; steps < cap; ++steps) {
        vx += dir.dx;
        vy += dir.dy;
        // Prefer the left turn so diagonal neighbours stay on one border (8-connectivity).
        Dir next = dir;
        bool found = false;
        for (Dir cand : {turn_left(dir), dir, turn_right(dir)}) {
            if (border_edge(bm, vx, vy, cand)) {
                next = cand;
                found = true;
                break;
            }
        }
        if (!found) {
            throw std::logic_error("contour walk lost the border");
        }
        if (vx == start.x && vy == start.y && next == east) {
            return poly;
        }
        if (!(next == dir)) {
            poly.emplace_back(vx, vy);
            dir = next;
        }
    }
    throw std::logic_error("contour walk did not close");
}

Polygon simplify_polygon(const Polygon& poly, double epsilon) {
    if (!(epsilon >= 0.0)) {
        throw ArgumentError("simplification epsilon must be non-negative");
    }
    const std::size_t n = poly.size();
    if (epsilon == 0.0 || n <= 3) {
        return poly;
    }
    auto farthest_from = [&](std::size_t from) {
        std::size_t best = from;
        double dist = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = (poly[i] - poly[from]).squaredNorm();
            if (d > dist) {
                dist = d;
                best = i;
            }
        }
        return best;
    };
    const std::size_t a = farthest_from(0);
    const std::size_t b = farthest_from(a);
    if (a == b) {
        return poly;
    }
    // Unroll the loop starting at a; b sits at offset m.
    std::vector<Vec2> ring;
    ring.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        ring.push_back(poly[(a + i) % n]);
    }
    const std::size_t m = (b + n - a) % n;
    std::vector<char> keep(n + 1, 0);
    keep[0] = keep[m] = keep[n] = 1;
    rdp(ring, 0, m, epsilon, keep);
    rdp(ring, m, n, epsilon, keep);

    std::vector<std::size_t> kept;  // offsets from a, without the closing duplicate
    for (std::size_t i = 0; i < n; ++i) {
        if (keep[i] != 0) {
            kept.push_back(i);
        }
    }
    if (kept.size() < 3) {
        // keep the vertex farthest from the a-b chord
        std::size_t best = 1;
        double dist = -1.0;
        for (std::size_t i = 1; i < n; ++i) {
            if (i == m) {
                continue;
            }
            const double d = seg_distance(ring[i], ring[0], ring[m]);
            if (d > dist) {
                dist = d;
                best = i;
            }
        }
        kept.push_back(best);
        std::sort(kept.begin(), kept.end());
    }
    // Rotate back so the output starts at the earliest original vertex kept.
    std::vector<std::size_t> original;
    original.reserve(kept.size());
    for (std::size_t off : kept) {
        original.push_back((a + off) % n);
    }
    const auto first = std::min_element(original.begin(), original.end()) - original.begin();
    Polygon out;
    out.reserve(original.size());
    for (std::size_t i = 0; i < original.size(); ++i) {
        out.push_back(poly[original[(static_cast<std::size_t>(first) + i) % original.size()]]);
    }
    return out;
}

std::vector<InstanceLabel> filter_fragments(const std::vector<InstanceLabel>& labels,
                                            double min_area_frac, int width, int height) {
    if (!(min_area_frac >= 0.0 && min_area_frac < 1.0)) {
        throw ArgumentError("min_area_frac must lie in [0,1)");
    }
    const double threshold = min_area_frac * static_cast<double>(width) * height;
    std::vector<InstanceLabel> out;
    for (const InstanceLabel& label : labels) {
        InstanceLabel kept = label;
        kept.polygons.clear();
        for (const LabelPolygon& p : label.polygons) {
            if (!(p.pixel_area < threshold)) {
                kept.polygons.push_back(p);
            }
        }
        if (!kept.polygons.empty()) {
            out.push_back(std::move(kept));
        }
    }
    return out;
}

std::vector<YoloLine> to_yolo_lines(const std::vector<InstanceLabel>& labels, int width,
                                    int height) {
    if (width < 1 || height < 1) {
        throw ArgumentError("image size must be at least 1x1");
    }
    std::vector<YoloLine> lines;
    for (const InstanceLabel& label : labels) {
        for (const LabelPolygon& p : label.polygons) {
            if (p.vertices.size() < 3) {
                throw std::logic_error("label polygon with fewer than 3 vertices");
            }
            YoloLine line;
            line.class_index = label.class_id;
            line.coords.reserve(p.vertices.size() * 2);
            for (const Vec2& v : p.vertices) {
                line.coords.push_back(clamp01(v.x() / width));
                line.coords.push_back(clamp01(v.y() / height));
            }
            lines.push_back(std::move(line));
        }
    }
    return lines;
}

std::string serialize_yolo(const std::vector<YoloLine>& lines) {
    std::string out;
    char buf[32];
    for (const YoloLine& line : lines) {
        out += std::to_string(line.class_index);
        for (double c : line.coords) {
            std::snprintf(buf, sizeof(buf), " %.6f", c);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

BoxPx bbox_of(const std::vector<Polygon>& polys) {
    BoxPx box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    bool any = false;
    for (const Polygon& poly : polys) {
        for (const Vec2& v : poly) {
            box.x_min = std::min(box.x_min, v.x());
            box.y_min = std::min(box.y_min, v.y());
            box.x_max = std::max(box.x_max, v.x());
            box.y_max = std::max(box.y_max, v.y());
            any = true;
        }
    }
    if (!any) {
        throw ArgumentError("bounding box of an empty polygon set");
    }
    return box;
}

BoxPx bbox_from_polygons(const InstanceLabel& label) {
    if (label.polygons.empty()) {
        throw ArgumentError("label has no polygons");
    }
    std::vector<Polygon> polys;
    polys.reserve(label.polygons.size());
    for (const LabelPolygon& p : label.polygons) {
        polys.push_back(p.vertices);
    }
    return bbox_of(polys);
}

BinaryMask rasterize_polygons(const std::vector<Polygon>& polys, int width, int height) {
    BinaryMask mask(width, height, 0);
    for (const Polygon& p : polys) {
        fill_polygon(p, mask, 0, 0);
    }
    return mask;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_shape(b)) {
        throw ArgumentError("mask_iou: mask sizes differ");
    }
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool pa = a.pixels()[i] != 0;
        const bool pb = b.pixels()[i] != 0;
        inter += (pa && pb) ? 1 : 0;
        uni += (pa || pb) ? 1 : 0;
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

// IoU of a polygon against its region with holes filled (the fill of its exact contour),
// evaluated on the region's bounding box.
double region_fidelity(const Polygon& poly, const Polygon& contour, const PixelRegion& region) {
    const RegionBitmap bm(region);
    const int ox = bm.min_x() - 1;
    const int oy = bm.min_y() - 1;
    BinaryMask mask(bm.max_x() - bm.min_x() + 3, bm.max_y() - bm.min_y() + 3, 0);
    BinaryMask reference(mask.width(), mask.height(), 0);
    fill_polygon(poly, mask, ox, oy);
    fill_polygon(contour, reference, ox, oy);
    return mask_iou(mask, reference);
}

// Polygon as it reads back from a label file: normalized, printed with six decimals,
// rescaled. Edges through pixel centres make the raster sensitive to that rounding.
Polygon as_emitted(const Polygon& poly, int width, int height) {
    Polygon out;
    out.reserve(poly.size());
    for (const Vec2& v : poly) {
        const double x = std::round(std::clamp(v.x() / width, 0.0, 1.0) * 1e6) / 1e6;
        const double y = std::round(std::clamp(v.y() / height, 0.0, 1.0) * 1e6) / 1e6;
        out.emplace_back(x * width, y * height);
    }
    return out;
}

} // namespace

std::vector<InstanceLabel> label_id_map(
    const IdBuffer& ids, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& class_of,
    const LabelSettings& settings) {
    std::map<std::uint32_t, std::uint32_t> classes(class_of.begin(), class_of.end());
    std::map<std::uint32_t, bool> present;
    for (std::uint32_t id : ids.pixels()) {
        if (id != 0) {
            present[id] = true;
        }
    }
    const int w = ids.width();
    const int h = ids.height();
    const double threshold = settings.min_area_frac * static_cast<double>(w) * h;
    std::vector<InstanceLabel> labels;
    for (const auto& [id, unused] : present) {
        (void)unused;
        const auto cls = classes.find(id);
        if (cls == classes.end()) {
            continue;
        }
        std::vector<PixelRegion> parts;
        std::vector<Polygon> contours;
        for (PixelRegion& region : extract_components(ids, id)) {
            if (region.area() >= threshold) {  // smaller ones are dropped by the fragment filter
                contours.push_back(trace_contour(region));
                parts.push_back(std::move(region));
            }
        }
        if (parts.empty()) {
            continue;
        }
        const BinaryMask truth = rasterize_polygons(contours, w, h);

        // Each part must reproduce its region; then the whole instance must reproduce its
        // surviving parts, tightening every part's tolerance until it does or is exact.
        // Polygons are stored as they will read back from the label file.
        InstanceLabel label;
        label.instance_id = id;
        label.class_id = cls->second;
        double cap = settings.epsilon;
        while (true) {
            label.polygons.clear();
            std::vector<Polygon> emitted;
            for (std::size_t k = 0; k < parts.size(); ++k) {
                double eps = cap;
                Polygon out = as_emitted(simplify_polygon(contours[k], eps), w, h);
                while (eps > 0.0 && region_fidelity(out, contours[k], parts[k]) < settings.fidelity_iou) {
                    eps = eps > 0.05 ? eps * 0.5 : 0.0;
                    out = as_emitted(simplify_polygon(contours[k], eps), w, h);
                }
                emitted.push_back(out);
                label.polygons.push_back({std::move(out), parts[k].area()});
            }
            if (cap <= 0.0 || mask_iou(rasterize_polygons(emitted, w, h), truth) >= settings.fidelity_iou) {
                break;
            }
            cap = cap > 0.05 ? cap * 0.5 : 0.0;
        }
        labels.push_back(std::move(label));
    }
    return filter_fragments(labels, settings.min_area_frac, w, h);
}

} // namespace splatgen
