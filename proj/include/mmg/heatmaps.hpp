#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <set>
#include <utility>
#include <vector>

#include "mmg/errors.hpp"
#include "mmg/rng.hpp"
#include "mmg/skeleton.hpp"
#include "mmg/tensor.hpp"

namespace mmg {

/// Ordered choice of keypoints from the 137-point full-body layout. The
/// default picks 36 points covering the upper body, face and both hands.
struct KeypointSubset {
    std::vector<std::size_t> indices;

    std::size_t size() const { return indices.size(); }
};

inline void validate_subset(const KeypointSubset& s) {
    if (s.indices.empty()) throw ValidationError("keypoint subset must be non-empty");
    std::set<std::size_t> seen;
    for (std::size_t i : s.indices) {
        if (i >= kRawKeypointCount)
            throw ValidationError("subset index " + std::to_string(i) + " outside [0," +
                                  std::to_string(kRawKeypointCount) + ")");
        if (!seen.insert(i).second)
            throw ValidationError("subset index " + std::to_string(i) + " repeated");
    }
}

/// Skeletal edges as pairs of subset-local keypoint slots.
struct EdgeList {
    std::vector<std::pair<std::size_t, std::size_t>> edges;

    std::size_t size() const { return edges.size(); }
};

inline void validate_edges(const EdgeList& e, std::size_t keypoint_count) {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (auto [a, b] : e.edges) {
        if (a == b) throw ValidationError("edge endpoints must differ");
        if (a >= keypoint_count || b >= keypoint_count)
            throw ValidationError("edge endpoint outside [0," + std::to_string(keypoint_count) +
                                  ")");
        auto key = std::minmax(a, b);
        if (!seen.insert(key).second) throw ValidationError("duplicate edge");
    }
}

enum class HeatmapKind { joint, limb };

/// T x H x W x K stack of per-frame Gaussian responses. K is the keypoint
/// count for joint maps and the edge count for limb maps.
struct HeatmapVolume {
    HeatmapKind kind = HeatmapKind::joint;
    VideoTensor data;
};

struct CropBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
};

// Affine map (x,y) -> (sx*x+tx, sy*y+ty) from source pixels to output pixels.
struct AffineMap {
    double sx = 1.0, sy = 1.0, tx = 0.0, ty = 0.0;

    std::pair<double, double> apply(double x, double y) const {
        return {sx * x + tx, sy * y + ty};
    }

    static AffineMap from_crop(const CropBox& box, std::size_t out_w, std::size_t out_h) {
        if (!(box.w > 0.0) || !(box.h > 0.0))
            throw ValidationError("crop box must have positive area");
        AffineMap m;
        m.sx = static_cast<double>(out_w) / box.w;
        m.sy = static_cast<double>(out_h) / box.h;
        m.tx = -box.x * m.sx;
        m.ty = -box.y * m.sy;
        return m;
    }
};

struct HeatmapParams {
    std::size_t out_h = 56;
    std::size_t out_w = 56;
    double sigma = 0.6;       // bandwidth in output pixels
    AffineMap map{};          // source -> output coordinates
    bool truncate_3sigma = false;  // zero responses beyond 3 sigma when set

    void validate() const {
        if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
        if (out_h < 2 || out_w < 2) throw ValidationError("output size must be at least 2x2");
    }
};

// ---------------------------------------------------------------------------
// Subset selection and limb displacements

inline SkeletonSequence select_subset(const SkeletonSequence& s, const KeypointSubset& subset) {
    check_keypoint_count(s, kRawKeypointCount, "select_subset");
    validate_subset(subset);
    SkeletonSequence out;
    out.keypoint_count = subset.size();
    out.frames.reserve(s.frames.size());
    for (const auto& frame : s.frames) {
        std::vector<Keypoint> picked;
        picked.reserve(subset.size());
        for (std::size_t idx : subset.indices) picked.push_back(frame[idx]);
        out.frames.push_back(std::move(picked));
    }
    return out;
}

struct LimbVector {
    double dx = 0.0;
    double dy = 0.0;
    double conf = 0.0;  // min of the endpoint confidences
};

inline std::vector<std::vector<LimbVector>> limb_vectors(const SkeletonSequence& s,
                                                         const EdgeList& edges) {
    validate_edges(edges, s.keypoint_count);
    std::vector<std::vector<LimbVector>> out;
    out.reserve(s.frames.size());
    for (const auto& frame : s.frames) {
        if (frame.size() != s.keypoint_count)
            throw ShapeError("limb_vectors: inconsistent frame size");
        std::vector<LimbVector> row;
        row.reserve(edges.size());
        for (auto [a, b] : edges.edges) {
            const Keypoint& ka = frame[a];
            const Keypoint& kb = frame[b];
            row.push_back({kb.x - ka.x, kb.y - ka.y, std::min(ka.c, kb.c)});
        }
        out.push_back(std::move(row));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coordinate transform

// Maps all keypoints with the affine sending the crop box onto the output
// frame. Points landing outside [0,W)x[0,H) keep their coordinates but are
// flagged with confidence 0.
inline SkeletonSequence transform_coords(const SkeletonSequence& s, const CropBox& crop,
                                         std::size_t out_h, std::size_t out_w) {
    AffineMap map = AffineMap::from_crop(crop, out_w, out_h);
    SkeletonSequence out = s;
    const double w = static_cast<double>(out_w);
    const double h = static_cast<double>(out_h);
    for (auto& frame : out.frames) {
        for (auto& kp : frame) {
            auto [u, v] = map.apply(kp.x, kp.y);
            kp.x = u;
            kp.y = v;
            if (u < 0.0 || u >= w || v < 0.0 || v >= h) kp.c = 0.0;
        }
    }
    return out;
}

// Padded bounding box of all confident keypoints, the deterministic default
// crop when none is configured. Falls back to a unit box when the sequence
// has no confident keypoint at all.
inline CropBox keypoint_bbox(const SkeletonSequence& s, double pad_frac = 0.1) {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    bool any = false;
    for (const auto& frame : s.frames) {
        for (const auto& kp : frame) {
            if (kp.c <= 0.0) continue;
            if (!any) {
                x0 = x1 = kp.x;
                y0 = y1 = kp.y;
                any = true;
            } else {
                x0 = std::min(x0, kp.x);
                x1 = std::max(x1, kp.x);
                y0 = std::min(y0, kp.y);
                y1 = std::max(y1, kp.y);
            }
        }
    }
    if (!any) return CropBox{0.0, 0.0, 1.0, 1.0};
    double w = x1 - x0;
    double h = y1 - y0;
    // Degenerate extents still need positive area.
    if (w <= 0.0) w = 1.0;
    if (h <= 0.0) h = 1.0;
    double px = w * pad_frac;
    double py = h * pad_frac;
    return CropBox{x0 - px, y0 - py, w + 2.0 * px, h + 2.0 * py};
}

// Seeded crop jitter for augmentation runs: shifts and rescales the base box
// by at most jitter_frac of its extent. jitter_frac 0 returns the base box.
inline CropBox sample_crop_box(const CropBox& base, double jitter_frac, SplitMix64& rng) {
    if (jitter_frac < 0.0) throw ValidationError("crop jitter must be non-negative");
    if (jitter_frac == 0.0) return base;
    auto u = [&rng] { return 2.0 * rng.next_double() - 1.0; };
    double dx = u() * jitter_frac * base.w;
    double dy = u() * jitter_frac * base.h;
    double sw = 1.0 + u() * jitter_frac;
    double sh = 1.0 + u() * jitter_frac;
    return CropBox{base.x + dx, base.y + dy, base.w * sw, base.h * sh};
}

// ---------------------------------------------------------------------------
// Gaussian volumes
//
// Pixel (x,y) samples the continuous point (x+0.5, y+0.5). A joint response
// is c * exp(-d^2 / (2 sigma^2)) with d the distance to the keypoint; a limb
// response uses the distance to the segment between the edge endpoints and
// min(c_a, c_b) as the scale.

inline double point_segment_dist_sq(double px, double py, double ax, double ay, double bx,
                                    double by) {
    const double ex = bx - ax;
    const double ey = by - ay;
    const double len2 = ex * ex + ey * ey;
    double r = 0.0;
    if (len2 > 0.0) {
        r = ((px - ax) * ex + (py - ay) * ey) / len2;
        if (r < 0.0) r = 0.0;
        if (r > 1.0) r = 1.0;
    }
    const double cx = ax + r * ex;
    const double cy = ay + r * ey;
    const double dx = px - cx;
    const double dy = py - cy;
    return dx * dx + dy * dy;
}

namespace detail {

inline void splat_gaussian(VideoTensor& vol, std::size_t t, std::size_t channel, double scale,
                           double u, double v, const HeatmapParams& p) {
    const double inv_two_sigma_sq = 1.0 / (2.0 * p.sigma * p.sigma);
    const double cutoff = 9.0 * p.sigma * p.sigma;
    for (std::size_t y = 0; y < p.out_h; ++y) {
        const double dy = (static_cast<double>(y) + 0.5) - v;
        for (std::size_t x = 0; x < p.out_w; ++x) {
            const double dx = (static_cast<double>(x) + 0.5) - u;
            const double d2 = dx * dx + dy * dy;
            if (p.truncate_3sigma && d2 > cutoff) continue;
            vol.at(t, y, x, channel) = scale * std::exp(-d2 * inv_two_sigma_sq);
        }
    }
}

inline void splat_segment(VideoTensor& vol, std::size_t t, std::size_t channel, double scale,
                          double ax, double ay, double bx, double by, const HeatmapParams& p) {
    const double inv_two_sigma_sq = 1.0 / (2.0 * p.sigma * p.sigma);
    const double cutoff = 9.0 * p.sigma * p.sigma;
    for (std::size_t y = 0; y < p.out_h; ++y) {
        const double py = static_cast<double>(y) + 0.5;
        for (std::size_t x = 0; x < p.out_w; ++x) {
            const double px = static_cast<double>(x) + 0.5;
            const double d2 = point_segment_dist_sq(px, py, ax, ay, bx, by);
            if (p.truncate_3sigma && d2 > cutoff) continue;
            vol.at(t, y, x, channel) = scale * std::exp(-d2 * inv_two_sigma_sq);
        }
    }
}

}  // namespace detail

inline HeatmapVolume joint_heatmap_volume(const SkeletonSequence& s, const HeatmapParams& p) {
    p.validate();
    if (s.frames.empty()) throw ShapeError("joint_heatmap_volume: empty skeleton sequence");
    HeatmapVolume out;
    out.kind = HeatmapKind::joint;
    out.data = VideoTensor(s.frames.size(), p.out_h, p.out_w, s.keypoint_count);
    for (std::size_t t = 0; t < s.frames.size(); ++t) {
        if (s.frames[t].size() != s.keypoint_count)
            throw ShapeError("joint_heatmap_volume: inconsistent frame size");
        for (std::size_t k = 0; k < s.keypoint_count; ++k) {
            const Keypoint& kp = s.frames[t][k];
            if (kp.c <= 0.0) continue;  // channel stays all-zero for this frame
            auto [u, v] = p.map.apply(kp.x, kp.y);
            detail::splat_gaussian(out.data, t, k, kp.c, u, v, p);
        }
    }
    return out;
}

inline HeatmapVolume limb_heatmap_volume(const SkeletonSequence& s, const EdgeList& edges,
                                         const HeatmapParams& p) {
    p.validate();
    validate_edges(edges, s.keypoint_count);
    if (s.frames.empty()) throw ShapeError("limb_heatmap_volume: empty skeleton sequence");
    HeatmapVolume out;
    out.kind = HeatmapKind::limb;
    out.data = VideoTensor(s.frames.size(), p.out_h, p.out_w, edges.size());
    for (std::size_t t = 0; t < s.frames.size(); ++t) {
        if (s.frames[t].size() != s.keypoint_count)
            throw ShapeError("limb_heatmap_volume: inconsistent frame size");
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const Keypoint& ka = s.frames[t][edges.edges[e].first];
            const Keypoint& kb = s.frames[t][edges.edges[e].second];
            const double conf = std::min(ka.c, kb.c);
            if (conf <= 0.0) continue;
            auto [ax, ay] = p.map.apply(ka.x, ka.y);
            auto [bx, by] = p.map.apply(kb.x, kb.y);
            detail::splat_segment(out.data, t, e, conf, ax, ay, bx, by, p);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Default subset and edge set for the 137-point layout (25 body, 70 face,
// 21 left hand, 21 right hand). These are shipped conventions, not ground
// truth; both are plain config values.

inline KeypointSubset default_keypoint_subset() {
    return KeypointSubset{{
        // upper body: nose, neck, shoulders, elbows, wrists, eyes, ears
        0, 1, 2, 3, 4, 5, 6, 7, 15, 16, 17, 18,
        // face: brow mids, nose tip and base, mouth corners, pupils
        44, 49, 55, 58, 73, 79, 93, 94,
        // left hand: wrist, thumb tip, index mcp/tip, middle mcp/tip, ring tip, pinky tip
        95, 99, 100, 103, 104, 107, 111, 115,
        // right hand, same selection
        116, 120, 121, 124, 125, 128, 132, 136,
    }};
}

inline EdgeList default_edge_list() {
    // Slots refer to default_keypoint_subset() order.
    return EdgeList{{
        {0, 1},  {1, 2},  {2, 3},  {3, 4},  {1, 5},  {5, 6},  {6, 7},  {0, 8},  {0, 9},
        {8, 10}, {9, 11}, {12, 18}, {13, 19}, {14, 15}, {14, 16}, {14, 17}, {16, 17},
        {7, 20}, {4, 28},
        {20, 21}, {20, 22}, {22, 23}, {20, 24}, {24, 25}, {20, 26}, {20, 27},
        {28, 29}, {28, 30}, {30, 31}, {28, 32}, {32, 33}, {28, 34}, {28, 35},
    }};
}

}  // namespace mmg
