#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mmg/errors.hpp"

namespace mmg {

// One 2-D keypoint detection. Confidence 0 marks a missing detection.
struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    double c = 0.0;
};

/// Per-frame keypoint arrays with a fixed keypoint count. The raw full-body
/// layout carries 137 points; the cleaned subset used for heatmaps carries 36.
struct SkeletonSequence {
    std::size_t keypoint_count = 0;
    std::vector<std::vector<Keypoint>> frames;

    std::size_t frame_count() const { return frames.size(); }
};

inline constexpr std::size_t kRawKeypointCount = 137;
inline constexpr std::size_t kSubsetKeypointCount = 36;

// Non-finite coordinates become (0,0) with confidence 0; non-finite
// confidences become 0 and finite ones are clamped into [0,1].
inline Keypoint sanitize_keypoint(Keypoint k) {
    if (!std::isfinite(k.x) || !std::isfinite(k.y)) return Keypoint{0.0, 0.0, 0.0};
    if (!std::isfinite(k.c)) return Keypoint{k.x, k.y, 0.0};
    if (k.c < 0.0) k.c = 0.0;
    if (k.c > 1.0) k.c = 1.0;
    return k;
}

inline void sanitize(SkeletonSequence& s) {
    for (auto& frame : s.frames)
        for (auto& kp : frame) kp = sanitize_keypoint(kp);
}

inline void check_keypoint_count(const SkeletonSequence& s, std::size_t expected,
                                 const char* what) {
    if (s.keypoint_count != expected)
        throw ShapeError(std::string(what) + ": expected " + std::to_string(expected) +
                         " keypoints, got " + std::to_string(s.keypoint_count));
    for (std::size_t t = 0; t < s.frames.size(); ++t)
        if (s.frames[t].size() != expected)
            throw ShapeError(std::string(what) + ": frame " + std::to_string(t) + " has " +
                             std::to_string(s.frames[t].size()) + " keypoints, expected " +
                             std::to_string(expected));
}

}  // namespace mmg
