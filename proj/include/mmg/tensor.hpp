#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mmg/errors.hpp"

namespace mmg {

/// Dense T x H x W x C volume of intensities, frame-major with channels
/// innermost. Carrier for RGB, Taylor, flow and depth videos; the heatmap
/// volumes reuse the same layout with C = number of keypoints or edges.
struct VideoTensor {
    std::size_t frames = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<double> values;  // frames*height*width*channels, c innermost

    VideoTensor() = default;
    VideoTensor(std::size_t t, std::size_t h, std::size_t w, std::size_t c)
        : frames(t), height(h), width(w), channels(c), values(t * h * w * c, 0.0) {}

    std::size_t size() const { return frames * height * width * channels; }
    bool empty() const { return size() == 0; }

    std::size_t index(std::size_t t, std::size_t y, std::size_t x, std::size_t c) const {
        return ((t * height + y) * width + x) * channels + c;
    }
    double& at(std::size_t t, std::size_t y, std::size_t x, std::size_t c) {
        return values[index(t, y, x, c)];
    }
    double at(std::size_t t, std::size_t y, std::size_t x, std::size_t c) const {
        return values[index(t, y, x, c)];
    }

    std::string shape_string() const {
        return std::to_string(frames) + "x" + std::to_string(height) + "x" +
               std::to_string(width) + "x" + std::to_string(channels);
    }
};

// Video invariant: finite values in [0,1], at least one frame, 1 or 3 channels.
inline void validate_video(const VideoTensor& v) {
    if (v.frames < 1) throw ValidationError("video tensor must have at least one frame");
    if (v.channels != 1 && v.channels != 3)
        throw ValidationError("video tensor must have 1 or 3 channels, got " +
                              std::to_string(v.channels));
    if (v.values.size() != v.size()) throw ShapeError("video tensor storage does not match dims");
    for (double x : v.values) {
        if (!std::isfinite(x) || x < 0.0 || x > 1.0)
            throw ValidationError("video tensor value outside [0,1] or non-finite");
    }
}

// Same range check for generalized volumes (any channel count).
inline void validate_unit_range(const VideoTensor& v) {
    if (v.values.size() != v.size()) throw ShapeError("tensor storage does not match dims");
    for (double x : v.values) {
        if (!std::isfinite(x) || x < 0.0 || x > 1.0)
            throw ValidationError("tensor value outside [0,1] or non-finite");
    }
}

}  // namespace mmg
