#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mmg/errors.hpp"
#include "mmg/tensor.hpp"

namespace mmg {

struct TaylorParams {
    std::size_t tau = 4;  // expansion order, output keeps T - tau frames
    // Normalization for the derivative channels: channel k in {1,2} maps
    // value c to clamp(0.5 + c / (2 * scale[k-1]), 0, 1).
    std::array<double, 2> scales{1.0, 1.0};

    void validate() const {
        if (tau < 2) throw ValidationError("taylor order must be at least 2");
        for (double s : scales)
            if (!(s > 0.0)) throw ValidationError("taylor scales must be positive");
    }
};

inline VideoTensor to_grayscale(const VideoTensor& v) {
    if (v.channels == 1) return v;
    if (v.channels != 3) throw ShapeError("to_grayscale expects 1 or 3 channels");
    VideoTensor g(v.frames, v.height, v.width, 1);
    for (std::size_t t = 0; t < v.frames; ++t)
        for (std::size_t y = 0; y < v.height; ++y)
            for (std::size_t x = 0; x < v.width; ++x)
                g.at(t, y, x, 0) =
                    (v.at(t, y, x, 0) + v.at(t, y, x, 1) + v.at(t, y, x, 2)) / 3.0;
    return g;
}

namespace detail {

inline double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t j = 0; j < k; ++j)
        r = r * static_cast<double>(n - j) / static_cast<double>(j + 1);
    return r;
}

// k-th forward difference of the per-pixel time series at frame i.
inline double forward_diff(const VideoTensor& g, std::size_t y, std::size_t x, std::size_t i,
                           std::size_t k) {
    double acc = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
        const double sign = ((k - j) % 2 == 0) ? 1.0 : -1.0;
        acc += sign * binomial(k, j) * g.at(i + j, y, x, 0);
    }
    return acc;
}

}  // namespace detail

// Temporal Taylor expansion of a video. Each output frame t packs three
// channels built from the grayscale series: channel 0 is the averaged
// 0th-order term, channels 1 and 2 average the 1st and 2nd forward
// differences over the tau+1-k frame window and are recentered around 0.5.
// The sums are evaluated literally so tests can cross-check them term by
// term against an independent accumulation.
inline VideoTensor taylor_video(const VideoTensor& video, const TaylorParams& p) {
    p.validate();
    const VideoTensor g = to_grayscale(video);
    if (g.frames <= p.tau)
        throw ShapeError("taylor_video needs more than tau=" + std::to_string(p.tau) +
                         " frames, got " + std::to_string(g.frames));
    const std::size_t out_frames = g.frames - p.tau;
    VideoTensor out(out_frames, g.height, g.width, 3);
    std::array<double, 3> factorial{1.0, 1.0, 2.0};
    for (std::size_t t = 0; t < out_frames; ++t) {
        for (std::size_t y = 0; y < g.height; ++y) {
            for (std::size_t x = 0; x < g.width; ++x) {
                for (std::size_t k = 0; k < 3; ++k) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i + k <= p.tau; ++i)
                        acc += detail::forward_diff(g, y, x, t + i, k);
                    const double window = static_cast<double>(p.tau + 1 - k);
                    double c = acc / (factorial[k] * window);
                    if (k > 0) {
                        c = 0.5 + c / (2.0 * p.scales[k - 1]);
                        if (c < 0.0) c = 0.0;
                        if (c > 1.0) c = 1.0;
                    }
                    out.at(t, y, x, k) = c;
                }
            }
        }
    }
    return out;
}

}  // namespace mmg
