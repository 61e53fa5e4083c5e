#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mmg/errors.hpp"
#include "mmg/fusion.hpp"
#include "mmg/io.hpp"
#include "mmg/rng.hpp"
#include "mmg/skeleton.hpp"
#include "mmg/tensor.hpp"

namespace mmg {

/// Controlled multi-modality predictor ensemble: per-modality accuracy
/// targets plus a pairwise error-overlap matrix. overlap 1 means two
/// modalities err on the same samples (and agree on the wrong class),
/// overlap 0 pushes their error sets as far apart as the accuracies allow.
struct SyntheticSpec {
    std::size_t samples = 0;
    std::size_t classes = 0;
    std::vector<double> accuracy;             // M targets, each in (0,1]
    std::vector<double> overlap;              // M*M row-major
    std::vector<std::string> modality_names;  // optional, defaults m0..m{M-1}
    std::uint64_t seed = 1;

    std::size_t modalities() const { return accuracy.size(); }
};

inline void validate_spec(const SyntheticSpec& s) {
    if (s.samples < 1) throw ValidationError("spec needs at least one sample");
    if (s.classes < 2) throw ValidationError("spec needs at least two classes");
    const std::size_t m = s.modalities();
    if (m < 1) throw ValidationError("spec needs at least one modality");
    for (double a : s.accuracy)
        if (!(a > 0.0) || a > 1.0)
            throw ValidationError("accuracy targets must lie in (0,1]");
    if (s.overlap.size() != m * m)
        throw ShapeError("overlap matrix must be " + std::to_string(m) + "x" +
                         std::to_string(m));
    for (std::size_t i = 0; i < m; ++i) {
        if (std::fabs(s.overlap[i * m + i] - 1.0) > 1e-12)
            throw ValidationError("overlap diagonal must be 1");
        for (std::size_t j = 0; j < m; ++j) {
            const double r = s.overlap[i * m + j];
            if (!(r >= 0.0) || r > 1.0) throw ValidationError("overlap entries must lie in [0,1]");
            if (std::fabs(r - s.overlap[j * m + i]) > 1e-12)
                throw ValidationError("overlap matrix must be symmetric");
        }
    }
    if (!s.modality_names.empty() && s.modality_names.size() != m)
        throw ShapeError("modality_names must match the accuracy count");
    // Pairwise Frechet bound: error rates p_i, p_j can co-occur no less
    // often than p_i + p_j - 1, so a low overlap target may be unachievable.
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double pi = 1.0 - s.accuracy[i];
            const double pj = 1.0 - s.accuracy[j];
            const double target = s.overlap[i * m + j] * std::min(pi, pj);
            if (target + 1e-12 < pi + pj - 1.0)
                throw FeasibilityError(
                    "overlap " + std::to_string(s.overlap[i * m + j]) + " for modalities " +
                    std::to_string(i) + "," + std::to_string(j) +
                    " is below the feasible minimum " + std::to_string(pi + pj - 1.0));
        }
    }
}

namespace detail {

// Length of the intersection of two arcs [a, a+la) and [b, b+lb) on the unit
// circle. The second arc is shifted into the first one's frame; it can meet
// the first arc in up to two pieces (directly and wrapped around).
inline double circular_overlap(double a, double la, double b, double lb) {
    double d = b - a;
    d -= std::floor(d);
    auto seg = [](double x0, double x1, double y0, double y1) {
        return std::max(0.0, std::min(x1, y1) - std::max(x0, y0));
    };
    return seg(0.0, la, d, d + lb) + seg(0.0, la, d - 1.0, d - 1.0 + lb);
}

// Greedy circular packing of error intervals. Interval m has length p[m];
// offsets are chosen one by one on a 1/2000 grid to minimize the squared
// deviation of pairwise interval overlaps from their targets, ties going to
// the smallest offset. Samples whose latent u falls inside interval m are
// the ones modality m errs on, so interval overlap IS error co-occurrence.
inline std::vector<double> pack_offsets(const std::vector<double>& p,
                                        const std::vector<double>& q) {
    const std::size_t m = p.size();
    constexpr int kGrid = 2000;
    std::vector<double> o(m, 0.0);
    for (std::size_t i = 1; i < m; ++i) {
        double best_loss = std::numeric_limits<double>::infinity();
        double best_o = 0.0;
        for (int g = 0; g < kGrid; ++g) {
            const double cand = static_cast<double>(g) / kGrid;
            double loss = 0.0;
            for (std::size_t n = 0; n < i; ++n) {
                const double diff = circular_overlap(o[n], p[n], cand, p[i]) - q[n * m + i];
                loss += diff * diff;
            }
            if (loss < best_loss) {
                best_loss = loss;
                best_o = cand;
            }
        }
        o[i] = best_o;
    }
    return o;
}

}  // namespace detail

// Deterministic predictor ensemble. Each sample draws one latent u; modality
// m errs exactly when u lands in its packed interval, which realizes the
// accuracy targets in distribution and the pairwise co-occurrence targets
// q_mn = overlap_mn * min(error_m, error_n) as closely as the packing
// allows. Rows are peaked: 0.7 on the predicted class, the rest uniform.
// Wrong classes copy an earlier co-erring modality when their overlap target
// is 1 and otherwise resample (up to 1000 attempts) to avoid agreeing with
// co-erring modalities, keeping errors distinctive.
inline AlignedPredictions gen_predictions(const SyntheticSpec& spec) {
    validate_spec(spec);
    const std::size_t m = spec.modalities();
    const std::size_t n = spec.samples;
    const std::size_t cls = spec.classes;

    std::vector<double> p(m);
    for (std::size_t i = 0; i < m; ++i) p[i] = 1.0 - spec.accuracy[i];
    std::vector<double> q(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (i != j) {
                const double lo = std::max(0.0, p[i] + p[j] - 1.0);
                q[i * m + j] = std::max(lo, spec.overlap[i * m + j] * std::min(p[i], p[j]));
            }
    const std::vector<double> offsets = detail::pack_offsets(p, q);

    AlignedPredictions out;
    out.class_count = cls;
    if (spec.modality_names.empty()) {
        for (std::size_t i = 0; i < m; ++i) out.modality_names.push_back("m" + std::to_string(i));
    } else {
        out.modality_names = spec.modality_names;
    }
    out.probs.assign(m, std::vector<double>(n * cls, 0.0));
    out.sample_ids.reserve(n);
    std::vector<std::size_t> labels(n);

    const double off_mass = 0.3 / static_cast<double>(cls - 1);
    const std::size_t kNotErring = cls;  // sentinel in wrong[]
    std::vector<std::size_t> wrong(m);
    char idbuf[24];
    for (std::size_t i = 0; i < n; ++i) {
        SplitMix64 sub = substream(spec.seed, i);
        const std::size_t y = sub.next_below(cls);
        const double u = sub.next_double();
        labels[i] = y;
        std::snprintf(idbuf, sizeof idbuf, "s%06zu", i);
        out.sample_ids.emplace_back(idbuf);

        std::fill(wrong.begin(), wrong.end(), kNotErring);
        for (std::size_t mod = 0; mod < m; ++mod) {
            double v = u - offsets[mod];
            v -= std::floor(v);
            std::size_t target = y;
            if (v < p[mod]) {
                std::size_t copy_from = m;
                for (std::size_t prev = 0; prev < mod; ++prev)
                    if (wrong[prev] != kNotErring && spec.overlap[prev * m + mod] == 1.0) {
                        copy_from = prev;
                        break;
                    }
                if (copy_from != m) {
                    target = wrong[copy_from];
                } else {
                    for (int attempt = 0; attempt < 1000; ++attempt) {
                        const std::size_t draw = sub.next_below(cls - 1);
                        const std::size_t cand = draw < y ? draw : draw + 1;
                        target = cand;
                        bool clash = false;
                        for (std::size_t prev = 0; prev < mod && !clash; ++prev)
                            clash = wrong[prev] == cand && spec.overlap[prev * m + mod] < 1.0;
                        if (!clash) break;
                    }
                }
                wrong[mod] = target;
            }
            double* row = out.probs[mod].data() + i * cls;
            for (std::size_t j = 0; j < cls; ++j) row[j] = (j == target) ? 0.7 : off_mass;
        }
    }
    out.labels = std::move(labels);
    return out;
}

// ---------------------------------------------------------------------------
// Analytic toy inputs for the transform and heatmap tests

struct ToyVideoParams {
    std::size_t frames = 8;
    std::size_t height = 8;
    std::size_t width = 8;
    std::size_t channels = 3;
    double base = 0.4;
    double beta = 0.05;    // ramp slope per frame
    double gamma = 0.005;  // quadratic coefficient
    double dot_amp = 0.5;
    double dot_sigma = 1.2;
    double dot_x0 = 2.0;
    double dot_y0 = 2.0;
    double dot_vx = 0.5;
    double dot_vy = 0.25;
};

inline VideoTensor gen_toy_video(const std::string& kind, const ToyVideoParams& p) {
    if (p.frames < 1 || p.height < 1 || p.width < 1)
        throw ValidationError("toy video dims must be positive");
    if (p.channels != 1 && p.channels != 3)
        throw ValidationError("toy video needs 1 or 3 channels");
    VideoTensor v(p.frames, p.height, p.width, p.channels);
    for (std::size_t t = 0; t < p.frames; ++t) {
        const double ft = static_cast<double>(t);
        for (std::size_t y = 0; y < p.height; ++y) {
            for (std::size_t x = 0; x < p.width; ++x) {
                double g;
                if (kind == "static") {
                    g = p.base;
                } else if (kind == "ramp") {
                    g = p.base + p.beta * ft;
                } else if (kind == "quadratic") {
                    g = p.base + p.gamma * ft * ft;
                } else if (kind == "moving-dot") {
                    const double dx = static_cast<double>(x) - (p.dot_x0 + p.dot_vx * ft);
                    const double dy = static_cast<double>(y) - (p.dot_y0 + p.dot_vy * ft);
                    g = p.base +
                        p.dot_amp *
                            std::exp(-(dx * dx + dy * dy) / (2.0 * p.dot_sigma * p.dot_sigma));
                } else {
                    throw ValidationError("unknown toy video kind: " + kind);
                }
                if (!(g >= 0.0) || g > 1.0)
                    throw ValidationError("toy video parameters leave [0,1]");
                for (std::size_t c = 0; c < p.channels; ++c) v.at(t, y, x, c) = g;
            }
        }
    }
    return v;
}

struct ToySkeletonParams {
    std::size_t frames = 8;
    std::size_t keypoints = kRawKeypointCount;
    double spacing = 3.0;  // static grid pitch
    double origin = 4.0;
    double confidence = 0.9;
    std::size_t moving_index = 4;
    double center_x = 24.0;
    double center_y = 24.0;
    double radius = 10.0;
    double turns = 1.0;  // full revolutions across the clip
};

// "static" pins every keypoint to a grid; "circle-gesture" moves one
// keypoint along a circle at uniform angular steps, positions exactly
// cos/sin so tests can recompute them.
inline SkeletonSequence gen_toy_skeleton(const std::string& kind, const ToySkeletonParams& p) {
    if (p.frames < 1 || p.keypoints < 1)
        throw ValidationError("toy skeleton dims must be positive");
    if (kind != "static" && kind != "circle-gesture")
        throw ValidationError("unknown toy skeleton kind: " + kind);
    if (kind == "circle-gesture" && p.moving_index >= p.keypoints)
        throw ValidationError("moving_index outside keypoint range");
    SkeletonSequence s;
    s.keypoint_count = p.keypoints;
    s.frames.resize(p.frames);
    const std::size_t cols = 12;
    for (std::size_t t = 0; t < p.frames; ++t) {
        auto& frame = s.frames[t];
        frame.resize(p.keypoints);
        for (std::size_t k = 0; k < p.keypoints; ++k) {
            frame[k].x = p.origin + p.spacing * static_cast<double>(k % cols);
            frame[k].y = p.origin + p.spacing * static_cast<double>(k / cols);
            frame[k].c = p.confidence;
        }
        if (kind == "circle-gesture") {
            const double angle = 2.0 * 3.14159265358979323846 * p.turns *
                                 static_cast<double>(t) / static_cast<double>(p.frames);
            frame[p.moving_index].x = p.center_x + p.radius * std::cos(angle);
            frame[p.moving_index].y = p.center_y + p.radius * std::sin(angle);
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Self-contained dataset for the end-to-end pipeline: per-class signatures
// in video intensity/ramp, keypoint confidence, and gesture radius, with a
// small seeded jitter so samples within a class are distinct.

struct SyntheticDatasetParams {
    std::size_t samples = 60;
    std::size_t classes = 4;
    std::size_t video_frames = 12;
    std::size_t video_size = 16;
    std::size_t skeleton_frames = 12;
    std::uint64_t seed = 42;
};

inline DatasetManifest write_synthetic_dataset(const std::filesystem::path& dir,
                                               const SyntheticDatasetParams& p) {
    if (p.classes < 2 || p.classes > 8) throw ValidationError("dataset classes must be in [2,8]");
    if (p.samples < p.classes) throw ValidationError("need at least one sample per class");
    if (p.video_frames < 6) throw ValidationError("video_frames must be at least 6");
    namespace fs = std::filesystem;
    fs::create_directories(dir / "videos");
    fs::create_directories(dir / "skeletons");

    DatasetManifest manifest;
    manifest.class_count = p.classes;
    const char* split_cycle[5] = {"train", "train", "train", "val", "test"};
    char idbuf[24];
    for (std::size_t i = 0; i < p.samples; ++i) {
        SplitMix64 sub = substream(p.seed, i);
        const std::size_t label = i % p.classes;
        std::snprintf(idbuf, sizeof idbuf, "g%04zu", i);
        const std::string id = idbuf;
        auto jitter = [&sub](double amp) { return amp * (2.0 * sub.next_double() - 1.0); };

        // video: class-coded brightness and ramp slope, uniform over pixels
        const double base = 0.12 + 0.18 * static_cast<double>(label) + jitter(0.01);
        const double beta = 0.004 * static_cast<double>(label + 1) + jitter(0.0005);
        VideoTensor video(p.video_frames, p.video_size, p.video_size, 3);
        for (std::size_t t = 0; t < p.video_frames; ++t) {
            const double g = base + beta * static_cast<double>(t);
            for (std::size_t y = 0; y < p.video_size; ++y)
                for (std::size_t x = 0; x < p.video_size; ++x)
                    for (std::size_t c = 0; c < 3; ++c) video.at(t, y, x, c) = g;
        }
        save_video(video, dir / "videos" / (id + ".rvid"));

        // skeleton: class-coded confidence and gesture radius
        ToySkeletonParams sk;
        sk.frames = p.skeleton_frames;
        sk.confidence = 0.3 + 0.2 * static_cast<double>(label) + jitter(0.02);
        sk.radius = 4.0 + 3.0 * static_cast<double>(label) + jitter(0.3);
        sk.center_x = 24.0 + jitter(0.5);
        sk.center_y = 24.0 + jitter(0.5);
        save_skeleton(gen_toy_skeleton("circle-gesture", sk), dir / "skeletons" / (id + ".json"));

        SampleEntry e;
        e.id = id;
        e.label = label;
        e.split = split_cycle[i % 5];
        e.modality_paths["rgb"] = "videos/" + id + ".rvid";
        e.modality_paths["skeleton"] = "skeletons/" + id + ".json";
        manifest.entries.push_back(std::move(e));
    }
    save_manifest(manifest, dir / "manifest.jsonl");
    return manifest;
}

}  // namespace mmg
