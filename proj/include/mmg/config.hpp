#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mmg/errors.hpp"
#include "mmg/heatmaps.hpp"
#include "mmg/taylor.hpp"

namespace mmg {

struct HeatmapConfig {
    double sigma = 0.6;
    std::size_t out_h = 56;
    std::size_t out_w = 56;
    std::vector<std::size_t> subset = default_keypoint_subset().indices;
    std::vector<std::pair<std::size_t, std::size_t>> edges = default_edge_list().edges;
    bool truncate_3sigma = false;
    double crop_pad = 0.1;     // padding fraction around the keypoint bbox
    double crop_jitter = 0.0;  // 0 disables the seeded crop augmentation
    std::uint64_t crop_seed = 0;
};

struct TaylorConfig {
    std::size_t tau = 4;
    std::array<double, 2> scales{1.0, 1.0};
};

struct ClassifierConfig {
    std::string pooling = "mean,std,temporal8";
    double learning_rate = 0.5;
    std::size_t iterations = 400;
    double l2 = 1e-4;
    std::uint64_t seed = 7;
};

struct FusionConfig {
    std::string mode = "exhaustive";  // or "refine"
    double step = 0.05;
    double coarse_step = 0.1;
    double refine_step = 0.02;
    double refine_radius = 0.1;
    std::size_t max_grid_points = 200000;
};

struct RunConfig {
    HeatmapConfig heatmap;
    TaylorConfig taylor;
    ClassifierConfig classifier;
    FusionConfig fusion;

    void validate() const {
        KeypointSubset s{heatmap.subset};
        validate_subset(s);
        validate_edges(EdgeList{heatmap.edges}, heatmap.subset.size());
        HeatmapParams hp;
        hp.sigma = heatmap.sigma;
        hp.out_h = heatmap.out_h;
        hp.out_w = heatmap.out_w;
        hp.validate();
        if (heatmap.crop_pad < 0.0) throw ValidationError("crop_pad must be non-negative");
        if (heatmap.crop_jitter < 0.0) throw ValidationError("crop_jitter must be non-negative");
        TaylorParams tp;
        tp.tau = taylor.tau;
        tp.scales = taylor.scales;
        tp.validate();
        if (!(classifier.learning_rate >= 0.0))
            throw ValidationError("learning_rate must be non-negative");
        if (classifier.l2 < 0.0) throw ValidationError("l2 must be non-negative");
        if (classifier.pooling != "mean,std,temporal8")
            throw ValidationError("unknown pooling spec: " + classifier.pooling);
        if (fusion.mode != "exhaustive" && fusion.mode != "refine")
            throw ValidationError("fusion mode must be exhaustive or refine");
        for (double st : {fusion.step, fusion.coarse_step, fusion.refine_step})
            if (!(st > 0.0) || st > 1.0)
                throw ValidationError("fusion steps must lie in (0,1]");
        if (!(fusion.refine_radius > 0.0))
            throw ValidationError("refine_radius must be positive");
        if (fusion.max_grid_points == 0)
            throw ValidationError("max_grid_points must be positive");
    }

    HeatmapParams heatmap_params() const {
        HeatmapParams p;
        p.sigma = heatmap.sigma;
        p.out_h = heatmap.out_h;
        p.out_w = heatmap.out_w;
        p.truncate_3sigma = heatmap.truncate_3sigma;
        return p;
    }

    TaylorParams taylor_params() const {
        TaylorParams p;
        p.tau = taylor.tau;
        p.scales = taylor.scales;
        return p;
    }
};

}  // namespace mmg
