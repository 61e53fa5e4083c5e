// Renders a joint and a limb heatmap for a two-keypoint skeleton and dumps
// both as ascii art. Shows the coordinate convention: pixel (x, y) samples
// the continuous point (x + 0.5, y + 0.5).

#include <cstdio>

#include <mmg/mmg.hpp>

namespace {

void draw(const mmg::VideoTensor& v, std::size_t t, std::size_t c) {
    static const char ramp[] = " .:-=+*#%@";
    for (std::size_t y = 0; y < v.height; ++y) {
        for (std::size_t x = 0; x < v.width; ++x) {
            const double val = v.at(t, y, x, c);
            std::putchar(ramp[static_cast<int>(val * 9.999)]);
        }
        std::putchar('\n');
    }
}

}  // namespace

int main() {
    mmg::SkeletonSequence s;
    s.keypoint_count = 2;
    s.frames = {{{3.5, 8.5, 1.0}, {12.5, 8.5, 0.8}}};

    mmg::HeatmapParams params;
    params.out_h = 16;
    params.out_w = 16;
    params.sigma = 1.2;

    const mmg::HeatmapVolume joints = mmg::joint_heatmap_volume(s, params);
    std::printf("joint channel 0 (conf 1.0):\n");
    draw(joints.data, 0, 0);
    std::printf("\njoint channel 1 (conf 0.8):\n");
    draw(joints.data, 0, 1);

    mmg::EdgeList edges;
    edges.edges = {{0, 1}};
    const mmg::HeatmapVolume limbs = mmg::limb_heatmap_volume(s, edges, params);
    std::printf("\nlimb 0-1 (weight min(1.0, 0.8) = 0.8):\n");
    draw(limbs.data, 0, 0);
    return 0;
}
